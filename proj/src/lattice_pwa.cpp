#include "latmpc/lattice_pwa.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace latmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void check_lattice(const LatticePWA& f) {
  if (f.input_dim < 1) throw std::invalid_argument("lattice input_dim must be >= 1");
  if (f.literals.empty() || f.terms.empty()) {
    throw std::invalid_argument("lattice needs at least one literal and one term");
  }
  for (const auto& lit : f.literals) {
    if (lit.a.size() != f.input_dim) {
      throw std::invalid_argument("literal dimension does not match lattice input_dim");
    }
  }
  for (const auto& term : f.terms) {
    if (term.empty()) throw std::invalid_argument("lattice term is empty");
    for (int j : term) {
      if (j < 0 || j >= f.literal_count()) {
        throw std::invalid_argument("lattice term references literal out of range");
      }
    }
  }
}

}  // namespace

int LatticePWA::reference_count() const {
  int n = 0;
  for (const auto& t : terms) n += static_cast<int>(t.size());
  return n;
}

double evaluate(const LatticePWA& f, const Eigen::Ref<const VecX>& x) {
  if (x.size() != f.input_dim) {
    throw std::invalid_argument("evaluate: point dimension does not match lattice");
  }
  if (f.terms.empty()) throw std::invalid_argument("evaluate: lattice has no terms");
  double best = -kInf;
  for (const auto& term : f.terms) {
    double m = kInf;
    for (int j : term) {
      const double v = f.literals[j](x);
      if (v < m) m = v;
    }
    if (m > best) best = m;
  }
  return best;
}

LatticePWA construct_from_samples(const std::vector<LabeledSample>& samples,
                                  double dedup_tol) {
  if (samples.empty()) {
    throw std::invalid_argument("construct_from_samples: empty sample list");
  }
  const Eigen::Index dim = samples.front().point.size();
  if (dim < 1) throw std::invalid_argument("construct_from_samples: zero-dimensional samples");

  LatticePWA f;
  f.input_dim = static_cast<int>(dim);

  // Deduplicate active pieces into the literal list.
  std::vector<int> active_idx(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    const LabeledSample& s = samples[i];
    if (s.point.size() != dim || s.active.a.size() != dim) {
      throw std::invalid_argument("construct_from_samples: inconsistent sample dimensions");
    }
    int found = -1;
    for (int j = 0; j < f.literal_count(); ++j) {
      const AffineFunction& lit = f.literals[j];
      if ((lit.a - s.active.a).lpNorm<Eigen::Infinity>() <= dedup_tol &&
          std::abs(lit.c - s.active.c) <= dedup_tol) {
        found = j;
        break;
      }
    }
    if (found < 0) {
      found = f.literal_count();
      f.literals.push_back(s.active);
    }
    active_idx[i] = found;
  }

  // One term per sample: all literals that do not cut below the active piece
  // at the sample point.
  f.terms.reserve(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    const VecX& x = samples[i].point;
    const double act = f.literals[active_idx[i]](x);
    std::vector<int> term;
    for (int j = 0; j < f.literal_count(); ++j) {
      if (f.literals[j](x) >= act) term.push_back(j);
    }
    f.terms.push_back(std::move(term));
  }
  return f;
}

int count_sample_mismatches(const LatticePWA& f,
                            const std::vector<LabeledSample>& samples,
                            double tol) {
  int n = 0;
  for (const auto& s : samples) {
    if (std::abs(evaluate(f, s.point) - s.value) > tol) ++n;
  }
  return n;
}

LatticePWA simplify(const LatticePWA& f, const std::vector<VecX>& validation_points) {
  check_lattice(f);
  if (validation_points.empty()) {
    throw std::invalid_argument("simplify needs at least one validation point");
  }
  for (const auto& x : validation_points) {
    if (x.size() != f.input_dim) {
      throw std::invalid_argument("simplify: validation point dimension mismatch");
    }
  }

  const int n_pts = static_cast<int>(validation_points.size());
  const int n_lit = f.literal_count();

  // Literal values at every validation point.
  MatX lit_val(n_lit, n_pts);
  for (int l = 0; l < n_lit; ++l) {
    for (int p = 0; p < n_pts; ++p) {
      lit_val(l, p) = f.literals[l](validation_points[p]);
    }
  }

  // Step 1: canonicalize terms and merge exact duplicates.
  std::vector<std::vector<int>> terms;
  for (const auto& t : f.terms) {
    std::vector<int> s(t);
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    if (std::find(terms.begin(), terms.end(), s) == terms.end()) {
      terms.push_back(std::move(s));
    }
  }
  const int n_terms = static_cast<int>(terms.size());

  auto term_min = [&](const std::vector<int>& term, int p) {
    double m = kInf;
    for (int j : term) m = std::min(m, lit_val(j, p));
    return m;
  };

  MatX tv(n_terms, n_pts);
  for (int t = 0; t < n_terms; ++t) {
    for (int p = 0; p < n_pts; ++p) tv(t, p) = term_min(terms[t], p);
  }

  // Envelope value and number of kept terms attaining it, per point.
  VecX env(n_pts);
  std::vector<int> attain(n_pts);
  for (int p = 0; p < n_pts; ++p) {
    env(p) = tv.col(p).maxCoeff();
    int c = 0;
    for (int t = 0; t < n_terms; ++t) {
      if (tv(t, p) == env(p)) ++c;
    }
    attain[p] = c;
  }

  std::vector<char> kept(n_terms, 1);
  int kept_count = n_terms;

  // Step 2: drop terms dominated everywhere by the remaining ones. Removing a
  // term never enables another removal (it only reduces attain counts), so a
  // single sweep reaches the fixpoint.
  for (int t = 0; t < n_terms && kept_count > 1; ++t) {
    bool removable = true;
    for (int p = 0; p < n_pts; ++p) {
      if (tv(t, p) == env(p) && attain[p] == 1) {
        removable = false;
        break;
      }
    }
    if (!removable) continue;
    kept[t] = 0;
    --kept_count;
    for (int p = 0; p < n_pts; ++p) {
      if (tv(t, p) == env(p)) --attain[p];
    }
  }

  // Step 3: drop literals from a term when the overall evaluation provably
  // stays unchanged at every validation point. Raising the term's min is fine
  // where the envelope is held by another term, but where this term uniquely
  // attains the envelope its value must stay put.
  VecX tv2(n_pts);
  for (int t = 0; t < n_terms; ++t) {
    if (!kept[t]) continue;
    bool again = true;
    while (again && terms[t].size() > 1) {
      again = false;
      for (size_t idx = 0; idx < terms[t].size(); ++idx) {
        for (int p = 0; p < n_pts; ++p) {
          double m = kInf;
          for (size_t k = 0; k < terms[t].size(); ++k) {
            if (k == idx) continue;
            m = std::min(m, lit_val(terms[t][k], p));
          }
          tv2(p) = m;
        }
        bool ok = true;
        for (int p = 0; p < n_pts; ++p) {
          const bool unique_peak = tv(t, p) == env(p) && attain[p] == 1;
          if (unique_peak ? tv2(p) != env(p) : tv2(p) > env(p)) {
            ok = false;
            break;
          }
        }
        if (!ok) continue;
        for (int p = 0; p < n_pts; ++p) {
          if (tv2(p) == env(p) && tv(t, p) != env(p)) ++attain[p];
          tv(t, p) = tv2(p);
        }
        terms[t].erase(terms[t].begin() + static_cast<std::ptrdiff_t>(idx));
        again = true;
        break;
      }
    }
  }

  // Step 4: rebuild with only referenced literals.
  LatticePWA out;
  out.input_dim = f.input_dim;
  std::vector<int> lit_map(n_lit, -1);
  for (int t = 0; t < n_terms; ++t) {
    if (!kept[t]) continue;
    std::vector<int> term;
    term.reserve(terms[t].size());
    for (int j : terms[t]) {
      if (lit_map[j] < 0) {
        lit_map[j] = out.literal_count();
        out.literals.push_back(f.literals[j]);
      }
      term.push_back(lit_map[j]);
    }
    std::sort(term.begin(), term.end());
    out.terms.push_back(std::move(term));
  }
  return out;
}

ErrorBoundReport certify_error(const std::function<VecX(const VecX&)>& f_true,
                               const std::vector<LatticePWA>& f_hat,
                               const std::vector<VecX>& probes,
                               const std::vector<VecX>& linearization_points) {
  if (f_hat.empty()) throw std::invalid_argument("certify_error: no approximation given");
  if (probes.empty()) throw std::invalid_argument("certify_error: no probe points");
  if (linearization_points.empty()) {
    throw std::invalid_argument("certify_error: no linearization points");
  }

  const int n_out = static_cast<int>(f_hat.size());
  const int n_pts = static_cast<int>(probes.size());

  MatX ft(n_out, n_pts), fh(n_out, n_pts);
  for (int p = 0; p < n_pts; ++p) {
    const VecX v = f_true(probes[p]);
    if (v.size() != n_out) {
      throw std::invalid_argument("certify_error: f_true output dimension mismatch");
    }
    ft.col(p) = v;
    for (int o = 0; o < n_out; ++o) fh(o, p) = evaluate(f_hat[o], probes[p]);
  }

  ErrorBoundReport rep;
  for (int p = 0; p < n_pts; ++p) {
    double dmin = kInf;
    for (const auto& c : linearization_points) {
      dmin = std::min(dmin, (probes[p] - c).norm());
    }
    rep.sigma = std::max(rep.sigma, dmin);
  }

  double l_true = 0.0, l_hat = 0.0;
  for (int i = 0; i < n_pts; ++i) {
    for (int j = i + 1; j < n_pts; ++j) {
      const double d = (probes[i] - probes[j]).norm();
      if (d < 1e-12) continue;
      l_true = std::max(l_true, (ft.col(i) - ft.col(j)).norm() / d);
      l_hat = std::max(l_hat, (fh.col(i) - fh.col(j)).norm() / d);
    }
  }
  rep.l_estimate = l_true + l_hat;

  for (int p = 0; p < n_pts; ++p) {
    rep.max_observed_error = std::max(rep.max_observed_error, (ft.col(p) - fh.col(p)).norm());
  }
  return rep;
}

void write_lattice(std::ostream& os, const LatticePWA& f) {
  check_lattice(f);
  os << "lattice 1\n";
  os << "dim " << f.input_dim << "\n";
  os << "literals " << f.literal_count() << "\n";
  os << "terms " << f.term_count() << "\n";
  for (const auto& lit : f.literals) {
    for (int i = 0; i < f.input_dim; ++i) os << fmt(lit.a(i)) << ' ';
    os << fmt(lit.c) << "\n";
  }
  for (const auto& term : f.terms) {
    os << term.size();
    for (int j : term) os << ' ' << j;
    os << "\n";
  }
  if (!os) throw std::runtime_error("write_lattice: stream write failed");
}

LatticePWA read_lattice(std::istream& is) {
  auto fail = [](const std::string& what) -> void {
    throw std::runtime_error("read_lattice: malformed input (" + what + ")");
  };

  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "lattice" || version != 1) fail("header");

  LatticePWA f;
  int n_lit = 0, n_terms = 0;
  if (!(is >> word >> f.input_dim) || word != "dim" || f.input_dim < 1) fail("dim");
  if (!(is >> word >> n_lit) || word != "literals" || n_lit < 1) fail("literal count");
  if (!(is >> word >> n_terms) || word != "terms" || n_terms < 1) fail("term count");

  f.literals.resize(n_lit);
  for (auto& lit : f.literals) {
    lit.a.resize(f.input_dim);
    for (int i = 0; i < f.input_dim; ++i) {
      if (!(is >> lit.a(i))) fail("literal coefficients");
    }
    if (!(is >> lit.c)) fail("literal offset");
  }

  f.terms.resize(n_terms);
  for (auto& term : f.terms) {
    int count = 0;
    if (!(is >> count) || count < 1) fail("term size");
    term.resize(count);
    for (int& j : term) {
      if (!(is >> j) || j < 0 || j >= n_lit) fail("term literal index");
    }
  }
  return f;
}

}  // namespace latmpc
