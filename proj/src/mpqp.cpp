#include "latmpc/mpqp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "latmpc/errors.hpp"

namespace latmpc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

MatX gather_rows(const MatX& m, const std::vector<int>& rows) {
  MatX out(static_cast<Eigen::Index>(rows.size()), m.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(rows[i]);
  return out;
}

VecX gather(const VecX& v, const std::vector<int>& rows) {
  VecX out(static_cast<Eigen::Index>(rows.size()));
  for (size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(rows[i]);
  return out;
}

}  // namespace

MpQpProblem condense(const LinearMpcSpec& spec) {
  const int n_x = 3;
  const int n_u = 2;
  const int horizon = spec.horizon;
  if (horizon < 1) throw BuildError("condense: horizon must be >= 1");
  if (static_cast<int>(spec.reference.size()) != horizon) {
    std::ostringstream os;
    os << "condense: reference has " << spec.reference.size() << " pairs, expected "
       << horizon;
    throw BuildError(os.str());
  }
  if (!(spec.model.period > 0.0)) throw BuildError("condense: model period must be positive");
  if (((spec.x_max - spec.x_min).array() <= 0.0).any() ||
      ((spec.u_max - spec.u_min).array() <= 0.0).any()) {
    throw BuildError("condense: box bounds must satisfy min < max");
  }
  {
    Eigen::SelfAdjointEigenSolver<Mat3> qe(spec.Q);
    if (qe.eigenvalues().minCoeff() < -1e-12) {
      throw BuildError("condense: Q must be positive semidefinite");
    }
    Eigen::LLT<Mat2> rl(spec.R);
    if (rl.info() != Eigen::Success) {
      throw BuildError("condense: R must be positive definite");
    }
  }

  const int n_U = n_u * horizon;       // stacked inputs u_0..u_{N-1}
  const int n_X = n_x * (horizon - 1); // predicted states x_1..x_{N-1}

  const Mat3& A = spec.model.A;
  const Mat32& B = spec.model.B;
  const Vec3& b = spec.model.b;

  // Prediction:  X = sx x0 + su U + sb  for the stacked predicted states.
  MatX sx = MatX::Zero(n_X, n_x);
  MatX su = MatX::Zero(n_X, n_U);
  VecX sb = VecX::Zero(n_X);
  {
    for (int k = 1; k < horizon; ++k) {
      // x_k = A x_{k-1} + B u_{k-1} + b
      if (k == 1) {
        sx.block(0, 0, n_x, n_x) = A;
        su.block(0, 0, n_x, n_u) = B;
        sb.segment(0, n_x) = b;
      } else {
        const int r = n_x * (k - 1);
        const int rp = n_x * (k - 2);
        sx.block(r, 0, n_x, n_x) = A * sx.block(rp, 0, n_x, n_x);
        su.block(r, 0, n_x, n_U) = A * su.block(rp, 0, n_x, n_U);
        su.block(r, n_u * (k - 1), n_x, n_u) = B;
        sb.segment(r, n_x) = A * sb.segment(rp, n_x) + b;
      }
    }
  }

  // Stacked references and weights.
  VecX x_ref_tail(n_X), u_ref(n_U);
  for (int k = 1; k < horizon; ++k) x_ref_tail.segment(n_x * (k - 1), n_x) = spec.reference[k].first;
  for (int k = 0; k < horizon; ++k) u_ref.segment(n_u * k, n_u) = spec.reference[k].second;
  const Vec3 x_ref0 = spec.reference[0].first;

  MatX qb = MatX::Zero(n_X, n_X);
  for (int k = 0; k < horizon - 1; ++k) qb.block(n_x * k, n_x * k, n_x, n_x) = spec.Q;
  MatX rb = MatX::Zero(n_U, n_U);
  for (int k = 0; k < horizon; ++k) rb.block(n_u * k, n_u * k, n_u, n_u) = spec.R;

  MpQpProblem qp;
  qp.n_x = n_x;
  qp.n_u = n_u;
  qp.horizon = horizon;

  const MatX qb_su = qb * su;
  qp.H = 2.0 * (su.transpose() * qb_su + rb);
  qp.F = 2.0 * (sx.transpose() * qb_su);
  qp.c_f = 2.0 * (su.transpose() * (qb * (sb - x_ref_tail)) - rb * u_ref);

  // Tracking-cost terms that do not depend on U, kept so reported objectives
  // equal the full cost including the measured-state stage.
  qp.cost_p0 = sx.transpose() * qb * sx + spec.Q;
  qp.cost_p1 = 2.0 * (sx.transpose() * (qb * (sb - x_ref_tail))) - 2.0 * (spec.Q * x_ref0);
  qp.cost_p2 = (sb - x_ref_tail).dot(qb * (sb - x_ref_tail)) + u_ref.dot(rb * u_ref) +
               x_ref0.dot(spec.Q * x_ref0);

  // Constraint rows: input upper, input lower, state upper, state lower.
  const int m = 2 * n_U + 2 * n_X;
  qp.G = MatX::Zero(m, n_U);
  qp.w0 = VecX::Zero(m);
  qp.E = MatX::Zero(m, n_x);

  VecX u_lo(n_U), u_hi(n_U);
  for (int k = 0; k < horizon; ++k) {
    u_lo.segment(n_u * k, n_u) = spec.u_min;
    u_hi.segment(n_u * k, n_u) = spec.u_max;
  }
  VecX x_lo(n_X), x_hi(n_X);
  for (int k = 0; k < horizon - 1; ++k) {
    x_lo.segment(n_x * k, n_x) = spec.x_min;
    x_hi.segment(n_x * k, n_x) = spec.x_max;
  }

  qp.G.block(0, 0, n_U, n_U) = MatX::Identity(n_U, n_U);
  qp.w0.segment(0, n_U) = u_hi;
  qp.G.block(n_U, 0, n_U, n_U) = -MatX::Identity(n_U, n_U);
  qp.w0.segment(n_U, n_U) = -u_lo;
  qp.G.block(2 * n_U, 0, n_X, n_U) = su;
  qp.w0.segment(2 * n_U, n_X) = x_hi - sb;
  qp.E.block(2 * n_U, 0, n_X, n_x) = -sx;
  qp.G.block(2 * n_U + n_X, 0, n_X, n_U) = -su;
  qp.w0.segment(2 * n_U + n_X, n_X) = sb - x_lo;
  qp.E.block(2 * n_U + n_X, 0, n_X, n_x) = sx;

  qp.h_llt.compute(qp.H);
  if (qp.h_llt.info() != Eigen::Success) {
    throw BuildError("condense: condensed Hessian is not positive definite");
  }
  qp.h_inv_ft = qp.h_llt.solve(qp.F.transpose());
  qp.h_inv_cf = qp.h_llt.solve(qp.c_f);

  qp.omega = qp.w0 + qp.G * qp.h_inv_cf;
  qp.S = qp.E + qp.G * qp.h_inv_ft;
  return qp;
}

namespace detail {

AsqpResult solve_asqp(const Eigen::LLT<MatX>& h_llt, const MatX& G, const VecX& w,
                      const VecX& g, const std::vector<int>* warm_start,
                      int max_iterations) {
  const int n = static_cast<int>(G.cols());
  const int m = static_cast<int>(G.rows());
  if (w.size() != m) throw std::invalid_argument("solve_asqp: w size mismatch");
  if (g.size() != n) throw std::invalid_argument("solve_asqp: g size mismatch");
  if (max_iterations <= 0) max_iterations = 50 * (m + n) + 100;

  const double feas_tol = 1e-10 * std::max(1.0, m > 0 ? w.cwiseAbs().maxCoeff() : 1.0);
  const VecX z_free = -h_llt.solve(g);  // unconstrained optimum

  AsqpResult res;

  auto finish = [&](VecX z, std::vector<int> active, VecX u, int iters) {
    // Re-solve the equality-constrained problem on the final active set for
    // clean residuals, keeping the iterated values if the polish misbehaves.
    if (!active.empty()) {
      const MatX ga = gather_rows(G, active);
      const MatX hi_gat = h_llt.solve(ga.transpose());
      const Eigen::LLT<MatX> m_llt(ga * hi_gat);
      if (m_llt.info() == Eigen::Success) {
        const VecX lam = -m_llt.solve(gather(w, active) - ga * z_free);
        const VecX z2 = z_free - hi_gat * lam;
        const double viol = m > 0 ? (G * z2 - w).maxCoeff() : 0.0;
        if (lam.minCoeff() >= -1e-10 && viol <= 10.0 * feas_tol) {
          z = z2;
          u = lam;
        }
      }
    }
    // Keep only strictly positive multipliers, ascending by row index.
    std::vector<std::pair<int, double>> act;
    const double act_tol =
        1e-10 * std::max(1.0, u.size() > 0 ? u.cwiseAbs().maxCoeff() : 1.0);
    for (size_t i = 0; i < active.size(); ++i) {
      if (u(static_cast<Eigen::Index>(i)) > act_tol) act.push_back({active[i], u(static_cast<Eigen::Index>(i))});
    }
    std::sort(act.begin(), act.end());
    res.status = QpStatus::optimal;
    res.z = std::move(z);
    res.active.clear();
    res.lambda.resize(static_cast<Eigen::Index>(act.size()));
    for (size_t i = 0; i < act.size(); ++i) {
      res.active.push_back(act[i].first);
      res.lambda(static_cast<Eigen::Index>(i)) = act[i].second;
    }
    res.iterations = iters;
    return res;
  };

  // Warm start: trust the hinted active set only after verifying its
  // equality-constrained solution is primal and dual feasible.
  if (warm_start && !warm_start->empty() && static_cast<int>(warm_start->size()) <= n) {
    std::vector<int> hint(*warm_start);
    std::sort(hint.begin(), hint.end());
    hint.erase(std::unique(hint.begin(), hint.end()), hint.end());
    bool in_range = true;
    for (int j : hint) in_range = in_range && j >= 0 && j < m;
    if (in_range) {
      const MatX ga = gather_rows(G, hint);
      const MatX hi_gat = h_llt.solve(ga.transpose());
      const Eigen::LLT<MatX> m_llt(ga * hi_gat);
      if (m_llt.info() == Eigen::Success) {
        const VecX lam = -m_llt.solve(gather(w, hint) - ga * z_free);
        const VecX z = z_free - hi_gat * lam;
        const double viol = m > 0 ? (G * z - w).maxCoeff() : 0.0;
        if (lam.minCoeff() >= -1e-12 && viol <= feas_tol) {
          return finish(z, hint, lam, 0);
        }
      }
    }
  }

  // Cold start at the unconstrained optimum (dual feasible by construction).
  VecX z = z_free;
  std::vector<int> active;
  VecX u(0);
  int iters = 0;

  auto iteration_failure = [&](double viol) {
    std::ostringstream os;
    os << "solve_asqp: iteration limit exceeded (iterations=" << iters
       << ", active set size=" << active.size() << ", max violation=" << viol << ")";
    throw std::runtime_error(os.str());
  };

  while (true) {
    // Most violated constraint; active rows sit at equality and are skipped.
    int p = -1;
    double viol = feas_tol;
    {
      const VecX s = G * z - w;
      for (int j = 0; j < m; ++j) {
        if (std::find(active.begin(), active.end(), j) != active.end()) continue;
        if (s(j) > viol) {
          viol = s(j);
          p = j;
        }
      }
      if (p < 0) break;  // primal feasible -> optimal
      if (++iters > max_iterations) iteration_failure(viol);
    }

    const VecX np = G.row(p).transpose();
    double sp = np.dot(z) - w(p);
    double up = 0.0;

    while (true) {
      if (++iters > max_iterations) iteration_failure(sp);
      const int na = static_cast<int>(active.size());

      const VecX d = h_llt.solve(np);
      VecX r(0), zdir;
      MatX hi_gat;
      if (na > 0) {
        const MatX ga = gather_rows(G, active);
        hi_gat = h_llt.solve(ga.transpose());
        const Eigen::LLT<MatX> m_llt(ga * hi_gat);
        if (m_llt.info() != Eigen::Success) {
          throw std::runtime_error("solve_asqp: active-set system lost definiteness");
        }
        r = m_llt.solve(ga * d);
        zdir = d - hi_gat * r;
      } else {
        zdir = d;
      }

      // Blocking active constraint along the dual step, if any.
      double t1 = kInf;
      int block = -1;
      for (int i = 0; i < na; ++i) {
        if (r(i) > 1e-14) {
          const double t = u(i) / r(i);
          if (t < t1) {
            t1 = t;
            block = i;
          }
        }
      }

      const double denom = np.dot(zdir);
      if (denom <= 1e-14 * std::max(1.0, np.squaredNorm())) {
        // The violated constraint's normal lies in the span of the active
        // ones: without a blocking multiplier the dual is unbounded, i.e. the
        // primal problem is infeasible.
        if (block < 0) {
          res.status = QpStatus::infeasible;
          res.iterations = iters;
          return res;
        }
        for (int i = 0; i < na; ++i) u(i) -= t1 * r(i);
        up += t1;
        active.erase(active.begin() + block);
        VecX u2(na - 1);
        for (int i = 0, k = 0; i < na; ++i) {
          if (i != block) u2(k++) = u(i);
        }
        u = u2;
        continue;
      }

      const double t2 = sp / denom;  // step that brings constraint p to equality
      const double t = std::min(t1, t2);

      z -= t * zdir;
      for (int i = 0; i < na; ++i) u(i) -= t * r(i);
      up += t;
      sp -= t * denom;

      if (t2 <= t1) {
        // Constraint p becomes active with multiplier up > 0.
        active.push_back(p);
        VecX u2(na + 1);
        u2.head(na) = u;
        u2(na) = up;
        u = u2;
        break;
      }
      // Blocked: drop the blocking constraint and keep working on p.
      active.erase(active.begin() + block);
      VecX u2(na - 1);
      for (int i = 0, k = 0; i < na; ++i) {
        if (i != block) u2(k++) = u(i);
      }
      u = u2;
    }
  }

  return finish(z, active, u, iters);
}

}  // namespace detail

QpSolution solve_qp(const MpQpProblem& qp, const Eigen::Ref<const VecX>& x,
                    const std::vector<int>* warm_start) {
  if (x.size() != qp.n_x) throw std::invalid_argument("solve_qp: parameter dimension mismatch");

  const VecX w = qp.omega + qp.S * x;
  const VecX g = VecX::Zero(qp.n_inputs_total());
  detail::AsqpResult r = detail::solve_asqp(qp.h_llt, qp.G, w, g, warm_start);

  QpSolution sol;
  sol.status = r.status;
  sol.iterations = r.iterations;
  if (r.status != QpStatus::optimal) return sol;

  sol.z = std::move(r.z);
  sol.active_set = std::move(r.active);
  sol.lambda = std::move(r.lambda);
  sol.U = sol.z - qp.h_inv_ft * x - qp.h_inv_cf;
  sol.objective = 0.5 * sol.U.dot(qp.H * sol.U) + (qp.F.transpose() * x + qp.c_f).dot(sol.U) +
                  x.dot(qp.cost_p0 * x) + qp.cost_p1.dot(x) + qp.cost_p2;
  return sol;
}

double KktResiduals::max_residual() const {
  return std::max({stationarity, primal, active_equality, dual_nonneg, complementarity});
}

KktResiduals kkt_residuals(const MpQpProblem& qp, const Eigen::Ref<const VecX>& x,
                           const QpSolution& sol) {
  if (sol.status != QpStatus::optimal) {
    throw std::invalid_argument("kkt_residuals: solution is not optimal");
  }
  const VecX w = qp.omega + qp.S * x;
  VecX lam_full = VecX::Zero(qp.n_constraints());
  for (size_t i = 0; i < sol.active_set.size(); ++i) {
    lam_full(sol.active_set[i]) = sol.lambda(static_cast<Eigen::Index>(i));
  }

  KktResiduals res;
  res.stationarity = (qp.H * sol.z + qp.G.transpose() * lam_full).lpNorm<Eigen::Infinity>();
  const VecX slack = qp.G * sol.z - w;
  res.primal = std::max(0.0, slack.size() > 0 ? slack.maxCoeff() : 0.0);
  double eq = 0.0, comp = 0.0;
  for (size_t i = 0; i < sol.active_set.size(); ++i) {
    eq = std::max(eq, std::abs(slack(sol.active_set[i])));
  }
  for (int j = 0; j < qp.n_constraints(); ++j) {
    comp = std::max(comp, std::abs(lam_full(j) * slack(j)));
  }
  res.active_equality = eq;
  res.dual_nonneg = sol.lambda.size() > 0 ? std::max(0.0, -sol.lambda.minCoeff()) : 0.0;
  res.complementarity = comp;
  return res;
}

ExplicitLaw explicit_law(const MpQpProblem& qp, const QpSolution& sol,
                         const Eigen::Ref<const VecX>& x_seed) {
  if (sol.status != QpStatus::optimal) {
    throw std::invalid_argument("explicit_law: solution is not optimal");
  }
  if (x_seed.size() != qp.n_x) {
    throw std::invalid_argument("explicit_law: seed dimension mismatch");
  }
  const int n_U = qp.n_inputs_total();

  // Repair rank deficiency among the active constraint normals by keeping an
  // independent subset (rank-revealing QR on the normals).
  std::vector<int> active = sol.active_set;
  if (!active.empty()) {
    MatX gat(n_U, static_cast<Eigen::Index>(active.size()));
    for (size_t i = 0; i < active.size(); ++i) {
      gat.col(static_cast<Eigen::Index>(i)) = qp.G.row(active[i]).transpose();
    }
    Eigen::ColPivHouseholderQR<MatX> qr(gat);
    qr.setThreshold(1e-10);
    const int rank = static_cast<int>(qr.rank());
    if (rank < static_cast<int>(active.size())) {
      std::vector<int> keep;
      const auto& perm = qr.colsPermutation().indices();
      for (int i = 0; i < rank; ++i) keep.push_back(active[perm(i)]);
      std::sort(keep.begin(), keep.end());
      active = std::move(keep);
    }
  }

  ExplicitLaw law;
  law.active_set = active;

  MatX lam_gain(0, qp.n_x);
  VecX lam_const(0);
  MatX z_gain = MatX::Zero(n_U, qp.n_x);
  VecX z_const = VecX::Zero(n_U);
  if (!active.empty()) {
    const MatX ga = gather_rows(qp.G, active);
    const MatX hi_gat = qp.h_llt.solve(ga.transpose());
    const Eigen::LLT<MatX> m_llt(ga * hi_gat);
    if (m_llt.info() != Eigen::Success) {
      throw std::runtime_error("explicit_law: active normals degenerate after repair");
    }
    const MatX s_a = gather_rows(qp.S, active);
    const VecX omega_a = gather(qp.omega, active);
    lam_gain = -m_llt.solve(s_a);
    lam_const = -m_llt.solve(omega_a);
    z_gain = -hi_gat * lam_gain;
    z_const = -hi_gat * lam_const;
  }

  law.k_gain = z_gain - qp.h_inv_ft;
  law.k_const = z_const - qp.h_inv_cf;

  // Region: inactive rows must stay satisfied, multipliers must stay >= 0.
  std::vector<int> inactive;
  for (int j = 0; j < qp.n_constraints(); ++j) {
    if (!std::binary_search(active.begin(), active.end(), j)) inactive.push_back(j);
  }
  const int rows = static_cast<int>(inactive.size() + active.size());
  MatX p(rows, qp.n_x);
  VecX q(rows);
  int r = 0;
  for (int j : inactive) {
    p.row(r) = qp.G.row(j) * z_gain - qp.S.row(j);
    q(r) = qp.omega(j) - qp.G.row(j).dot(z_const);
    ++r;
  }
  for (size_t i = 0; i < active.size(); ++i) {
    p.row(r) = -lam_gain.row(static_cast<Eigen::Index>(i));
    q(r) = lam_const(static_cast<Eigen::Index>(i));
    ++r;
  }

  // Normalize rows; a zero row encodes a condition independent of x and is
  // dropped when trivially true.
  MatX pn(rows, qp.n_x);
  VecX qn(rows);
  int kept = 0;
  for (int i = 0; i < rows; ++i) {
    const double nrm = p.row(i).norm();
    if (nrm <= 1e-14) {
      if (q(i) < -1e-9) {
        throw std::runtime_error("explicit_law: derived region is empty");
      }
      continue;
    }
    pn.row(kept) = p.row(i) / nrm;
    qn(kept) = q(i) / nrm;
    ++kept;
  }
  law.p = pn.topRows(kept);
  law.q = qn.head(kept);

  if (kept > 0 && (law.p * x_seed - law.q).maxCoeff() > 1e-7) {
    throw std::runtime_error("explicit_law: seed state violates its own region");
  }
  return law;
}

AffineControlLaw first_control(const MpQpProblem& qp, const ExplicitLaw& law) {
  if (law.k_gain.rows() < qp.n_u) {
    throw std::invalid_argument("first_control: law does not cover one input");
  }
  AffineControlLaw out;
  out.gain = law.k_gain.topRows(qp.n_u);
  out.offset = law.k_const.head(qp.n_u);
  return out;
}

std::vector<ExplicitLaw> enumerate_regions(const MpQpProblem& qp,
                                           const std::vector<VecX>& seeds) {
  std::vector<ExplicitLaw> laws;
  std::map<std::vector<int>, size_t> seen;
  for (const auto& seed : seeds) {
    const QpSolution sol = solve_qp(qp, seed);
    if (sol.status != QpStatus::optimal) continue;
    ExplicitLaw law = explicit_law(qp, sol, seed);
    if (seen.emplace(law.active_set, laws.size()).second) {
      laws.push_back(std::move(law));
    }
  }
  return laws;
}

std::optional<VecX> sequential_search(const std::vector<ExplicitLaw>& laws,
                                      const Eigen::Ref<const VecX>& x, double tol) {
  for (const auto& law : laws) {
    if (law.p.rows() > 0 && (law.p * x - law.q).maxCoeff() > tol) continue;
    return law.k_gain * x + law.k_const;
  }
  return std::nullopt;
}

void write_regions(std::ostream& os, const std::vector<ExplicitLaw>& laws) {
  os << "regions 1\n";
  os << "count " << laws.size() << "\n";
  for (const auto& law : laws) {
    os << "law " << law.k_gain.rows() << ' ' << law.k_gain.cols() << ' ' << law.p.rows()
       << ' ' << law.active_set.size() << "\n";
    for (size_t i = 0; i < law.active_set.size(); ++i) {
      os << (i ? " " : "") << law.active_set[i];
    }
    os << "\n";
    for (Eigen::Index i = 0; i < law.k_gain.rows(); ++i) {
      for (Eigen::Index j = 0; j < law.k_gain.cols(); ++j) os << fmt(law.k_gain(i, j)) << ' ';
      os << fmt(law.k_const(i)) << "\n";
    }
    for (Eigen::Index i = 0; i < law.p.rows(); ++i) {
      for (Eigen::Index j = 0; j < law.p.cols(); ++j) os << fmt(law.p(i, j)) << ' ';
      os << fmt(law.q(i)) << "\n";
    }
  }
  if (!os) throw std::runtime_error("write_regions: stream write failed");
}

std::vector<ExplicitLaw> read_regions(std::istream& is) {
  auto fail = [](const std::string& what) -> void {
    throw std::runtime_error("read_regions: malformed input (" + what + ")");
  };
  std::string word;
  int version = 0;
  if (!(is >> word >> version) || word != "regions" || version != 1) fail("header");
  int count = 0;
  if (!(is >> word >> count) || word != "count" || count < 0) fail("count");

  std::vector<ExplicitLaw> laws;
  laws.reserve(count);
  for (int l = 0; l < count; ++l) {
    Eigen::Index nu = 0, nx = 0, nr = 0;
    size_t na = 0;
    if (!(is >> word >> nu >> nx >> nr >> na) || word != "law" || nu < 1 || nx < 1 || nr < 0) {
      fail("law header");
    }
    ExplicitLaw law;
    law.active_set.resize(na);
    for (auto& j : law.active_set) {
      if (!(is >> j) || j < 0) fail("active set");
    }
    law.k_gain.resize(nu, nx);
    law.k_const.resize(nu);
    for (Eigen::Index i = 0; i < nu; ++i) {
      for (Eigen::Index j = 0; j < nx; ++j) {
        if (!(is >> law.k_gain(i, j))) fail("gain row");
      }
      if (!(is >> law.k_const(i))) fail("gain offset");
    }
    law.p.resize(nr, nx);
    law.q.resize(nr);
    for (Eigen::Index i = 0; i < nr; ++i) {
      for (Eigen::Index j = 0; j < nx; ++j) {
        if (!(is >> law.p(i, j))) fail("region row");
      }
      if (!(is >> law.q(i))) fail("region offset");
    }
    laws.push_back(std::move(law));
  }
  return laws;
}

}  // namespace latmpc
