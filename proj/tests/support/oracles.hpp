#pragma once

// Independent reference implementations used only by tests. Everything here is
// deliberately written with different algorithms than the library (finite
// differences, first-order QP solves, exhaustive enumeration) so agreement is
// meaningful.

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "latmpc/kinematics.hpp"
#include "latmpc/lattice_pwa.hpp"
#include "latmpc/mpqp.hpp"
#include "latmpc/types.hpp"

namespace oracles {

using latmpc::Mat3;
using latmpc::Mat32;
using latmpc::MatX;
using latmpc::Vec2;
using latmpc::Vec3;
using latmpc::VecX;

// ---------------------------------------------------------------------------
// Finite-difference Jacobians of the continuous kinematics.

inline Mat3 fd_state_jacobian(const latmpc::State& s, const latmpc::Control& u,
                              const latmpc::RobotParams& p, double h = 1e-6) {
  Mat3 j;
  for (int i = 0; i < 3; ++i) {
    Vec3 xp = s.vec(), xm = s.vec();
    xp(i) += h;
    xm(i) -= h;
    j.col(i) = (latmpc::dynamics(latmpc::State::from_vec(xp), u, p) -
                latmpc::dynamics(latmpc::State::from_vec(xm), u, p)) /
               (2.0 * h);
  }
  return j;
}

inline Mat32 fd_control_jacobian(const latmpc::State& s, const latmpc::Control& u,
                                 const latmpc::RobotParams& p, double h = 1e-6) {
  Mat32 j;
  for (int i = 0; i < 2; ++i) {
    Vec2 up = u.vec(), um = u.vec();
    up(i) += h;
    um(i) -= h;
    j.col(i) = (latmpc::dynamics(s, latmpc::Control::from_vec(up), p) -
                latmpc::dynamics(s, latmpc::Control::from_vec(um), p)) /
               (2.0 * h);
  }
  return j;
}

// ---------------------------------------------------------------------------
// Naive max-min evaluation, written independently of latmpc::evaluate.

inline double naive_maxmin(const latmpc::LatticePWA& f, const VecX& x) {
  std::vector<double> term_values;
  for (const auto& term : f.terms) {
    std::vector<double> lits;
    for (int j : term) lits.push_back(f.literals[j].a.dot(x) + f.literals[j].c);
    double m = lits.front();
    for (double v : lits) m = std::min(m, v);
    term_values.push_back(m);
  }
  double best = term_values.front();
  for (double v : term_values) best = std::max(best, v);
  return best;
}

// ---------------------------------------------------------------------------
// Accelerated projected gradient on the dual of
//   min 1/2 z' H z + g' z   s.t.  G z <= w.
// First-order method: shares no machinery with the library's active-set solver.

struct PgResult {
  VecX z;
  VecX lambda;  // full multiplier vector, size m
  bool converged = false;
  int iterations = 0;
};

inline PgResult qp_dual_fista(const MatX& H, const MatX& G, const VecX& w, const VecX& g,
                              int max_iterations = 200000, double tol = 1e-10) {
  const int m = static_cast<int>(G.rows());
  Eigen::LLT<MatX> llt(H);
  PgResult res;
  if (m == 0) {
    res.z = -llt.solve(g);
    res.lambda = VecX(0);
    res.converged = true;
    return res;
  }

  const MatX hig = llt.solve(G.transpose());
  const MatX K = G * hig;            // dual Hessian
  const VecX q = G * llt.solve(g) + w;  // dual gradient: -(K y + q)

  // Step size from the largest eigenvalue of K (power iteration).
  VecX v = VecX::Ones(m).normalized();
  double lmax = 1.0;
  for (int i = 0; i < 200; ++i) {
    const VecX kv = K * v;
    const double n = kv.norm();
    if (n < 1e-300) break;
    lmax = n;
    v = kv / n;
  }
  const double step = 1.0 / std::max(lmax, 1e-12);
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());

  VecX lam = VecX::Zero(m), y = VecX::Zero(m);
  double t = 1.0;
  for (int it = 1; it <= max_iterations; ++it) {
    const VecX grad = -(K * y + q);
    VecX next = (y + step * grad).cwiseMax(0.0);
    const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = next + ((t - 1.0) / tn) * (next - lam);
    lam = std::move(next);
    t = tn;

    if (it % 50 == 0 || it == max_iterations) {
      const VecX z = -llt.solve(g + G.transpose() * lam);
      const VecX slack = G * z - w;
      const double viol = std::max(0.0, slack.maxCoeff());
      const double comp = (lam.array() * slack.array()).abs().maxCoeff();
      if (viol <= tol * scale && comp <= 10.0 * tol * scale) {
        res.z = z;
        res.lambda = lam;
        res.converged = true;
        res.iterations = it;
        return res;
      }
    }
  }
  res.z = -llt.solve(g + G.transpose() * lam);
  res.lambda = lam;
  res.iterations = max_iterations;
  return res;
}

// ---------------------------------------------------------------------------
// Worst KKT residual of a candidate solution of the same QP form.

inline double raw_kkt_residual(const MatX& H, const MatX& G, const VecX& w, const VecX& g,
                               const VecX& z, const std::vector<int>& active,
                               const VecX& lambda) {
  VecX lam_full = VecX::Zero(G.rows());
  for (size_t i = 0; i < active.size(); ++i) lam_full(active[i]) = lambda(static_cast<Eigen::Index>(i));
  double r = (H * z + g + G.transpose() * lam_full).lpNorm<Eigen::Infinity>();
  if (G.rows() > 0) {
    const VecX slack = G * z - w;
    r = std::max(r, std::max(0.0, slack.maxCoeff()));
    for (size_t i = 0; i < active.size(); ++i) r = std::max(r, std::abs(slack(active[i])));
    r = std::max(r, (lam_full.array() * slack.array()).abs().maxCoeff());
  }
  if (lambda.size() > 0) r = std::max(r, std::max(0.0, -lambda.minCoeff()));
  return r;
}

// ---------------------------------------------------------------------------
// Exhaustive active-set enumeration for small QPs (g = 0 form of the library's
// parametric problems):  min 1/2 z' H z  s.t.  G z <= w.

struct BruteResult {
  bool feasible = false;
  VecX z;
  std::vector<int> strict_active;  // rows with clearly positive multipliers
  double objective = std::numeric_limits<double>::infinity();
};

inline BruteResult qp_brute_force(const MatX& H, const MatX& G, const VecX& w) {
  const int m = static_cast<int>(G.rows());
  const int n = static_cast<int>(G.cols());
  if (m > 20) throw std::invalid_argument("qp_brute_force: too many constraints");
  Eigen::LLT<MatX> llt(H);

  BruteResult best;
  for (std::uint32_t mask = 0; mask < (1u << m); ++mask) {
    std::vector<int> subset;
    for (int j = 0; j < m; ++j) {
      if (mask & (1u << j)) subset.push_back(j);
    }
    if (static_cast<int>(subset.size()) > n) continue;

    VecX z, lam(subset.size());
    if (subset.empty()) {
      z = VecX::Zero(n);
    } else {
      MatX ga(subset.size(), n);
      VecX wa(subset.size());
      for (size_t i = 0; i < subset.size(); ++i) {
        ga.row(static_cast<Eigen::Index>(i)) = G.row(subset[i]);
        wa(static_cast<Eigen::Index>(i)) = w(subset[i]);
      }
      const MatX hi_gat = llt.solve(ga.transpose());
      const MatX M = ga * hi_gat;
      Eigen::FullPivLU<MatX> lu(M);
      if (!lu.isInvertible()) continue;
      lam = -lu.solve(wa);
      z = -hi_gat * lam;
      if (lam.minCoeff() < -1e-9) continue;
    }
    if (m > 0 && (G * z - w).maxCoeff() > 1e-9) continue;

    const double obj = 0.5 * z.dot(H * z);
    if (obj < best.objective - 1e-12 || !best.feasible) {
      if (!best.feasible || obj < best.objective - 1e-12) {
        best.feasible = true;
        best.objective = obj;
        best.z = z;
        best.strict_active.clear();
        for (size_t i = 0; i < subset.size(); ++i) {
          if (lam(static_cast<Eigen::Index>(i)) > 1e-8) best.strict_active.push_back(subset[i]);
        }
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------
// Model rollout cost of an input sequence, straight from the tracking problem
// definition (independent of the condensed matrices).

inline double rollout_cost(const latmpc::LinearMpcSpec& spec, const Vec3& x0, const VecX& U) {
  double cost = 0.0;
  Vec3 x = x0;
  for (int k = 0; k < spec.horizon; ++k) {
    const Vec3 dx = x - spec.reference[k].first;
    const Vec2 u = U.segment(2 * k, 2);
    const Vec2 du = u - spec.reference[k].second;
    cost += dx.dot(spec.Q * dx) + du.dot(spec.R * du);
    x = spec.model.A * x + spec.model.B * u + spec.model.b;
  }
  return cost;
}

// Deterministic scenario-free random QP instances for solver stress tests.
struct RandomQp {
  MatX H, G;
  VecX w, g;
};

inline RandomQp random_qp(std::mt19937_64& rng, bool with_duplicates) {
  std::uniform_int_distribution<int> nd(2, 8), md(1, 16);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = nd(rng);
  int m = md(rng);

  RandomQp qp;
  MatX a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = u(rng);
  }
  qp.H = a.transpose() * a + 0.1 * MatX::Identity(n, n);
  qp.G.resize(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) qp.G(i, j) = u(rng);
  }
  if (with_duplicates && m >= 2) {
    // Duplicate and scale a row: redundant constraints exercise degeneracy.
    qp.G.row(m - 1) = 2.0 * qp.G.row(0);
  }
  VecX z_feas(n);
  for (int i = 0; i < n; ++i) z_feas(i) = u(rng);
  qp.w.resize(m);
  for (int i = 0; i < m; ++i) qp.w(i) = qp.G.row(i).dot(z_feas) + 0.5 * (u(rng) + 1.0);
  if (with_duplicates && m >= 2) qp.w(m - 1) = 2.0 * qp.w(0);  // exactly parallel facet
  qp.g.resize(n);
  for (int i = 0; i < n; ++i) qp.g(i) = u(rng);
  return qp;
}

}  // namespace oracles
