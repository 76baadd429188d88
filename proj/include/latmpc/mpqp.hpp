#pragma once

#include <iosfwd>
#include <optional>
#include <vector>

#include "latmpc/kinematics.hpp"
#include "latmpc/types.hpp"

namespace latmpc {

// Finite-horizon tracking problem for one discrete affine model: quadratic
// stage costs on state and input deviations from a reference sequence, with
// box bounds on predicted states and inputs.
struct LinearMpcSpec {
  DiscreteAffineModel model;
  int horizon = 0;  // N >= 1
  Mat3 Q;           // state deviation weight, PSD diagonal in practice
  Mat2 R;           // input deviation weight, PD
  Vec3 x_min, x_max;
  Vec2 u_min, u_max;
  // N pairs (x_ref(k), u_ref(k)), k = 0..N-1; x_ref(0) pairs with the measured state.
  std::vector<std::pair<Vec3, Vec2>> reference;
};

// The tracking problem condensed to a QP in the stacked input sequence U,
// parameterized by the measured state x:
//   min_U  1/2 U' H U + (x' F + C_f') U + const(x)   s.t.  G U <= W + E x.
// The substitution z = U + H^{-1} (F' x + C_f') removes the parameter from the
// objective, turning the constraints into  G z <= omega + S x  with
//   omega = W + G H^{-1} C_f',   S = E + G H^{-1} F'.
// const(x) = x' P0 x + p1' x + p0 is kept so objectives report the true
// tracking cost. Constraint rows are ordered: input upper bounds (n_u N),
// input lower bounds (n_u N), state upper bounds (n_x (N-1)), state lower
// bounds (n_x (N-1)).
struct MpQpProblem {
  int n_x = 0;      // parameter (state) dimension
  int n_u = 0;      // input dimension
  int horizon = 0;  // N

  MatX H;    // n_U x n_U, positive definite
  MatX F;    // n_x x n_U
  VecX c_f;  // n_U
  MatX G;    // m x n_U
  VecX w0;   // m  (W)
  MatX E;    // m x n_x

  VecX omega;  // m
  MatX S;      // m x n_x

  Eigen::LLT<MatX> h_llt;  // cached factorization of H
  MatX h_inv_ft;           // H^{-1} F'
  VecX h_inv_cf;           // H^{-1} C_f'

  MatX cost_p0;  // n_x x n_x
  VecX cost_p1;  // n_x
  double cost_p2 = 0.0;

  int n_inputs_total() const { return n_u * horizon; }
  int n_constraints() const { return static_cast<int>(G.rows()); }
};

// Build the condensed QP from a tracking problem. Throws BuildError when the
// spec is inconsistent (dimension/horizon/weight problems, H not PD).
MpQpProblem condense(const LinearMpcSpec& spec);

enum class QpStatus { optimal, infeasible };

struct QpSolution {
  QpStatus status = QpStatus::infeasible;
  VecX U;                       // stacked optimal input sequence (empty if infeasible)
  VecX z;                       // optimum in substituted coordinates
  std::vector<int> active_set;  // strictly active constraint rows, ascending
  VecX lambda;                  // multipliers aligned with active_set, all > 0
  double objective = 0.0;       // tracking cost at the optimum
  int iterations = 0;
};

// Solve  min 1/2 z' H z  s.t.  G z <= w  for the given parameter x
// (w = omega + S x) with a dual active-set method. An optional warm-start
// active set from a previous solve is verified before being trusted.
// Throws std::runtime_error if the iteration limit is hit.
QpSolution solve_qp(const MpQpProblem& qp, const Eigen::Ref<const VecX>& x,
                    const std::vector<int>* warm_start = nullptr);

// Worst KKT residuals of a solution: stationarity, primal feasibility,
// active-constraint equality, multiplier nonnegativity, complementary slackness.
struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double active_equality = 0.0;
  double dual_nonneg = 0.0;
  double complementarity = 0.0;

  double max_residual() const;
};

KktResiduals kkt_residuals(const MpQpProblem& qp, const Eigen::Ref<const VecX>& x,
                           const QpSolution& sol);

// Affine optimizer and its polyhedral validity region, derived from the active
// set of a solved instance:  U*(x) = K_U x + k_U  on  { x : P x <= q }.
struct ExplicitLaw {
  MatX k_gain;   // K_U, n_U x n_x
  VecX k_const;  // k_U, n_U
  MatX p;        // region rows, unit-normalized
  VecX q;
  std::vector<int> active_set;
};

// Build the explicit law for the active set of `sol` (solved at x_seed).
// Rank-deficient active normals are repaired by dropping dependent rows.
ExplicitLaw explicit_law(const MpQpProblem& qp, const QpSolution& sol,
                         const Eigen::Ref<const VecX>& x_seed);

// First-input restriction of an explicit law: u0*(x) = K x + k.
struct AffineControlLaw {
  MatX gain;   // n_u x n_x
  VecX offset; // n_u
};

AffineControlLaw first_control(const MpQpProblem& qp, const ExplicitLaw& law);

// Solve the QP at every seed and collect the distinct explicit laws, keyed by
// active set. Infeasible seeds are skipped.
std::vector<ExplicitLaw> enumerate_regions(const MpQpProblem& qp,
                                           const std::vector<VecX>& seeds);

// Scan the law list and return the full input sequence of the first region
// containing x (membership within tol), or nothing when no region matches.
std::optional<VecX> sequential_search(const std::vector<ExplicitLaw>& laws,
                                      const Eigen::Ref<const VecX>& x,
                                      double tol = 1e-9);

// Plain-text serialization of a law list with full double precision.
void write_regions(std::ostream& os, const std::vector<ExplicitLaw>& laws);
std::vector<ExplicitLaw> read_regions(std::istream& is);

namespace detail {

// Core dual active-set solver for  min 1/2 z' H z + g' z  s.t.  G z <= w,
// H positive definite (pre-factorized).
struct AsqpResult {
  QpStatus status = QpStatus::infeasible;
  VecX z;
  std::vector<int> active;  // ascending
  VecX lambda;              // aligned with `active`
  int iterations = 0;
};

AsqpResult solve_asqp(const Eigen::LLT<MatX>& h_llt, const MatX& G, const VecX& w,
                      const VecX& g, const std::vector<int>* warm_start = nullptr,
                      int max_iterations = 0);

}  // namespace detail

}  // namespace latmpc
