#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "latmpc/types.hpp"

namespace latmpc {

// Scalar affine function a' x + c.
struct AffineFunction {
  VecX a;
  double c = 0.0;

  double operator()(const Eigen::Ref<const VecX>& x) const { return a.dot(x) + c; }
};

// Scalar piecewise-affine function in max-min form:
//   f(x) = max over terms of ( min over the term's literals l_j(x) ).
// `terms` holds indices into `literals`.
struct LatticePWA {
  int input_dim = 0;
  std::vector<AffineFunction> literals;
  std::vector<std::vector<int>> terms;

  int term_count() const { return static_cast<int>(terms.size()); }
  int literal_count() const { return static_cast<int>(literals.size()); }
  // Total number of literal references across all terms (evaluation cost proxy).
  int reference_count() const;
};

double evaluate(const LatticePWA& f, const Eigen::Ref<const VecX>& x);

// A sampled function value together with the affine piece active at the sample.
struct LabeledSample {
  VecX point;
  double value = 0.0;
  AffineFunction active;
};

// Build a max-min representation from labeled samples: literals are the
// distinct active pieces (coefficient-wise deduplication within dedup_tol),
// and each sample contributes the term of all literals that at the sample
// evaluate to at least the active piece's value.
LatticePWA construct_from_samples(const std::vector<LabeledSample>& samples,
                                  double dedup_tol = 1e-9);

// Number of samples whose value the lattice fails to reproduce within tol.
// Nonzero counts indicate samples that violate the ordering condition the
// max-min construction relies on.
int count_sample_mismatches(const LatticePWA& f,
                            const std::vector<LabeledSample>& samples,
                            double tol = 1e-8);

// Shrink the representation without changing its value at any validation
// point: merge duplicate terms, drop terms dominated by the rest, drop
// literals whose removal provably leaves the evaluation unchanged, then drop
// unreferenced literals.
LatticePWA simplify(const LatticePWA& f, const std::vector<VecX>& validation_points);

// Result of probing an approximation error bound of the form
//   max |f_true - f_hat| <= L_estimate * sigma
// where sigma is the largest distance from any probe to its nearest
// linearization point and L_estimate sums the largest pairwise difference
// quotients of f_true and f_hat over the probes.
struct ErrorBoundReport {
  double sigma = 0.0;
  double l_estimate = 0.0;
  double max_observed_error = 0.0;

  double bound() const { return l_estimate * sigma; }
  bool bound_holds() const { return max_observed_error <= bound() + 1e-12; }
};

// Empirically certify the Lipschitz error bound of a vector-valued max-min
// approximation f_hat (one lattice per output) against f_true on probe points.
ErrorBoundReport certify_error(const std::function<VecX(const VecX&)>& f_true,
                               const std::vector<LatticePWA>& f_hat,
                               const std::vector<VecX>& probes,
                               const std::vector<VecX>& linearization_points);

// Plain-text serialization with full double round-trip precision.
void write_lattice(std::ostream& os, const LatticePWA& f);
LatticePWA read_lattice(std::istream& is);

}  // namespace latmpc
