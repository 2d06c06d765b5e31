#pragma once

#include <cstdint>
#include <vector>

#include "mcprod/core_stats.hpp"
#include "mcprod/signed_log.hpp"

namespace mcprod {

/// (1/R) sum_r prod_i phi_i(y_i^(r)), in sign-tracked log space.
/// A zero result (e.g. every row contains a zero) comes back with sign 0 and
/// log_abs = -inf.
SignedLog joint_estimate(const SampleBlock& block);

/// prod_i [(1/R) sum_r phi_i(y_i^(r))], in sign-tracked log space.
SignedLog marginal_estimate(const SampleBlock& block);

/// Variance of a product of independent factors:
/// prod_i (V_i + E_i^2) - prod_i E_i^2.
/// Evaluated with a cancellation-free recurrence.
double goodman_product_variance(const MomentSummary& m);

/// Same quantity by explicit enumeration of all nonempty subsets C:
/// sum_C prod_{i in C} V_i prod_{j not in C} E_j^2. Only for N <= 12.
double goodman_subset_sum(const MomentSummary& m);

/// S_k = sum over k-subsets C of prod_{C} V_i prod_{not C} E_j^2, k = 1..N
/// (element k-1 holds S_k). Computed as coefficients of prod_i (E_i^2 + t V_i).
std::vector<double> order_sums(const MomentSummary& m);

struct VarianceBreakdown {
  double var_joint = 0.0;
  double var_marginal = 0.0;
  /// var_joint - var_marginal, evaluated term-by-term (no subtraction of the
  /// two totals).
  double difference = 0.0;
  /// S_1 / R, shared by both estimators.
  double first_order_term = 0.0;
  /// S_k for k = 2..N (element 0 is k = 2). The joint estimator weights each
  /// by 1/R, the marginal one by 1/R^k.
  std::vector<double> higher_order_terms;
};

VarianceBreakdown estimator_variances(const MomentSummary& m, std::int64_t replications);

enum class EstimatorKind { joint, marginal };

/// Variance written through coefficients of variation, splitting factors into
/// zero-mean and nonzero-mean sets.
double variance_cv_form(const MomentSummary& m, std::int64_t replications, EstimatorKind which);

/// (1/R) sum_{k=2}^N (1 - R^{1-k}) S_k.
double variance_difference(const MomentSummary& m, std::int64_t replications);

/// Replications R_J the joint estimator needs to match the marginal
/// estimator's variance at R_M. Real-valued; round up to use it.
double required_iterations(std::int64_t marginal_replications, const MomentSummary& m);

/// prod_i (a_i + b_i) - prod_i b_i for a_i, b_i >= 0 without cancellation.
double product_excess(std::span<const double> a, std::span<const double> b);

}  // namespace mcprod
