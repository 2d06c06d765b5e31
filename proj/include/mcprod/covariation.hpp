#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mcprod/core_stats.hpp"
#include "mcprod/signed_log.hpp"

namespace mcprod {

// Total covariation index TCI(Y) = E[prod Y_i] - prod E[Y_i] and its sample
// identities. Everything here uses divisor-R sample moments; with divisor
// R-1 the variance identity is off by O(1/R).

/// Sample TCI: mean of row products minus product of column means, in linear
/// arithmetic.
double tci_sample(const SampleBlock& block);

/// Sample TCI in sign-tracked log space, for blocks whose row products
/// overflow or underflow.
SignedLog tci_sample_log(const SampleBlock& block);

/// Sample covariance (divisor R) between the row product of columns 1..k-1
/// and column k. k is 1-based, 2 <= k <= N.
double cov_partial(const SampleBlock& block, std::size_t k);

/// Divisor-R sample variance of prod_{i<=j} Y_i for j = 1..N-1 (element j-1).
std::vector<double> partial_product_variances(const SampleBlock& block);

struct TciReport {
  double tci_direct = 0.0;
  double tci_decomposed = 0.0;
  /// Cov_(k) for k = 2..N (element 0 is k = 2).
  std::vector<double> cov_terms;
  double bound = 0.0;
  double indep_variance = 0.0;
  double true_variance = 0.0;
  /// Magnitude used for relative comparisons of the identities.
  double scale = 0.0;
};

/// Recursive decomposition
///   TCI = Cov_(N) + sum_{k=1}^{N-2} [prod_{i=N-k+1}^{N} E_i] Cov_(N-k),
/// with sample moments. Fills tci_decomposed, cov_terms, tci_direct and scale.
TciReport tci_decomposition(const SampleBlock& block);

/// Cauchy-Schwarz bound on |TCI|:
///   sum_{k=0}^{N-2} [prod_{i=N+1-k}^{N+1} |E_i|] sqrt(Var(prod_{j<=N-k-1} Y_j) Var(Y_{N-k}))
/// with E_{N+1} = 1. `partial_product_variances` as returned by the function
/// of the same name.
double tci_bound(const MomentSummary& m, std::span<const double> partial_product_variances);

struct VarianceSplit {
  /// (1/R) sum_r (P_r - joint)^2, P_r the row product.
  double true_variance = 0.0;
  /// (1/R) sum_r (P_r - marginal)^2.
  double indep_variance = 0.0;
  double tci = 0.0;
};

/// true_variance = indep_variance - tci^2, exactly.
VarianceSplit variance_underestimation(const SampleBlock& block);

/// Every field of TciReport for one block.
TciReport tci_report(const SampleBlock& block);

struct TciBlockSummary {
  SignedLog tci;
  /// log(joint estimate) - log(marginal estimate): the shift the sample
  /// covariation puts on a log-scale estimator built from this block.
  double log_gap = 0.0;
};

struct TciDiagnostics {
  TciBlockSummary numerator;
  std::optional<TciBlockSummary> denominator;
  /// numerator.log_gap - denominator.log_gap (or the numerator gap alone):
  /// the net shift of the log ratio estimate.
  double net_log_effect = 0.0;
};

/// Covariation diagnostics for the averaged variables of a ratio estimator.
/// Factor values must be positive.
TciDiagnostics estimator_tci_diagnostics(const SampleBlock& numerator, const SampleBlock* denominator);

/// Sample TCI on the leading `r` rows for each r in `prefix_sizes`, showing
/// its decay as R grows.
std::vector<double> tci_trajectory(const SampleBlock& block, std::span<const std::size_t> prefix_sizes);

}  // namespace mcprod
