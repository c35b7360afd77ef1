#ifndef BNEM_ESTIMATORS_HPP
#define BNEM_ESTIMATORS_HPP

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "bnem/dataset.hpp"
#include "bnem/model.hpp"

namespace bnem {

/// Counts N_{i,j,k}, one q_i x r_i table per node. Integer-valued for
/// complete-data counting, fractional after an E-step.
struct SufficientStatistics {
  std::vector<Eigen::ArrayXXd> counts;
};

SufficientStatistics zero_stats(const NetworkStructure& structure);

/// Tallies fully observed records. Throws an incomplete-data Error naming
/// the first record and node with a missing cell.
SufficientStatistics count_complete(const NetworkStructure& structure,
                                    const Dataset& dataset);

/// Estimator output: the parameters plus the (node, row) pairs that had no
/// support and fell back to a uniform row.
struct Estimate {
  ParameterSet params;
  std::vector<std::pair<int, int>> uniform_rows;

  bool row_flagged(int node, int row) const {
    for (const auto& [n, r] : uniform_rows)
      if (n == node && r == row) return true;
    return false;
  }
};

/// Relative frequencies N_{i,j,k} / N_{i,j}. Zero-total rows become
/// uniform and are flagged.
Estimate ml_estimate(const SufficientStatistics& stats);

/// Dirichlet posterior mode (N + alpha - 1) / sum_k (N + alpha - 1).
/// Requires alpha >= 1 everywhere; zero-denominator rows become uniform
/// and are flagged. With alpha identically 1, equals ml_estimate exactly.
Estimate map_estimate(const SufficientStatistics& stats,
                      const PriorSpec& prior);

/// Dirichlet posterior mean (N + alpha) / (N_row + alpha_row); strictly
/// positive whenever alpha is. This is the point estimator the parameter
/// intervals of compute_bounds bracket.
Estimate posterior_mean_estimate(const SufficientStatistics& stats,
                                 const PriorSpec& prior);

}  // namespace bnem

#endif  // BNEM_ESTIMATORS_HPP
