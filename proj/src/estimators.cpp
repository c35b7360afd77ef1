#include "bnem/estimators.hpp"

#include <string>

#include "bnem/errors.hpp"

namespace bnem {

SufficientStatistics zero_stats(const NetworkStructure& structure) {
  SufficientStatistics stats;
  stats.counts.reserve(structure.node_count());
  for (int i = 0; i < structure.node_count(); ++i)
    stats.counts.push_back(Eigen::ArrayXXd::Zero(
        structure.num_parent_configs(i), structure.num_states(i)));
  return stats;
}

SufficientStatistics count_complete(const NetworkStructure& structure,
                                    const Dataset& dataset) {
  SufficientStatistics stats = zero_stats(structure);
  std::vector<int> parent_values;
  for (int l = 0; l < dataset.record_count(); ++l) {
    const std::vector<int>& record = dataset.records[l];
    for (int i = 0; i < structure.node_count(); ++i)
      if (record[i] == kMissing)
        throw Error(ErrorKind::kIncompleteData,
                    "record " + std::to_string(l + 1) + " has node '" +
                        structure.nodes[i].name + "' missing",
                    l);
    for (int i = 0; i < structure.node_count(); ++i) {
      parent_values.clear();
      for (int p : structure.nodes[i].parents)
        parent_values.push_back(record[p]);
      const int j = parent_config_index(structure, i, parent_values);
      stats.counts[i](j, record[i]) += 1.0;
    }
  }
  return stats;
}

namespace {

// Shared row-normalization core: divides each weight row by its total,
// substituting a flagged uniform row where the total is zero.
Estimate normalize_weights(const std::vector<Eigen::ArrayXXd>& weights) {
  Estimate estimate;
  estimate.params.tables.reserve(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    const Eigen::ArrayXXd& w = weights[i];
    Eigen::ArrayXXd table(w.rows(), w.cols());
    for (Eigen::Index j = 0; j < w.rows(); ++j) {
      const double total = w.row(j).sum();
      if (total == 0.0) {
        table.row(j).setConstant(1.0 / static_cast<double>(w.cols()));
        estimate.uniform_rows.emplace_back(static_cast<int>(i),
                                           static_cast<int>(j));
      } else {
        table.row(j) = w.row(j) / total;
      }
    }
    estimate.params.tables.push_back(std::move(table));
  }
  return estimate;
}

}  // namespace

Estimate ml_estimate(const SufficientStatistics& stats) {
  return normalize_weights(stats.counts);
}

Estimate map_estimate(const SufficientStatistics& stats,
                      const PriorSpec& prior) {
  std::vector<Eigen::ArrayXXd> weights;
  weights.reserve(stats.counts.size());
  for (std::size_t i = 0; i < stats.counts.size(); ++i) {
    if ((prior.alpha[i] < 1.0).any())
      throw Error(ErrorKind::kPriorDomain,
                  "map_estimate requires alpha >= 1 for every parameter");
    // alpha - 1 first, so alpha = 1 reproduces ml_estimate bit for bit.
    weights.push_back(stats.counts[i] + (prior.alpha[i] - 1.0));
  }
  return normalize_weights(weights);
}

Estimate posterior_mean_estimate(const SufficientStatistics& stats,
                                 const PriorSpec& prior) {
  Estimate estimate;
  estimate.params.tables.reserve(stats.counts.size());
  for (std::size_t i = 0; i < stats.counts.size(); ++i) {
    if ((prior.alpha[i] < 0.0).any())
      throw Error(ErrorKind::kPriorDomain,
                  "posterior_mean_estimate requires alpha >= 0");
    const Eigen::ArrayXXd& counts = stats.counts[i];
    const Eigen::ArrayXd alpha_row = prior.row_sums(static_cast<int>(i));
    Eigen::ArrayXXd table(counts.rows(), counts.cols());
    for (Eigen::Index j = 0; j < counts.rows(); ++j) {
      const double denom = alpha_row(j) + counts.row(j).sum();
      if (denom == 0.0)
        throw Error(ErrorKind::kPriorDomain,
                    "posterior_mean_estimate: row " + std::to_string(j) +
                        " of node " + std::to_string(i) +
                        " has zero prior and zero counts");
      table.row(j) = (prior.alpha[i].row(j) + counts.row(j)) / denom;
    }
    estimate.params.tables.push_back(std::move(table));
  }
  return estimate;
}

}  // namespace bnem
