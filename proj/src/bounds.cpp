#include "bnem/bounds.hpp"

#include <string>

#include "bnem/errors.hpp"

namespace bnem {

FamilyMatch family_consistency(std::span<const int> record,
                               const NetworkStructure& structure, int node,
                               int config, int state) {
  const Node& nd = structure.nodes[node];
  const std::vector<int> config_values =
      parent_config_values(structure, node, config);

  bool family_complete = record[node] != kMissing;
  for (int p : nd.parents)
    if (record[p] == kMissing) family_complete = false;

  bool agrees = true;
  for (std::size_t p = 0; p < nd.parents.size(); ++p) {
    const int observed = record[nd.parents[p]];
    if (observed != kMissing && observed != config_values[p]) agrees = false;
  }
  if (state != kAnyState && record[node] != kMissing &&
      record[node] != state)
    agrees = false;

  if (!agrees) return FamilyMatch::kInconsistent;
  return family_complete ? FamilyMatch::kFullyObservedMatch
                         : FamilyMatch::kCompletable;
}

VirtualFrequencies virtual_frequencies(const NetworkStructure& structure,
                                       const Dataset& dataset, int node) {
  const int q = structure.num_parent_configs(node);
  const int r = structure.num_states(node);

  VirtualFrequencies vf;
  vf.fully_observed = Eigen::ArrayXXi::Zero(q, r);
  vf.completable_to_jk = Eigen::ArrayXXi::Zero(q, r);
  vf.completable_to_j_not_k = Eigen::ArrayXXi::Zero(q, r);
  vf.row_observed_total = Eigen::ArrayXi::Zero(q);

  for (const std::vector<int>& record : dataset.records) {
    const int child = record[node];
    for (int j = 0; j < q; ++j) {
      const FamilyMatch match =
          family_consistency(record, structure, node, j, kAnyState);
      if (match == FamilyMatch::kInconsistent) continue;
      if (match == FamilyMatch::kFullyObservedMatch) {
        vf.row_observed_total(j) += 1;
        vf.fully_observed(j, child) += 1;
        continue;
      }
      // Completable family: a missing child can complete to any state; an
      // observed child pins k.
      for (int k = 0; k < r; ++k) {
        if (child == kMissing || child == k) vf.completable_to_jk(j, k) += 1;
        if (child == kMissing || child != k)
          vf.completable_to_j_not_k(j, k) += 1;
      }
    }
  }
  return vf;
}

ParameterBounds compute_bounds(const NetworkStructure& structure,
                               const Dataset& dataset,
                               const PriorSpec& prior) {
  ParameterBounds bounds;
  bounds.lower.reserve(structure.node_count());
  bounds.upper.reserve(structure.node_count());

  for (int i = 0; i < structure.node_count(); ++i) {
    if ((prior.alpha[i] < 0.0).any())
      throw Error(ErrorKind::kPriorDomain,
                  "compute_bounds: node '" + structure.nodes[i].name +
                      "' has a negative prior entry");
    const VirtualFrequencies vf = virtual_frequencies(structure, dataset, i);
    const Eigen::ArrayXd alpha_row = prior.row_sums(i);
    const int q = structure.num_parent_configs(i);
    const int r = structure.num_states(i);

    Eigen::ArrayXXd lower(q, r);
    Eigen::ArrayXXd upper(q, r);
    for (int j = 0; j < q; ++j) {
      if (alpha_row(j) <= 0.0)
        throw Error(ErrorKind::kPriorDomain,
                    "compute_bounds: node '" + structure.nodes[i].name +
                        "' row " + std::to_string(j) +
                        " has nonpositive prior total");
      const double base =
          alpha_row(j) + static_cast<double>(vf.row_observed_total(j));
      for (int k = 0; k < r; ++k) {
        const double seen = prior.alpha[i](j, k) +
                            static_cast<double>(vf.fully_observed(j, k));
        const double n_min = vf.completable_to_j_not_k(j, k);
        const double n_max = vf.completable_to_jk(j, k);
        lower(j, k) = seen / (base + n_min);
        upper(j, k) = (seen + n_max) / (base + n_max);
      }
    }
    bounds.lower.push_back(std::move(lower));
    bounds.upper.push_back(std::move(upper));
  }
  return bounds;
}

}  // namespace bnem
