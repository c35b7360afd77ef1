#ifndef BNEM_BOUNDS_HPP
#define BNEM_BOUNDS_HPP

#include <Eigen/Core>
#include <span>
#include <vector>

#include "bnem/dataset.hpp"
#include "bnem/model.hpp"

namespace bnem {

/// Classification of one record against a family event (x_k, x_j) of node
/// i. Pass state = kAnyState to classify against the parent configuration
/// alone (the child cell is then unconstrained).
enum class FamilyMatch {
  kFullyObservedMatch,  // whole family observed and equal to the event
  kCompletable,         // some family cell missing, observed cells agree
  kInconsistent,
};

inline constexpr int kAnyState = -1;

FamilyMatch family_consistency(std::span<const int> record,
                               const NetworkStructure& structure, int node,
                               int config, int state);

/// Counts over one node's family, split by observability. n(x_k|x_j) and
/// n(x_j) range over records with the whole family observed; the
/// completable counts range over records with at least one family cell
/// missing.
struct VirtualFrequencies {
  Eigen::ArrayXXi fully_observed;         // n(x_k | x_j)
  Eigen::ArrayXXi completable_to_jk;      // consistent with (x_k, x_j)
  Eigen::ArrayXXi completable_to_j_not_k; // consistent with x_j, child free to be h != k
  Eigen::ArrayXi row_observed_total;      // n(x_j)
};

/// One pass over the dataset. completable_to_jk is the count entering the
/// upper bound (records that raise theta when completed as (x_k, x_j));
/// completable_to_j_not_k enters the lower bound's denominator (records
/// that sink theta when completed into row x_j away from x_k). Depends
/// only on the data and structure, never on parameters.
VirtualFrequencies virtual_frequencies(const NetworkStructure& structure,
                                       const Dataset& dataset, int node);

/// Per-parameter probability interval [lower, upper], shaped like the CPTs.
struct ParameterBounds {
  std::vector<Eigen::ArrayXXd> lower;
  std::vector<Eigen::ArrayXXd> upper;
};

/// Robust Bayesian interval per parameter:
///   lower = (alpha + n(x_k|x_j)) / (alpha_row + n(x_j) + n_min)
///   upper = (alpha + n(x_k|x_j) + n_max) / (alpha_row + n(x_j) + n_max)
/// Every exhaustive completion's posterior-mean estimate lies inside, and
/// the extreme completions attain the bounds. Requires a positive prior
/// row total for every row. On a complete dataset lower = upper =
/// posterior_mean_estimate exactly.
ParameterBounds compute_bounds(const NetworkStructure& structure,
                               const Dataset& dataset, const PriorSpec& prior);

}  // namespace bnem

#endif  // BNEM_BOUNDS_HPP
