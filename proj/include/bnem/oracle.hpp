#ifndef BNEM_ORACLE_HPP
#define BNEM_ORACLE_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "bnem/dataset.hpp"
#include "bnem/inference.hpp"
#include "bnem/model.hpp"

namespace bnem {

/// Marginal by full joint enumeration: sums joint_probability over every
/// complete assignment consistent with the evidence. Same contract and
/// layout as marginal(); the independent check on the elimination engine.
/// Requires the total state-space product to be at most 2^20.
MarginalResult brute_marginal(const NetworkStructure& structure,
                              const ParameterSet& params,
                              const Evidence& evidence,
                              std::vector<int> targets);

inline constexpr std::uint64_t kDefaultCompletionCap = std::uint64_t{1} << 16;

/// Streams every completion of a dataset's missing cells exactly once, in
/// lexicographic order of the missing-cell assignments (cells ordered by
/// record then column). Throws a capacity Error at construction when the
/// completion count exceeds the cap.
class CompletionEnumerator {
 public:
  CompletionEnumerator(const Dataset& dataset,
                       const NetworkStructure& structure,
                       std::uint64_t cap = kDefaultCompletionCap);

  std::uint64_t completion_count() const { return count_; }

  /// Fills `out` with the next completion; false when exhausted.
  bool next(Dataset& out);

  void reset();

 private:
  Dataset base_;
  std::vector<std::pair<int, int>> missing_cells_;  // (record, column)
  std::vector<int> cardinalities_;
  std::vector<int> assignment_;
  std::uint64_t count_;
  bool done_;
};

/// Empirical verification of the bound step: the posterior-mean estimate
/// of every exhaustive completion against [lower, upper].
struct SandwichReport {
  std::vector<Eigen::ArrayXXd> bound_min, bound_max;
  std::vector<Eigen::ArrayXXd> completion_min, completion_max;
  bool conforms;  // every completion estimate within bounds (1e-12 slack)
  bool tight;     // completion extrema attain the bounds (1e-12)
  std::uint64_t completion_count;
};

SandwichReport sandwich_report(const NetworkStructure& structure,
                               const Dataset& dataset, const PriorSpec& prior,
                               std::uint64_t cap = kDefaultCompletionCap);

/// Paired EM vs threshold-EM experiment: per trial, sample records from
/// the true parameters, mask them, compute bounds, and run both algorithms
/// from the same random initialization.
struct CompareConfig {
  int record_count = 200;
  double mask_rate = 0.3716;
  int trials = 20;
  std::uint64_t seed = 0;
  double alpha = 1.0;          // uniform Dirichlet prior for the bounds
  int max_iterations = 200;
  double param_tolerance = 1e-6;
};

struct TrialSummary {
  int trial;
  int em_iters;
  int them_iters;
  double em_final_ll;
  double them_final_ll;
  long em_zero_params;
  long them_zero_params;
  int them_violations;  // post-normalization bound violations, last iteration
};

std::vector<TrialSummary> compare_runs(const NetworkStructure& structure,
                                       const ParameterSet& true_params,
                                       const CompareConfig& config);

/// Summary CSV: trial,em_iters,them_iters,em_final_ll,them_final_ll,
/// em_zero_params,them_zero_params,them_violations.
std::string serialize_summary(std::span<const TrialSummary> summary);

}  // namespace bnem

#endif  // BNEM_ORACLE_HPP
