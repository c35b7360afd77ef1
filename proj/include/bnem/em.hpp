#ifndef BNEM_EM_HPP
#define BNEM_EM_HPP

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bnem/bounds.hpp"
#include "bnem/dataset.hpp"
#include "bnem/estimators.hpp"
#include "bnem/model.hpp"

namespace bnem {

enum class Algorithm { kEm, kThresholdEm };
enum class InitMode { kRandomSimplex, kUniform, kProvided };
enum class MStepKind { kMaximumLikelihood, kPosteriorMean };

struct LearnConfig {
  Algorithm algorithm = Algorithm::kEm;
  int max_iterations = 200;
  double param_tolerance = 1e-6;
  InitMode init = InitMode::kRandomSimplex;
  std::uint64_t seed = 0;
  MStepKind m_step = MStepKind::kMaximumLikelihood;
  PriorSpec prior;                      // posterior-mean M-step only
  std::optional<ParameterSet> initial;  // InitMode::kProvided
};

struct TraceRow {
  int iteration;               // 1-based
  double observed_loglik;      // of the parameters entering the iteration
  double expected_loglik;      // sum N log theta over this iteration's output
  double max_param_delta;      // against the parameters entering the iteration
  int clip_count;              // entries moved by the regularization step
  int post_norm_violations;    // entries outside bounds after normalization
  int skipped_records;         // zero-probability-evidence records
};

struct LearnResult {
  ParameterSet params;
  std::vector<TraceRow> trace;
  bool converged = false;
  int iterations_used = 0;
};

/// Starting parameters. Random-simplex mode draws each row uniformly from
/// the probability simplex, reproducibly from the seed; uniform mode sets
/// every entry to 1/r_i; provided mode returns config.initial.
ParameterSet init_params(const NetworkStructure& structure,
                         const LearnConfig& config);

struct EStepResult {
  SufficientStatistics stats;  // expected counts E(N_{i,j,k})
  int skipped_records;         // records with P(evidence) = 0
  double observed_loglik;      // sum of log P(observed cells) over kept records
};

/// Expected sufficient statistics under the current parameters: per record
/// the family posterior of every node. Zero-probability records are
/// skipped and counted, never fatal. Fully observed records contribute
/// unit mass at their (j, k).
EStepResult e_step(const NetworkStructure& structure,
                   const ParameterSet& params, const Dataset& dataset);

/// Re-estimation from expected counts using the configured estimator.
Estimate m_step(const SufficientStatistics& stats, const LearnConfig& config);

struct RegularizeResult {
  ParameterSet params;  // rows need not sum to one
  int clip_count;
};

/// Entrywise clip into [lower, upper]. Entries inside their interval are
/// untouched. Throws a corrupt-bounds Error if lower > upper anywhere.
RegularizeResult regularize(const ParameterSet& params,
                            const ParameterBounds& bounds);

/// Divides every row by its sum. Throws a degenerate-row Error on a
/// zero-sum row. Idempotent.
ParameterSet normalize_rows(const ParameterSet& params);

struct ExpectedLogLik {
  double value;   // -infinity when hit_zero, never NaN
  bool hit_zero;  // some N > 0 where theta = 0
};

/// sum_{i,j,k} N_{i,j,k} log theta_{i,j,k}; terms with N = 0 contribute
/// nothing regardless of theta.
ExpectedLogLik expected_complete_loglik(const SufficientStatistics& stats,
                                        const ParameterSet& params);

/// Inspection hook: called once per iteration after the update.
struct IterationView {
  int iteration;
  const ParameterSet& pre_normalization;  // threshold-EM: clipped, unnormalized
  const ParameterSet& params;             // end-of-iteration parameters
};
using IterationObserver = std::function<void(const IterationView&)>;

/// The learning loop: expectation, maximization, then for threshold-EM
/// regularization into the bounds and row renormalization. Stops when the
/// largest absolute change between successive estimates drops below the
/// tolerance (checked from the second iteration) or the iteration cap is
/// reached. Bounds are computed from data alone and are never updated
/// inside the loop; threshold-EM without bounds is a configuration error.
LearnResult run(const NetworkStructure& structure, const Dataset& dataset,
                const LearnConfig& config,
                const ParameterBounds* bounds = nullptr,
                const IterationObserver& observer = {});

}  // namespace bnem

#endif  // BNEM_EM_HPP
