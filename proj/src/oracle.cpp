#include "bnem/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bnem/bounds.hpp"
#include "bnem/dataio.hpp"
#include "bnem/em.hpp"
#include "bnem/errors.hpp"
#include "bnem/estimators.hpp"
#include "bnem/rng.hpp"

namespace bnem {

MarginalResult brute_marginal(const NetworkStructure& structure,
                              const ParameterSet& params,
                              const Evidence& evidence,
                              std::vector<int> targets) {
  const int n = structure.node_count();
  if (targets.empty())
    throw Error(ErrorKind::kDomain, "marginal requires at least one target");
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());

  std::uint64_t space = 1;
  for (int i = 0; i < n; ++i) {
    space *= static_cast<std::uint64_t>(structure.num_states(i));
    if (space > (std::uint64_t{1} << 20))
      throw Error(ErrorKind::kCapacity,
                  "joint state space exceeds 2^20 assignments");
  }

  // Flat index over the targets, last target fastest.
  Eigen::Index table_size = 1;
  for (int t : targets) table_size *= structure.num_states(t);
  Eigen::ArrayXd table = Eigen::ArrayXd::Zero(table_size);

  std::vector<int> assignment(n, 0);
  double p_evidence = 0.0;
  for (;;) {
    bool consistent = true;
    for (int i = 0; i < n; ++i)
      if (evidence[i] != kMissing && assignment[i] != evidence[i]) {
        consistent = false;
        break;
      }
    if (consistent) {
      const double p = joint_probability(structure, params, assignment);
      p_evidence += p;
      Eigen::Index idx = 0;
      for (int t : targets) idx = idx * structure.num_states(t) + assignment[t];
      table(idx) += p;
    }
    int d = n - 1;
    while (d >= 0 && ++assignment[d] == structure.num_states(d))
      assignment[d--] = 0;
    if (d < 0) break;
  }

  if (p_evidence == 0.0)
    throw Error(ErrorKind::kZeroEvidence,
                "evidence has probability zero under the parameters");
  return {std::move(targets), table / p_evidence, p_evidence};
}

CompletionEnumerator::CompletionEnumerator(const Dataset& dataset,
                                           const NetworkStructure& structure,
                                           std::uint64_t cap)
    : base_(dataset), count_(1), done_(false) {
  for (int l = 0; l < dataset.record_count(); ++l)
    for (int i = 0; i < structure.node_count(); ++i)
      if (dataset.records[l][i] == kMissing) {
        missing_cells_.emplace_back(l, i);
        cardinalities_.push_back(structure.num_states(i));
      }
  bool saturated = false;
  for (int card : cardinalities_) {
    if (count_ > (std::uint64_t{1} << 32)) {  // far beyond any usable cap
      saturated = true;
      break;
    }
    count_ *= static_cast<std::uint64_t>(card);
  }
  if (saturated) count_ = std::numeric_limits<std::uint64_t>::max();
  if (count_ > cap)
    throw Error(ErrorKind::kCapacity,
                "completion space has " +
                    (saturated ? std::string("more than 2^32")
                               : std::to_string(count_)) +
                    " datasets, cap is " + std::to_string(cap));
  assignment_.assign(missing_cells_.size(), 0);
}

bool CompletionEnumerator::next(Dataset& out) {
  if (done_) return false;
  out = base_;
  for (std::size_t c = 0; c < missing_cells_.size(); ++c)
    out.records[missing_cells_[c].first][missing_cells_[c].second] =
        assignment_[c];
  // Lexicographic order: the last missing cell varies fastest.
  std::size_t d = assignment_.size();
  while (d-- > 0) {
    if (++assignment_[d] < cardinalities_[d]) return true;
    assignment_[d] = 0;
  }
  done_ = true;
  return true;
}

void CompletionEnumerator::reset() {
  assignment_.assign(missing_cells_.size(), 0);
  done_ = false;
}

SandwichReport sandwich_report(const NetworkStructure& structure,
                               const Dataset& dataset, const PriorSpec& prior,
                               std::uint64_t cap) {
  const ParameterBounds bounds = compute_bounds(structure, dataset, prior);

  SandwichReport report;
  report.bound_min = bounds.lower;
  report.bound_max = bounds.upper;
  for (int i = 0; i < structure.node_count(); ++i) {
    report.completion_min.push_back(Eigen::ArrayXXd::Constant(
        structure.num_parent_configs(i), structure.num_states(i),
        std::numeric_limits<double>::infinity()));
    report.completion_max.push_back(Eigen::ArrayXXd::Constant(
        structure.num_parent_configs(i), structure.num_states(i),
        -std::numeric_limits<double>::infinity()));
  }

  CompletionEnumerator completions(dataset, structure, cap);
  report.completion_count = completions.completion_count();
  Dataset completed;
  while (completions.next(completed)) {
    const Estimate estimate =
        posterior_mean_estimate(count_complete(structure, completed), prior);
    for (int i = 0; i < structure.node_count(); ++i) {
      report.completion_min[i] =
          report.completion_min[i].min(estimate.params.tables[i]);
      report.completion_max[i] =
          report.completion_max[i].max(estimate.params.tables[i]);
    }
  }

  report.conforms = true;
  report.tight = true;
  constexpr double kTol = 1e-12;
  for (int i = 0; i < structure.node_count(); ++i) {
    if ((report.completion_min[i] < report.bound_min[i] - kTol).any() ||
        (report.completion_max[i] > report.bound_max[i] + kTol).any())
      report.conforms = false;
    if (((report.completion_min[i] - report.bound_min[i]).abs() > kTol).any() ||
        ((report.completion_max[i] - report.bound_max[i]).abs() > kTol).any())
      report.tight = false;
  }
  return report;
}

std::vector<TrialSummary> compare_runs(const NetworkStructure& structure,
                                       const ParameterSet& true_params,
                                       const CompareConfig& config) {
  if (config.trials < 0)
    throw Error(ErrorKind::kDomain, "trial count must be nonnegative");

  std::vector<TrialSummary> summary;
  summary.reserve(config.trials);
  const PriorSpec prior = PriorSpec::uniform(structure, config.alpha);

  for (int trial = 0; trial < config.trials; ++trial) {
    // Independent sub-seeds per trial: streams 3t, 3t+1, 3t+2 of the master
    // seed drive sampling, masking and initialization.
    const std::uint64_t t = static_cast<std::uint64_t>(trial);
    const std::uint64_t data_seed = SplitMix64::stream(config.seed, 3 * t).next();
    const std::uint64_t mask_seed =
        SplitMix64::stream(config.seed, 3 * t + 1).next();
    const std::uint64_t init_seed =
        SplitMix64::stream(config.seed, 3 * t + 2).next();

    const Dataset complete =
        forward_sample(structure, true_params, config.record_count, data_seed);
    const Dataset masked = mask_mcar(complete, config.mask_rate, mask_seed);
    const ParameterBounds bounds = compute_bounds(structure, masked, prior);

    LearnConfig learn;
    learn.max_iterations = config.max_iterations;
    learn.param_tolerance = config.param_tolerance;
    learn.init = InitMode::kRandomSimplex;
    learn.seed = init_seed;
    learn.m_step = MStepKind::kMaximumLikelihood;

    learn.algorithm = Algorithm::kEm;
    const LearnResult em = run(structure, masked, learn);

    learn.algorithm = Algorithm::kThresholdEm;
    const LearnResult them = run(structure, masked, learn, &bounds);

    TrialSummary row;
    row.trial = trial;
    row.em_iters = em.iterations_used;
    row.them_iters = them.iterations_used;
    row.em_final_ll = dataset_log_likelihood(structure, em.params, masked).value;
    row.them_final_ll =
        dataset_log_likelihood(structure, them.params, masked).value;
    row.em_zero_params = count_zero_entries(em.params);
    row.them_zero_params = count_zero_entries(them.params);
    row.them_violations =
        them.trace.empty() ? 0 : them.trace.back().post_norm_violations;
    summary.push_back(row);
  }
  return summary;
}

std::string serialize_summary(std::span<const TrialSummary> summary) {
  std::string out =
      "trial,em_iters,them_iters,em_final_ll,them_final_ll,em_zero_params,"
      "them_zero_params,them_violations\n";
  for (const TrialSummary& row : summary) {
    out += std::to_string(row.trial) + ',' + std::to_string(row.em_iters) +
           ',' + std::to_string(row.them_iters) + ',' +
           format_double(row.em_final_ll) + ',' +
           format_double(row.them_final_ll) + ',' +
           std::to_string(row.em_zero_params) + ',' +
           std::to_string(row.them_zero_params) + ',' +
           std::to_string(row.them_violations) + '\n';
  }
  return out;
}

}  // namespace bnem
