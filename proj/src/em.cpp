#include "bnem/em.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>
#include <map>

#include "bnem/errors.hpp"
#include "bnem/inference.hpp"
#include "bnem/rng.hpp"

namespace bnem {

ParameterSet init_params(const NetworkStructure& structure,
                         const LearnConfig& config) {
  switch (config.init) {
    case InitMode::kUniform: {
      ParameterSet params;
      params.tables.reserve(structure.node_count());
      for (int i = 0; i < structure.node_count(); ++i)
        params.tables.push_back(Eigen::ArrayXXd::Constant(
            structure.num_parent_configs(i), structure.num_states(i),
            1.0 / structure.num_states(i)));
      return params;
    }
    case InitMode::kProvided: {
      if (!config.initial)
        throw Error(ErrorKind::kConfig,
                    "init mode 'provided' without initial parameters");
      return *config.initial;
    }
    case InitMode::kRandomSimplex:
      break;
  }

  // Uniform simplex draw per row: normalized exponentials.
  SplitMix64 rng = SplitMix64::stream(config.seed, 0);
  ParameterSet params;
  params.tables.reserve(structure.node_count());
  for (int i = 0; i < structure.node_count(); ++i) {
    const int q = structure.num_parent_configs(i);
    const int r = structure.num_states(i);
    Eigen::ArrayXXd table(q, r);
    for (int j = 0; j < q; ++j) {
      for (int k = 0; k < r; ++k) {
        double e = 0.0;
        while (e == 0.0) {
          // (0, 1] so the exponential is finite and almost surely positive
          const double u =
              static_cast<double>((rng.next() >> 11) + 1) * 0x1.0p-53;
          e = -std::log(u);
        }
        table(j, k) = e;
      }
      table.row(j) /= table.row(j).sum();
    }
    params.tables.push_back(std::move(table));
  }
  return params;
}

EStepResult e_step(const NetworkStructure& structure,
                   const ParameterSet& params, const Dataset& dataset) {
  EStepResult result{zero_stats(structure), 0, 0.0};

  // Identical records share one inference pass; first-occurrence order
  // keeps the reduction deterministic.
  std::map<std::vector<int>, int> multiplicity;
  std::vector<const std::vector<int>*> unique_records;
  for (const std::vector<int>& record : dataset.records) {
    auto [it, inserted] = multiplicity.try_emplace(record, 0);
    if (inserted) unique_records.push_back(&it->first);
    ++it->second;
  }

  std::vector<int> parent_values;
  for (const std::vector<int>* record_ptr : unique_records) {
    const std::vector<int>& record = *record_ptr;
    const double weight = multiplicity.at(record);

    bool complete = true;
    for (int cell : record)
      if (cell == kMissing) {
        complete = false;
        break;
      }

    if (complete) {
      const double p = joint_probability(structure, params, record);
      if (p == 0.0) {
        result.skipped_records += static_cast<int>(weight);
        continue;
      }
      result.observed_loglik += weight * std::log(p);
      for (int i = 0; i < structure.node_count(); ++i) {
        parent_values.clear();
        for (int par : structure.nodes[i].parents)
          parent_values.push_back(record[par]);
        const int j = parent_config_index(structure, i, parent_values);
        result.stats.counts[i](j, record[i]) += weight;
      }
      continue;
    }

    const std::vector<Factor> reduced =
        reduced_factors(structure, params, record);
    const double p_evidence = evidence_probability_reduced(structure, reduced);
    if (p_evidence == 0.0) {
      result.skipped_records += static_cast<int>(weight);
      continue;
    }

    // Stage the record's posteriors before committing: a posterior query
    // can still underflow to zero evidence even when the joint pass did
    // not, and the record must then be skipped whole.
    std::vector<Eigen::ArrayXXd> posteriors;
    posteriors.reserve(structure.node_count());
    bool underflowed = false;
    try {
      for (int i = 0; i < structure.node_count(); ++i)
        posteriors.push_back(
            family_posterior_reduced(structure, reduced, record, i));
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::kZeroEvidence) throw;
      underflowed = true;
    }
    if (underflowed) {
      result.skipped_records += static_cast<int>(weight);
      continue;
    }

    bool any_observed = false;
    for (int cell : record)
      if (cell != kMissing) {
        any_observed = true;
        break;
      }
    if (any_observed) result.observed_loglik += weight * std::log(p_evidence);
    for (int i = 0; i < structure.node_count(); ++i)
      result.stats.counts[i] += weight * posteriors[i];
  }
  return result;
}

Estimate m_step(const SufficientStatistics& stats, const LearnConfig& config) {
  switch (config.m_step) {
    case MStepKind::kMaximumLikelihood:
      return ml_estimate(stats);
    case MStepKind::kPosteriorMean:
      return posterior_mean_estimate(stats, config.prior);
  }
  throw Error(ErrorKind::kConfig, "unknown m-step kind");
}

RegularizeResult regularize(const ParameterSet& params,
                            const ParameterBounds& bounds) {
  RegularizeResult result{params, 0};
  for (std::size_t i = 0; i < params.tables.size(); ++i) {
    const Eigen::ArrayXXd& table = params.tables[i];
    const Eigen::ArrayXXd& lo = bounds.lower[i];
    const Eigen::ArrayXXd& hi = bounds.upper[i];
    if ((lo > hi).any())
      throw Error(ErrorKind::kCorruptBounds,
                  "bounds for node " + std::to_string(i) +
                      " have lower > upper");
    result.clip_count += static_cast<int>((table < lo).count());
    result.clip_count += static_cast<int>((table > hi).count());
    result.params.tables[i] = table.max(lo).min(hi);
  }
  return result;
}

ParameterSet normalize_rows(const ParameterSet& params) {
  ParameterSet out = params;
  for (std::size_t i = 0; i < out.tables.size(); ++i) {
    Eigen::ArrayXXd& table = out.tables[i];
    for (Eigen::Index j = 0; j < table.rows(); ++j) {
      const double total = table.row(j).sum();
      if (total <= 0.0)
        throw Error(ErrorKind::kDegenerateRow,
                    "node " + std::to_string(i) + " row " + std::to_string(j) +
                        " has nonpositive sum");
      table.row(j) /= total;
    }
  }
  return out;
}

ExpectedLogLik expected_complete_loglik(const SufficientStatistics& stats,
                                        const ParameterSet& params) {
  ExpectedLogLik result{0.0, false};
  for (std::size_t i = 0; i < stats.counts.size(); ++i) {
    const Eigen::ArrayXXd& counts = stats.counts[i];
    const Eigen::ArrayXXd& table = params.tables[i];
    for (Eigen::Index j = 0; j < counts.rows(); ++j)
      for (Eigen::Index k = 0; k < counts.cols(); ++k) {
        const double n = counts(j, k);
        if (n == 0.0) continue;
        if (table(j, k) == 0.0) {
          result.hit_zero = true;
          continue;
        }
        result.value += n * std::log(table(j, k));
      }
  }
  if (result.hit_zero)
    result.value = -std::numeric_limits<double>::infinity();
  return result;
}

namespace {

int count_outside_bounds(const ParameterSet& params,
                         const ParameterBounds& bounds) {
  int violations = 0;
  for (std::size_t i = 0; i < params.tables.size(); ++i) {
    violations += static_cast<int>(
        (params.tables[i] < bounds.lower[i]).count());
    violations += static_cast<int>(
        (params.tables[i] > bounds.upper[i]).count());
  }
  return violations;
}

void check_config(const LearnConfig& config) {
  if (config.max_iterations < 1)
    throw Error(ErrorKind::kConfig, "max_iterations must be at least 1");
  if (!(config.param_tolerance > 0.0))
    throw Error(ErrorKind::kConfig, "param_tolerance must be positive");
}

}  // namespace

LearnResult run(const NetworkStructure& structure, const Dataset& dataset,
                const LearnConfig& config, const ParameterBounds* bounds,
                const IterationObserver& observer) {
  check_config(config);
  if (config.algorithm == Algorithm::kThresholdEm && bounds == nullptr)
    throw Error(ErrorKind::kConfig, "threshold-EM requires parameter bounds");

  LearnResult result;
  ParameterSet params = init_params(structure, config);

  for (int t = 1; t <= config.max_iterations; ++t) {
    EStepResult expectation = e_step(structure, params, dataset);
    Estimate estimate = m_step(expectation.stats, config);

    ParameterSet pre_normalization = std::move(estimate.params);
    int clip_count = 0;
    int post_norm_violations = 0;
    ParameterSet next;
    if (config.algorithm == Algorithm::kThresholdEm) {
      RegularizeResult reg = regularize(pre_normalization, *bounds);
      clip_count = reg.clip_count;
      pre_normalization = std::move(reg.params);
      assert(count_outside_bounds(pre_normalization, *bounds) == 0);
      next = normalize_rows(pre_normalization);
      post_norm_violations = count_outside_bounds(next, *bounds);
    } else {
      next = pre_normalization;
    }

    const double delta = max_abs_diff(next, params);
    const ExpectedLogLik q = expected_complete_loglik(expectation.stats, next);
    result.trace.push_back({t, expectation.observed_loglik, q.value, delta,
                            clip_count, post_norm_violations,
                            expectation.skipped_records});
    params = std::move(next);
    result.iterations_used = t;

    if (observer) observer({t, pre_normalization, params});

    // Successive-estimate stopping rule: iteration 1's delta is against the
    // initialization, which is not an estimate, so the check starts at 2.
    if (t >= 2 && delta < config.param_tolerance) {
      result.converged = true;
      break;
    }
  }

  result.params = std::move(params);
  return result;
}

}  // namespace bnem
