#ifndef BNEM_INFERENCE_HPP
#define BNEM_INFERENCE_HPP

#include <Eigen/Core>
#include <vector>

#include "bnem/dataset.hpp"
#include "bnem/model.hpp"

namespace bnem {

/// Per-node observation: a state index or kMissing. A dataset record is an
/// Evidence vector.
using Evidence = std::vector<int>;

/// Dense table over an ordered (ascending) set of nodes; the last scope
/// node varies fastest in the flat value index.
struct Factor {
  std::vector<int> scope;
  Eigen::ArrayXd values;
};

Factor make_family_factor(const NetworkStructure& structure,
                          const ParameterSet& params, int node);
Factor restrict_factor(const NetworkStructure& structure, const Factor& f,
                       int node, int value);
Factor multiply(const NetworkStructure& structure, const Factor& a,
                const Factor& b);
Factor sum_out(const NetworkStructure& structure, const Factor& f, int node);

/// Family factors of every node, conditioned on the evidence (observed
/// nodes are sliced out of every scope). The shared starting point for all
/// queries against one record.
std::vector<Factor> reduced_factors(const NetworkStructure& structure,
                                    const ParameterSet& params,
                                    const Evidence& evidence);

/// Variable elimination: sums all scope nodes not in `keep` (ascending,
/// possibly empty) out of the factor product. Elimination order is
/// min-degree greedy with ties broken by node index. The result is
/// unnormalized; its total is the probability of the evidence the factors
/// were reduced by.
Factor eliminate_to(const NetworkStructure& structure,
                    std::vector<Factor> factors, const std::vector<int>& keep);

struct MarginalResult {
  std::vector<int> targets;   // ascending node indices
  Eigen::ArrayXd table;       // normalized; last target fastest
  double p_evidence;
};

/// Posterior over the targets given the evidence, plus P(evidence).
/// Observed targets get a degenerate axis. Throws a zero-evidence Error
/// when P(evidence) = 0.
MarginalResult marginal(const NetworkStructure& structure,
                        const ParameterSet& params, const Evidence& evidence,
                        std::vector<int> targets);

/// q_i x r_i table of P(X_i = x_k, pa(X_i) = x_j | evidence). Entries sum
/// to one. Throws a zero-evidence Error when P(evidence) = 0.
Eigen::ArrayXXd family_posterior(const NetworkStructure& structure,
                                 const ParameterSet& params,
                                 const Evidence& evidence, int node);

/// As family_posterior, against a factor set already reduced by the same
/// evidence; the E-step reduces once per record and queries every node.
Eigen::ArrayXXd family_posterior_reduced(const NetworkStructure& structure,
                                         const std::vector<Factor>& reduced,
                                         const Evidence& evidence, int node);

/// P(observed cells of the evidence); 1 for fully missing evidence. Never
/// throws on zero probability (returns 0).
double evidence_probability(const NetworkStructure& structure,
                            const ParameterSet& params,
                            const Evidence& evidence);

double evidence_probability_reduced(const NetworkStructure& structure,
                                    const std::vector<Factor>& reduced);

struct LogLikelihood {
  double value;         // -infinity when zero_evidence is set, never NaN
  bool zero_evidence;
};

/// log P(observed part of the record); 0 for a fully missing record.
LogLikelihood record_log_likelihood(const NetworkStructure& structure,
                                    const ParameterSet& params,
                                    const Evidence& evidence);

struct DatasetLogLikelihood {
  double value;
  int zero_evidence_records;
};

/// Observed-data log-likelihood of the whole dataset: the sum over records
/// of record_log_likelihood. -infinity (flagged) if any record has zero
/// evidence probability.
DatasetLogLikelihood dataset_log_likelihood(const NetworkStructure& structure,
                                            const ParameterSet& params,
                                            const Dataset& dataset);

}  // namespace bnem

#endif  // BNEM_INFERENCE_HPP
