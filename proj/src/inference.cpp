#include "bnem/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bnem/errors.hpp"

namespace bnem {

namespace {

Eigen::Index scope_size(const NetworkStructure& structure,
                        const std::vector<int>& scope) {
  Eigen::Index size = 1;
  for (int v : scope) size *= structure.num_states(v);
  return size;
}

// Stride of each scope position; the last position has stride 1.
std::vector<Eigen::Index> scope_strides(const NetworkStructure& structure,
                                        const std::vector<int>& scope) {
  std::vector<Eigen::Index> strides(scope.size());
  Eigen::Index stride = 1;
  for (std::size_t p = scope.size(); p-- > 0;) {
    strides[p] = stride;
    stride *= structure.num_states(scope[p]);
  }
  return strides;
}

int position_in(const std::vector<int>& scope, int node) {
  auto it = std::lower_bound(scope.begin(), scope.end(), node);
  if (it == scope.end() || *it != node) return -1;
  return static_cast<int>(it - scope.begin());
}

// Strides of `inner`'s scope aligned to an iteration over `outer`; zero
// where an outer variable is absent from the inner scope.
std::vector<Eigen::Index> aligned_strides(const NetworkStructure& structure,
                                          const std::vector<int>& outer,
                                          const std::vector<int>& inner) {
  const std::vector<Eigen::Index> inner_strides =
      scope_strides(structure, inner);
  std::vector<Eigen::Index> aligned(outer.size(), 0);
  for (std::size_t p = 0; p < outer.size(); ++p) {
    const int pos = position_in(inner, outer[p]);
    if (pos >= 0) aligned[p] = inner_strides[pos];
  }
  return aligned;
}

// Odometer over a scope's assignments, last variable fastest. fn is called
// once per assignment with (values, tracked flat indices).
template <typename Fn>
void for_each_assignment(const NetworkStructure& structure,
                         const std::vector<int>& scope,
                         std::span<const std::vector<Eigen::Index>> strides,
                         Fn&& fn) {
  std::vector<int> cards;
  cards.reserve(scope.size());
  for (int v : scope) cards.push_back(structure.num_states(v));

  std::vector<int> values(scope.size(), 0);
  std::vector<Eigen::Index> indices(strides.size(), 0);
  for (;;) {
    fn(values, indices);
    std::size_t d = values.size();
    while (d-- > 0) {
      ++values[d];
      for (std::size_t t = 0; t < indices.size(); ++t)
        indices[t] += strides[t][d];
      if (values[d] < cards[d]) break;
      for (std::size_t t = 0; t < indices.size(); ++t)
        indices[t] -= strides[t][d] * cards[d];
      values[d] = 0;
    }
    if (d == static_cast<std::size_t>(-1)) return;
  }
}

std::vector<int> sorted_union(const std::vector<int>& a,
                              const std::vector<int>& b) {
  std::vector<int> out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

void check_evidence(const NetworkStructure& structure,
                    const Evidence& evidence) {
  if (static_cast<int>(evidence.size()) != structure.node_count())
    throw Error(ErrorKind::kIndex,
                "evidence covers " + std::to_string(evidence.size()) + " of " +
                    std::to_string(structure.node_count()) + " nodes");
  for (int i = 0; i < structure.node_count(); ++i)
    if (evidence[i] != kMissing &&
        (evidence[i] < 0 || evidence[i] >= structure.num_states(i)))
      throw Error(ErrorKind::kIndex, "evidence for node '" +
                                         structure.nodes[i].name +
                                         "' out of range");
}

// Family factor with observed family members already sliced out.
Factor reduced_family_factor(const NetworkStructure& structure,
                             const ParameterSet& params, int node,
                             const Evidence& evidence) {
  const Node& nd = structure.nodes[node];
  std::vector<int> family = nd.parents;
  family.push_back(node);
  std::sort(family.begin(), family.end());

  Factor f;
  for (int v : family)
    if (evidence[v] == kMissing) f.scope.push_back(v);
  f.values.resize(scope_size(structure, f.scope));

  const int child_pos = position_in(f.scope, node);
  std::vector<int> parent_pos(nd.parents.size());
  for (std::size_t p = 0; p < nd.parents.size(); ++p)
    parent_pos[p] = position_in(f.scope, nd.parents[p]);

  const std::vector<Eigen::Index> strides[] = {scope_strides(structure, f.scope)};
  std::vector<int> parent_values(nd.parents.size());
  for_each_assignment(
      structure, f.scope, strides,
      [&](const std::vector<int>& values,
          const std::vector<Eigen::Index>& indices) {
        for (std::size_t p = 0; p < nd.parents.size(); ++p)
          parent_values[p] = parent_pos[p] >= 0 ? values[parent_pos[p]]
                                                : evidence[nd.parents[p]];
        const int k = child_pos >= 0 ? values[child_pos] : evidence[node];
        const int j = parent_config_index(structure, node, parent_values);
        f.values(indices[0]) = params.tables[node](j, k);
      });
  return f;
}

}  // namespace

Factor make_family_factor(const NetworkStructure& structure,
                          const ParameterSet& params, int node) {
  Evidence none(structure.node_count(), kMissing);
  return reduced_family_factor(structure, params, node, none);
}

Factor restrict_factor(const NetworkStructure& structure, const Factor& f,
                       int node, int value) {
  const int pos = position_in(f.scope, node);
  if (pos < 0)
    throw Error(ErrorKind::kIndex, "restricted node not in factor scope");
  if (value < 0 || value >= structure.num_states(node))
    throw Error(ErrorKind::kIndex, "restricted value out of range");

  Factor out;
  out.scope = f.scope;
  out.scope.erase(out.scope.begin() + pos);
  out.values.resize(scope_size(structure, out.scope));

  const std::vector<Eigen::Index> f_strides = scope_strides(structure, f.scope);
  std::vector<Eigen::Index> src_strides = f_strides;
  src_strides.erase(src_strides.begin() + pos);
  const Eigen::Index base = value * f_strides[pos];

  const std::vector<Eigen::Index> strides[] = {
      scope_strides(structure, out.scope), src_strides};
  for_each_assignment(structure, out.scope, strides,
                      [&](const std::vector<int>&,
                          const std::vector<Eigen::Index>& indices) {
                        out.values(indices[0]) = f.values(base + indices[1]);
                      });
  return out;
}

Factor multiply(const NetworkStructure& structure, const Factor& a,
                const Factor& b) {
  Factor out;
  out.scope = sorted_union(a.scope, b.scope);
  out.values.resize(scope_size(structure, out.scope));

  const std::vector<Eigen::Index> strides[] = {
      scope_strides(structure, out.scope),
      aligned_strides(structure, out.scope, a.scope),
      aligned_strides(structure, out.scope, b.scope)};
  for_each_assignment(
      structure, out.scope, strides,
      [&](const std::vector<int>&, const std::vector<Eigen::Index>& indices) {
        out.values(indices[0]) = a.values(indices[1]) * b.values(indices[2]);
      });
  return out;
}

Factor sum_out(const NetworkStructure& structure, const Factor& f, int node) {
  const int pos = position_in(f.scope, node);
  if (pos < 0)
    throw Error(ErrorKind::kIndex, "summed node not in factor scope");

  Factor out;
  out.scope = f.scope;
  out.scope.erase(out.scope.begin() + pos);
  out.values = Eigen::ArrayXd::Zero(scope_size(structure, out.scope));

  const std::vector<Eigen::Index> strides[] = {
      scope_strides(structure, f.scope),
      aligned_strides(structure, f.scope, out.scope)};
  for_each_assignment(structure, f.scope, strides,
                      [&](const std::vector<int>&,
                          const std::vector<Eigen::Index>& indices) {
                        out.values(indices[1]) += f.values(indices[0]);
                      });
  return out;
}

std::vector<Factor> reduced_factors(const NetworkStructure& structure,
                                    const ParameterSet& params,
                                    const Evidence& evidence) {
  check_evidence(structure, evidence);
  std::vector<Factor> factors;
  factors.reserve(structure.node_count());
  for (int i = 0; i < structure.node_count(); ++i)
    factors.push_back(reduced_family_factor(structure, params, i, evidence));
  return factors;
}

Factor eliminate_to(const NetworkStructure& structure,
                    std::vector<Factor> factors,
                    const std::vector<int>& keep) {
  std::vector<int> present;
  for (const Factor& f : factors) present = sorted_union(present, f.scope);
  std::vector<int> to_eliminate;
  std::set_difference(present.begin(), present.end(), keep.begin(), keep.end(),
                      std::back_inserter(to_eliminate));

  while (!to_eliminate.empty()) {
    // Min-degree greedy: degree of v is the number of distinct neighbors in
    // the graph whose cliques are the live factor scopes; ties go to the
    // lowest node index (declaration order).
    int best = -1;
    int best_degree = std::numeric_limits<int>::max();
    for (int v : to_eliminate) {
      std::vector<int> neighborhood;
      for (const Factor& f : factors)
        if (position_in(f.scope, v) >= 0)
          neighborhood = sorted_union(neighborhood, f.scope);
      const int degree =
          neighborhood.empty() ? 0 : static_cast<int>(neighborhood.size()) - 1;
      if (degree < best_degree) {
        best_degree = degree;
        best = v;
      }
    }

    std::vector<Factor> touching;
    std::vector<Factor> rest;
    for (Factor& f : factors) {
      if (position_in(f.scope, best) >= 0)
        touching.push_back(std::move(f));
      else
        rest.push_back(std::move(f));
    }
    Factor product = std::move(touching.front());
    for (std::size_t t = 1; t < touching.size(); ++t)
      product = multiply(structure, product, touching[t]);
    rest.push_back(sum_out(structure, product, best));
    factors = std::move(rest);
    to_eliminate.erase(
        std::find(to_eliminate.begin(), to_eliminate.end(), best));
  }

  Factor result;
  result.scope = {};
  result.values = Eigen::ArrayXd::Ones(1);
  for (const Factor& f : factors) result = multiply(structure, result, f);
  return result;
}

namespace {

double evidence_probability_impl(const NetworkStructure& structure,
                                 const std::vector<Factor>& factors) {
  return eliminate_to(structure, factors, {}).values(0);
}

// Posterior over `targets` built from the eliminated factor. Observed
// targets get a degenerate axis fixed at the evidence value.
MarginalResult assemble_marginal(const NetworkStructure& structure,
                                 const Factor& joint_over_hidden_targets,
                                 const Evidence& evidence,
                                 std::vector<int> targets) {
  const Factor& f = joint_over_hidden_targets;
  const double z = f.values.sum();
  if (z == 0.0)
    throw Error(ErrorKind::kZeroEvidence,
                "evidence has probability zero under the parameters");

  MarginalResult result;
  result.targets = std::move(targets);
  result.p_evidence = z;
  result.table.resize(scope_size(structure, result.targets));

  std::vector<int> observed_pos;  // positions of observed targets
  for (std::size_t p = 0; p < result.targets.size(); ++p)
    if (evidence[result.targets[p]] != kMissing)
      observed_pos.push_back(static_cast<int>(p));

  const std::vector<Eigen::Index> strides[] = {
      scope_strides(structure, result.targets),
      aligned_strides(structure, result.targets, f.scope)};
  for_each_assignment(
      structure, result.targets, strides,
      [&](const std::vector<int>& values,
          const std::vector<Eigen::Index>& indices) {
        bool matches = true;
        for (int p : observed_pos)
          if (values[p] != evidence[result.targets[p]]) {
            matches = false;
            break;
          }
        result.table(indices[0]) = matches ? f.values(indices[1]) / z : 0.0;
      });
  return result;
}

MarginalResult marginal_impl(const NetworkStructure& structure,
                             const std::vector<Factor>& factors,
                             const Evidence& evidence,
                             std::vector<int> targets) {
  if (targets.empty())
    throw Error(ErrorKind::kDomain, "marginal requires at least one target");
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  for (int t : targets)
    if (t < 0 || t >= structure.node_count())
      throw Error(ErrorKind::kIndex, "target node index out of range");

  std::vector<int> keep;  // unobserved targets survive the elimination
  for (int t : targets)
    if (evidence[t] == kMissing) keep.push_back(t);

  const Factor joint = eliminate_to(structure, factors, keep);
  return assemble_marginal(structure, joint, evidence, std::move(targets));
}

}  // namespace

MarginalResult marginal(const NetworkStructure& structure,
                        const ParameterSet& params, const Evidence& evidence,
                        std::vector<int> targets) {
  return marginal_impl(structure, reduced_factors(structure, params, evidence),
                       evidence, std::move(targets));
}

Eigen::ArrayXXd family_posterior(const NetworkStructure& structure,
                                 const ParameterSet& params,
                                 const Evidence& evidence, int node) {
  return family_posterior_reduced(
      structure, reduced_factors(structure, params, evidence), evidence, node);
}

Eigen::ArrayXXd family_posterior_reduced(const NetworkStructure& structure,
                                         const std::vector<Factor>& reduced,
                                         const Evidence& evidence, int node) {
  const Node& nd = structure.nodes[node];
  std::vector<int> family = nd.parents;
  family.push_back(node);

  const MarginalResult marg = marginal_impl(structure, reduced, evidence, family);

  // Remap the flat table over the sorted family scope onto (j, k).
  Eigen::ArrayXXd table = Eigen::ArrayXXd::Zero(
      structure.num_parent_configs(node), structure.num_states(node));
  const int child_pos = position_in(marg.targets, node);
  std::vector<int> parent_pos(nd.parents.size());
  for (std::size_t p = 0; p < nd.parents.size(); ++p)
    parent_pos[p] = position_in(marg.targets, nd.parents[p]);

  const std::vector<Eigen::Index> strides[] = {
      scope_strides(structure, marg.targets)};
  std::vector<int> parent_values(nd.parents.size());
  for_each_assignment(
      structure, marg.targets, strides,
      [&](const std::vector<int>& values,
          const std::vector<Eigen::Index>& indices) {
        for (std::size_t p = 0; p < nd.parents.size(); ++p)
          parent_values[p] = values[parent_pos[p]];
        const int j = parent_config_index(structure, node, parent_values);
        table(j, values[child_pos]) = marg.table(indices[0]);
      });
  return table;
}

double evidence_probability(const NetworkStructure& structure,
                            const ParameterSet& params,
                            const Evidence& evidence) {
  return evidence_probability_impl(
      structure, reduced_factors(structure, params, evidence));
}

double evidence_probability_reduced(const NetworkStructure& structure,
                                    const std::vector<Factor>& reduced) {
  return evidence_probability_impl(structure, reduced);
}

LogLikelihood record_log_likelihood(const NetworkStructure& structure,
                                    const ParameterSet& params,
                                    const Evidence& evidence) {
  check_evidence(structure, evidence);
  bool any_observed = false;
  for (int cell : evidence)
    if (cell != kMissing) {
      any_observed = true;
      break;
    }
  if (!any_observed) return {0.0, false};

  const double p = evidence_probability(structure, params, evidence);
  if (p == 0.0)
    return {-std::numeric_limits<double>::infinity(), true};
  return {std::log(p), false};
}

DatasetLogLikelihood dataset_log_likelihood(const NetworkStructure& structure,
                                            const ParameterSet& params,
                                            const Dataset& dataset) {
  DatasetLogLikelihood result{0.0, 0};
  for (const std::vector<int>& record : dataset.records) {
    const LogLikelihood ll = record_log_likelihood(structure, params, record);
    if (ll.zero_evidence) ++result.zero_evidence_records;
    result.value += ll.value;
  }
  if (result.zero_evidence_records > 0)
    result.value = -std::numeric_limits<double>::infinity();
  return result;
}

}  // namespace bnem
