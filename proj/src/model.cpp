#include "bnem/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "bnem/errors.hpp"

namespace bnem {

PriorSpec PriorSpec::uniform(const NetworkStructure& structure, double value) {
  PriorSpec prior;
  prior.alpha.reserve(structure.node_count());
  for (int i = 0; i < structure.node_count(); ++i) {
    prior.alpha.push_back(Eigen::ArrayXXd::Constant(
        structure.num_parent_configs(i), structure.num_states(i), value));
  }
  return prior;
}

std::vector<Violation> validate_network(const NetworkStructure& structure) {
  std::vector<Violation> violations;
  const int n = structure.node_count();

  std::set<std::string> seen_names;
  for (int i = 0; i < n; ++i) {
    const Node& node = structure.nodes[i];
    if (!seen_names.insert(node.name).second)
      violations.push_back({node.name, "duplicate node name"});

    if (node.states.size() < 2)
      violations.push_back(
          {node.name, "node must have at least two states, has " +
                          std::to_string(node.states.size())});

    std::set<std::string> seen_states;
    for (const std::string& s : node.states)
      if (!seen_states.insert(s).second)
        violations.push_back({node.name, "duplicate state label '" + s + "'"});

    std::set<int> seen_parents;
    for (int p : node.parents) {
      if (p < 0 || p >= n) {
        violations.push_back({node.name, "parent reference out of range"});
      } else if (!seen_parents.insert(p).second) {
        violations.push_back(
            {node.name, "duplicate parent '" + structure.nodes[p].name + "'"});
      }
    }
  }

  if (!topological_order(structure)) {
    // Name the nodes stuck on a cycle: those never freed by Kahn's peeling.
    std::vector<int> unemitted_parents(n, 0);
    for (int i = 0; i < n; ++i)
      for (int p : structure.nodes[i].parents)
        if (p >= 0 && p < n) ++unemitted_parents[i];
    std::vector<bool> removed(n, false);
    bool progress = true;
    while (progress) {
      progress = false;
      for (int i = 0; i < n; ++i) {
        if (removed[i] || unemitted_parents[i] != 0) continue;
        removed[i] = true;
        progress = true;
        for (int j = 0; j < n; ++j)
          if (!removed[j])
            for (int p : structure.nodes[j].parents)
              if (p == i) --unemitted_parents[j];
      }
    }
    std::string cycle_nodes;
    for (int i = 0; i < n; ++i)
      if (!removed[i])
        cycle_nodes += (cycle_nodes.empty() ? "" : ",") + structure.nodes[i].name;
    violations.push_back({cycle_nodes, "parent references form a cycle"});
  }

  return violations;
}

std::optional<std::vector<int>> topological_order(
    const NetworkStructure& structure) {
  const int n = structure.node_count();
  std::vector<int> indegree(n, 0);  // number of parents not yet emitted
  for (int i = 0; i < n; ++i) {
    for (int p : structure.nodes[i].parents) {
      if (p < 0 || p >= n) return std::nullopt;
      ++indegree[i];
    }
  }

  std::vector<int> order;
  order.reserve(n);
  std::vector<bool> emitted(n, false);
  for (int step = 0; step < n; ++step) {
    int pick = -1;
    for (int i = 0; i < n; ++i) {
      if (!emitted[i] && indegree[i] == 0) {
        pick = i;
        break;
      }
    }
    if (pick < 0) return std::nullopt;  // cycle
    emitted[pick] = true;
    order.push_back(pick);
    for (int j = 0; j < n; ++j)
      if (!emitted[j])
        for (int p : structure.nodes[j].parents)
          if (p == pick) --indegree[j];
  }
  return order;
}

int parent_config_index(const NetworkStructure& structure, int node,
                        std::span<const int> parent_values) {
  const Node& nd = structure.nodes[node];
  if (parent_values.size() != nd.parents.size())
    throw Error(ErrorKind::kIndex,
                "node '" + nd.name + "': expected " +
                    std::to_string(nd.parents.size()) + " parent values, got " +
                    std::to_string(parent_values.size()));
  int index = 0;
  for (std::size_t p = 0; p < nd.parents.size(); ++p) {
    const int card = structure.num_states(nd.parents[p]);
    const int v = parent_values[p];
    if (v < 0 || v >= card)
      throw Error(ErrorKind::kIndex,
                  "node '" + nd.name + "': value " + std::to_string(v) +
                      " out of range for parent '" +
                      structure.nodes[nd.parents[p]].name + "'");
    index = index * card + v;
  }
  return index;
}

std::vector<int> parent_config_values(const NetworkStructure& structure,
                                      int node, int config) {
  const Node& nd = structure.nodes[node];
  const int q = structure.num_parent_configs(node);
  if (config < 0 || config >= q)
    throw Error(ErrorKind::kIndex,
                "node '" + nd.name + "': configuration " +
                    std::to_string(config) + " out of range [0," +
                    std::to_string(q) + ")");
  std::vector<int> values(nd.parents.size());
  for (std::size_t p = nd.parents.size(); p-- > 0;) {
    const int card = structure.num_states(nd.parents[p]);
    values[p] = config % card;
    config /= card;
  }
  return values;
}

double joint_probability(const NetworkStructure& structure,
                         const ParameterSet& params,
                         std::span<const int> assignment) {
  const int n = structure.node_count();
  if (static_cast<int>(assignment.size()) != n)
    throw Error(ErrorKind::kMissingValue,
                "assignment covers " + std::to_string(assignment.size()) +
                    " of " + std::to_string(n) + " nodes");
  for (int i = 0; i < n; ++i)
    if (assignment[i] < 0 || assignment[i] >= structure.num_states(i))
      throw Error(ErrorKind::kMissingValue,
                  "node '" + structure.nodes[i].name +
                      "' is missing or out of range in the assignment");

  double prob = 1.0;
  std::vector<int> parent_values;
  for (int i = 0; i < n; ++i) {
    const Node& nd = structure.nodes[i];
    parent_values.clear();
    for (int p : nd.parents) parent_values.push_back(assignment[p]);
    const int j = parent_config_index(structure, i, parent_values);
    prob *= params.tables[i](j, assignment[i]);
  }
  return prob;
}

ParameterSet constant_params(const NetworkStructure& structure, double value) {
  ParameterSet params;
  params.tables.reserve(structure.node_count());
  for (int i = 0; i < structure.node_count(); ++i)
    params.tables.push_back(Eigen::ArrayXXd::Constant(
        structure.num_parent_configs(i), structure.num_states(i), value));
  return params;
}

std::vector<Violation> check_parameters(const NetworkStructure& structure,
                                        const ParameterSet& params,
                                        double row_sum_tolerance) {
  std::vector<Violation> violations;
  if (static_cast<int>(params.tables.size()) != structure.node_count()) {
    violations.push_back({"", "parameter set has " +
                                  std::to_string(params.tables.size()) +
                                  " tables for " +
                                  std::to_string(structure.node_count()) +
                                  " nodes"});
    return violations;
  }
  for (int i = 0; i < structure.node_count(); ++i) {
    const Eigen::ArrayXXd& table = params.tables[i];
    const std::string& name = structure.nodes[i].name;
    if (table.rows() != structure.num_parent_configs(i) ||
        table.cols() != structure.num_states(i)) {
      violations.push_back({name, "table shape mismatch"});
      continue;
    }
    for (Eigen::Index j = 0; j < table.rows(); ++j) {
      const double sum = table.row(j).sum();
      if (std::abs(sum - 1.0) > row_sum_tolerance)
        violations.push_back({name, "row " + std::to_string(j) + " sums to " +
                                        std::to_string(sum)});
      for (Eigen::Index k = 0; k < table.cols(); ++k)
        if (!(table(j, k) >= 0.0) || table(j, k) > 1.0)
          violations.push_back({name, "entry (" + std::to_string(j) + "," +
                                          std::to_string(k) +
                                          ") outside [0,1]"});
    }
  }
  return violations;
}

double max_abs_diff(const ParameterSet& a, const ParameterSet& b) {
  double delta = 0.0;
  for (std::size_t i = 0; i < a.tables.size(); ++i)
    delta = std::max(delta, (a.tables[i] - b.tables[i]).abs().maxCoeff());
  return delta;
}

long count_zero_entries(const ParameterSet& params) {
  long zeros = 0;
  for (const Eigen::ArrayXXd& table : params.tables)
    zeros += (table == 0.0).count();
  return zeros;
}

}  // namespace bnem
