#ifndef BNEM_MODEL_HPP
#define BNEM_MODEL_HPP

#include <Eigen/Core>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace bnem {

/// Sentinel for an unobserved cell in records and evidence.
inline constexpr int kMissing = -1;

struct Node {
  std::string name;
  std::vector<std::string> states;
  std::vector<int> parents;  // indices into NetworkStructure::nodes
};

/// The DAG skeleton of a discrete network: node names, per-node state
/// labels and parent lists. Immutable by convention once built; all
/// mutation happens by constructing a new value.
struct NetworkStructure {
  std::vector<Node> nodes;

  int node_count() const { return static_cast<int>(nodes.size()); }

  /// Number of states of node i.
  int num_states(int i) const {
    return static_cast<int>(nodes[i].states.size());
  }

  /// Number of parent configurations of node i (1 for roots).
  int num_parent_configs(int i) const {
    int q = 1;
    for (int p : nodes[i].parents) q *= num_states(p);
    return q;
  }

  /// Index of the named node, -1 when absent.
  int find_node(std::string_view name) const {
    for (int i = 0; i < node_count(); ++i)
      if (nodes[i].name == name) return i;
    return -1;
  }

  /// Index of the labeled state of node i, -1 when absent.
  int find_state(int i, std::string_view label) const {
    for (int k = 0; k < num_states(i); ++k)
      if (nodes[i].states[k] == label) return k;
    return -1;
  }
};

/// One conditional probability table per node: rows indexed by parent
/// configuration, columns by state. Rows sum to one.
struct ParameterSet {
  std::vector<Eigen::ArrayXXd> tables;
};

/// Dirichlet hyperparameters, one table per node shaped like the CPTs.
struct PriorSpec {
  std::vector<Eigen::ArrayXXd> alpha;

  static PriorSpec uniform(const NetworkStructure& structure, double value);

  /// Row totals alpha_{i,j} for node i.
  Eigen::ArrayXd row_sums(int i) const { return alpha[i].rowwise().sum(); }
};

struct Violation {
  std::string node;     // offending node name(s)
  std::string message;
};

/// Structural validation. Returns an empty list iff the structure is a
/// well-formed DAG with unique names, unique per-node state labels, at
/// least two states per node and distinct in-range parent references.
/// Violations are data, not failures.
std::vector<Violation> validate_network(const NetworkStructure& structure);

/// Topological order (parents before children), or nullopt when the parent
/// graph has a cycle. Deterministic: among ready nodes the lowest index is
/// emitted first.
std::optional<std::vector<int>> topological_order(
    const NetworkStructure& structure);

/// Flat configuration index of a parent value tuple. Mixed radix with the
/// last listed parent varying fastest; bijective onto 0..q_i-1.
int parent_config_index(const NetworkStructure& structure, int node,
                        std::span<const int> parent_values);

/// Inverse of parent_config_index.
std::vector<int> parent_config_values(const NetworkStructure& structure,
                                      int node, int config);

/// Probability of one full assignment: the product over nodes of the CPT
/// entry selected by the assignment.
double joint_probability(const NetworkStructure& structure,
                         const ParameterSet& params,
                         std::span<const int> assignment);

/// ParameterSet shaped for the structure with every entry set to value.
ParameterSet constant_params(const NetworkStructure& structure, double value);

/// Violations of the ParameterSet invariants (row sums within tol of one,
/// entries in [0,1], one correctly shaped table per node).
std::vector<Violation> check_parameters(const NetworkStructure& structure,
                                        const ParameterSet& params,
                                        double row_sum_tolerance = 1e-9);

/// Largest absolute entrywise difference between two parameter sets of
/// identical shape.
double max_abs_diff(const ParameterSet& a, const ParameterSet& b);

/// Number of entries exactly equal to zero.
long count_zero_entries(const ParameterSet& params);

}  // namespace bnem

#endif  // BNEM_MODEL_HPP
