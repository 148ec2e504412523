#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "forensic/error.hpp"

namespace forensic::bn {

using NodeId = std::size_t;
using StateIndex = std::size_t;

/// Conditional probability table of a node: one row per parent configuration
/// (row-major, first parent most significant), one column per node state.
/// Deterministic tables store the single reachable state of each row.
class Cpt {
 public:
  Cpt() = default;
  static Cpt dense(std::size_t states, std::vector<double> values);
  static Cpt deterministic(std::size_t states, std::vector<std::uint32_t> outcome);

  bool is_deterministic() const noexcept { return deterministic_; }
  std::size_t states() const noexcept { return states_; }
  std::size_t rows() const noexcept;
  double prob(std::size_t row, StateIndex state) const;

  const std::vector<double>& values() const noexcept { return values_; }
  const std::vector<std::uint32_t>& outcomes() const noexcept { return outcome_; }

  template <class F>
  void for_each_nonzero(std::size_t row, F&& f) const {
    if (deterministic_) {
      f(static_cast<StateIndex>(outcome_[row]), 1.0);
      return;
    }
    const double* r = values_.data() + row * states_;
    for (StateIndex s = 0; s < states_; ++s) {
      if (r[s] != 0.0) f(s, r[s]);
    }
  }

  /// Largest number of nonzero entries in any row.
  std::size_t max_row_support() const;

  friend bool operator==(const Cpt&, const Cpt&) = default;

 private:
  std::size_t states_ = 0;
  bool deterministic_ = false;
  std::vector<double> values_;
  std::vector<std::uint32_t> outcome_;
};

struct Node {
  std::string name;
  std::vector<std::string> states;
  std::vector<NodeId> parents;
  Cpt cpt;

  friend bool operator==(const Node&, const Node&) = default;
};

/// Discrete directed graph with conditional probability tables. Nodes keep
/// insertion order; parents keep declaration order.
class Network {
 public:
  /// Throws Errc::name_collision for a duplicate name.
  NodeId add_node(std::string name, std::vector<std::string> states);
  NodeId add_node(std::string name, std::vector<std::string> states, std::vector<NodeId> parents,
                  Cpt cpt);
  void add_edge(NodeId parent, NodeId child);
  void set_cpt(NodeId node, Cpt cpt);

  std::size_t size() const noexcept { return nodes_.size(); }
  const Node& node(NodeId id) const { return nodes_.at(id); }
  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::optional<NodeId> find(std::string_view name) const;
  /// Throws Errc::unknown_node.
  NodeId id(std::string_view name) const;
  /// Throws Errc::invalid_argument for an unknown state label.
  StateIndex state_index(NodeId node, std::string_view state) const;
  std::vector<std::vector<NodeId>> children() const;
  /// Number of parent configurations (CPT rows) implied by the parents.
  std::size_t parent_configurations(NodeId node) const;

  friend bool operator==(const Network& a, const Network& b) { return a.nodes_ == b.nodes_; }

 private:
  std::vector<Node> nodes_;
  std::unordered_map<std::string, NodeId> index_;
};

/// Observed node -> observed state.
using Evidence = std::map<NodeId, StateIndex>;

/// Resolves {node name: state label} against a network.
Evidence make_evidence(const Network& net, const std::map<std::string, std::string>& findings);

inline constexpr double kRowTolerance = 1e-9;

struct Issue {
  Errc code;
  std::string message;
};

/// Acyclicity, CPT shape and row normalization. Empty result means valid.
std::vector<Issue> validate(const Network& net);
/// Throws the first validation issue.
void ensure_valid(const Network& net);

/// Topological order; throws Errc::cycle_detected.
std::vector<NodeId> topological_order(const Network& net);

/// True when the undirected skeleton has no cycle.
bool is_polytree(const Network& net);

/// Moralization criterion: S and T are separated by U in the moral graph of
/// the ancestral set of S, T and U. Sets must be disjoint.
bool conditionally_independent(const Network& net, const std::set<NodeId>& s,
                               const std::set<NodeId>& t, const std::set<NodeId>& u);
bool conditionally_independent(const Network& net, const std::vector<std::string>& s,
                               const std::vector<std::string>& t,
                               const std::vector<std::string>& u);

/// A message along one edge, expressed over the states of `about`, the node
/// at the parent end of the edge.
struct Message {
  enum class Direction { from_parents, from_children };
  Direction direction;
  NodeId from;
  NodeId to;
  NodeId about;
  std::vector<double> values;
};

struct BeliefState {
  std::vector<std::vector<double>> beliefs;  // normalized posterior per node
  std::vector<Message> messages;
};

/// Two-pass exact message passing on a polytree. Throws Errc::not_polytree
/// and Errc::impossible_evidence.
BeliefState propagate_all(const Network& net, const Evidence& evidence);
std::vector<double> propagate(const Network& net, const Evidence& evidence, NodeId target);

inline constexpr double kMaxEnumeratedConfigurations = 1e7;

/// Unnormalized P(targets, evidence) over target configurations (row-major,
/// first target most significant), by summing the factored joint over every
/// configuration of the relevant ancestral subnetwork consistent with the
/// evidence. Throws Errc::state_space_too_large past
/// kMaxEnumeratedConfigurations consistent configurations.
std::vector<double> joint_marginal(const Network& net, const Evidence& evidence,
                                   std::span<const NodeId> targets);
/// Normalized posterior of one node by enumeration.
std::vector<double> enumerate_joint(const Network& net, const Evidence& evidence, NodeId target);
/// P(evidence).
double evidence_probability(const Network& net, const Evidence& evidence);

struct Inference {
  std::vector<double> posterior;
  std::string engine;  // "propagation" or "enumeration"
};

/// Message passing on polytrees, enumeration otherwise.
Inference infer(const Network& net, const Evidence& evidence, NodeId target);

/// JSON network document:
///   {"nodes": [{"name", "states"}], "edges": [[parent, child]],
///    "cpts": {name: nested arrays | {"deterministic": [state per row]}}}
/// Parent order is edge declaration order. Throws Errc::invalid_argument on
/// malformed documents, then runs ensure_valid.
Network parse_network(std::string_view json_text);
Network load_network(const std::filesystem::path& path);
std::string to_json(const Network& net);
/// Graphviz DOT; nodes are grouped into clusters by the prefix before the
/// last '.' of their name, observed nodes are filled.
std::string to_dot(const Network& net, const Evidence& evidence = {});

}  // namespace forensic::bn
