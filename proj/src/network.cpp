#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "forensic/bayesnet.hpp"

namespace forensic::bn {

Cpt Cpt::dense(std::size_t states, std::vector<double> values) {
  Cpt c;
  c.states_ = states;
  c.values_ = std::move(values);
  return c;
}

Cpt Cpt::deterministic(std::size_t states, std::vector<std::uint32_t> outcome) {
  Cpt c;
  c.states_ = states;
  c.deterministic_ = true;
  c.outcome_ = std::move(outcome);
  return c;
}

std::size_t Cpt::rows() const noexcept {
  if (deterministic_) return outcome_.size();
  return states_ == 0 ? 0 : values_.size() / states_;
}

double Cpt::prob(std::size_t row, StateIndex state) const {
  if (deterministic_) return outcome_[row] == state ? 1.0 : 0.0;
  return values_[row * states_ + state];
}

std::size_t Cpt::max_row_support() const {
  if (deterministic_) return 1;
  std::size_t best = 0;
  for (std::size_t r = 0; r < rows(); ++r) {
    std::size_t n = 0;
    for_each_nonzero(r, [&](StateIndex, double) { ++n; });
    best = std::max(best, n);
  }
  return best;
}

NodeId Network::add_node(std::string name, std::vector<std::string> states) {
  if (index_.count(name)) throw Error(Errc::name_collision, "node '" + name + "' already exists");
  if (states.empty()) throw Error(Errc::invalid_argument, "node '" + name + "' has no states");
  const NodeId id = nodes_.size();
  index_.emplace(name, id);
  nodes_.push_back(Node{std::move(name), std::move(states), {}, {}});
  return id;
}

NodeId Network::add_node(std::string name, std::vector<std::string> states,
                         std::vector<NodeId> parents, Cpt cpt) {
  const NodeId id = add_node(std::move(name), std::move(states));
  for (NodeId p : parents) add_edge(p, id);
  set_cpt(id, std::move(cpt));
  return id;
}

void Network::add_edge(NodeId parent, NodeId child) {
  if (parent >= nodes_.size() || child >= nodes_.size()) {
    throw Error(Errc::unknown_node, "edge endpoint out of range");
  }
  nodes_[child].parents.push_back(parent);
}

void Network::set_cpt(NodeId node, Cpt cpt) { nodes_.at(node).cpt = std::move(cpt); }

std::optional<NodeId> Network::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeId Network::id(std::string_view name) const {
  if (auto n = find(name)) return *n;
  throw Error(Errc::unknown_node, "no node named '" + std::string(name) + "'");
}

StateIndex Network::state_index(NodeId node, std::string_view state) const {
  const auto& st = nodes_.at(node).states;
  for (StateIndex i = 0; i < st.size(); ++i) {
    if (st[i] == state) return i;
  }
  throw Error(Errc::invalid_argument,
              "node '" + nodes_[node].name + "' has no state '" + std::string(state) + "'");
}

std::vector<std::vector<NodeId>> Network::children() const {
  std::vector<std::vector<NodeId>> out(nodes_.size());
  for (NodeId c = 0; c < nodes_.size(); ++c) {
    for (NodeId p : nodes_[c].parents) out[p].push_back(c);
  }
  return out;
}

std::size_t Network::parent_configurations(NodeId node) const {
  std::size_t rows = 1;
  for (NodeId p : nodes_.at(node).parents) rows *= nodes_[p].states.size();
  return rows;
}

Evidence make_evidence(const Network& net, const std::map<std::string, std::string>& findings) {
  Evidence ev;
  for (const auto& [name, state] : findings) {
    const NodeId n = net.id(name);
    ev[n] = net.state_index(n, state);
  }
  return ev;
}

std::vector<Issue> validate(const Network& net) {
  std::vector<Issue> issues;
  for (NodeId n = 0; n < net.size(); ++n) {
    const auto& node = net.node(n);
    for (NodeId p : node.parents) {
      if (p == n) issues.push_back({Errc::cycle_detected, "node '" + node.name + "' is its own parent"});
    }
    const std::size_t rows = net.parent_configurations(n);
    const auto& cpt = node.cpt;
    if (cpt.states() != node.states.size() || cpt.rows() != rows ||
        (!cpt.is_deterministic() && cpt.values().size() != rows * node.states.size())) {
      issues.push_back({Errc::cpt_shape_mismatch,
                        "node '" + node.name + "' needs " + std::to_string(rows) + " rows of " +
                            std::to_string(node.states.size()) + " states"});
      continue;
    }
    if (cpt.is_deterministic()) {
      for (auto s : cpt.outcomes()) {
        if (s >= node.states.size()) {
          issues.push_back({Errc::cpt_shape_mismatch,
                            "node '" + node.name + "' deterministic state out of range"});
          break;
        }
      }
      continue;
    }
    for (std::size_t r = 0; r < rows; ++r) {
      double sum = 0.0;
      bool negative = false;
      for (StateIndex s = 0; s < node.states.size(); ++s) {
        const double v = cpt.prob(r, s);
        negative = negative || !(v >= 0.0);
        sum += v;
      }
      if (negative || std::abs(sum - 1.0) > kRowTolerance) {
        issues.push_back({Errc::row_not_normalized, "node '" + node.name + "' row " +
                                                        std::to_string(r) + " sums to " +
                                                        std::to_string(sum)});
        break;
      }
    }
  }
  bool self_loop = std::any_of(issues.begin(), issues.end(),
                               [](const Issue& i) { return i.code == Errc::cycle_detected; });
  if (!self_loop) {
    try {
      topological_order(net);
    } catch (const Error& e) {
      issues.push_back({e.code(), e.what()});
    }
  }
  return issues;
}

void ensure_valid(const Network& net) {
  auto issues = validate(net);
  if (!issues.empty()) throw Error(issues.front().code, issues.front().message);
}

std::vector<NodeId> topological_order(const Network& net) {
  std::vector<std::size_t> indegree(net.size(), 0);
  for (NodeId n = 0; n < net.size(); ++n) indegree[n] = net.node(n).parents.size();
  const auto kids = net.children();
  std::vector<NodeId> order;
  std::deque<NodeId> ready;
  for (NodeId n = 0; n < net.size(); ++n) {
    if (indegree[n] == 0) ready.push_back(n);
  }
  while (!ready.empty()) {
    NodeId n = ready.front();
    ready.pop_front();
    order.push_back(n);
    for (NodeId c : kids[n]) {
      if (--indegree[c] == 0) ready.push_back(c);
    }
  }
  if (order.size() != net.size()) {
    for (NodeId n = 0; n < net.size(); ++n) {
      if (indegree[n] > 0) {
        throw Error(Errc::cycle_detected, "cycle through node '" + net.node(n).name + "'");
      }
    }
  }
  return order;
}

bool is_polytree(const Network& net) {
  std::vector<NodeId> parent(net.size());
  std::iota(parent.begin(), parent.end(), NodeId{0});
  auto root = [&](NodeId x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (NodeId c = 0; c < net.size(); ++c) {
    for (NodeId p : net.node(c).parents) {
      NodeId a = root(p), b = root(c);
      if (a == b) return false;
      parent[a] = b;
    }
  }
  return true;
}

bool conditionally_independent(const Network& net, const std::set<NodeId>& s,
                               const std::set<NodeId>& t, const std::set<NodeId>& u) {
  for (const auto* set : {&s, &t, &u}) {
    for (NodeId n : *set) {
      if (n >= net.size()) throw Error(Errc::unknown_node, "node id out of range");
    }
  }
  auto overlaps = [](const std::set<NodeId>& a, const std::set<NodeId>& b) {
    return std::any_of(a.begin(), a.end(), [&](NodeId n) { return b.count(n) > 0; });
  };
  if (overlaps(s, t) || overlaps(s, u) || overlaps(t, u)) {
    throw Error(Errc::invalid_argument, "S, T and U must be disjoint");
  }
  if (s.empty() || t.empty()) return true;

  // Ancestral set of S, T and U.
  std::vector<bool> keep(net.size(), false);
  std::vector<NodeId> stack;
  for (const auto* set : {&s, &t, &u}) stack.insert(stack.end(), set->begin(), set->end());
  while (!stack.empty()) {
    NodeId n = stack.back();
    stack.pop_back();
    if (keep[n]) continue;
    keep[n] = true;
    for (NodeId p : net.node(n).parents) stack.push_back(p);
  }

  // Moral graph: drop directions and marry co-parents.
  std::vector<std::set<NodeId>> adj(net.size());
  for (NodeId c = 0; c < net.size(); ++c) {
    if (!keep[c]) continue;
    const auto& ps = net.node(c).parents;
    for (std::size_t i = 0; i < ps.size(); ++i) {
      adj[ps[i]].insert(c);
      adj[c].insert(ps[i]);
      for (std::size_t j = i + 1; j < ps.size(); ++j) {
        if (ps[i] == ps[j]) continue;
        adj[ps[i]].insert(ps[j]);
        adj[ps[j]].insert(ps[i]);
      }
    }
  }

  // Search from S avoiding U.
  std::vector<bool> seen(net.size(), false);
  std::deque<NodeId> queue(s.begin(), s.end());
  for (NodeId n : s) seen[n] = true;
  while (!queue.empty()) {
    NodeId n = queue.front();
    queue.pop_front();
    if (t.count(n)) return false;
    for (NodeId m : adj[n]) {
      if (!seen[m] && !u.count(m)) {
        seen[m] = true;
        queue.push_back(m);
      }
    }
  }
  return true;
}

bool conditionally_independent(const Network& net, const std::vector<std::string>& s,
                               const std::vector<std::string>& t,
                               const std::vector<std::string>& u) {
  auto ids = [&](const std::vector<std::string>& names) {
    std::set<NodeId> out;
    for (const auto& n : names) out.insert(net.id(n));
    return out;
  };
  return conditionally_independent(net, ids(s), ids(t), ids(u));
}

}  // namespace forensic::bn
