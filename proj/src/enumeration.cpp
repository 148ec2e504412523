#include <algorithm>
#include <numeric>

#include "forensic/bayesnet.hpp"

namespace forensic::bn {

namespace {

// Depth-first summation of the factored joint. Nodes that are not ancestors
// of a target or an observed node sum out to one and are skipped.
class Enumerator {
 public:
  Enumerator(const Network& net, const Evidence& evidence, std::span<const NodeId> targets)
      : net_(net), ev_(evidence), targets_(targets.begin(), targets.end()) {
    ensure_valid(net);
    for (const auto& [n, s] : evidence) {
      if (n >= net.size()) throw Error(Errc::unknown_node, "evidence on unknown node");
      if (s >= net.node(n).states.size()) {
        throw Error(Errc::invalid_argument, "evidence state out of range for '" + net.node(n).name + "'");
      }
    }
    std::size_t cells = 1;
    for (NodeId t : targets_) {
      if (t >= net.size()) throw Error(Errc::unknown_node, "target out of range");
      cells *= net.node(t).states.size();
    }
    table_.assign(cells, 0.0);
    build_order();
    assignment_.assign(net.size(), 0);
  }

  std::vector<double> run() {
    visit(0, 1.0);
    return std::move(table_);
  }

 private:
  void build_order() {
    std::vector<bool> relevant(net_.size(), false);
    std::vector<NodeId> stack(targets_.begin(), targets_.end());
    for (const auto& [n, _] : ev_) stack.push_back(n);
    while (!stack.empty()) {
      NodeId n = stack.back();
      stack.pop_back();
      if (relevant[n]) continue;
      relevant[n] = true;
      for (NodeId p : net_.node(n).parents) stack.push_back(p);
    }
    // Observed nodes go right after their ancestors, cheapest first, so
    // inconsistent branches are cut as early as possible.
    std::vector<bool> placed(net_.size(), false);
    auto place = [&](auto&& self, NodeId n) -> void {
      if (placed[n]) return;
      for (NodeId p : net_.node(n).parents) self(self, p);
      placed[n] = true;
      order_.push_back(n);
    };
    auto unplaced_ancestors = [&](NodeId n) {
      std::vector<bool> seen(net_.size(), false);
      std::vector<NodeId> todo{n};
      std::size_t count = 0;
      while (!todo.empty()) {
        NodeId v = todo.back();
        todo.pop_back();
        if (seen[v] || placed[v]) continue;
        seen[v] = true;
        ++count;
        for (NodeId p : net_.node(v).parents) todo.push_back(p);
      }
      return count;
    };
    std::vector<NodeId> observed;
    for (const auto& [n, _] : ev_) observed.push_back(n);
    while (!observed.empty()) {
      auto best = std::min_element(observed.begin(), observed.end(), [&](NodeId a, NodeId b) {
        return unplaced_ancestors(a) < unplaced_ancestors(b);
      });
      place(place, *best);
      observed.erase(best);
    }
    for (NodeId t : targets_) place(place, t);
    strides_.resize(net_.size());
    for (NodeId n : order_) {
      const auto& ps = net_.node(n).parents;
      strides_[n].assign(ps.size(), 1);
      for (std::size_t j = ps.size(); j-- > 1;) {
        strides_[n][j - 1] = strides_[n][j] * net_.node(ps[j]).states.size();
      }
    }
  }

  std::size_t row_of(NodeId n) const {
    const auto& ps = net_.node(n).parents;
    std::size_t r = 0;
    for (std::size_t j = 0; j < ps.size(); ++j) r += assignment_[ps[j]] * strides_[n][j];
    return r;
  }

  void visit(std::size_t depth, double weight) {
    if (depth == order_.size()) {
      if (++configurations_ > kMaxEnumeratedConfigurations) {
        throw Error(Errc::state_space_too_large,
                    "more than 1e7 configurations are consistent with the evidence");
      }
      std::size_t cell = 0;
      for (NodeId t : targets_) cell = cell * net_.node(t).states.size() + assignment_[t];
      table_[cell] += weight;
      return;
    }
    const NodeId n = order_[depth];
    const std::size_t r = row_of(n);
    const auto& cpt = net_.node(n).cpt;
    auto observed = ev_.find(n);
    if (observed != ev_.end()) {
      const double p = cpt.prob(r, observed->second);
      if (p == 0.0) return;
      assignment_[n] = observed->second;
      visit(depth + 1, weight * p);
      return;
    }
    cpt.for_each_nonzero(r, [&](StateIndex s, double p) {
      assignment_[n] = s;
      visit(depth + 1, weight * p);
    });
  }

  const Network& net_;
  const Evidence& ev_;
  std::vector<NodeId> targets_;
  std::vector<NodeId> order_;
  std::vector<std::vector<std::size_t>> strides_;
  std::vector<StateIndex> assignment_;
  std::vector<double> table_;
  double configurations_ = 0.0;
};

}  // namespace

std::vector<double> joint_marginal(const Network& net, const Evidence& evidence,
                                   std::span<const NodeId> targets) {
  return Enumerator(net, evidence, targets).run();
}

std::vector<double> enumerate_joint(const Network& net, const Evidence& evidence, NodeId target) {
  const NodeId targets[] = {target};
  auto table = joint_marginal(net, evidence, targets);
  const double z = std::accumulate(table.begin(), table.end(), 0.0);
  if (!(z > 0.0)) throw Error(Errc::impossible_evidence, "evidence has probability zero");
  for (double& p : table) p /= z;
  return table;
}

double evidence_probability(const Network& net, const Evidence& evidence) {
  auto table = joint_marginal(net, evidence, {});
  return table.front();
}

}  // namespace forensic::bn
