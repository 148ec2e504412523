#include <deque>
#include <numeric>

#include "forensic/bayesnet.hpp"

namespace forensic::bn {

namespace {

void check_evidence(const Network& net, const Evidence& evidence) {
  for (const auto& [n, s] : evidence) {
    if (n >= net.size()) throw Error(Errc::unknown_node, "evidence on unknown node");
    if (s >= net.node(n).states.size()) {
      throw Error(Errc::invalid_argument, "evidence state out of range for '" + net.node(n).name + "'");
    }
  }
}

bool normalize(std::vector<double>& v) {
  const double sum = std::accumulate(v.begin(), v.end(), 0.0);
  if (!(sum > 0.0)) return false;
  for (double& x : v) x /= sum;
  return true;
}

// Pearl's polytree propagation. Edge e runs parent -> child; pi_[e] is the
// message the parent sends its child (over parent states), lambda_[e] the
// message the child sends its parent (over parent states).
class PolytreePropagator {
 public:
  PolytreePropagator(const Network& net, const Evidence& evidence) : net_(net), ev_(evidence) {
    parent_edges_.resize(net.size());
    child_edges_.resize(net.size());
    for (NodeId c = 0; c < net.size(); ++c) {
      for (NodeId p : net.node(c).parents) {
        const std::size_t e = edges_.size();
        edges_.push_back({p, c});
        parent_edges_[c].push_back(e);
        child_edges_[p].push_back(e);
      }
    }
    pi_.resize(edges_.size());
    lambda_.resize(edges_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const std::size_t k = net.node(edges_[e].parent).states.size();
      pi_[e].assign(k, 1.0 / static_cast<double>(k));
      lambda_[e].assign(k, 1.0);
    }
  }

  BeliefState run() {
    schedule();
    BeliefState out;
    out.beliefs.resize(net_.size());
    for (NodeId n = 0; n < net_.size(); ++n) {
      auto p = pi(n);
      auto l = lambda(n);
      for (std::size_t x = 0; x < p.size(); ++x) p[x] *= l[x];
      if (!normalize(p)) {
        throw Error(Errc::impossible_evidence,
                    "evidence has probability zero (at node '" + net_.node(n).name + "')");
      }
      out.beliefs[n] = std::move(p);
    }
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      const auto [p, c] = edges_[e];
      out.messages.push_back({Message::Direction::from_parents, p, c, p, pi_[e]});
      out.messages.push_back({Message::Direction::from_children, c, p, p, lambda_[e]});
    }
    return out;
  }

 private:
  struct Edge {
    NodeId parent;
    NodeId child;
  };

  double indicator(NodeId n, StateIndex x) const {
    auto it = ev_.find(n);
    return it == ev_.end() || it->second == x ? 1.0 : 0.0;
  }

  // Iterates CPT rows of `n` with parent state decoding; f(row, parent_states).
  template <class F>
  void for_each_row(NodeId n, F&& f) const {
    const auto& parents = net_.node(n).parents;
    std::vector<StateIndex> u(parents.size(), 0);
    const std::size_t rows = net_.node(n).cpt.rows();
    for (std::size_t r = 0; r < rows; ++r) {
      f(r, u);
      for (std::size_t j = parents.size(); j-- > 0;) {
        if (++u[j] < net_.node(parents[j]).states.size()) break;
        u[j] = 0;
      }
    }
  }

  // m+(x): CPT-weighted marginalization of the parent messages.
  std::vector<double> pi(NodeId n) const {
    const auto& node = net_.node(n);
    std::vector<double> out(node.states.size(), 0.0);
    const auto& pe = parent_edges_[n];
    for_each_row(n, [&](std::size_t r, const std::vector<StateIndex>& u) {
      double w = 1.0;
      for (std::size_t j = 0; j < pe.size() && w != 0.0; ++j) w *= pi_[pe[j]][u[j]];
      if (w == 0.0) return;
      node.cpt.for_each_nonzero(r, [&](StateIndex x, double p) { out[x] += w * p; });
    });
    return out;
  }

  // m-(x) times the evidence indicator.
  std::vector<double> lambda(NodeId n, std::size_t skip_edge = SIZE_MAX) const {
    const std::size_t k = net_.node(n).states.size();
    std::vector<double> out(k);
    for (StateIndex x = 0; x < k; ++x) out[x] = indicator(n, x);
    for (std::size_t e : child_edges_[n]) {
      if (e == skip_edge) continue;
      for (StateIndex x = 0; x < k; ++x) out[x] *= lambda_[e][x];
    }
    return out;
  }

  void send_pi(std::size_t e) {
    const NodeId z = edges_[e].parent;
    auto msg = pi(z);
    const auto l = lambda(z, e);
    for (std::size_t x = 0; x < msg.size(); ++x) msg[x] *= l[x];
    if (!normalize(msg)) std::fill(msg.begin(), msg.end(), 0.0);
    pi_[e] = std::move(msg);
  }

  void send_lambda(std::size_t e) {
    const NodeId y = edges_[e].child;
    const NodeId x = edges_[e].parent;
    const auto& node = net_.node(y);
    const auto& pe = parent_edges_[y];
    std::size_t slot = 0;
    while (pe[slot] != e) ++slot;
    const auto ly = lambda(y);
    std::vector<double> out(net_.node(x).states.size(), 0.0);
    for_each_row(y, [&](std::size_t r, const std::vector<StateIndex>& u) {
      double w = 1.0;
      for (std::size_t j = 0; j < pe.size() && w != 0.0; ++j) {
        if (j != slot) w *= pi_[pe[j]][u[j]];
      }
      if (w == 0.0) return;
      double s = 0.0;
      node.cpt.for_each_nonzero(r, [&](StateIndex yy, double p) { s += p * ly[yy]; });
      out[u[slot]] += w * s;
    });
    lambda_[e] = std::move(out);
  }

  // Leaves-inward then outward over a spanning BFS of each component.
  void schedule() {
    std::vector<std::vector<std::size_t>> incident(net_.size());
    for (std::size_t e = 0; e < edges_.size(); ++e) {
      incident[edges_[e].parent].push_back(e);
      incident[edges_[e].child].push_back(e);
    }
    std::vector<bool> seen(net_.size(), false);
    std::vector<std::pair<NodeId, std::size_t>> order;  // node, edge to its tree parent
    for (NodeId r = 0; r < net_.size(); ++r) {
      if (seen[r]) continue;
      seen[r] = true;
      std::deque<NodeId> queue{r};
      order.push_back({r, SIZE_MAX});
      while (!queue.empty()) {
        NodeId v = queue.front();
        queue.pop_front();
        for (std::size_t e : incident[v]) {
          NodeId w = edges_[e].parent == v ? edges_[e].child : edges_[e].parent;
          if (seen[w]) continue;
          seen[w] = true;
          order.push_back({w, e});
          queue.push_back(w);
        }
      }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const auto [v, e] = *it;
      if (e == SIZE_MAX) continue;
      if (edges_[e].child == v) send_lambda(e);
      else send_pi(e);
    }
    for (const auto& [v, e] : order) {
      if (e == SIZE_MAX) continue;
      if (edges_[e].child == v) send_pi(e);
      else send_lambda(e);
    }
  }

  const Network& net_;
  const Evidence& ev_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> parent_edges_;
  std::vector<std::vector<std::size_t>> child_edges_;
  std::vector<std::vector<double>> pi_;
  std::vector<std::vector<double>> lambda_;
};

}  // namespace

BeliefState propagate_all(const Network& net, const Evidence& evidence) {
  ensure_valid(net);
  if (!is_polytree(net)) {
    throw Error(Errc::not_polytree, "message passing needs a polytree; use enumeration");
  }
  check_evidence(net, evidence);
  return PolytreePropagator(net, evidence).run();
}

std::vector<double> propagate(const Network& net, const Evidence& evidence, NodeId target) {
  if (target >= net.size()) throw Error(Errc::unknown_node, "target out of range");
  return propagate_all(net, evidence).beliefs[target];
}

Inference infer(const Network& net, const Evidence& evidence, NodeId target) {
  if (is_polytree(net)) return {propagate(net, evidence, target), "propagation"};
  return {enumerate_joint(net, evidence, target), "enumeration"};
}

}  // namespace forensic::bn
