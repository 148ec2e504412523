#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Everything here is deliberately naive: full joints, brute-force loops.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "forensic/bayesnet.hpp"
#include "forensic/population.hpp"

namespace oracle {

using forensic::bn::Cpt;
using forensic::bn::Evidence;
using forensic::bn::Network;
using forensic::bn::NodeId;

inline std::vector<double> random_simplex(std::mt19937_64& rng, std::size_t k, double floor = 0.0) {
  std::uniform_real_distribution<double> u(floor, 1.0);
  std::vector<double> v(k);
  for (auto& x : v) x = u(rng);
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= s;
  return v;
}

inline forensic::MarkerFrequencies random_marker(std::mt19937_64& rng, const std::string& name, std::size_t k) {
  forensic::MarkerFrequencies m;
  m.marker.name = name;
  for (std::size_t i = 0; i < k; ++i) m.marker.alleles.push_back("a" + std::to_string(i));
  m.freqs = random_simplex(rng, k, 0.05);
  return m;
}

// Full joint over every node of the network, no pruning, no ancestral
// restriction. Returns unnormalized P(target = s, evidence).
inline std::vector<double> brute_force_joint(const Network& net, const Evidence& ev, NodeId target) {
  const std::size_t n = net.size();
  std::vector<std::size_t> x(n, 0);
  std::vector<double> out(net.node(target).states.size(), 0.0);
  while (true) {
    bool consistent = true;
    for (const auto& [node, s] : ev) consistent = consistent && x[node] == s;
    if (consistent) {
      double p = 1.0;
      for (NodeId v = 0; v < n && p != 0.0; ++v) {
        std::size_t row = 0;
        for (NodeId par : net.node(v).parents) row = row * net.node(par).states.size() + x[par];
        p *= net.node(v).cpt.prob(row, x[v]);
      }
      out[x[target]] += p;
    }
    std::size_t i = n;
    while (i-- > 0) {
      if (++x[i] < net.node(i).states.size()) break;
      x[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  return out;
}

inline std::vector<double> normalized(std::vector<double> v) {
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= s;
  return v;
}

inline Cpt random_cpt(std::mt19937_64& rng, std::size_t rows, std::size_t states) {
  std::vector<double> values;
  for (std::size_t r = 0; r < rows; ++r) {
    auto row = random_simplex(rng, states, 0.01);
    values.insert(values.end(), row.begin(), row.end());
  }
  return Cpt::dense(states, std::move(values));
}

inline std::vector<std::string> labels(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back("s" + std::to_string(i));
  return out;
}

// Random DAG: node i may take parents among 0..i-1 (edge probability p,
// at most `max_parents`).
inline Network random_dag(std::mt19937_64& rng, std::size_t n, std::size_t max_states, double p,
                          std::size_t max_parents = 3) {
  std::uniform_int_distribution<std::size_t> states(2, max_states);
  std::bernoulli_distribution edge(p);
  Network net;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<NodeId> parents;
    for (std::size_t j = 0; j < i && parents.size() < max_parents; ++j) {
      if (edge(rng)) parents.push_back(j);
    }
    const std::size_t k = states(rng);
    std::size_t rows = 1;
    for (NodeId par : parents) rows *= net.node(par).states.size();
    net.add_node("n" + std::to_string(i), labels(k), parents, random_cpt(rng, rows, k));
  }
  return net;
}

// Random polytree: each new node attaches to one earlier node, as parent or
// child, which keeps the skeleton a tree. CPTs are filled afterwards.
inline Network random_polytree(std::mt19937_64& rng, std::size_t n, std::size_t max_states) {
  std::uniform_int_distribution<std::size_t> states(2, max_states);
  std::bernoulli_distribution as_parent(0.5);
  std::vector<std::size_t> k(n);
  for (auto& x : k) x = states(rng);
  std::vector<std::vector<NodeId>> parents(n);
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    const std::size_t j = pick(rng);
    if (as_parent(rng)) parents[i].push_back(j);  // j -> i
    else parents[j].push_back(i);                 // i -> j
  }
  // Topological order may differ from index order; insert by repeated passes.
  Network net;
  std::vector<NodeId> id(n, static_cast<NodeId>(-1));
  std::size_t placed = 0;
  while (placed < n) {
    for (std::size_t i = 0; i < n; ++i) {
      if (id[i] != static_cast<NodeId>(-1)) continue;
      bool ready = std::all_of(parents[i].begin(), parents[i].end(),
                               [&](NodeId p) { return id[p] != static_cast<NodeId>(-1); });
      if (!ready) continue;
      std::vector<NodeId> ps;
      std::size_t rows = 1;
      for (NodeId p : parents[i]) {
        ps.push_back(id[p]);
        rows *= k[p];
      }
      id[i] = net.add_node("n" + std::to_string(i), labels(k[i]), ps, random_cpt(rng, rows, k[i]));
      ++placed;
    }
  }
  return net;
}

// Conditional mutual information I(S; T | U) from the full joint.
inline double conditional_mutual_information(const Network& net, const std::set<NodeId>& s,
                                             const std::set<NodeId>& t, const std::set<NodeId>& u) {
  const std::size_t n = net.size();
  std::vector<std::size_t> x(n, 0);
  auto key = [&](const std::set<NodeId>& set) {
    std::size_t k = 0;
    for (NodeId v : set) k = k * net.node(v).states.size() + x[v];
    return k;
  };
  std::map<std::array<std::size_t, 3>, double> stu;
  std::map<std::array<std::size_t, 2>, double> su, tu;
  std::map<std::size_t, double> uu;
  while (true) {
    double p = 1.0;
    for (NodeId v = 0; v < n; ++v) {
      std::size_t row = 0;
      for (NodeId par : net.node(v).parents) row = row * net.node(par).states.size() + x[par];
      p *= net.node(v).cpt.prob(row, x[v]);
    }
    const auto ks = key(s), kt = key(t), ku = key(u);
    stu[{ks, kt, ku}] += p;
    su[{ks, ku}] += p;
    tu[{kt, ku}] += p;
    uu[ku] += p;
    std::size_t i = n;
    while (i-- > 0) {
      if (++x[i] < net.node(i).states.size()) break;
      x[i] = 0;
    }
    if (i == static_cast<std::size_t>(-1)) break;
  }
  double cmi = 0.0;
  for (const auto& [k, p] : stu) {
    if (p <= 0.0) continue;
    cmi += p * std::log(p * uu[k[2]] / (su[{k[0], k[2]}] * tu[{k[1], k[2]}]));
  }
  return cmi;
}

// d-separation by enumerating every simple undirected path between S and T
// and testing whether some path is active given U.
inline bool d_separated(const Network& net, const std::set<NodeId>& s, const std::set<NodeId>& t,
                        const std::set<NodeId>& u) {
  const std::size_t n = net.size();
  std::vector<std::set<NodeId>> nbr(n);
  std::vector<std::set<NodeId>> desc(n);
  for (NodeId c = 0; c < n; ++c) {
    for (NodeId p : net.node(c).parents) {
      nbr[c].insert(p);
      nbr[p].insert(c);
    }
  }
  auto is_parent = [&](NodeId p, NodeId c) {
    const auto& ps = net.node(c).parents;
    return std::find(ps.begin(), ps.end(), p) != ps.end();
  };
  // descendants including self
  for (NodeId v = 0; v < n; ++v) {
    std::vector<NodeId> stack{v};
    while (!stack.empty()) {
      NodeId w = stack.back();
      stack.pop_back();
      if (!desc[v].insert(w).second) continue;
      for (NodeId c = 0; c < n; ++c) {
        if (is_parent(w, c)) stack.push_back(c);
      }
    }
  }
  auto collider_open = [&](NodeId z) {
    for (NodeId d : desc[z]) {
      if (u.count(d)) return true;
    }
    return false;
  };
  std::vector<NodeId> path;
  std::vector<bool> on_path(n, false);
  bool active = false;
  auto dfs = [&](auto&& self, NodeId v) -> void {
    if (active) return;
    if (t.count(v) && path.size() > 1) {
      bool ok = true;
      for (std::size_t i = 1; i + 1 < path.size() && ok; ++i) {
        const NodeId a = path[i - 1], z = path[i], b = path[i + 1];
        const bool collider = is_parent(a, z) && is_parent(b, z);
        ok = collider ? collider_open(z) : !u.count(z);
      }
      if (ok) active = true;
      return;
    }
    for (NodeId w : nbr[v]) {
      if (on_path[w]) continue;
      on_path[w] = true;
      path.push_back(w);
      self(self, w);
      path.pop_back();
      on_path[w] = false;
    }
  };
  for (NodeId a : s) {
    path = {a};
    std::fill(on_path.begin(), on_path.end(), false);
    on_path[a] = true;
    dfs(dfs, a);
    if (active) return false;
  }
  return true;
}

// Polya urn joint by direct simulation of the copy-or-fresh rule: the n-th
// gene copies each earlier gene with probability 1/(M+n-1), else is drawn
// fresh from rho.
inline std::vector<double> urn_joint(const std::vector<double>& rho, double m, int draws) {
  const std::size_t k = rho.size();
  std::size_t total = 1;
  for (int i = 0; i < draws; ++i) total *= k;
  std::vector<double> out(total, 0.0);
  std::vector<std::size_t> tuple(draws, 0);
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rest = idx;
    for (int i = draws; i-- > 0;) {
      tuple[i] = rest % k;
      rest /= k;
    }
    double p = 1.0;
    for (int i = 0; i < draws; ++i) {
      const double n = i + 1;
      double q = (m / (m + n - 1.0)) * rho[tuple[i]];
      for (int j = 0; j < i; ++j) {
        if (tuple[j] == tuple[i]) q += 1.0 / (m + n - 1.0);
      }
      p *= q;
    }
    out[idx] = p;
  }
  return out;
}

}  // namespace oracle
