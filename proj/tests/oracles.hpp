// Independent brute-force oracles used by the tests. These deliberately do
// not share code with the library implementations they check.
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "qlab/qpoint.hpp"
#include "qlab/transport.hpp"

namespace qlab_test {

// Minimum matching cost by enumerating all q! permutations.
inline double exhaustive_matching_cost(const qlab::QPoint& a, const qlab::QPoint& b) {
  const int q = a.q();
  const int n = a.n();
  std::vector<int> perm(q);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < q; ++i) {
      const auto sa = a.sheet(i);
      const auto sb = b.sheet(perm[i]);
      for (int k = 0; k < n; ++k) {
        const double d = sa[k] - sb[k];
        c += d * d;
      }
    }
    best = std::min(best, c);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

// Brute-force enumeration of the basic flow patterns of a network LP with
// node balances: the vertices of the flow polytope are the sign-feasible
// spanning trees, so minimizing the tree costs over all spanning trees is
// the exact optimum (an optimal vertex always exists: costs are finite and
// the polytope is bounded by the balances).
struct FlowOracle {
  struct Edge {
    int from;  // positive flow direction
    int to;
    double cost;
  };
  int nodes = 0;
  std::vector<Edge> edges;
  std::vector<double> balance;  // supply > 0, demand < 0; must sum to ~0

  double solve() const {
    best_ = std::numeric_limits<double>::infinity();
    chosen_.assign(nodes - 1, -1);
    parent_.assign(nodes, 0);
    std::iota(parent_.begin(), parent_.end(), 0);
    recurse(0, 0);
    return best_;
  }

 private:
  int find(std::vector<int>& p, int x) const {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }

  bool connectable(int idx, const std::vector<int>& parent) const {
    // Can the remaining edges still join all current components?
    std::vector<int> p = parent;
    int comps = 0;
    for (int v = 0; v < nodes; ++v) comps += find(p, v) == v;
    for (size_t e = idx; e < edges.size() && comps > 1; ++e) {
      const int a = find(p, edges[e].from);
      const int b = find(p, edges[e].to);
      if (a != b) {
        p[a] = b;
        --comps;
      }
    }
    return comps == 1;
  }

  void recurse(size_t idx, int chosen) const {
    if (chosen == nodes - 1) {
      evaluate_tree();
      return;
    }
    if (idx >= edges.size()) return;
    if (chosen + static_cast<int>(edges.size() - idx) < nodes - 1) return;
    std::vector<int> p = parent_;
    const int a = find(parent_, edges[idx].from);
    const int b = find(parent_, edges[idx].to);
    if (a != b) {
      parent_[a] = b;
      chosen_[chosen] = static_cast<int>(idx);
      recurse(idx + 1, chosen + 1);
      parent_ = p;
    }
    // Exclude idx only if a spanning tree is still reachable.
    if (connectable(idx + 1, parent_)) recurse(idx + 1, chosen);
  }

  void evaluate_tree() const {
    // Flows on a tree are forced by the balances: peel leaves.
    const int V = nodes;
    std::vector<double> bal = balance;
    std::vector<int> degree(V, 0);
    std::vector<std::vector<int>> incident(V);
    for (int k = 0; k < V - 1; ++k) {
      const Edge& e = edges[chosen_[k]];
      ++degree[e.from];
      ++degree[e.to];
      incident[e.from].push_back(k);
      incident[e.to].push_back(k);
    }
    std::vector<char> done_edge(V - 1, 0), done_node(V, 0);
    std::vector<int> leaves;
    for (int v = 0; v < V; ++v) {
      if (degree[v] == 1) leaves.push_back(v);
    }
    double cost = 0.0;
    for (int peeled = 0; peeled < V - 1; ++peeled) {
      int leaf = -1;
      while (!leaves.empty()) {
        const int cand = leaves.back();
        leaves.pop_back();
        if (!done_node[cand] && degree[cand] == 1) {
          leaf = cand;
          break;
        }
      }
      if (leaf < 0) return;  // defensive; a tree always has a leaf
      int eidx = -1;
      for (int k : incident[leaf]) {
        if (!done_edge[k]) {
          eidx = k;
          break;
        }
      }
      const Edge& e = edges[chosen_[eidx]];
      // Flow out of the leaf along the edge's positive direction.
      const double f = e.from == leaf ? bal[leaf] : -bal[leaf];
      if (f < -1e-12) return;  // sign-infeasible tree: not a polytope vertex
      cost += std::max(0.0, f) * e.cost;
      const int other = e.from == leaf ? e.to : e.from;
      bal[other] += bal[leaf];
      bal[leaf] = 0.0;
      done_edge[eidx] = 1;
      done_node[leaf] = 1;
      if (--degree[other] == 1) leaves.push_back(other);
      degree[leaf] = 0;
    }
    best_ = std::min(best_, cost);
  }

  mutable double best_ = 0.0;
  mutable std::vector<int> chosen_;
  mutable std::vector<int> parent_;
};

// W2^2 between balanced measures: flow patterns of the bipartite network.
inline double oracle_w2_squared(const qlab::DiscreteMeasure& mu1,
                                const qlab::DiscreteMeasure& mu2) {
  const int m = mu1.size();
  const int n = mu2.size();
  if (m == 0 || n == 0) return 0.0;
  FlowOracle lp;
  lp.nodes = m + n;
  lp.balance.assign(m + n, 0.0);
  for (int i = 0; i < m; ++i) lp.balance[i] = mu1.weights[i];
  for (int j = 0; j < n; ++j) lp.balance[m + j] = -mu2.weights[j];
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int d = 0; d < mu1.dim; ++d) {
        const double t = mu1.atom(i)[d] - mu2.atom(j)[d];
        s += t * t;
      }
      lp.edges.push_back({i, m + j, s});
    }
  }
  return lp.solve();
}

// Corner distance: the bipartite network plus one dump node with an arc per
// atom. A transport arc costing more than its dump detour can never beat
// rerouting through the dump, so it is dropped without changing the optimum
// (this keeps the tree enumeration tractable at 5 atoms per side).
inline double oracle_corner_distance(const qlab::DiscreteMeasure& mu1,
                                     const qlab::DiscreteMeasure& mu2,
                                     const qlab::WedgeBoundary& wedge) {
  const int n1 = mu1.size();
  const int n2 = mu2.size();
  if (n1 == 0 && n2 == 0) return 0.0;
  FlowOracle lp;
  lp.nodes = n1 + n2 + 1;
  const int D = n1 + n2;
  lp.balance.assign(lp.nodes, 0.0);
  std::vector<double> dump1(n1), dump2(n2);
  for (int i = 0; i < n1; ++i) {
    lp.balance[i] = mu1.weights[i];
    dump1[i] = wedge.dist2(mu1.atom(i));
    lp.edges.push_back({i, D, dump1[i]});
  }
  for (int j = 0; j < n2; ++j) {
    lp.balance[n1 + j] = -mu2.weights[j];
    dump2[j] = wedge.dist2(mu2.atom(j));
    lp.edges.push_back({D, n1 + j, dump2[j]});
  }
  lp.balance[D] = mu2.total() - mu1.total();
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      double s = 0.0;
      const int dim = mu1.dim;
      for (int d = 0; d < dim; ++d) {
        const double t = mu1.atom(i)[d] - mu2.atom(j)[d];
        s += t * t;
      }
      if (s <= dump1[i] + dump2[j] + 1e-12) lp.edges.push_back({i, n1 + j, s});
    }
  }
  return lp.solve();
}

}  // namespace qlab_test
