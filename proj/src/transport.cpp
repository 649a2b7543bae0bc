#include "qlab/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <queue>
#include <sstream>

namespace qlab {

double DiscreteMeasure::total() const {
  double t = 0.0;
  for (double w : weights) t += w;
  return t;
}

void DiscreteMeasure::add(const std::vector<double>& point, double weight) {
  if (static_cast<int>(point.size()) != dim) {
    throw DimensionMismatch("DiscreteMeasure::add: wrong point dimension");
  }
  if (!(weight > 0.0)) throw DomainError("DiscreteMeasure::add: weights must be positive");
  points.insert(points.end(), point.begin(), point.end());
  weights.push_back(weight);
}

void DiscreteMeasure::export_csv(std::ostream& out) const {
  char buf[64];
  for (int i = 0; i < size(); ++i) {
    std::string line;
    for (int d = 0; d < dim; ++d) {
      std::snprintf(buf, sizeof buf, "%.17g,", atom(i)[d]);
      line += buf;
    }
    std::snprintf(buf, sizeof buf, "%.17g", weights[i]);
    line += buf;
    out << line << "\n";
  }
}

void DiscreteMeasure::export_csv_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  export_csv(out);
}

DiscreteMeasure DiscreteMeasure::import_csv(std::istream& in, int dim) {
  DiscreteMeasure mu(dim);
  std::string line;
  std::vector<double> point(dim);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    for (int d = 0; d < dim; ++d) {
      if (!std::getline(ss, cell, ',')) throw Error("measure CSV: short row");
      point[d] = std::stod(cell);
    }
    if (!std::getline(ss, cell, ',')) throw Error("measure CSV: missing weight");
    mu.add(point, std::stod(cell));
  }
  return mu;
}

DiscreteMeasure DiscreteMeasure::import_csv_file(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return import_csv(in, dim);
}

double HalfPlane::dist2(const double* x, int dim) const {
  // Components orthogonal to the spine.
  std::vector<double> r(x, x + dim);
  for (const auto& s : spine) {
    double dot = 0.0;
    for (int d = 0; d < dim; ++d) dot += r[d] * s[d];
    for (int d = 0; d < dim; ++d) r[d] -= dot * s[d];
  }
  double rr = 0.0, rd = 0.0;
  for (int d = 0; d < dim; ++d) {
    rr += r[d] * r[d];
    rd += r[d] * ray[d];
  }
  if (rd >= 0.0) return std::max(0.0, rr - rd * rd);  // foot on the ray
  return rr;                                          // nearest point is the spine
}

double WedgeBoundary::dist2(const double* x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& hp : halfplanes) best = std::min(best, hp.dist2(x, dim));
  return best;
}

namespace {

// Min-cost flow by successive shortest paths with Dijkstra + potentials.
// Supplies and capacities are real-valued; each augmentation saturates a
// source or sink arc, so the augmentation count is linear in the atoms.
class MinCostFlow {
 public:
  explicit MinCostFlow(int nodes)
      : head_(nodes, -1), dist_(nodes), pot_(nodes, 0.0), prev_arc_(nodes) {}

  void set_cap_scale(double s) { cap_scale_ = s; }

  void add_arc(int from, int to, double cap, double cost) {
    arcs_.push_back({to, head_[from], cap, cost});
    head_[from] = static_cast<int>(arcs_.size()) - 1;
    arcs_.push_back({from, head_[to], 0.0, -cost});
    head_[to] = static_cast<int>(arcs_.size()) - 1;
  }

  // Sends `amount` from s to t; returns the cost incurred.
  double solve(int s, int t, double amount) {
    double cost = 0.0;
    const double eps = 1e-13 * std::max(1.0, amount);
    size_t rounds = 0;
    const size_t max_rounds = 100 + 10 * head_.size();
    while (amount > eps) {
      if (++rounds > max_rounds) throw Error("min-cost flow: augmentation stalled");
      if (!dijkstra(s, t)) throw Error("min-cost flow: target unreachable");
      // Capping at dist(t) keeps reduced costs nonnegative for nodes beyond
      // (or cut off from) the augmenting target.
      const double cap = dist_[t];
      for (size_t v = 0; v < pot_.size(); ++v) pot_[v] += std::min(dist_[v], cap);
      double push = amount;
      for (int v = t; v != s;) {
        const Arc& a = arcs_[prev_arc_[v]];
        push = std::min(push, a.cap);
        v = arcs_[prev_arc_[v] ^ 1].to;
      }
      for (int v = t; v != s;) {
        Arc& a = arcs_[prev_arc_[v]];
        Arc& rev = arcs_[prev_arc_[v] ^ 1];
        a.cap -= push;
        rev.cap += push;
        cost += push * a.cost;
        v = rev.to;
      }
      amount -= push;
    }
    return cost;
  }

 private:
  struct Arc {
    int to;
    int next;
    double cap;
    double cost;
  };

  bool dijkstra(int s, int t) {
    const double kInf = std::numeric_limits<double>::infinity();
    std::fill(dist_.begin(), dist_.end(), kInf);
    dist_[s] = 0.0;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> pq;
    pq.push({0.0, s});
    while (!pq.empty()) {
      const auto [d, v] = pq.top();
      pq.pop();
      if (d > dist_[v]) continue;
      for (int a = head_[v]; a >= 0; a = arcs_[a].next) {
        const Arc& arc = arcs_[a];
        if (arc.cap <= 1e-15 * cap_scale_) continue;
        // Reduced cost; clamps tiny float noise.
        const double rc = std::max(0.0, arc.cost + pot_[v] - pot_[arc.to]);
        if (dist_[v] + rc < dist_[arc.to]) {
          dist_[arc.to] = dist_[v] + rc;
          prev_arc_[arc.to] = a;
          pq.push({dist_[arc.to], arc.to});
        }
      }
    }
    return dist_[t] < kInf;
  }

  std::vector<Arc> arcs_;
  std::vector<int> head_;
  std::vector<double> dist_;
  std::vector<double> pot_;
  std::vector<int> prev_arc_;
  double cap_scale_ = 1.0;
};

double sq_dist(const double* a, const double* b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double t = a[d] - b[d];
    s += t * t;
  }
  return s;
}

void check_dims(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2) {
  if (mu1.size() > 0 && mu2.size() > 0 && mu1.dim != mu2.dim) {
    throw DimensionMismatch("transport: measures live in different dimensions");
  }
}

}  // namespace

double w2_squared(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2) {
  check_dims(mu1, mu2);
  const double t1 = mu1.total();
  const double t2 = mu2.total();
  if (std::abs(t1 - t2) > 1e-9 * std::max({t1, t2, 1e-300})) {
    throw DomainError("w2_squared: unbalanced measures (W2 is a balanced transport)");
  }
  if (mu1.size() == 0 || mu2.size() == 0) return 0.0;
  const int n1 = mu1.size();
  const int n2 = mu2.size();
  const int S = n1 + n2;
  const int T = S + 1;
  MinCostFlow flow(n1 + n2 + 2);
  flow.set_cap_scale(std::max(t1, t2));
  for (int i = 0; i < n1; ++i) flow.add_arc(S, i, mu1.weights[i], 0.0);
  for (int j = 0; j < n2; ++j) flow.add_arc(n1 + j, T, mu2.weights[j], 0.0);
  for (int i = 0; i < n1; ++i) {
    for (int j = 0; j < n2; ++j) {
      flow.add_arc(i, n1 + j, std::numeric_limits<double>::infinity(),
                   sq_dist(mu1.atom(i), mu2.atom(j), mu1.dim));
    }
  }
  return flow.solve(S, T, std::min(t1, t2));
}

double corner_distance(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                       const WedgeBoundary& wedge) {
  check_dims(mu1, mu2);
  const int n1 = mu1.size();
  const int n2 = mu2.size();
  const double t1 = mu1.total();
  const double t2 = mu2.total();
  if (n1 == 0 && n2 == 0) return 0.0;
  const int dim = n1 > 0 ? mu1.dim : mu2.dim;
  if (wedge.dim != dim) throw DimensionMismatch("corner_distance: wedge dimension mismatch");
  // Nodes: mu1 atoms, mu2 atoms, dump, source, sink. Every unit of mu1 mass
  // leaves its atom (to a mu2 atom or the dump) and every unit of mu2 mass
  // is filled (from a mu1 atom or the dump); the source/sink legs let the
  // dump absorb and supply independent amounts.
  const int D = n1 + n2;
  const int S = D + 1;
  const int T = D + 2;
  const double kInf = std::numeric_limits<double>::infinity();
  MinCostFlow flow(n1 + n2 + 3);
  flow.set_cap_scale(std::max(1e-300, t1 + t2));
  for (int i = 0; i < n1; ++i) flow.add_arc(S, i, mu1.weights[i], 0.0);
  for (int j = 0; j < n2; ++j) flow.add_arc(n1 + j, T, mu2.weights[j], 0.0);
  flow.add_arc(S, D, t2, 0.0);
  flow.add_arc(D, T, t1, 0.0);
  for (int i = 0; i < n1; ++i) {
    flow.add_arc(i, D, kInf, wedge.dist2(mu1.atom(i)));
    for (int j = 0; j < n2; ++j) {
      flow.add_arc(i, n1 + j, kInf, sq_dist(mu1.atom(i), mu2.atom(j), dim));
    }
  }
  for (int j = 0; j < n2; ++j) flow.add_arc(D, n1 + j, kInf, wedge.dist2(mu2.atom(j)));
  return flow.solve(S, T, t1 + t2);
}

double bump_value(double xi_norm) {
  if (xi_norm <= 0.5) return 1.0;
  if (xi_norm >= 1.0) return 0.0;
  const double t = 2.0 * (1.0 - xi_norm);
  return t * t;
}

std::vector<double> bump_weights(const std::vector<double>& points, int dim,
                                 const std::vector<double>& center, double r) {
  if (!(r > 0.0)) throw DomainError("bump_weights: r must be positive");
  if (static_cast<int>(center.size()) != dim) {
    throw DimensionMismatch("bump_weights: center dimension mismatch");
  }
  const size_t count = points.size() / dim;
  std::vector<double> w(count);
  for (size_t i = 0; i < count; ++i) {
    double s = 0.0;
    for (int d = 0; d < dim; ++d) {
      const double t = points[i * dim + d] - center[d];
      s += t * t;
    }
    w[i] = bump_value(std::sqrt(s) / r);
  }
  return w;
}

DiscreteMeasure bump_measure(const DiscreteMeasure& mu, double r, const std::vector<double>* center) {
  const std::vector<double> origin(mu.dim, 0.0);
  const std::vector<double>& c = center ? *center : origin;
  const std::vector<double> phi = bump_weights(mu.points, mu.dim, c, r);
  DiscreteMeasure out(mu.dim);
  for (int i = 0; i < mu.size(); ++i) {
    if (phi[i] <= 0.0) continue;
    out.add(std::vector<double>(mu.atom(i), mu.atom(i) + mu.dim), mu.weights[i] * phi[i]);
  }
  return out;
}

double strong_excess(const DiscreteMeasure& t_mu, const DiscreteMeasure& c_mu,
                     const WedgeBoundary& wedge, double r, int m) {
  if (!(r > 0.0)) throw DomainError("strong_excess: r must be positive");
  const DiscreteMeasure bt = bump_measure(t_mu, r);
  const DiscreteMeasure bc = bump_measure(c_mu, r);
  return std::pow(r, -(m + 2)) * corner_distance(bt, bc, wedge);
}

}  // namespace qlab
