#include "qlab/qpoint.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace qlab {

namespace {

bool sheet_less(const double* a, const double* b, int n) {
  return std::lexicographical_compare(a, a + n, b, b + n);
}

void canonicalize(std::vector<double>& flat, int q, int n) {
  std::vector<int> order(q);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    return sheet_less(flat.data() + static_cast<size_t>(i) * n,
                      flat.data() + static_cast<size_t>(j) * n, n);
  });
  std::vector<double> sorted(flat.size());
  for (int i = 0; i < q; ++i) {
    std::copy_n(flat.data() + static_cast<size_t>(order[i]) * n, n,
                sorted.data() + static_cast<size_t>(i) * n);
  }
  flat = std::move(sorted);
}

double pair_cost(const double* a, const double* b, int n) {
  double c = 0.0;
  for (int k = 0; k < n; ++k) {
    const double d = a[k] - b[k];
    c += d * d;
  }
  return c;
}

void check_compatible(const QPoint& a, const QPoint& b) {
  if (a.q() != b.q() || a.n() != b.n()) {
    throw DimensionMismatch("QPoint mismatch: (q=" + std::to_string(a.q()) +
                            ",n=" + std::to_string(a.n()) + ") vs (q=" +
                            std::to_string(b.q()) + ",n=" + std::to_string(b.n()) + ")");
  }
}

// Cost matrix in row-major order: cost[i*q+j] = |a_i - b_j|^2.
void fill_cost(const QPoint& a, const QPoint& b, std::vector<double>& cost) {
  const int q = a.q();
  const int n = a.n();
  cost.resize(static_cast<size_t>(q) * q);
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      cost[static_cast<size_t>(i) * q + j] = pair_cost(a.sheet(i).data(), b.sheet(j).data(), n);
    }
  }
}

// Exhaustive minimum over all q! permutations, first minimizer in
// lexicographic order kept (strict improvement only).
double exhaustive_matching(const std::vector<double>& cost, int q, std::vector<int>& best) {
  std::vector<int> perm(q);
  std::iota(perm.begin(), perm.end(), 0);
  best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double c = 0.0;
    for (int i = 0; i < q; ++i) c += cost[static_cast<size_t>(i) * q + perm[i]];
    if (c < best_cost) {
      best_cost = c;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best_cost;
}

// O(q^3) shortest-augmenting-path assignment (Hungarian with potentials).
// Returns the optimal cost; fills row_to_col.
double hungarian(const std::vector<double>& cost, int q, std::vector<int>& row_to_col) {
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(q + 1, 0.0), v(q + 1, 0.0);
  std::vector<int> p(q + 1, q);  // p[j] = row matched to column j (q = none)
  std::vector<int> way(q + 1, 0);
  for (int i = 0; i < q; ++i) {
    p[q] = i;
    int j0 = q;
    std::vector<double> minv(q + 1, kInf);
    std::vector<char> used(q + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = kInf;
      int j1 = q;
      for (int j = 0; j < q; ++j) {
        if (used[j]) continue;
        const double cur = cost[static_cast<size_t>(i0) * q + j] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= q; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != q);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != q);
  }
  row_to_col.assign(q, -1);
  double total = 0.0;
  for (int j = 0; j < q; ++j) {
    if (p[j] != q) {
      row_to_col[p[j]] = j;
      total += cost[static_cast<size_t>(p[j]) * q + j];
    }
  }
  return total;
}

double hungarian_partial(const std::vector<double>& cost, int q,
                         const std::vector<char>& row_done, const std::vector<char>& col_done) {
  // Optimal assignment on the not-yet-fixed rows/columns.
  std::vector<int> rows, cols;
  for (int i = 0; i < q; ++i)
    if (!row_done[i]) rows.push_back(i);
  for (int j = 0; j < q; ++j)
    if (!col_done[j]) cols.push_back(j);
  const int k = static_cast<int>(rows.size());
  if (k == 0) return 0.0;
  std::vector<double> sub(static_cast<size_t>(k) * k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      sub[static_cast<size_t>(i) * k + j] = cost[static_cast<size_t>(rows[i]) * q + cols[j]];
  std::vector<int> dummy;
  return hungarian(sub, k, dummy);
}

// Rebuild the assignment greedily in lexicographic order among optima.
void lex_repair(const std::vector<double>& cost, int q, double best_cost,
                std::vector<int>& perm) {
  const double tol = 1e-12 * (std::abs(best_cost) + 1.0);
  std::vector<char> row_done(q, 0), col_done(q, 0);
  double fixed = 0.0;
  for (int i = 0; i < q; ++i) {
    row_done[i] = 1;
    bool assigned = false;
    for (int j = 0; j < q && !assigned; ++j) {
      if (col_done[j]) continue;
      col_done[j] = 1;
      const double c = fixed + cost[static_cast<size_t>(i) * q + j] +
                       hungarian_partial(cost, q, row_done, col_done);
      if (c <= best_cost + tol) {
        perm[i] = j;
        fixed += cost[static_cast<size_t>(i) * q + j];
        assigned = true;
      } else {
        col_done[j] = 0;
      }
    }
  }
}

}  // namespace

QPoint::QPoint(int q, int n) : q_(q), n_(n), flat_(static_cast<size_t>(q) * n, 0.0) {
  if (q < 1 || n < 1) throw DimensionMismatch("QPoint requires q >= 1 and n >= 1");
}

QPoint::QPoint(int q, int n, std::vector<double> flat) : q_(q), n_(n), flat_(std::move(flat)) {
  if (q < 1 || n < 1) throw DimensionMismatch("QPoint requires q >= 1 and n >= 1");
  if (flat_.size() != static_cast<size_t>(q) * n) {
    throw DimensionMismatch("QPoint: expected " + std::to_string(q * n) +
                            " coordinates, got " + std::to_string(flat_.size()));
  }
  canonicalize(flat_, q_, n_);
}

double QPoint::norm2() const {
  double s = 0.0;
  for (double x : flat_) s += x * x;
  return s;
}

bool QPoint::approx_equal(const QPoint& a, const QPoint& b, double tol) {
  if (a.q() != b.q() || a.n() != b.n()) return false;
  if (tol <= 0.0) return a == b;
  const Matching m = best_matching(a, b);
  for (int i = 0; i < a.q(); ++i) {
    const auto sa = a.sheet(i);
    const auto sb = b.sheet(m.perm[i]);
    for (int k = 0; k < a.n(); ++k) {
      if (std::abs(sa[k] - sb[k]) > tol) return false;
    }
  }
  return true;
}

double best_matching_into(const QPoint& a, const QPoint& b, std::vector<int>& perm) {
  check_compatible(a, b);
  const int q = a.q();
  const int n = a.n();
  perm.resize(q);
  if (q == 1) {
    perm[0] = 0;
    return pair_cost(a.sheet(0).data(), b.sheet(0).data(), n);
  }
  if (q == 2) {
    const double* a0 = a.flat().data();
    const double* a1 = a0 + n;
    const double* b0 = b.flat().data();
    const double* b1 = b0 + n;
    const double c_id = pair_cost(a0, b0, n) + pair_cost(a1, b1, n);
    const double c_sw = pair_cost(a0, b1, n) + pair_cost(a1, b0, n);
    if (c_id <= c_sw) {
      perm[0] = 0;
      perm[1] = 1;
      return c_id;
    }
    perm[0] = 1;
    perm[1] = 0;
    return c_sw;
  }
  std::vector<double> cost;
  fill_cost(a, b, cost);
  if (q <= 4) return exhaustive_matching(cost, q, perm);
  const double best = hungarian(cost, q, perm);
  lex_repair(cost, q, best, perm);
  double repaired = 0.0;
  for (int i = 0; i < q; ++i) repaired += cost[static_cast<size_t>(i) * q + perm[i]];
  return std::min(best, repaired);
}

Matching best_matching(const QPoint& a, const QPoint& b) {
  Matching m;
  m.cost = best_matching_into(a, b, m.perm);
  return m;
}

double g_distance(const QPoint& a, const QPoint& b) {
  std::vector<int> perm;
  const double c = best_matching_into(a, b, perm);
  return std::sqrt(std::max(0.0, c));
}

std::vector<double> mean(const QPoint& a) {
  std::vector<double> m(a.n(), 0.0);
  for (int i = 0; i < a.q(); ++i) {
    const auto s = a.sheet(i);
    for (int k = 0; k < a.n(); ++k) m[k] += s[k];
  }
  for (double& x : m) x /= a.q();
  return m;
}

double separation(const QPoint& a) {
  if (a.q() < 2) throw UndefinedSeparation("separation undefined for Q = 1");
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < a.q(); ++i) {
    for (int j = i + 1; j < a.q(); ++j) {
      best = std::min(best, pair_cost(a.sheet(i).data(), a.sheet(j).data(), a.n()));
    }
  }
  return std::sqrt(best);
}

}  // namespace qlab
