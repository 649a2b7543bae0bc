#include "qlab/cones.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numeric>
#include <thread>

namespace qlab {

Rational::Rational(long long n, long long d) : num(n), den(d) {
  if (den == 0) throw DomainError("Rational: zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const long long g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
}

Rational Rational::operator+(const Rational& o) const {
  return Rational(num * o.den + o.num * den, den * o.den);
}

Rational Rational::operator*(long long k) const { return Rational(num * k, den); }

bool Rational::operator<(const Rational& o) const { return num * o.den < o.num * den; }

std::string Rational::str() const { return std::to_string(num) + "/" + std::to_string(den); }

int BoundaryConfig::total() const {
  validate();
  int q = 0;
  for (int x : q0) q += x;
  return q;
}

void BoundaryConfig::validate() const {
  if (q0.empty() || q1.empty()) throw DomainError("BoundaryConfig: both sides need pieces");
  int s0 = 0, s1 = 0;
  for (int x : q0) {
    if (x <= 0) throw DomainError("BoundaryConfig: multiplicities must be positive");
    s0 += x;
  }
  for (int x : q1) {
    if (x <= 0) throw DomainError("BoundaryConfig: multiplicities must be positive");
    s1 += x;
  }
  if (s0 != s1) {
    throw DomainError("BoundaryConfig: sum (-1)^j Q_i^j != 0 (sides sum to " +
                      std::to_string(s0) + " and " + std::to_string(s1) + ")");
  }
}

int CorneredOpenBook::total_multiplicity() const {
  int q = 0;
  for (const auto& quad : quadrants) q += quad.multiplicity;
  return q;
}

std::string CorneredOpenBook::str() const {
  std::string s = "{";
  for (size_t i = 0; i < quadrants.size(); ++i) {
    if (i) s += ", ";
    s += "H(" + std::to_string(quadrants[i].k0 + 1) + "," + std::to_string(quadrants[i].k1 + 1) +
         ")x" + std::to_string(quadrants[i].multiplicity);
  }
  return s + "}";
}

namespace {

// Contingency-table enumeration: nonnegative N0 x N1 matrices with row sums
// q0 and column sums q1. The matrix is the book's canonical form: a quadrant
// is determined by its boundary pairing, so pairings carry merged
// multiplicities and sheet reorderings collapse.
void enumerate_tables(const std::vector<int>& q0, const std::vector<int>& q1, size_t cell,
                      std::vector<int>& row_rem, std::vector<int>& col_rem,
                      std::vector<int>& entries, std::vector<std::vector<int>>& out) {
  const size_t n0 = q0.size();
  const size_t n1 = q1.size();
  if (cell == n0 * n1) {
    for (int r : row_rem)
      if (r != 0) return;
    for (int c : col_rem)
      if (c != 0) return;
    out.push_back(entries);
    return;
  }
  const size_t i = cell / n1;
  const size_t j = cell % n1;
  const bool last_col = j == n1 - 1;
  const bool last_row = i == n0 - 1;
  int lo = 0;
  int hi = std::min(row_rem[i], col_rem[j]);
  if (last_col && !last_row) {
    // The row must close here.
    lo = hi = row_rem[i] <= col_rem[j] ? row_rem[i] : -1;
  } else if (last_row && !last_col) {
    // The column must close here.
    lo = hi = col_rem[j] <= row_rem[i] ? col_rem[j] : -1;
  } else if (last_row && last_col) {
    lo = hi = row_rem[i] == col_rem[j] ? row_rem[i] : -1;
  }
  if (lo < 0) return;
  for (int v = lo; v <= hi; ++v) {
    entries[cell] = v;
    row_rem[i] -= v;
    col_rem[j] -= v;
    enumerate_tables(q0, q1, cell + 1, row_rem, col_rem, entries, out);
    row_rem[i] += v;
    col_rem[j] += v;
  }
  entries[cell] = 0;
}

}  // namespace

std::vector<CorneredOpenBook> enumerate_admissible_books(const BoundaryConfig& b, int max_sheets) {
  if (max_sheets < std::max(b.n0(), b.n1())) {
    throw DomainError("enumerate_admissible_books: max_sheets must be >= max(N0, N1)");
  }
  // Infeasible marginals yield the empty set rather than an error.
  int s0 = 0, s1 = 0;
  for (int x : b.q0) s0 += x;
  for (int x : b.q1) s1 += x;
  if (s0 != s1 || b.q0.empty() || b.q1.empty()) return {};
  for (int x : b.q0)
    if (x <= 0) return {};
  for (int x : b.q1)
    if (x <= 0) return {};
  std::vector<int> row_rem = b.q0;
  std::vector<int> col_rem = b.q1;
  std::vector<int> entries(static_cast<size_t>(b.n0()) * b.n1(), 0);
  std::vector<std::vector<int>> tables;
  enumerate_tables(b.q0, b.q1, 0, row_rem, col_rem, entries, tables);
  std::vector<CorneredOpenBook> books;
  for (const auto& table : tables) {
    CorneredOpenBook book;
    book.boundary = b;
    for (int i = 0; i < b.n0(); ++i) {
      for (int j = 0; j < b.n1(); ++j) {
        const int mult = table[static_cast<size_t>(i) * b.n1() + j];
        if (mult > 0) book.quadrants.push_back({i, j, mult});
      }
    }
    if (book.sheet_count() <= max_sheets) books.push_back(std::move(book));
  }
  return books;
}

Rational book_density(const CorneredOpenBook& c) { return Rational(c.total_multiplicity(), 4); }

ClassificationResult classify_2d_cone(
    const std::vector<std::pair<PieceType, int>>& decomposition) {
  int full = 0, t1 = 0, t2 = 0, t3 = 0;
  for (const auto& [type, mult] : decomposition) {
    if (mult < 0) throw DomainError("classify_2d_cone: negative multiplicity");
    switch (type) {
      case PieceType::FullPlane: full += mult; break;
      case PieceType::Type1: t1 += mult; break;
      case PieceType::Type2: t2 += mult; break;
      case PieceType::Type3: t3 += mult; break;
    }
  }
  ClassificationResult res;
  res.q_net = t1 - t2;  // type 3 pairs pieces of one orientation: net zero
  if (res.q_net < 1) {
    throw DomainError("classify_2d_cone: boundary bookkeeping inconsistent (net multiplicity " +
                      std::to_string(res.q_net) + ")");
  }
  res.theta = Rational(full, 1) + Rational(t1 + t2 + t3, 4);
  if (full > 0) {
    res.verdict = ConeVerdict::Inadmissible;  // interior pieces can be removed
  } else if (t2 > 0) {
    res.verdict = ConeVerdict::Inadmissible;  // forces a cancelling pair
  } else if (res.theta > Rational(res.q_net, 4)) {
    res.verdict = ConeVerdict::DensityAboveQ4;
  } else {
    res.verdict = ConeVerdict::MinimalBook;
  }
  return res;
}

BookFrame standard_frame(const BoundaryConfig& b) {
  b.validate();
  BookFrame frame;
  auto rays_in_plane = [](int count, int axis_a, int axis_b) {
    std::vector<std::vector<double>> rays;
    const double step = count > 1 ? (M_PI / 2) / (count - 1) : 0.0;
    for (int k = 0; k < count; ++k) {
      std::vector<double> ray(4, 0.0);
      ray[axis_a] = std::cos(k * step);
      ray[axis_b] = std::sin(k * step);
      rays.push_back(std::move(ray));
    }
    return rays;
  };
  frame.rays0 = rays_in_plane(b.n0(), 0, 2);  // span{e1, e3}
  frame.rays1 = rays_in_plane(b.n1(), 1, 3);  // span{e2, e4}
  return frame;
}

WedgeBoundary frame_wedge(const BookFrame& frame) {
  WedgeBoundary w;
  w.dim = frame.dim;
  for (const auto& ray : frame.rays0) w.halfplanes.push_back({{}, ray});
  for (const auto& ray : frame.rays1) w.halfplanes.push_back({{}, ray});
  return w;
}

DiscreteMeasure book_measure(const CorneredOpenBook& book, const BookFrame& frame, double radius,
                             double delta) {
  if (!(delta > 0.0) || !(radius > 0.0)) throw DomainError("book_measure: bad radius or delta");
  DiscreteMeasure mu(frame.dim);
  const int cells = static_cast<int>(std::ceil(radius / delta));
  std::vector<double> point(frame.dim);
  for (const auto& quad : book.quadrants) {
    const auto& u = frame.rays0[quad.k0];
    const auto& v = frame.rays1[quad.k1];
    for (int i = 0; i < cells; ++i) {
      for (int j = 0; j < cells; ++j) {
        const double s = (i + 0.5) * delta;
        const double t = (j + 0.5) * delta;
        if (s * s + t * t > radius * radius) continue;
        for (int d = 0; d < frame.dim; ++d) point[d] = s * u[d] + t * v[d];
        mu.add(point, delta * delta * quad.multiplicity);
      }
    }
  }
  return mu;
}

std::optional<double> uniqueness_gap(const BoundaryConfig& b, double delta, int threads) {
  const auto books = enumerate_admissible_books(b, b.n0() * b.n1());
  if (books.size() <= 1) return std::nullopt;
  const BookFrame frame = standard_frame(b);
  const WedgeBoundary wedge = frame_wedge(frame);
  std::vector<DiscreteMeasure> measures;
  measures.reserve(books.size());
  for (const auto& book : books) measures.push_back(book_measure(book, frame, 1.0, delta));

  std::vector<std::pair<size_t, size_t>> pairs;
  for (size_t a = 0; a < books.size(); ++a) {
    for (size_t c = a + 1; c < books.size(); ++c) pairs.push_back({a, c});
  }
  std::vector<double> excess(pairs.size());
  const int workers = std::max(1, std::min<int>(threads, static_cast<int>(pairs.size())));
  std::atomic<size_t> cursor{0};
  auto work = [&]() {
    for (size_t k = cursor.fetch_add(1); k < pairs.size(); k = cursor.fetch_add(1)) {
      excess[k] = strong_excess(measures[pairs[k].first], measures[pairs[k].second], wedge, 1.0, 2);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  return *std::min_element(excess.begin(), excess.end());
}

}  // namespace qlab
