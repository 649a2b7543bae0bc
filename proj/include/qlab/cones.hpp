#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qlab/errors.hpp"
#include "qlab/transport.hpp"

namespace qlab {

// Exact rational arithmetic for densities; the Q/4 equality case must not
// be blurred by floats.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d);

  Rational operator+(const Rational& o) const;
  Rational operator*(long long k) const;
  bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
  bool operator!=(const Rational& o) const { return !(*this == o); }
  bool operator<(const Rational& o) const;
  bool operator>(const Rational& o) const { return o < *this; }
  bool operator>=(const Rational& o) const { return !(*this < o); }
  bool operator<=(const Rational& o) const { return !(o < *this); }
  std::string str() const;  // "p/q"
};

// Boundary pieces at a corner: N^0 positively and N^1 negatively oriented
// half-plane classes with multiplicities summing to the same Q on each side.
struct BoundaryConfig {
  std::vector<int> q0;  // size N0, entries > 0
  std::vector<int> q1;  // size N1, entries > 0

  int n0() const { return static_cast<int>(q0.size()); }
  int n1() const { return static_cast<int>(q1.size()); }
  int total() const;  // Q; throws unless both sides agree
  void validate() const;
};

// A quadrant: the quarter plane spanned by the rays of boundary pieces
// (k0, k1), carried with multiplicity.
struct BookQuadrant {
  int k0 = 0;  // index into q0, 0-based
  int k1 = 0;  // index into q1
  int multiplicity = 0;
};

// A cornered open book: multiplicity-weighted quadrants rooted on a common
// spine, each bounded by one positive and one negative boundary piece.
// Canonical form: quadrants sorted by (k0, k1), one entry per pairing.
struct CorneredOpenBook {
  BoundaryConfig boundary;
  std::vector<BookQuadrant> quadrants;

  int sheet_count() const { return static_cast<int>(quadrants.size()); }
  int total_multiplicity() const;
  std::string str() const;
};

// All books compatible with the boundary config (nonnegative matrices with
// the config's marginals), at most max_sheets distinct quadrants. Finite.
std::vector<CorneredOpenBook> enumerate_admissible_books(const BoundaryConfig& b, int max_sheets);

// Theta(C, 0) = sum_i Q'_i / 4: each perpendicular quadrant fills a quarter
// plane.
Rational book_density(const CorneredOpenBook& c);

enum class PieceType { FullPlane, Type1, Type2, Type3 };
enum class ConeVerdict { MinimalBook, DensityAboveQ4, Inadmissible };

struct ClassificationResult {
  ConeVerdict verdict = ConeVerdict::Inadmissible;
  Rational theta;
  int q_net = 0;  // induced boundary multiplicity
};

// The combinatorial ledger of the 2-d classification: full planes and
// orientation-reversing quadrants are non-minimizing, type-3 quadrants push
// the density above Q/4, and the equality case is all type 1.
ClassificationResult classify_2d_cone(const std::vector<std::pair<PieceType, int>>& decomposition);

// Geometric realization of a boundary config in R^4 (m = 2, n = 2): the
// positive rays live in span{e1, e3}, the negative rays in span{e2, e4}, so
// every positive/negative pair is perpendicular.
struct BookFrame {
  int dim = 4;
  std::vector<std::vector<double>> rays0;
  std::vector<std::vector<double>> rays1;
};

BookFrame standard_frame(const BoundaryConfig& b);
WedgeBoundary frame_wedge(const BookFrame& frame);

// Quadrature sampling of the book's cone measure on B_R: tensor-grid atoms
// with cell-area weights times multiplicity, cell size delta.
DiscreteMeasure book_measure(const CorneredOpenBook& book, const BookFrame& frame, double radius,
                             double delta);

// Minimum strong excess E(C, C', B_1) over distinct admissible books, at a
// fixed quadrature resolution; nullopt (INF) when at most one book exists.
std::optional<double> uniqueness_gap(const BoundaryConfig& b, double delta = 1.0 / 6.0,
                                     int threads = 1);

}  // namespace qlab
