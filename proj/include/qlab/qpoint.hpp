#pragma once

#include <span>
#include <vector>

#include "qlab/errors.hpp"

namespace qlab {

// A point of A_Q(R^n): an unordered Q-tuple of vectors in R^n.
//
// Sheets are stored in canonical form (sorted lexicographically by
// coordinates), so structural equality coincides with multiset equality.
// Instances are immutable after construction.
class QPoint {
 public:
  QPoint() = default;

  // Q copies of the origin of R^n.
  QPoint(int q, int n);

  // From a flat list of q*n coordinates (sheet-major). Canonicalizes.
  QPoint(int q, int n, std::vector<double> flat);

  int q() const { return q_; }
  int n() const { return n_; }

  std::span<const double> sheet(int i) const {
    return {flat_.data() + static_cast<size_t>(i) * n_, static_cast<size_t>(n_)};
  }
  const std::vector<double>& flat() const { return flat_; }

  // Sum of squared sheet norms; equals g_distance(*this, Q<<0>>)^2.
  double norm2() const;

  // Exact multiset equality (canonical forms compared coordinate-wise).
  bool operator==(const QPoint& other) const {
    return q_ == other.q_ && n_ == other.n_ && flat_ == other.flat_;
  }
  bool operator!=(const QPoint& other) const { return !(*this == other); }

  // Multiset equality up to a coordinate-wise tolerance: some optimal
  // matching pairs every sheet within max-norm tol.
  static bool approx_equal(const QPoint& a, const QPoint& b, double tol);

 private:
  int q_ = 0;
  int n_ = 0;
  std::vector<double> flat_;
};

// A minimizing sheet pairing between two QPoints a, b:
// cost = sum_i |a_i - b_{perm[i]}|^2.
struct Matching {
  std::vector<int> perm;
  double cost = 0.0;
};

// The optimal-matching metric on A_Q(R^n):
// sqrt(min over permutations of sum_i |a_i - b_{sigma(i)}|^2).
double g_distance(const QPoint& a, const QPoint& b);

// A minimizing permutation; ties broken by the lexicographically smallest
// permutation. Exhaustive search for q <= 4, augmenting-path assignment
// (O(q^3)) plus a lexicographic repair pass above.
Matching best_matching(const QPoint& a, const QPoint& b);

// Allocation-light variant for hot loops: fills perm (resized to q) and
// returns the cost.
double best_matching_into(const QPoint& a, const QPoint& b, std::vector<int>& perm);

// Barycenter (1/Q) sum_i a_i.
std::vector<double> mean(const QPoint& a);

// Minimum pairwise sheet distance; 0 signals a sheet collision.
double separation(const QPoint& a);

}  // namespace qlab
