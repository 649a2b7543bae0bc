#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "qlab/errors.hpp"

namespace qlab {

// Finitely supported weighted point set in the ambient space.
struct DiscreteMeasure {
  int dim = 0;
  std::vector<double> points;  // atom count * dim, atom-major
  std::vector<double> weights;

  DiscreteMeasure() = default;
  explicit DiscreteMeasure(int d) : dim(d) {}

  int size() const { return static_cast<int>(weights.size()); }
  const double* atom(int i) const { return points.data() + static_cast<size_t>(i) * dim; }
  double total() const;
  void add(const std::vector<double>& point, double weight);

  void export_csv(std::ostream& out) const;  // coordinates...,weight
  void export_csv_file(const std::string& path) const;
  static DiscreteMeasure import_csv(std::istream& in, int dim);
  static DiscreteMeasure import_csv_file(const std::string& path, int dim);
};

// A boundary half-plane: spine (orthonormal basis of the (m-2)-plane L) plus
// a unit ray direction orthogonal to the spine. In m = 2 the spine is empty
// and the half-plane is a ray from the origin.
struct HalfPlane {
  std::vector<std::vector<double>> spine;  // orthonormal, may be empty
  std::vector<double> ray;                 // unit, orthogonal to the spine

  double dist2(const double* x, int dim) const;
};

struct WedgeBoundary {
  int dim = 0;
  std::vector<HalfPlane> halfplanes;

  // Squared distance to the union of the half-planes.
  double dist2(const double* x) const;
};

// Exact optimal transport cost with squared Euclidean ground cost between
// balanced measures (successive-shortest-path min-cost flow).
double w2_squared(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2);

// The corner distance d(mu1, mu2): each measure splits into a transported
// part (paying W2^2) and a dumped part paying dist(x, wedge)^2 per unit
// mass; realized as a min-cost flow with one dump arc per atom. Totals need
// not match.
double corner_distance(const DiscreteMeasure& mu1, const DiscreteMeasure& mu2,
                       const WedgeBoundary& wedge);

// phi_r(x) = phi((x - center)/r) with phi = 1 on |xi| <= 1/2,
// (2(1-|xi|))^2 on 1/2 < |xi| < 1, 0 outside: continuous, quadratic
// vanishing at the unit sphere.
double bump_value(double xi_norm);
std::vector<double> bump_weights(const std::vector<double>& points, int dim,
                                 const std::vector<double>& center, double r);

// The measure phi_r d|mu| with zero-weight atoms dropped (bump centered at
// the origin unless given).
DiscreteMeasure bump_measure(const DiscreteMeasure& mu, double r,
                             const std::vector<double>* center = nullptr);

// Strong excess E(T, C, B_r) = r^{-(m+2)} d(phi_r d|T|, phi_r d|C|), bump
// centered at the origin (the corner point).
double strong_excess(const DiscreteMeasure& t_mu, const DiscreteMeasure& c_mu,
                     const WedgeBoundary& wedge, double r, int m);

}  // namespace qlab
