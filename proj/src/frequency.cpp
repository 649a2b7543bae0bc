#include "qlab/frequency.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

namespace qlab {

namespace {

double dist(const Vec& a, const Vec& b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) {
    const double t = a[d] - b[d];
    s += t * t;
  }
  return std::sqrt(s);
}

// Fraction of an edge's dual cell inside the ball of radius r around c,
// relative to the dual cell's part inside the domain. Consistent with the
// edge weights, which are dual-cell volumes.
double dual_cell_ball_fraction(const Mesh& mesh, const MeshEdge& e, const Vec& c, double r,
                               const std::function<bool(const Vec&)>& inside) {
  const int dim = mesh.dim;
  const double h = mesh.h;
  const double reach = h * std::sqrt(static_cast<double>(dim));
  const double da = dist(mesh.vertices[e.a], c, dim);
  const double db = dist(mesh.vertices[e.b], c, dim);
  if (da <= r - reach && db <= r - reach) return 1.0;
  if (da >= r + reach && db >= r + reach) return 0.0;
  Vec mid = mesh.vertices[e.a];
  for (int d = 0; d < dim; ++d) mid[d] = 0.5 * (mid[d] + mesh.vertices[e.b][d]);
  const int sub = dim == 2 ? 8 : 6;
  int64_t count = 1;
  for (int d = 0; d < dim; ++d) count *= sub;
  const double step = h / sub;
  int64_t in_domain = 0;
  int64_t in_ball = 0;
  for (int64_t s = 0; s < count; ++s) {
    int64_t rem = s;
    Vec p = mid;
    for (int d = 0; d < dim; ++d) {
      p[d] += -0.5 * h + (rem % sub + 0.5) * step;
      rem /= sub;
    }
    if (!inside(p)) continue;
    ++in_domain;
    if (dist(p, c, dim) <= r) ++in_ball;
  }
  if (in_domain == 0) return 0.0;
  return static_cast<double>(in_ball) / static_cast<double>(in_domain);
}

// Integral of |f(x)|^2 (r_ref/|x-c|)^p over the radial window [lo, hi], by
// cell-clipped midpoint subsampling of each vertex cell. p = m-1 with
// r_ref = r compensates the spherical measure growth across a thin shell;
// p = 0 gives the plain ball/window mass.
double window_l2(const MultiField& f, const Vec& c, double lo, double hi, int radial_power = 0,
                 double r_ref = 1.0) {
  const Mesh& mesh = f.mesh();
  const int dim = mesh.dim;
  const double h = mesh.h;
  const double half = 0.5 * h;
  const double slack = half * std::sqrt(static_cast<double>(dim)) + 1e-12;
  const auto inside = domain_indicator(mesh);
  const int sub = dim == 2 ? 8 : 6;
  double total = 0.0;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const double d = dist(mesh.vertices[v], c, dim);
    if (d < lo - slack || d > hi + slack) continue;
    const double f2 = f.norm2_at(v);
    if (f2 == 0.0) continue;
    // Cell overlap with {lo <= |x-c| <= hi} intersected with the domain.
    double weighted = 0.0;
    int64_t count = 1;
    for (int dd = 0; dd < dim; ++dd) count *= sub;
    const double step = h / sub;
    for (int64_t s = 0; s < count; ++s) {
      int64_t rem = s;
      Vec p = mesh.vertices[v];
      for (int dd = 0; dd < dim; ++dd) {
        p[dd] += -half + (rem % sub + 0.5) * step;
        rem /= sub;
      }
      if (!inside(p)) continue;
      const double pd = dist(p, c, dim);
      if (pd < lo || pd > hi) continue;
      weighted += radial_power == 0 ? 1.0 : std::pow(r_ref / std::max(pd, 1e-300), radial_power);
    }
    const double cell = std::pow(h, dim) / static_cast<double>(count);
    total += cell * weighted * f2;
  }
  return total;
}

}  // namespace

double max_profile_radius(const Mesh& mesh, const Vec& center) {
  switch (mesh.kind) {
    case DomainKind::QuarterBall:
    case DomainKind::Disk: {
      const double d = dist(center, Vec{0, 0, 0}, mesh.dim);
      return mesh.outer_radius - d - mesh.h;
    }
    case DomainKind::Cylinder: {
      const double dz = std::hypot(center[0], center[1]);
      return std::min(mesh.outer_radius - dz, mesh.height - center[2]) - mesh.h;
    }
  }
  throw DomainError("unknown mesh domain kind");
}

FrequencyProfile frequency_profile(const MultiField& f, const Vec& center,
                                   std::vector<double> radii) {
  const Mesh& mesh = f.mesh();
  const double h = mesh.h;
  if (radii.empty()) throw DomainError("frequency_profile: empty radius list");
  for (size_t k = 0; k < radii.size(); ++k) {
    if (radii[k] <= 0.0 || (k > 0 && radii[k] <= radii[k - 1])) {
      throw DomainError("frequency_profile: radii must be positive and strictly increasing");
    }
  }
  const double rmax = max_profile_radius(mesh, center);
  if (radii.back() > rmax + 1e-12) {
    throw RadiusError("frequency_profile: ball of radius " + std::to_string(radii.back()) +
                      " exits the meshed extent (max " + std::to_string(rmax) + ")");
  }

  FrequencyProfile p;
  p.center = center;
  p.h = h;
  p.radii = radii;
  p.D.resize(radii.size());
  p.H.resize(radii.size());
  p.I.assign(radii.size(), std::numeric_limits<double>::quiet_NaN());

  // Edge energies once; per-radius inside fractions.
  std::vector<double> edge_energy(mesh.edge_count());
  for (int e = 0; e < mesh.edge_count(); ++e) {
    const MeshEdge& edge = mesh.edges[e];
    const double g = g_distance(f.at(edge.a), f.at(edge.b));
    edge_energy[e] = edge.weight * g * g;
  }

  const auto inside = domain_indicator(mesh);
  for (size_t k = 0; k < radii.size(); ++k) {
    const double r = radii[k];
    double D = 0.0;
    for (int e = 0; e < mesh.edge_count(); ++e) {
      if (edge_energy[e] == 0.0) continue;
      const double frac = dual_cell_ball_fraction(mesh, mesh.edges[e], center, r, inside);
      if (frac > 0.0) D += edge_energy[e] * frac;
    }
    const double lo = std::max(0.0, r - h);
    const double hi = r + h;
    const double H = window_l2(f, center, lo, hi, mesh.dim - 1, r) / (hi - lo);
    p.D[k] = D;
    p.H[k] = H;
    if (H > 0.0) {
      p.I[k] = r * D / H;
    } else {
      p.degenerate = true;  // u vanishes near the center, or I undefined here
    }
  }
  return p;
}

MonotoneCheck check_monotone(const FrequencyProfile& p, double slack) {
  MonotoneCheck res;
  res.worst_violation = -std::numeric_limits<double>::infinity();
  res.pass = true;
  int prev = -1;
  for (size_t k = 0; k < p.I.size(); ++k) {
    if (std::isnan(p.I[k])) continue;
    if (prev >= 0) {
      const double drop = p.I[prev] - p.I[k];
      res.worst_violation = std::max(res.worst_violation, drop);
      if (drop > slack) res.pass = false;
    }
    prev = static_cast<int>(k);
  }
  if (res.worst_violation == -std::numeric_limits<double>::infinity()) res.worst_violation = 0.0;
  return res;
}

CornerBoundResult corner_frequency_bound(const FrequencyProfile& p) {
  CornerBoundResult res;
  std::vector<double> plateau;
  for (size_t k = 0; k < p.radii.size() && plateau.size() < 3; ++k) {
    if (p.radii[k] < 8.0 * p.h - 1e-12) continue;  // shell under-resolved
    if (std::isnan(p.I[k])) continue;
    plateau.push_back(p.I[k]);
  }
  if (plateau.size() < 3) {
    res.verdict = CornerVerdict::Inconclusive;
    return res;
  }
  std::sort(plateau.begin(), plateau.end());
  res.plateau = plateau[1];
  res.verdict = res.plateau >= 2.0 - 0.15 ? CornerVerdict::Pass : CornerVerdict::Fail;
  return res;
}

QPoint HomogeneousSolution2D::at(double x1, double x2) const {
  const double r = std::hypot(x1, x2);
  const double theta = std::atan2(x2, x1);
  const double amp = std::pow(r, k) * std::sin(k * theta);
  std::vector<double> flat;
  flat.reserve(sheets.size() * n());
  for (const auto& v : sheets) {
    for (double c : v) flat.push_back(c * amp);
  }
  return QPoint(q(), n(), std::move(flat));
}

HomogeneousSolution2D homogeneous_2d_solution(int k, std::vector<std::vector<double>> v_list) {
  if (k <= 0 || k % 2 != 0) {
    throw DomainError("homogeneous_2d_solution: k must be a positive even integer "
                      "(sin(k theta) must vanish at theta = pi/2)");
  }
  if (v_list.empty()) throw DomainError("homogeneous_2d_solution: empty sheet list");
  const size_t n = v_list[0].size();
  for (const auto& v : v_list) {
    if (v.size() != n) throw DimensionMismatch("homogeneous_2d_solution: ragged vectors");
  }
  HomogeneousSolution2D sol;
  sol.k = k;
  sol.sheets = std::move(v_list);
  return sol;
}

MultiField sample_field(const Mesh& mesh, const HomogeneousSolution2D& sol) {
  if (mesh.dim != 2) throw DimensionMismatch("sample_field: 2-d mesh required");
  MultiField f(mesh, sol.q(), sol.n());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    f.set(v, sol.at(mesh.vertices[v][0], mesh.vertices[v][1]));
  }
  return f;
}

HeightDecayResult height_decay_check(const MultiField& f, const Vec& center, double alpha) {
  const Mesh& mesh = f.mesh();
  const int m = mesh.dim;
  const double h = mesh.h;
  const double R = mesh.outer_radius - dist(center, Vec{0, 0, 0}, mesh.dim);
  const double boundary = window_l2(f, center, R - h, R) / h;

  HeightDecayResult res;
  res.pass = true;
  if (boundary <= 0.0) return res;  // zero field: passes trivially
  for (int j = 1; j <= 8; ++j) {
    const double r = 0.5 * R * j / 8.0;
    const double lhs = window_l2(f, center, 0.0, r);
    const double rhs =
        (1.0 / (m + 1)) * std::pow(r / R, m - 1 + 2.0 * alpha) * R * boundary * 1.2;
    const double ratio = lhs / rhs;
    res.worst_ratio = std::max(res.worst_ratio, ratio);
    if (ratio > 1.0) res.pass = false;
  }
  return res;
}

void FrequencyProfile::export_csv(std::ostream& out) const {
  out << "r,D,H,I\n";
  char buf[160];
  for (size_t k = 0; k < radii.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", radii[k], D[k], H[k], I[k]);
    out << buf;
  }
}

void FrequencyProfile::export_csv_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  export_csv(out);
}

}  // namespace qlab
