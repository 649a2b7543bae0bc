#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "qlab/mesh.hpp"
#include "qlab/qpoint.hpp"

namespace qlab {

// A QPoint-valued sample field on a mesh. Samples are kept in canonical
// (sheet-sorted) form; vertices marked fixed carry Dirichlet data.
class MultiField {
 public:
  MultiField(const Mesh& mesh, int q, int n);

  const Mesh& mesh() const { return *mesh_; }
  int q() const { return q_; }
  int n() const { return n_; }

  QPoint at(int v) const;
  void set(int v, const QPoint& p);
  std::span<const double> raw(int v) const {
    return {samples_.data() + offset(v), static_cast<size_t>(q_) * n_};
  }

  void set_fixed(int v, bool fixed = true) { fixed_[v] = fixed ? 1 : 0; }
  bool is_fixed(int v) const { return fixed_[v] != 0; }
  int fixed_count() const;

  // |f(v)|^2 = sum of squared sheet norms at v.
  double norm2_at(int v) const;

  // Plain-text export: one line per vertex, index then q*n coordinates.
  void export_text(std::ostream& out) const;
  void export_text_file(const std::string& path) const;
  static MultiField import_text(std::istream& in, const Mesh& mesh);
  static MultiField import_text_file(const std::string& path, const Mesh& mesh);

 private:
  size_t offset(int v) const { return static_cast<size_t>(v) * q_ * n_; }
  friend class GaussSeidelSweeper;

  const Mesh* mesh_;
  int q_;
  int n_;
  std::vector<double> samples_;
  std::vector<char> fixed_;
};

// Discrete Dirichlet energy: sum over edges of weight * g_distance^2.
double energy(const MultiField& f);

struct ConvergenceReport {
  bool converged = false;
  int sweeps = 0;
  double final_energy = 0.0;
  std::vector<double> energy_history;     // entry 0 = initial energy
  std::vector<double> max_displacement;   // per sweep
  void export_csv(std::ostream& out) const;  // sweep,energy,max_displacement
  void export_csv_file(const std::string& path) const;
};

inline constexpr double kDefaultTol = 1e-10;
inline constexpr int kDefaultMaxSweeps = 100000;

// Nonlinear Gauss-Seidel relaxation of the matching energy: each free vertex
// is replaced by the weighted average of its neighbors' sheets after
// resolving each neighbor's optimal matching against the current value.
// Sweeps run in vertex id (lattice-lexicographic) order. Energy is
// non-increasing; stops once one full sweep changes energy by less than
// tol*(energy+1).
MultiField minimize(const MultiField& f0, double tol = kDefaultTol,
                    int max_sweeps = kDefaultMaxSweeps, ConvergenceReport* report = nullptr);

// Boundary traces --------------------------------------------------------

// f(z,t) = sum_{w^2=z} <<w t>>: the square-root pair scaled by height.
// Vanishes identically at t=0 and z=0.
QPoint sqrt_cylinder_value(double zx, double zy, double t);
std::vector<QPoint> sqrt_trace(const std::vector<std::array<double, 3>>& points);

// u(z) = sum_{w^2=z} <<w>>: the planar two-valued square root.
QPoint sqrt_planar_value(double zx, double zy);

// Largest t with 1 - t^2 - t^4 >= 0.
double mobius_t_max();

// Phi^1(z,t) = sum_{w^2=z} <<(sqrt(1-t^2-t^4) z, t^2, t w)>> in R^5; every
// value lies on S^4. Requires |z| = 1 within tol and t in [0, mobius_t_max()].
QPoint mobius_value(double zx, double zy, double t, double tol = 1e-9);
std::vector<QPoint> mobius_trace(const std::vector<std::array<double, 2>>& zs,
                                 const std::vector<double>& ts, double tol = 1e-9);

struct Trace {
  enum class Kind { Zero, SqrtCylinder, SqrtPlanar, Custom };
  Kind kind = Kind::Zero;
  int q = 2;
  int n = 2;
  std::function<QPoint(const Vec&)> custom;

  QPoint operator()(const Vec& x) const;
};

// Writes trace(x) into f at every vertex whose tag is in `on`, marking those
// vertices fixed.
void impose_trace(MultiField& f, const Trace& trace, const std::vector<Tag>& on);

// Solver initialization: harmonic extension of the fixed data's barycenter
// (a single-valued relaxation), duplicated Q times and split by
// (2i - Q + 1) * h along the first target axis. A symmetric start can be a
// saddle of the matching energy; the split breaks it deterministically.
void initialize_split(MultiField& f, double tol = 1e-10, int max_sweeps = 50000);

}  // namespace qlab
