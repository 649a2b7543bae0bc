#include "qlab/field.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace qlab {

MultiField::MultiField(const Mesh& mesh, int q, int n)
    : mesh_(&mesh),
      q_(q),
      n_(n),
      samples_(static_cast<size_t>(mesh.vertex_count()) * q * n, 0.0),
      fixed_(mesh.vertex_count(), 0) {
  if (q < 1 || n < 1) throw DimensionMismatch("MultiField requires q >= 1, n >= 1");
}

QPoint MultiField::at(int v) const {
  const auto r = raw(v);
  return QPoint(q_, n_, std::vector<double>(r.begin(), r.end()));
}

void MultiField::set(int v, const QPoint& p) {
  if (p.q() != q_ || p.n() != n_) {
    throw DimensionMismatch("MultiField::set: sample has wrong q or n");
  }
  std::copy(p.flat().begin(), p.flat().end(), samples_.begin() + offset(v));
}

int MultiField::fixed_count() const {
  int c = 0;
  for (char f : fixed_) c += f;
  return c;
}

double MultiField::norm2_at(int v) const {
  const auto r = raw(v);
  double s = 0.0;
  for (double x : r) s += x * x;
  return s;
}

void MultiField::export_text(std::ostream& out) const {
  out << "qlab-field 1\n";
  out << "q " << q_ << " n " << n_ << " vertices " << mesh_->vertex_count() << "\n";
  char buf[64];
  for (int v = 0; v < mesh_->vertex_count(); ++v) {
    std::string line = std::to_string(v);
    for (double x : raw(v)) {
      std::snprintf(buf, sizeof buf, " %.17g", x);
      line += buf;
    }
    out << line << "\n";
  }
}

void MultiField::export_text_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  export_text(out);
}

MultiField MultiField::import_text(std::istream& in, const Mesh& mesh) {
  std::string magic;
  int version = 0;
  in >> magic >> version;
  if (magic != "qlab-field" || version != 1) throw Error("bad field file header");
  std::string kw;
  int q = 0, n = 0, nv = 0;
  in >> kw >> q >> kw >> n >> kw >> nv;
  if (nv != mesh.vertex_count()) throw DimensionMismatch("field file does not match mesh");
  MultiField f(mesh, q, n);
  std::vector<double> flat(static_cast<size_t>(q) * n);
  for (int line = 0; line < nv; ++line) {
    int v = 0;
    in >> v;
    for (double& x : flat) in >> x;
    if (!in) throw Error("truncated field file");
    f.set(v, QPoint(q, n, flat));
  }
  return f;
}

MultiField MultiField::import_text_file(const std::string& path, const Mesh& mesh) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  return import_text(in, mesh);
}

namespace {

// Matching cost between two raw sample blocks, no allocation for q <= 2.
double raw_matching_cost(const double* a, const double* b, int q, int n,
                         std::vector<int>* perm_out) {
  if (q == 1) {
    double c = 0.0;
    for (int k = 0; k < n; ++k) {
      const double d = a[k] - b[k];
      c += d * d;
    }
    if (perm_out) (*perm_out) = {0};
    return c;
  }
  if (q == 2) {
    double c00 = 0.0, c11 = 0.0, c01 = 0.0, c10 = 0.0;
    for (int k = 0; k < n; ++k) {
      const double d00 = a[k] - b[k];
      const double d11 = a[n + k] - b[n + k];
      const double d01 = a[k] - b[n + k];
      const double d10 = a[n + k] - b[k];
      c00 += d00 * d00;
      c11 += d11 * d11;
      c01 += d01 * d01;
      c10 += d10 * d10;
    }
    const double c_id = c00 + c11;
    const double c_sw = c01 + c10;
    if (c_id <= c_sw) {
      if (perm_out) (*perm_out) = {0, 1};
      return c_id;
    }
    if (perm_out) (*perm_out) = {1, 0};
    return c_sw;
  }
  const QPoint pa(q, n, std::vector<double>(a, a + static_cast<size_t>(q) * n));
  const QPoint pb(q, n, std::vector<double>(b, b + static_cast<size_t>(q) * n));
  std::vector<int> perm;
  const double c = best_matching_into(pa, pb, perm);
  // Canonicalization may reorder sheets; costs are permutation-invariant,
  // so the cost is still correct. The permutation refers to canonical order.
  if (perm_out) *perm_out = perm;
  return c;
}

}  // namespace

double energy(const MultiField& f) {
  const Mesh& mesh = f.mesh();
  const int q = f.q();
  const int n = f.n();
  double e = 0.0;
  for (const MeshEdge& edge : mesh.edges) {
    e += edge.weight * raw_matching_cost(f.raw(edge.a).data(), f.raw(edge.b).data(), q, n, nullptr);
  }
  return e;
}

// One relaxation pass; samples stay canonical because set() goes through
// QPoint. Kept as a friend so the sweep can work on raw blocks.
class GaussSeidelSweeper {
 public:
  explicit GaussSeidelSweeper(MultiField& f) : f_(f), q_(f.q()), n_(f.n()) {}

  double sweep() {
    const Mesh& mesh = f_.mesh();
    double max_disp2 = 0.0;
    std::vector<double> acc(static_cast<size_t>(q_) * n_);
    std::vector<int> perm;
    std::vector<double> flat;
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (f_.is_fixed(v)) continue;
      std::fill(acc.begin(), acc.end(), 0.0);
      double wsum = 0.0;
      const double* cur = f_.samples_.data() + f_.offset(v);
      for (int eid : mesh.incident_edges(v)) {
        const MeshEdge& e = mesh.edges[eid];
        const int u = e.a == v ? e.b : e.a;
        const double* nb = f_.samples_.data() + f_.offset(u);
        raw_matching_cost(cur, nb, q_, n_, &perm);
        for (int i = 0; i < q_; ++i) {
          const double* sheet = nb + static_cast<size_t>(perm[i]) * n_;
          for (int k = 0; k < n_; ++k) acc[static_cast<size_t>(i) * n_ + k] += e.weight * sheet[k];
        }
        wsum += e.weight;
      }
      if (wsum <= 0.0) continue;
      for (double& x : acc) x /= wsum;
      const double disp2 = raw_matching_cost(cur, acc.data(), q_, n_, nullptr);
      max_disp2 = std::max(max_disp2, disp2);
      flat.assign(acc.begin(), acc.end());
      f_.set(v, QPoint(q_, n_, flat));
    }
    return std::sqrt(max_disp2);
  }

 private:
  MultiField& f_;
  int q_;
  int n_;
};

MultiField minimize(const MultiField& f0, double tol, int max_sweeps, ConvergenceReport* report) {
  if (!(tol > 0.0)) throw DomainError("minimize: tol must be positive");
  MultiField f = f0;
  GaussSeidelSweeper sweeper(f);
  ConvergenceReport local;
  ConvergenceReport& rep = report ? *report : local;
  rep = ConvergenceReport{};
  double e = energy(f);
  rep.energy_history.push_back(e);
  for (int s = 0; s < max_sweeps; ++s) {
    const double disp = sweeper.sweep();
    const double e_new = energy(f);
    rep.energy_history.push_back(e_new);
    rep.max_displacement.push_back(disp);
    rep.sweeps = s + 1;
    const double change = e - e_new;
    e = e_new;
    if (change < tol * (e_new + 1.0)) {
      rep.converged = true;
      break;
    }
  }
  rep.final_energy = e;
  return f;
}

void ConvergenceReport::export_csv(std::ostream& out) const {
  out << "sweep,energy,max_displacement\n";
  char buf[96];
  for (size_t s = 0; s < energy_history.size(); ++s) {
    const double disp = s == 0 ? 0.0 : max_displacement[s - 1];
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", s, energy_history[s], disp);
    out << buf;
  }
}

void ConvergenceReport::export_csv_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  export_csv(out);
}

// Traces ------------------------------------------------------------------

QPoint sqrt_cylinder_value(double zx, double zy, double t) {
  const std::complex<double> w = std::sqrt(std::complex<double>(zx, zy));
  return QPoint(2, 2, {w.real() * t, w.imag() * t, -w.real() * t, -w.imag() * t});
}

std::vector<QPoint> sqrt_trace(const std::vector<std::array<double, 3>>& points) {
  std::vector<QPoint> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(sqrt_cylinder_value(p[0], p[1], p[2]));
  return out;
}

QPoint sqrt_planar_value(double zx, double zy) { return sqrt_cylinder_value(zx, zy, 1.0); }

double mobius_t_max() { return std::sqrt((std::sqrt(5.0) - 1.0) / 2.0); }

QPoint mobius_value(double zx, double zy, double t, double tol) {
  const double zn = std::hypot(zx, zy);
  if (std::abs(zn - 1.0) > tol) {
    throw DomainError("mobius_value: z must lie on the unit circle");
  }
  const double rad = 1.0 - t * t - t * t * t * t;
  if (t < 0.0 || rad < -1e-15) {
    throw DomainError("mobius_value: t outside [0, sqrt((sqrt5-1)/2)]");
  }
  const double a = std::sqrt(std::max(0.0, rad));
  const std::complex<double> w = std::sqrt(std::complex<double>(zx, zy));
  std::vector<double> flat(10);
  for (int s = 0; s < 2; ++s) {
    const double sign = s == 0 ? 1.0 : -1.0;
    double* v = flat.data() + 5 * s;
    v[0] = a * zx;
    v[1] = a * zy;
    v[2] = t * t;
    v[3] = sign * t * w.real();
    v[4] = sign * t * w.imag();
  }
  return QPoint(2, 5, std::move(flat));
}

std::vector<QPoint> mobius_trace(const std::vector<std::array<double, 2>>& zs,
                                 const std::vector<double>& ts, double tol) {
  if (zs.size() != ts.size()) throw DimensionMismatch("mobius_trace: z and t lists differ");
  std::vector<QPoint> out;
  out.reserve(zs.size());
  for (size_t i = 0; i < zs.size(); ++i) out.push_back(mobius_value(zs[i][0], zs[i][1], ts[i], tol));
  return out;
}

QPoint Trace::operator()(const Vec& x) const {
  switch (kind) {
    case Kind::Zero:
      return QPoint(q, n);
    case Kind::SqrtCylinder:
      if (q != 2 || n != 2) throw DimensionMismatch("SqrtCylinder trace requires q=2, n=2");
      return sqrt_cylinder_value(x[0], x[1], x[2]);
    case Kind::SqrtPlanar:
      if (q != 2 || n != 2) throw DimensionMismatch("SqrtPlanar trace requires q=2, n=2");
      return sqrt_planar_value(x[0], x[1]);
    case Kind::Custom:
      return custom(x);
  }
  throw DomainError("unreachable trace kind");
}

void impose_trace(MultiField& f, const Trace& trace, const std::vector<Tag>& on) {
  const Mesh& mesh = f.mesh();
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (std::find(on.begin(), on.end(), mesh.tags[v]) == on.end()) continue;
    f.set(v, trace(mesh.vertices[v]));
    f.set_fixed(v);
  }
}

void initialize_split(MultiField& f, double tol, int max_sweeps) {
  const Mesh& mesh = f.mesh();
  const int q = f.q();
  const int n = f.n();
  MultiField bary(mesh, 1, n);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (!f.is_fixed(v)) continue;
    bary.set(v, QPoint(1, n, mean(f.at(v))));
    bary.set_fixed(v);
  }
  const MultiField ext = minimize(bary, tol, max_sweeps);
  const double h = mesh.h;
  std::vector<double> flat(static_cast<size_t>(q) * n);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (f.is_fixed(v)) continue;
    const auto m = ext.raw(v);
    for (int i = 0; i < q; ++i) {
      for (int k = 0; k < n; ++k) flat[static_cast<size_t>(i) * n + k] = m[k];
      flat[static_cast<size_t>(i) * n] += (2 * i - q + 1) * h;
    }
    f.set(v, QPoint(q, n, flat));
  }
}

}  // namespace qlab
