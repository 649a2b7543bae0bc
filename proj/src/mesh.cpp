#include "qlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <queue>

namespace qlab {

namespace {

int64_t lattice_key(int i, int j, int k) {
  // 21 bits per signed coordinate is far beyond any desk-scale mesh.
  const int64_t off = 1 << 20;
  return ((i + off) << 42) | ((j + off) << 21) | (k + off);
}

// Volume of an axis box intersected with a convex domain. A box with all
// corners inside a convex domain lies inside; otherwise midpoint subsampling.
double clipped_box_volume(const Vec& center, double half, int dim,
                          const std::function<bool(const Vec&)>& inside) {
  int corners_in = 0;
  const int ncorners = 1 << dim;
  for (int c = 0; c < ncorners; ++c) {
    Vec p = center;
    for (int d = 0; d < dim; ++d) p[d] += (c & (1 << d)) ? half : -half;
    if (inside(p)) ++corners_in;
  }
  const double full = std::pow(2.0 * half, dim);
  if (corners_in == ncorners) return full;
  const int sub = dim == 2 ? 12 : 6;
  const double step = 2.0 * half / sub;
  int64_t hits = 0;
  int64_t total = 1;
  for (int d = 0; d < dim; ++d) total *= sub;
  std::array<int, 3> idx{0, 0, 0};
  for (int64_t s = 0; s < total; ++s) {
    int64_t rem = s;
    Vec p = center;
    for (int d = 0; d < dim; ++d) {
      idx[d] = static_cast<int>(rem % sub);
      rem /= sub;
      p[d] += -half + (idx[d] + 0.5) * step;
    }
    if (inside(p)) ++hits;
  }
  return full * static_cast<double>(hits) / static_cast<double>(total);
}

}  // namespace

const char* tag_name(Tag t) {
  switch (t) {
    case Tag::V0: return "V0";
    case Tag::V1: return "V1";
    case Tag::CornerL: return "CORNER_L";
    case Tag::Lateral: return "LATERAL";
    case Tag::Bottom: return "BOTTOM";
    case Tag::Top: return "TOP";
    case Tag::Free: return "FREE";
  }
  return "FREE";
}

Tag tag_from_name(const std::string& name) {
  if (name == "V0") return Tag::V0;
  if (name == "V1") return Tag::V1;
  if (name == "CORNER_L") return Tag::CornerL;
  if (name == "LATERAL") return Tag::Lateral;
  if (name == "BOTTOM") return Tag::Bottom;
  if (name == "TOP") return Tag::Top;
  if (name == "FREE") return Tag::Free;
  throw DomainError("unknown tag name: " + name);
}

int Mesh::vertex_at(int i, int j, int k) const {
  auto it = index_.find(lattice_key(i, j, k));
  return it == index_.end() ? -1 : it->second;
}

void Mesh::finalize() {
  const int nv = vertex_count();
  index_.clear();
  for (int v = 0; v < nv; ++v) {
    index_[lattice_key(lattice[v][0], lattice[v][1], lattice[v][2])] = v;
  }
  std::vector<int> degree(nv, 0);
  for (const MeshEdge& e : edges) {
    ++degree[e.a];
    ++degree[e.b];
  }
  offsets_.assign(nv + 1, 0);
  for (int v = 0; v < nv; ++v) offsets_[v + 1] = offsets_[v] + degree[v];
  incidence_.assign(offsets_[nv], 0);
  std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
  for (int eid = 0; eid < edge_count(); ++eid) {
    incidence_[cursor[edges[eid].a]++] = eid;
    incidence_[cursor[edges[eid].b]++] = eid;
  }
}

bool Mesh::is_connected() const {
  if (vertices.empty()) return false;
  std::vector<char> seen(vertex_count(), 0);
  std::queue<int> bfs;
  bfs.push(0);
  seen[0] = 1;
  int visited = 1;
  while (!bfs.empty()) {
    const int v = bfs.front();
    bfs.pop();
    for (int eid : incident_edges(v)) {
      const int u = other_end(eid, v);
      if (!seen[u]) {
        seen[u] = 1;
        ++visited;
        bfs.push(u);
      }
    }
  }
  return visited == vertex_count();
}

void Mesh::export_text(std::ostream& out) const {
  char buf[160];
  out << "qlab-mesh 1\n";
  std::snprintf(buf, sizeof buf, "dim %d h %.17g\n", dim, h);
  out << buf;
  out << "vertices " << vertex_count() << "\n";
  for (int v = 0; v < vertex_count(); ++v) {
    std::string line;
    for (int d = 0; d < dim; ++d) {
      std::snprintf(buf, sizeof buf, "%.17g ", vertices[v][d]);
      line += buf;
    }
    out << line << tag_name(tags[v]) << "\n";
  }
  out << "edges " << edge_count() << "\n";
  for (const MeshEdge& e : edges) {
    std::snprintf(buf, sizeof buf, "%d %d %.17g\n", e.a, e.b, e.weight);
    out << buf;
  }
}

void Mesh::export_text_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  export_text(out);
}

Mesh build_lattice_mesh(int dim, double h, const std::array<int, 3>& lo,
                        const std::array<int, 3>& hi,
                        const std::function<bool(const Vec&)>& inside) {
  Mesh mesh;
  mesh.dim = dim;
  mesh.h = h;
  // Vertices in lexicographic lattice order (the k range is {0,0} in 2d).
  for (int i = lo[0]; i <= hi[0]; ++i) {
    for (int j = lo[1]; j <= hi[1]; ++j) {
      for (int k = lo[2]; k <= hi[2]; ++k) {
        Vec p{i * h, j * h, dim == 3 ? k * h : 0.0};
        if (!inside(p)) continue;
        mesh.vertices.push_back(p);
        mesh.lattice.push_back({i, j, k});
      }
    }
  }
  mesh.tags.assign(mesh.vertices.size(), Tag::Free);
  mesh.finalize();  // build lattice index before edge construction

  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const auto& lc = mesh.lattice[v];
    for (int d = 0; d < dim; ++d) {
      std::array<int, 3> nb = lc;
      ++nb[d];
      const int u = mesh.vertex_at(nb[0], nb[1], nb[2]);
      if (u < 0) continue;
      Vec mid = mesh.vertices[v];
      mid[d] += 0.5 * h;
      const double vol = clipped_box_volume(mid, 0.5 * h, dim, inside);
      mesh.edges.push_back({v, u, vol / (h * h)});
    }
  }
  mesh.vertex_volume.resize(mesh.vertices.size());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    mesh.vertex_volume[v] = clipped_box_volume(mesh.vertices[v], 0.5 * h, dim, inside);
  }
  mesh.finalize();
  return mesh;
}

namespace {

// Within h of the lateral sphere/circle. Any vertex with a missing axis
// neighbor satisfies this, so the rim layer is always covered.
bool near_lateral(const Mesh& mesh, int v, double r, int radial_dims) {
  double s = 0.0;
  for (int d = 0; d < radial_dims; ++d) s += mesh.vertices[v][d] * mesh.vertices[v][d];
  return std::sqrt(s) > r - mesh.h;
}

}  // namespace

Mesh quarter_ball(int m, double r, double h) {
  if (m != 2 && m != 3) throw DomainError("quarter_ball: m must be 2 or 3");
  if (!(h > 0.0) || h >= r) throw ResolutionError("quarter_ball: need 0 < h < r");
  const double r2 = r * r * (1.0 + 1e-12);
  auto inside = [=](const Vec& p) {
    if (p[0] < -1e-14 || p[1] < -1e-14) return false;
    double s = p[0] * p[0] + p[1] * p[1];
    if (m == 3) s += p[2] * p[2];
    return s <= r2;
  };
  const int n = static_cast<int>(std::floor(r / h + 1e-9));
  std::array<int, 3> lo{0, 0, m == 3 ? -n : 0};
  std::array<int, 3> hi{n, n, m == 3 ? n : 0};
  Mesh mesh = build_lattice_mesh(m, h, lo, hi, inside);
  mesh.kind = DomainKind::QuarterBall;
  mesh.outer_radius = r;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const auto& lc = mesh.lattice[v];
    if (lc[0] == 0 && lc[1] == 0) {
      mesh.tags[v] = Tag::CornerL;
    } else if (lc[0] == 0) {
      mesh.tags[v] = Tag::V0;
    } else if (lc[1] == 0) {
      mesh.tags[v] = Tag::V1;
    } else if (near_lateral(mesh, v, r, m)) {
      mesh.tags[v] = Tag::Lateral;
    }
  }
  if (!mesh.is_connected()) throw Error("quarter_ball: mesh graph disconnected");
  return mesh;
}

Mesh disk(double r, double h) {
  if (!(h > 0.0) || h >= r) throw ResolutionError("disk: need 0 < h < r");
  const double r2 = r * r * (1.0 + 1e-12);
  auto inside = [=](const Vec& p) { return p[0] * p[0] + p[1] * p[1] <= r2; };
  const int n = static_cast<int>(std::floor(r / h + 1e-9));
  Mesh mesh = build_lattice_mesh(2, h, {-n, -n, 0}, {n, n, 0}, inside);
  mesh.kind = DomainKind::Disk;
  mesh.outer_radius = r;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (near_lateral(mesh, v, r, 2)) mesh.tags[v] = Tag::Lateral;
  }
  if (!mesh.is_connected()) throw Error("disk: mesh graph disconnected");
  return mesh;
}

std::function<bool(const Vec&)> domain_indicator(const Mesh& mesh) {
  const double r2 = mesh.outer_radius * mesh.outer_radius * (1.0 + 1e-12);
  const double height = mesh.height;
  switch (mesh.kind) {
    case DomainKind::QuarterBall:
      if (mesh.dim == 2) {
        return [r2](const Vec& p) {
          return p[0] >= -1e-14 && p[1] >= -1e-14 && p[0] * p[0] + p[1] * p[1] <= r2;
        };
      }
      return [r2](const Vec& p) {
        return p[0] >= -1e-14 && p[1] >= -1e-14 &&
               p[0] * p[0] + p[1] * p[1] + p[2] * p[2] <= r2;
      };
    case DomainKind::Disk:
      return [r2](const Vec& p) { return p[0] * p[0] + p[1] * p[1] <= r2; };
    case DomainKind::Cylinder:
      return [r2, height](const Vec& p) {
        return p[2] >= -1e-14 && p[2] <= height + 1e-14 && p[0] * p[0] + p[1] * p[1] <= r2;
      };
  }
  throw DomainError("unknown mesh domain kind");
}

Mesh cylinder(double h) {
  if (!(h > 0.0) || h >= 1.0) throw ResolutionError("cylinder: need 0 < h < 1");
  const double r2 = 1.0 + 1e-12;
  const int top = static_cast<int>(std::floor(1.0 / h + 1e-9));
  auto inside = [=](const Vec& p) {
    if (p[2] < -1e-14 || p[2] > top * h + 1e-14) return false;
    return p[0] * p[0] + p[1] * p[1] <= r2;
  };
  const int n = static_cast<int>(std::floor(1.0 / h + 1e-9));
  Mesh mesh = build_lattice_mesh(3, h, {-n, -n, 0}, {n, n, top}, inside);
  mesh.kind = DomainKind::Cylinder;
  mesh.outer_radius = 1.0;
  mesh.height = top * h;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    const auto& lc = mesh.lattice[v];
    if (lc[2] == 0) {
      mesh.tags[v] = Tag::Bottom;
    } else if (lc[2] == top) {
      mesh.tags[v] = Tag::Top;
    } else if (near_lateral(mesh, v, 1.0, 2)) {
      mesh.tags[v] = Tag::Lateral;
    }
  }
  if (!mesh.is_connected()) throw Error("cylinder: mesh graph disconnected");
  return mesh;
}

}  // namespace qlab
