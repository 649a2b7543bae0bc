#include "qlab/topology.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <queue>
#include <sstream>

namespace qlab {

Permutation identity_permutation(int q) {
  Permutation p(q);
  for (int i = 0; i < q; ++i) p[i] = i;
  return p;
}

bool is_identity(const Permutation& p) {
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] != static_cast<int>(i)) return false;
  }
  return true;
}

Permutation compose(const Permutation& after, const Permutation& before) {
  Permutation r(before.size());
  for (size_t i = 0; i < before.size(); ++i) r[i] = after[before[i]];
  return r;
}

Permutation inverse(const Permutation& p) {
  Permutation r(p.size());
  for (size_t i = 0; i < p.size(); ++i) r[p[i]] = static_cast<int>(i);
  return r;
}

bool is_transposition(const Permutation& p) {
  int moved = 0;
  for (size_t i = 0; i < p.size(); ++i) {
    if (p[i] != static_cast<int>(i)) ++moved;
  }
  if (moved != 2) return false;
  return is_identity(compose(p, p));
}

std::string cycle_notation(const Permutation& p) {
  std::string out;
  std::vector<char> seen(p.size(), 0);
  for (size_t i = 0; i < p.size(); ++i) {
    if (seen[i] || p[i] == static_cast<int>(i)) continue;
    out += "(";
    size_t j = i;
    bool first = true;
    while (!seen[j]) {
      seen[j] = 1;
      if (!first) out += " ";
      out += std::to_string(j + 1);  // sheets numbered 1..Q
      first = false;
      j = p[j];
    }
    out += ")";
  }
  return out.empty() ? "id" : out;
}

Permutation SheetGraph::step(int u, int w) const {
  for (int eid : base->incident_edges(u)) {
    const MeshEdge& e = base->edges[eid];
    if ((e.a == u && e.b == w) || (e.a == w && e.b == u)) {
      if (!edge_in_cover[eid]) throw DomainError("step: edge not in the cover");
      return e.a == u ? edge_perm[eid] : inverse(edge_perm[eid]);
    }
  }
  throw DomainError("step: vertices not adjacent");
}

int SheetGraph::region_size() const {
  int c = 0;
  for (char r : in_region) c += r;
  return c;
}

SheetGraph build_sheet_graph(const MultiField& f, double s_min) {
  if (!(s_min > 0.0)) throw DomainError("build_sheet_graph: s_min must be positive");
  const Mesh& mesh = f.mesh();
  SheetGraph g;
  g.base = &mesh;
  g.q = f.q();
  g.s_min = s_min;
  g.in_region.assign(mesh.vertex_count(), 0);
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (f.q() == 1 || separation(f.at(v)) > s_min) g.in_region[v] = 1;
  }
  g.edge_perm.assign(mesh.edge_count(), {});
  g.edge_in_cover.assign(mesh.edge_count(), 0);
  int worst_a = -1, worst_b = -1;
  double worst_osc = 0.0;
  for (int eid = 0; eid < mesh.edge_count(); ++eid) {
    const MeshEdge& e = mesh.edges[eid];
    if (!g.in_region[e.a] || !g.in_region[e.b]) continue;
    const Matching m = best_matching(f.at(e.a), f.at(e.b));
    const double osc = std::sqrt(m.cost);
    if (osc > worst_osc) {
      worst_osc = osc;
      worst_a = e.a;
      worst_b = e.b;
    }
    g.edge_perm[eid] = m.perm;
    g.edge_in_cover[eid] = 1;
  }
  if (worst_osc >= s_min / 4.0) {
    throw RefineMeshError("build_sheet_graph: edge oscillation " + std::to_string(worst_osc) +
                              " >= s_min/4 = " + std::to_string(s_min / 4.0) +
                              " on region edge (" + std::to_string(worst_a) + "," +
                              std::to_string(worst_b) + "); refine the mesh",
                          worst_a, worst_b, worst_osc);
  }
  return g;
}

Permutation loop_monodromy(const SheetGraph& g, const std::vector<int>& loop) {
  if (loop.size() < 2) throw DomainError("loop_monodromy: loop too short");
  Permutation sigma = identity_permutation(g.q);
  const size_t k = loop.size();
  for (size_t s = 0; s < k; ++s) {
    const int u = loop[s];
    const int w = loop[(s + 1) % k];
    if (u == w) continue;
    if (!g.vertex_in_region(u) || !g.vertex_in_region(w)) {
      throw DomainError("loop_monodromy: loop leaves the separated region");
    }
    sigma = compose(g.step(u, w), sigma);
  }
  return sigma;
}

SelectionResult has_global_selection(const SheetGraph& g) {
  const Mesh& mesh = *g.base;
  std::vector<int> pos(mesh.vertex_count(), -1);
  std::vector<int> region;
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    if (g.vertex_in_region(v)) {
      pos[v] = static_cast<int>(region.size());
      region.push_back(v);
    }
  }
  if (region.empty()) throw PreconditionError("has_global_selection: empty region");
  {
    std::vector<char> seen(region.size(), 0);
    std::queue<int> bfs;
    bfs.push(region[0]);
    seen[0] = 1;
    int visited = 1;
    while (!bfs.empty()) {
      const int v = bfs.front();
      bfs.pop();
      for (int eid : mesh.incident_edges(v)) {
        if (!g.edge_in_cover[eid]) continue;
        const int u = mesh.other_end(eid, v);
        if (!seen[pos[u]]) {
          seen[pos[u]] = 1;
          ++visited;
          bfs.push(u);
        }
      }
    }
    if (visited != static_cast<int>(region.size())) {
      throw PreconditionError("has_global_selection: region not connected");
    }
  }

  const int q = g.q;
  const int nodes = static_cast<int>(region.size()) * q;
  std::vector<int> parent(nodes, -1);
  std::vector<int> comp(nodes, -1);
  int ncomp = 0;
  for (int start = 0; start < nodes; ++start) {
    if (comp[start] >= 0) continue;
    comp[start] = ncomp;
    std::queue<int> bfs;
    bfs.push(start);
    while (!bfs.empty()) {
      const int node = bfs.front();
      bfs.pop();
      const int v = region[node / q];
      const int sheet = node % q;
      for (int eid : mesh.incident_edges(v)) {
        if (!g.edge_in_cover[eid]) continue;
        const MeshEdge& e = mesh.edges[eid];
        const int u = mesh.other_end(eid, v);
        const int usheet =
            e.a == v ? g.edge_perm[eid][sheet] : inverse(g.edge_perm[eid])[sheet];
        const int unode = pos[u] * q + usheet;
        if (comp[unode] < 0) {
          comp[unode] = ncomp;
          parent[unode] = node;
          bfs.push(unode);
        }
      }
    }
    ++ncomp;
  }

  SelectionResult res;
  res.labels = comp;
  res.has_selection = true;
  for (size_t rp = 0; rp < region.size() && res.has_selection; ++rp) {
    for (int i = 0; i < q && res.has_selection; ++i) {
      for (int j = i + 1; j < q; ++j) {
        if (comp[rp * q + i] != comp[rp * q + j]) continue;
        res.has_selection = false;
        // Witness: parent chains of (rp,i) and (rp,j) meet at the BFS root;
        // their base projections concatenate to a sheet-swapping path.
        std::vector<int> left, right;
        for (int node = static_cast<int>(rp) * q + i; node >= 0; node = parent[node]) {
          left.push_back(region[node / q]);
        }
        for (int node = static_cast<int>(rp) * q + j; node >= 0; node = parent[node]) {
          right.push_back(region[node / q]);
        }
        std::reverse(left.begin(), left.end());
        res.swap_path = std::move(left);
        res.swap_path.insert(res.swap_path.end(), right.begin(), right.end());
        res.swap_sheet_from = i;
        res.swap_sheet_to = j;
        break;
      }
    }
  }
  return res;
}

// Face-grid machinery for the singularity detector ------------------------

namespace {

struct FaceGrid {
  int i0 = 0, j0 = 0, ni = 0, nj = 0;
  std::vector<char> flags;
  size_t idx(int i, int j) const {
    return static_cast<size_t>(i - i0) * nj + static_cast<size_t>(j - j0);
  }
  bool in_range(int i, int j) const { return i >= i0 && i < i0 + ni && j >= j0 && j < j0 + nj; }
  bool get(int i, int j) const { return in_range(i, j) && flags[idx(i, j)] != 0; }
  void set(int i, int j, bool v) { flags[idx(i, j)] = v ? 1 : 0; }
  void clear() { std::fill(flags.begin(), flags.end(), 0); }
};

constexpr int kDi[4] = {1, 0, -1, 0};
constexpr int kDj[4] = {0, 1, 0, -1};

// Traces the outer boundary of the face set S as a closed walk of lattice
// vertices, S kept on the left. At pinch vertices the walk turns as sharply
// right as possible, which keeps it on the outer curve.
std::vector<std::array<int, 2>> trace_outer_boundary(const FaceGrid& grid,
                                                     const std::vector<std::array<int, 2>>& faces) {
  // Face (i,j) spans corners (i,j)..(i+1,j+1). Sides with the face on the
  // left: bottom (i,j)->(i+1,j), right (i+1,j)->(i+1,j+1),
  // top (i+1,j+1)->(i,j+1), left (i,j+1)->(i,j).
  std::map<std::array<int, 2>, std::vector<int>> outgoing;
  auto add = [&](int vi, int vj, int dir) { outgoing[{vi, vj}].push_back(dir); };
  for (const auto& f : faces) {
    const int i = f[0], j = f[1];
    if (!grid.get(i, j - 1)) add(i, j, 0);
    if (!grid.get(i + 1, j)) add(i + 1, j, 1);
    if (!grid.get(i, j + 1)) add(i + 1, j + 1, 2);
    if (!grid.get(i - 1, j)) add(i, j + 1, 3);
  }
  if (outgoing.empty()) return {};
  const std::array<int, 2> start_vertex = outgoing.begin()->first;  // lexicographic minimum
  const int start_dir =
      *std::min_element(outgoing.begin()->second.begin(), outgoing.begin()->second.end());
  std::vector<std::array<int, 2>> walk;
  std::array<int, 2> v = start_vertex;
  int dir = start_dir;
  size_t guard = 0;
  const size_t max_steps = 8 * faces.size() + 16;
  do {
    walk.push_back(v);
    const std::array<int, 2> w{v[0] + kDi[dir], v[1] + kDj[dir]};
    const auto it = outgoing.find(w);
    if (it == outgoing.end()) throw Error("trace_outer_boundary: open boundary walk");
    int next = -1;
    for (int turn : {3, 0, 1}) {  // right of incoming, straight, left
      const int cand = (dir + turn) % 4;
      if (std::find(it->second.begin(), it->second.end(), cand) != it->second.end()) {
        next = cand;
        break;
      }
    }
    if (next < 0) throw Error("trace_outer_boundary: dead end at pinch");
    v = w;
    dir = next;
    if (++guard > max_steps) throw Error("trace_outer_boundary: walk did not close");
  } while (!(v == start_vertex && dir == start_dir));
  return walk;
}

std::vector<int> walk_to_vertex_ids(const Mesh& mesh, const std::vector<std::array<int, 2>>& walk) {
  std::vector<int> ids;
  ids.reserve(walk.size());
  for (const auto& w : walk) {
    const int v = mesh.vertex_at(w[0], w[1]);
    if (v < 0) throw Error("boundary walk left the mesh");
    ids.push_back(v);
  }
  return ids;
}

}  // namespace

SingularityReport locate_essential_singularity(const MultiField& f, double s_min) {
  const Mesh& mesh = f.mesh();
  if (mesh.dim != 2) throw DimensionMismatch("locate_essential_singularity: 2-d mesh required");
  const SheetGraph g = build_sheet_graph(f, s_min);

  int imin = std::numeric_limits<int>::max(), imax = std::numeric_limits<int>::min();
  int jmin = imin, jmax = imax;
  for (const auto& lc : mesh.lattice) {
    imin = std::min(imin, lc[0]);
    imax = std::max(imax, lc[0]);
    jmin = std::min(jmin, lc[1]);
    jmax = std::max(jmax, lc[1]);
  }

  FaceGrid good;
  good.i0 = imin - 3;
  good.j0 = jmin - 3;
  good.ni = (imax + 3) - good.i0 + 1;
  good.nj = (jmax + 3) - good.j0 + 1;
  good.flags.assign(static_cast<size_t>(good.ni) * good.nj, 0);
  for (int i = good.i0; i < good.i0 + good.ni; ++i) {
    for (int j = good.j0; j < good.j0 + good.nj; ++j) {
      bool ok = true;
      for (int ci = 0; ci <= 1 && ok; ++ci) {
        for (int cj = 0; cj <= 1; ++cj) {
          const int v = mesh.vertex_at(i + ci, j + cj);
          if (v < 0 || !g.vertex_in_region(v)) {
            ok = false;
            break;
          }
        }
      }
      if (ok) good.set(i, j, true);
    }
  }

  SingularityReport report;
  {
    // Largest connected component of good faces carries the boundary loop.
    FaceGrid seen = good;
    seen.clear();
    std::vector<std::array<int, 2>> best_comp;
    for (int i = good.i0; i < good.i0 + good.ni; ++i) {
      for (int j = good.j0; j < good.j0 + good.nj; ++j) {
        if (!good.get(i, j) || seen.get(i, j)) continue;
        std::vector<std::array<int, 2>> comp;
        std::queue<std::array<int, 2>> bfs;
        bfs.push({i, j});
        seen.set(i, j, true);
        while (!bfs.empty()) {
          const auto c = bfs.front();
          bfs.pop();
          comp.push_back(c);
          for (int d = 0; d < 4; ++d) {
            const int i2 = c[0] + kDi[d], j2 = c[1] + kDj[d];
            if (good.get(i2, j2) && !seen.get(i2, j2)) {
              seen.set(i2, j2, true);
              bfs.push({i2, j2});
            }
          }
        }
        if (comp.size() > best_comp.size()) best_comp = std::move(comp);
      }
    }
    if (best_comp.empty()) {
      throw PreconditionError("locate_essential_singularity: no separated cells at this s_min");
    }
    FaceGrid gset = good;
    gset.clear();
    for (const auto& c : best_comp) gset.set(c[0], c[1], true);
    const auto walk = trace_outer_boundary(gset, best_comp);
    report.boundary_loop = walk_to_vertex_ids(mesh, walk);
    report.boundary_monodromy = loop_monodromy(g, report.boundary_loop);
  }
  if (is_identity(report.boundary_monodromy)) {
    report.forced = false;  // NOT_FORCED: no singularity is topologically required
    return report;
  }
  report.forced = true;

  // Collision faces. Components touching the frame are the mesh exterior
  // (or rim-connected zones that no region loop can surround); the rest are
  // dilated by one ring so their surrounding walks run through good faces.
  FaceGrid bad = good;
  for (auto& x : bad.flags) x = x ? 0 : 1;
  FaceGrid exterior = bad;
  exterior.clear();
  FaceGrid enclosed = bad;
  enclosed.clear();
  {
    FaceGrid seen = bad;
    seen.clear();
    for (int i = bad.i0; i < bad.i0 + bad.ni; ++i) {
      for (int j = bad.j0; j < bad.j0 + bad.nj; ++j) {
        if (!bad.get(i, j) || seen.get(i, j)) continue;
        std::vector<std::array<int, 2>> comp;
        bool touches_frame = false;
        std::queue<std::array<int, 2>> bfs;
        bfs.push({i, j});
        seen.set(i, j, true);
        while (!bfs.empty()) {
          const auto c = bfs.front();
          bfs.pop();
          comp.push_back(c);
          if (c[0] == bad.i0 || c[0] == bad.i0 + bad.ni - 1 || c[1] == bad.j0 ||
              c[1] == bad.j0 + bad.nj - 1) {
            touches_frame = true;
          }
          for (int d = 0; d < 4; ++d) {
            const int i2 = c[0] + kDi[d], j2 = c[1] + kDj[d];
            if (bad.get(i2, j2) && !seen.get(i2, j2)) {
              seen.set(i2, j2, true);
              bfs.push({i2, j2});
            }
          }
        }
        for (const auto& c : comp) (touches_frame ? exterior : enclosed).set(c[0], c[1], true);
      }
    }
  }

  FaceGrid dil = enclosed;
  dil.clear();
  for (int i = bad.i0; i < bad.i0 + bad.ni; ++i) {
    for (int j = bad.j0; j < bad.j0 + bad.nj; ++j) {
      if (!enclosed.get(i, j)) continue;
      for (int di = -1; di <= 1; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if (dil.in_range(i + di, j + dj)) dil.set(i + di, j + dj, true);
        }
      }
    }
  }

  FaceGrid seen = dil;
  seen.clear();
  for (int i = dil.i0; i < dil.i0 + dil.ni; ++i) {
    for (int j = dil.j0; j < dil.j0 + dil.nj; ++j) {
      if (!dil.get(i, j) || seen.get(i, j)) continue;
      std::vector<std::array<int, 2>> comp;
      std::queue<std::array<int, 2>> bfs;
      bfs.push({i, j});
      seen.set(i, j, true);
      while (!bfs.empty()) {
        const auto c = bfs.front();
        bfs.pop();
        comp.push_back(c);
        for (int d = 0; d < 4; ++d) {
          const int i2 = c[0] + kDi[d], j2 = c[1] + kDj[d];
          if (dil.get(i2, j2) && !seen.get(i2, j2)) {
            seen.set(i2, j2, true);
            bfs.push({i2, j2});
          }
        }
      }
      // The surrounding walk needs every face just outside the dilated
      // component to be good; if the exterior sits that close, the cluster
      // cannot be certified at this resolution.
      bool certifiable = true;
      for (const auto& c : comp) {
        for (int d = 0; d < 4 && certifiable; ++d) {
          const int i2 = c[0] + kDi[d], j2 = c[1] + kDj[d];
          if (dil.get(i2, j2)) continue;
          if (!good.get(i2, j2)) certifiable = false;
        }
        if (!certifiable) break;
      }
      if (!certifiable) continue;
      FaceGrid cset = dil;
      cset.clear();
      for (const auto& c : comp) cset.set(c[0], c[1], true);
      SingularComponent sc;
      const auto walk = trace_outer_boundary(cset, comp);
      sc.loop = walk_to_vertex_ids(mesh, walk);
      sc.monodromy = loop_monodromy(g, sc.loop);
      if (is_identity(sc.monodromy)) continue;
      for (const auto& c : comp) {
        if (!enclosed.get(c[0], c[1])) continue;
        bool has_vertex = false;
        for (int ci = 0; ci <= 1 && !has_vertex; ++ci) {
          for (int cj = 0; cj <= 1; ++cj) {
            if (mesh.vertex_at(c[0] + ci, c[1] + cj) >= 0) {
              has_vertex = true;
              break;
            }
          }
        }
        if (has_vertex) sc.cells.push_back(c);
      }
      report.components.push_back(std::move(sc));
    }
  }
  return report;
}

double choose_s_min(const MultiField& f) {
  const Mesh& mesh = f.mesh();
  double smax = 0.0;
  std::vector<double> sep(mesh.vertex_count());
  for (int v = 0; v < mesh.vertex_count(); ++v) {
    sep[v] = separation(f.at(v));
    smax = std::max(smax, sep[v]);
  }
  if (smax <= 0.0) throw PreconditionError("choose_s_min: all sheets collide");
  std::vector<double> osc(mesh.edge_count());
  for (int e = 0; e < mesh.edge_count(); ++e) {
    osc[e] = g_distance(f.at(mesh.edges[e].a), f.at(mesh.edges[e].b));
  }
  double best = -1.0;
  for (double s = smax * 0.999; s > 1e-12 * smax; s *= 0.98) {
    double worst = 0.0;
    bool nonempty = false;
    for (int e = 0; e < mesh.edge_count(); ++e) {
      const MeshEdge& me = mesh.edges[e];
      if (sep[me.a] > s && sep[me.b] > s) {
        nonempty = true;
        worst = std::max(worst, osc[e]);
      }
    }
    if (nonempty && 10.0 * worst <= s) best = s;  // usable; keep scanning smaller
  }
  if (best < 0.0) {
    throw PreconditionError("choose_s_min: no threshold separates sheets against oscillation");
  }
  return best;
}

MultiField extract_normal_map(const MultiField& u, const Mesh& disk_mesh) {
  const Mesh& cyl = u.mesh();
  if (cyl.kind != DomainKind::Cylinder) {
    throw PreconditionError("extract_normal_map: cylinder field required");
  }
  if (disk_mesh.kind != DomainKind::Disk || disk_mesh.dim != 2 ||
      std::abs(disk_mesh.h - cyl.h) > 1e-15) {
    throw DimensionMismatch("extract_normal_map: disk mesh must share the cylinder lattice");
  }
  for (int v = 0; v < cyl.vertex_count(); ++v) {
    if (cyl.tags[v] == Tag::Bottom && u.norm2_at(v) != 0.0) {
      throw PreconditionError("extract_normal_map: u must vanish on the bottom disk");
    }
  }
  MultiField eta(disk_mesh, u.q(), u.n());
  const double inv_h = 1.0 / cyl.h;
  for (int v = 0; v < disk_mesh.vertex_count(); ++v) {
    const auto& lc = disk_mesh.lattice[v];
    const int above = cyl.vertex_at(lc[0], lc[1], 1);
    if (above < 0) throw DimensionMismatch("extract_normal_map: lattice mismatch at t=h");
    const auto r = u.raw(above);
    std::vector<double> flat(r.begin(), r.end());
    for (double& x : flat) x *= inv_h;
    eta.set(v, QPoint(u.q(), u.n(), std::move(flat)));
  }
  return eta;
}

void SingularityReport::export_text(std::ostream& out) const {
  out << "qlab-singularity-report 1\n";
  out << "forced " << (forced ? "yes" : "no") << "\n";
  out << "boundary_monodromy " << cycle_notation(boundary_monodromy) << "\n";
  out << "boundary_loop";
  for (int v : boundary_loop) out << " " << v;
  out << "\n";
  out << "components " << components.size() << "\n";
  for (size_t c = 0; c < components.size(); ++c) {
    const SingularComponent& sc = components[c];
    out << "component " << c << "\n";
    out << "  monodromy " << cycle_notation(sc.monodromy) << "\n";
    out << "  cells";
    for (const auto& cell : sc.cells) out << " " << cell[0] << "," << cell[1];
    out << "\n";
    out << "  loop";
    for (int v : sc.loop) out << " " << v;
    out << "\n";
  }
}

void SingularityReport::export_text_file(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  export_text(out);
}

}  // namespace qlab
