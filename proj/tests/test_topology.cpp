#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <queue>
#include <random>
#include <sstream>

#include "qlab/field.hpp"
#include "qlab/mesh.hpp"
#include "qlab/topology.hpp"

using namespace qlab;

namespace {

// Exact +-sqrt(z) samples on a disk mesh.
MultiField sqrt_field(const Mesh& m) {
  MultiField f(m, 2, 2);
  for (int v = 0; v < m.vertex_count(); ++v) {
    f.set(v, sqrt_planar_value(m.vertices[v][0], m.vertices[v][1]));
  }
  return f;
}

// {g(v), g(v) + c}: a trivially separated double cover.
MultiField offset_field(const Mesh& m, double cx, double cy) {
  MultiField f(m, 2, 2);
  for (int v = 0; v < m.vertex_count(); ++v) {
    const double gx = 0.3 * m.vertices[v][0];
    const double gy = 0.2 * m.vertices[v][1];
    f.set(v, QPoint(2, 2, {gx, gy, gx + cx, gy + cy}));
  }
  return f;
}

// A lattice circle of radius rad (in cells) around the origin, as vertex ids.
std::vector<int> lattice_circle(const Mesh& m, int rad) {
  std::vector<std::array<int, 2>> cells;
  std::vector<int> loop;
  // Walk the square of Chebyshev radius rad counterclockwise.
  for (int i = -rad; i < rad; ++i) cells.push_back({i, -rad});
  for (int j = -rad; j < rad; ++j) cells.push_back({rad, j});
  for (int i = rad; i > -rad; --i) cells.push_back({i, rad});
  for (int j = rad; j > -rad; --j) cells.push_back({-rad, j});
  for (const auto& c : cells) {
    const int v = m.vertex_at(c[0], c[1]);
    REQUIRE(v >= 0);
    loop.push_back(v);
  }
  return loop;
}

// Random loop: BFS path out, BFS path back through a random waypoint.
std::vector<int> bfs_path(const SheetGraph& g, int from, int to) {
  const Mesh& m = *g.base;
  std::vector<int> parent(m.vertex_count(), -2);
  std::queue<int> q;
  q.push(from);
  parent[from] = -1;
  while (!q.empty()) {
    const int v = q.front();
    q.pop();
    if (v == to) break;
    for (int eid : m.incident_edges(v)) {
      if (!g.edge_in_cover[eid]) continue;
      const int u = m.other_end(eid, v);
      if (parent[u] == -2) {
        parent[u] = v;
        q.push(u);
      }
    }
  }
  REQUIRE(parent[to] != -2);
  std::vector<int> path;
  for (int v = to; v != -1; v = parent[v]) path.push_back(v);
  std::reverse(path.begin(), path.end());
  return path;
}

std::vector<int> random_loop(const SheetGraph& g, std::mt19937_64& rng, int base) {
  const Mesh& m = *g.base;
  std::vector<int> region;
  for (int v = 0; v < m.vertex_count(); ++v) {
    if (g.vertex_in_region(v)) region.push_back(v);
  }
  std::uniform_int_distribution<size_t> pick(0, region.size() - 1);
  const int mid = region[pick(rng)];
  auto out = bfs_path(g, base, mid);
  auto back = bfs_path(g, mid, base);
  out.insert(out.end(), back.begin() + 1, back.end());
  out.pop_back();  // closed: last wraps to first
  if (out.empty()) out.push_back(base);
  return out;
}

}  // namespace

TEST_CASE("permutation helpers") {
  CHECK(is_identity(identity_permutation(3)));
  CHECK(is_transposition({1, 0}));
  CHECK(is_transposition({0, 2, 1}));
  CHECK(!is_transposition({1, 2, 0}));
  CHECK(cycle_notation({0, 1, 2}) == "id");
  CHECK(cycle_notation({1, 0}) == "(1 2)");
  CHECK(cycle_notation({1, 2, 0}) == "(1 2 3)");
  const Permutation p{2, 0, 1};
  CHECK(compose(inverse(p), p) == identity_permutation(3));
}

TEST_CASE("constant-offset field: trivial cover, selection exists") {
  const Mesh m = disk(1.0, 1.0 / 16);
  const MultiField f = offset_field(m, 2.0, 0.0);
  const SheetGraph g = build_sheet_graph(f, 0.5);
  CHECK(g.region_size() == m.vertex_count());

  const auto sel = has_global_selection(g);
  CHECK(sel.has_selection);

  const auto loop = lattice_circle(m, 8);
  CHECK(is_identity(loop_monodromy(g, loop)));
}

TEST_CASE("square-root field on the annulus region: connected double cover") {
  const double h = 1.0 / 64;
  const Mesh m = disk(1.0, h);
  const MultiField f = sqrt_field(m);
  // Separation is 2 sqrt|z|; s_min = 0.8 keeps |z| > 0.16, where the
  // oscillation h/(2 sqrt|z|) is far below s_min/4.
  const double s_min = 0.8;
  const SheetGraph g = build_sheet_graph(f, s_min);
  CHECK(g.region_size() < m.vertex_count());
  CHECK(g.region_size() > 0);

  // Boundary circle: transposition (sheets swap along a half-winding).
  // Chebyshev radius 40 keeps the square's corners inside the unit disk.
  const auto boundary = lattice_circle(m, 40);
  const Permutation sigma = loop_monodromy(g, boundary);
  CHECK(is_transposition(sigma));

  // A contractible loop away from the origin: identity.
  std::vector<int> small;
  for (const auto& step : std::vector<std::array<int, 2>>{
           {40, 0}, {41, 0}, {42, 0}, {42, 1}, {42, 2}, {41, 2}, {40, 2}, {40, 1}}) {
    const int v = m.vertex_at(step[0], step[1]);
    REQUIRE(v >= 0);
    small.push_back(v);
  }
  CHECK(is_identity(loop_monodromy(g, small)));
}

TEST_CASE("single-valued fields always admit a selection") {
  const Mesh m = disk(1.0, 1.0 / 8);
  MultiField f(m, 1, 2);
  for (int v = 0; v < m.vertex_count(); ++v) {
    f.set(v, QPoint(1, 2, {m.vertices[v][0], m.vertices[v][1]}));
  }
  const SheetGraph g = build_sheet_graph(f, 1.0);
  CHECK(g.region_size() == m.vertex_count());
  CHECK(has_global_selection(g).has_selection);
}

TEST_CASE("square-root field admits no global selection") {
  const Mesh m = disk(1.0, 1.0 / 32);
  const MultiField f = sqrt_field(m);
  // Restrict attention to the annulus by building the graph at s_min = 0.8;
  // the region is the annulus and it is connected.
  const SheetGraph g = build_sheet_graph(f, 0.8);
  const auto sel = has_global_selection(g);
  CHECK(!sel.has_selection);
  CHECK(sel.swap_path.size() >= 2);
  CHECK(sel.swap_path.front() == sel.swap_path.back());
  CHECK(sel.swap_sheet_from != sel.swap_sheet_to);
}

TEST_CASE("selection existence matches cycle-basis monodromy") {
  // Equivalence on both fixtures: no selection iff some fundamental cycle
  // has non-identity monodromy.
  const Mesh m = disk(1.0, 1.0 / 24);
  for (int fixture = 0; fixture < 2; ++fixture) {
    const MultiField f = fixture == 0 ? sqrt_field(m) : offset_field(m, 1.5, 0.5);
    const SheetGraph g = build_sheet_graph(f, 0.8);
    // Spanning tree of the region graph; every non-tree edge gives a loop.
    std::vector<int> parent(m.vertex_count(), -2);
    std::vector<int> order;
    int root = -1;
    for (int v = 0; v < m.vertex_count() && root < 0; ++v) {
      if (g.vertex_in_region(v)) root = v;
    }
    REQUIRE(root >= 0);
    std::queue<int> q;
    q.push(root);
    parent[root] = -1;
    while (!q.empty()) {
      const int v = q.front();
      q.pop();
      order.push_back(v);
      for (int eid : m.incident_edges(v)) {
        if (!g.edge_in_cover[eid]) continue;
        const int u = m.other_end(eid, v);
        if (parent[u] == -2) {
          parent[u] = v;
          q.push(u);
        }
      }
    }
    bool any_nontrivial = false;
    for (int eid = 0; eid < m.edge_count() && !any_nontrivial; ++eid) {
      if (!g.edge_in_cover[eid]) continue;
      const MeshEdge& e = m.edges[eid];
      if (parent[e.a] == e.b || parent[e.b] == e.a) continue;  // tree edge
      auto pa = bfs_path(g, root, e.a);
      auto pb = bfs_path(g, e.b, root);
      std::vector<int> loop = pa;
      loop.insert(loop.end(), pb.begin(), pb.end());
      loop.pop_back();
      if (!is_identity(loop_monodromy(g, loop))) any_nontrivial = true;
    }
    CHECK(has_global_selection(g).has_selection == !any_nontrivial);
  }
}

TEST_CASE("monodromy composition and inverse laws") {
  const Mesh m = disk(1.0, 1.0 / 32);
  const MultiField f = sqrt_field(m);
  const SheetGraph g = build_sheet_graph(f, 0.8);
  std::mt19937_64 rng(101);
  const int base = m.vertex_at(25, 0);
  REQUIRE(base >= 0);
  REQUIRE(g.vertex_in_region(base));
  for (int trial = 0; trial < 100; ++trial) {
    auto l1 = random_loop(g, rng, base);
    const Permutation s1 = loop_monodromy(g, l1);
    // Reversal (same basepoint) inverts.
    std::vector<int> rev;
    rev.push_back(l1.front());
    rev.insert(rev.end(), l1.rbegin(), l1.rend() - 1);
    CHECK(loop_monodromy(g, rev) == inverse(s1));
    // Concatenation at the shared basepoint composes.
    std::vector<int> l2 = random_loop(g, rng, base);
    const Permutation s2 = loop_monodromy(g, l2);
    std::vector<int> cat = l1;
    cat.insert(cat.end(), l2.begin(), l2.end());
    CHECK(loop_monodromy(g, cat) == compose(s2, s1));
  }
}

TEST_CASE("oscillation precondition violation names the worst edge") {
  const Mesh m = disk(1.0, 1.0 / 8);
  const MultiField f = sqrt_field(m);
  // s_min too small relative to h: near the collision zone the oscillation
  // exceeds s_min/4 on region edges.
  CHECK_THROWS_AS(build_sheet_graph(f, 0.05), RefineMeshError);
  try {
    build_sheet_graph(f, 0.05);
  } catch (const RefineMeshError& e) {
    CHECK(e.edge_a >= 0);
    CHECK(e.edge_b >= 0);
    CHECK(e.oscillation >= 0.05 / 4);
  }
}

TEST_CASE("locate_essential_singularity on the square-root fixture") {
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const Mesh m = disk(1.0, h);
    const MultiField f = sqrt_field(m);
    const double s_min = 0.8;
    const SingularityReport rep = locate_essential_singularity(f, s_min);
    CHECK(rep.forced);
    CHECK(is_transposition(rep.boundary_monodromy));
    REQUIRE(rep.components.size() == 1);
    const auto& comp = rep.components[0];
    CHECK(is_transposition(comp.monodromy));
    // The collision region contains the origin cells.
    bool origin = false;
    for (const auto& c : comp.cells) {
      if ((c[0] == 0 || c[0] == -1) && (c[1] == 0 || c[1] == -1)) origin = true;
    }
    CHECK(origin);
    // Separation 2 sqrt|z| <= s_min within |z| <= s_min^2/4; the reported
    // collision cells live in a slightly dilated version of that disk.
    const double level_radius = s_min * s_min / 4.0;
    for (const auto& c : comp.cells) {
      const double x = (std::abs(c[0] + 0.5)) * h;
      const double y = (std::abs(c[1] + 0.5)) * h;
      CHECK(std::hypot(x, y) <= level_radius + 3 * h);
    }
  }
}

TEST_CASE("singular component diameter shrinks with s_min") {
  const double h = 1.0 / 128;
  const Mesh m = disk(1.0, h);
  const MultiField f = sqrt_field(m);
  double prev_diam = 1e9;
  for (double s_min : {1.2, 0.8, 0.5}) {
    const SingularityReport rep = locate_essential_singularity(f, s_min);
    REQUIRE(rep.components.size() == 1);
    double diam = 0.0;
    const auto& cells = rep.components[0].cells;
    for (const auto& a : cells) {
      for (const auto& b : cells) {
        diam = std::max(diam, h * std::hypot(double(a[0] - b[0]), double(a[1] - b[1])));
      }
    }
    CHECK(diam < prev_diam);
    prev_diam = diam;
  }
}

TEST_CASE("constant-offset field: NOT_FORCED") {
  const Mesh m = disk(1.0, 1.0 / 16);
  const MultiField f = offset_field(m, 2.0, 0.0);
  const SingularityReport rep = locate_essential_singularity(f, 0.5);
  CHECK(!rep.forced);
  CHECK(rep.components.empty());
}

TEST_CASE("literal +-(z - z0) pair is never forced") {
  // Both sheets are globally defined single-valued maps, so they collide at
  // z0 without any topological obstruction: monodromy is trivial.
  const double h = 1.0 / 64;
  const Mesh m = disk(1.0, h);
  MultiField f(m, 2, 2);
  const double z0x = 0.25, z0y = 0.125;
  for (int v = 0; v < m.vertex_count(); ++v) {
    const double gx = m.vertices[v][0] - z0x;
    const double gy = m.vertices[v][1] - z0y;
    f.set(v, QPoint(2, 2, {gx, gy, -gx, -gy}));
  }
  const SingularityReport rep = locate_essential_singularity(f, 0.4);
  CHECK(!rep.forced);
  CHECK(rep.components.empty());
}

TEST_CASE("shifted branch point is localized") {
  // +-sqrt(z - z0): sheets collide only at z0 and the boundary monodromy is
  // the transposition, so the detector must report the cell around z0.
  const double h = 1.0 / 64;
  const Mesh m = disk(1.0, h);
  MultiField f(m, 2, 2);
  const double z0x = 0.25, z0y = 0.125;
  for (int v = 0; v < m.vertex_count(); ++v) {
    f.set(v, sqrt_planar_value(m.vertices[v][0] - z0x, m.vertices[v][1] - z0y));
  }
  const SingularityReport rep = locate_essential_singularity(f, 0.6);
  CHECK(rep.forced);
  REQUIRE(rep.components.size() == 1);
  bool covers_z0 = false;
  for (const auto& c : rep.components[0].cells) {
    if (c[0] * h <= z0x && z0x <= (c[0] + 1) * h && c[1] * h <= z0y && z0y <= (c[1] + 1) * h) {
      covers_z0 = true;
    }
  }
  CHECK(covers_z0);
}

TEST_CASE("extract_normal_map") {
  const double h = 1.0 / 8;
  const Mesh cyl = cylinder(h);
  const Mesh dsk = disk(1.0, h);

  SUBCASE("exact square-root field gives eta = {w, -w} exactly") {
    MultiField u(cyl, 2, 2);
    for (int v = 0; v < cyl.vertex_count(); ++v) {
      const Vec& p = cyl.vertices[v];
      u.set(v, sqrt_cylinder_value(p[0], p[1], p[2]));
    }
    const MultiField eta = extract_normal_map(u, dsk);
    for (int v = 0; v < dsk.vertex_count(); ++v) {
      const QPoint expected = sqrt_planar_value(dsk.vertices[v][0], dsk.vertices[v][1]);
      CHECK(QPoint::approx_equal(eta.at(v), expected, 1e-12));
    }
  }

  SUBCASE("zero field gives zero eta; linear pair gives constant eta") {
    MultiField zero(cyl, 2, 2);
    const MultiField eta0 = extract_normal_map(zero, dsk);
    for (int v = 0; v < dsk.vertex_count(); ++v) CHECK(eta0.norm2_at(v) == 0.0);

    MultiField lin(cyl, 2, 2);
    for (int v = 0; v < cyl.vertex_count(); ++v) {
      const double t = cyl.vertices[v][2];
      lin.set(v, QPoint(2, 2, {0.7 * t, -0.2 * t, -0.7 * t, 0.2 * t}));
    }
    const MultiField eta1 = extract_normal_map(lin, dsk);
    for (int v = 0; v < dsk.vertex_count(); ++v) {
      CHECK(QPoint::approx_equal(eta1.at(v), QPoint(2, 2, {0.7, -0.2, -0.7, 0.2}), 1e-12));
    }
  }

  SUBCASE("nonzero bottom data is rejected") {
    MultiField u(cyl, 2, 2);
    for (int v = 0; v < cyl.vertex_count(); ++v) {
      u.set(v, QPoint(2, 2, {1, 0, 0, 0}));
    }
    CHECK_THROWS_AS(extract_normal_map(u, dsk), PreconditionError);
  }

  SUBCASE("eta commutes with target rotations") {
    MultiField u(cyl, 2, 2);
    std::mt19937_64 rng(77);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int v = 0; v < cyl.vertex_count(); ++v) {
      const double t = cyl.vertices[v][2];
      if (t == 0.0) continue;  // keep the bottom at zero
      u.set(v, QPoint(2, 2, {normal(rng), normal(rng), normal(rng), normal(rng)}));
    }
    const double c = std::cos(1.1), s = std::sin(1.1);
    MultiField ru(cyl, 2, 2);
    for (int v = 0; v < cyl.vertex_count(); ++v) {
      auto r = u.raw(v);
      std::vector<double> flat(4);
      for (int sheet = 0; sheet < 2; ++sheet) {
        flat[2 * sheet] = c * r[2 * sheet] - s * r[2 * sheet + 1];
        flat[2 * sheet + 1] = s * r[2 * sheet] + c * r[2 * sheet + 1];
      }
      ru.set(v, QPoint(2, 2, flat));
    }
    const MultiField eta = extract_normal_map(u, dsk);
    const MultiField reta = extract_normal_map(ru, dsk);
    for (int v = 0; v < dsk.vertex_count(); ++v) {
      auto r = eta.raw(v);
      std::vector<double> flat(4);
      for (int sheet = 0; sheet < 2; ++sheet) {
        flat[2 * sheet] = c * r[2 * sheet] - s * r[2 * sheet + 1];
        flat[2 * sheet + 1] = s * r[2 * sheet] + c * r[2 * sheet + 1];
      }
      CHECK(QPoint::approx_equal(reta.at(v), QPoint(2, 2, flat), 1e-12));
    }
  }
}

TEST_CASE("singularity report export") {
  const Mesh m = disk(1.0, 1.0 / 32);
  const MultiField f = sqrt_field(m);
  const SingularityReport rep = locate_essential_singularity(f, 0.8);
  std::ostringstream out;
  rep.export_text(out);
  const std::string text = out.str();
  CHECK(text.find("qlab-singularity-report 1") == 0);
  CHECK(text.find("forced yes") != std::string::npos);
  CHECK(text.find("boundary_monodromy (1 2)") != std::string::npos);
  CHECK(text.find("components 1") != std::string::npos);
}
