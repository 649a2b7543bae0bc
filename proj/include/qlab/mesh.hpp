#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "qlab/errors.hpp"

namespace qlab {

using Vec = std::array<double, 3>;  // coordinates; trailing entries 0 below dim

enum class Tag : uint8_t { V0, V1, CornerL, Lateral, Bottom, Top, Free };

const char* tag_name(Tag t);
Tag tag_from_name(const std::string& name);

// Which analytic domain a mesh discretizes; frequency diagnostics use this
// to decide when a ball exits the meshed extent.
enum class DomainKind : uint8_t { QuarterBall, Disk, Cylinder };

struct MeshEdge {
  int a = 0;
  int b = 0;
  double weight = 0.0;  // dual-cell volume / h^2 (finite-difference stencil weight)
};

// Tensor-grid mesh clipped to a convex domain. Vertices sit on the lattice
// h*Z^dim and are ordered lexicographically by integer lattice coordinates;
// edges connect axis neighbors. Immutable after construction.
class Mesh {
 public:
  int dim = 2;
  double h = 0.0;
  DomainKind kind = DomainKind::Disk;
  double outer_radius = 0.0;  // quarter ball / disk radius; cylinder z-radius (1)
  double height = 0.0;        // cylinder only: top level actually meshed

  std::vector<Vec> vertices;
  std::vector<std::array<int, 3>> lattice;  // integer coordinates of each vertex
  std::vector<Tag> tags;
  std::vector<double> vertex_volume;  // clipped cell volume around each vertex
  std::vector<MeshEdge> edges;

  int vertex_count() const { return static_cast<int>(vertices.size()); }
  int edge_count() const { return static_cast<int>(edges.size()); }

  // Incident edge ids of a vertex.
  std::span<const int> incident_edges(int v) const {
    return {incidence_.data() + offsets_[v], static_cast<size_t>(offsets_[v + 1] - offsets_[v])};
  }
  int other_end(int edge_id, int v) const {
    const MeshEdge& e = edges[edge_id];
    return e.a == v ? e.b : e.a;
  }

  // Vertex id at integer lattice coordinates, or -1.
  int vertex_at(int i, int j, int k = 0) const;

  bool is_connected() const;

  // Plain-text export: header, one vertex per line (coordinates, tag),
  // then one edge per line (endpoint indices, weight).
  void export_text(std::ostream& out) const;
  void export_text_file(const std::string& path) const;

  void finalize();  // builds incidence; called by the factories

 private:
  std::vector<int> offsets_;
  std::vector<int> incidence_;
  std::unordered_map<int64_t, int> index_;
  friend Mesh build_lattice_mesh(int, double, const std::array<int, 3>&, const std::array<int, 3>&,
                                 const std::function<bool(const Vec&)>&);
};

// B_r ∩ (R+ x R+ x R^{m-2}) on the lattice h*Z^m. Vertices on {x1=0} tagged
// V0, on {x2=0} V1, on the common edge CornerL; the outer rim Lateral.
Mesh quarter_ball(int m, double r, double h);

// {|z| <= 1} x [0,1]; bottom disk Bottom, top disk Top, side Lateral.
Mesh cylinder(double h);

// {|x| <= r} in the plane; rim tagged Lateral.
Mesh disk(double r, double h);

// Membership test of the analytic domain the mesh discretizes.
std::function<bool(const Vec&)> domain_indicator(const Mesh& mesh);

}  // namespace qlab
