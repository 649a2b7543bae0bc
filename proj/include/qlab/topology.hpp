#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "qlab/field.hpp"
#include "qlab/mesh.hpp"

namespace qlab {

using Permutation = std::vector<int>;

Permutation identity_permutation(int q);
bool is_identity(const Permutation& p);
Permutation compose(const Permutation& after, const Permutation& before);  // after(before(i))
Permutation inverse(const Permutation& p);
bool is_transposition(const Permutation& p);
std::string cycle_notation(const Permutation& p);

// The covering graph of a 2-valued (generally Q-valued) field over the
// region where the sheets separate: base vertices with separation > s_min,
// cover vertices (vertex, sheet), cover edges induced by the optimal
// matching along base edges. Matchings are unique on the region because the
// edge oscillation is required to stay below s_min/4.
struct SheetGraph {
  const Mesh* base = nullptr;
  int q = 0;
  double s_min = 0.0;
  std::vector<char> in_region;              // per base vertex
  std::vector<Permutation> edge_perm;       // per mesh edge, a -> b; empty if absent
  std::vector<char> edge_in_cover;

  bool vertex_in_region(int v) const { return in_region[v] != 0; }
  // Sheet permutation for a step from u to w along a mesh edge.
  Permutation step(int u, int w) const;
  int region_size() const;
};

SheetGraph build_sheet_graph(const MultiField& f, double s_min);

// Lifts a closed walk (consecutive entries adjacent, last wraps to first)
// through the cover; returns the sheet permutation start -> end.
Permutation loop_monodromy(const SheetGraph& g, const std::vector<int>& loop);

struct SelectionResult {
  bool has_selection = false;
  // Selection witness: component label of every (vertex, sheet) cover node,
  // indexed region_position * q + sheet.
  std::vector<int> labels;
  // Connected-cover certificate: a path of base vertices from v to v that
  // swaps sheets (first and last entry equal).
  std::vector<int> swap_path;
  int swap_sheet_from = -1;
  int swap_sheet_to = -1;
};

// Yes iff the cover over the (connected) region splits into Q components
// each projecting bijectively.
SelectionResult has_global_selection(const SheetGraph& g);

struct SingularComponent {
  std::vector<std::array<int, 2>> cells;  // lattice lower-left corners of collision faces
  std::vector<int> loop;                  // surrounding closed walk (region vertices)
  Permutation monodromy;
};

struct SingularityReport {
  bool forced = false;  // boundary monodromy nontrivial
  Permutation boundary_monodromy;
  std::vector<int> boundary_loop;
  std::vector<SingularComponent> components;

  void export_text(std::ostream& out) const;
  void export_text_file(const std::string& path) const;
};

// Finds the connected clusters of collision cells (separation <= s_min)
// that are enclosed by the separated region and carry nontrivial monodromy
// on a surrounding loop; these are the cells where an essential singularity
// is topologically forced. Boundary monodromy trivial => NOT_FORCED (empty).
SingularityReport locate_essential_singularity(const MultiField& f, double s_min);

// Picks s_min as 10x the maximum edge oscillation over the candidate
// separated region, self-consistently (largest usable region on a geometric
// threshold grid). Throws if no threshold is feasible.
double choose_s_min(const MultiField& f);

// One-sided discrete normal derivative at the flat boundary {t=0} of a
// cylinder solve with zero Bottom data: eta(z) = u(z, h) / h, as a field on
// the matching disk mesh (same lattice).
MultiField extract_normal_map(const MultiField& u, const Mesh& disk_mesh);

}  // namespace qlab
