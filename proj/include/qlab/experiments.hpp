#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qlab/cones.hpp"
#include "qlab/field.hpp"
#include "qlab/frequency.hpp"
#include "qlab/topology.hpp"

namespace qlab {

inline constexpr const char* kVersion = "0.1.0";

// Parsed experiment configuration: `key = value` lines, one optional level
// of nesting via [section] headers (keys flatten to "section.key").
// Comments start with '#'.
struct ExperimentConfig {
  std::string experiment;
  std::string out_dir;
  int threads = 1;
  bool oracle_mode = false;
  std::map<std::string, std::string> kv;

  bool has(const std::string& key) const { return kv.count(key) != 0; }
  std::string get_string(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key, double def) const;
  int get_int(const std::string& key, int def) const;
  bool get_bool(const std::string& key, bool def) const;
  unsigned long long seed() const;
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Writes manifest.txt (config echo, version, wall time) into out_dir.
void write_manifest(const ExperimentConfig& cfg, double wall_seconds);

// Quarter-ball linear problem: solve (or sample exactly in oracle mode),
// then frequency diagnostics at the corner.
struct QuarterFrequencyResult {
  bool degenerate = false;  // zero data: frequency undefined
  FrequencyProfile profile;
  MonotoneCheck monotone;
  CornerBoundResult corner;
  ConvergenceReport convergence;
};
QuarterFrequencyResult run_quarter_frequency(const ExperimentConfig& cfg);

// Cylinder problem with the square-root trace; extracts the normal map and
// certifies the topologically forced singularity.
struct CylinderSingularityResult {
  SingularityReport report;
  ConvergenceReport convergence;
  double s_min = 0.0;
};
CylinderSingularityResult run_cylinder_singularity(const ExperimentConfig& cfg);

// Strong excess of a perturbed cone against the cone across shrinking balls.
struct ExcessDecayResult {
  std::vector<double> radii;
  std::vector<double> excess;
  bool no_decay_claim = false;  // perturbation outside the small-excess regime
};
ExcessDecayResult run_excess_decay(const ExperimentConfig& cfg);

// Exhaustive census of admissible books over small boundary configs.
struct ConeCensusRow {
  BoundaryConfig config;
  int book_index = 0;
  int book_count = 0;
  CorneredOpenBook book;
  Rational density;
  ConeVerdict verdict = ConeVerdict::MinimalBook;
  std::optional<double> gap;  // per config; nullopt = INF
};
struct ConeCensusResult {
  std::vector<ConeCensusRow> rows;
};
ConeCensusResult run_cone_census(const ExperimentConfig& cfg);

}  // namespace qlab
