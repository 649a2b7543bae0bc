#include "qlab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

namespace qlab {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::ofstream open_out(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  std::ofstream out(dir + "/" + name);
  if (!out) throw Error("cannot open " + dir + "/" + name + " for writing");
  return out;
}

double wall_now() {
  return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

}  // namespace

std::string ExperimentConfig::get_string(const std::string& key, const std::string& def) const {
  auto it = kv.find(key);
  return it == kv.end() ? def : it->second;
}

double ExperimentConfig::get_double(const std::string& key, double def) const {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  try {
    size_t pos = 0;
    const double v = std::stod(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not a number: " + it->second);
  }
}

int ExperimentConfig::get_int(const std::string& key, int def) const {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  try {
    size_t pos = 0;
    const int v = std::stoi(it->second, &pos);
    if (pos != it->second.size()) throw std::invalid_argument(it->second);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' is not an integer: " + it->second);
  }
}

bool ExperimentConfig::get_bool(const std::string& key, bool def) const {
  auto it = kv.find(key);
  if (it == kv.end()) return def;
  if (it->second == "true" || it->second == "1" || it->second == "yes") return true;
  if (it->second == "false" || it->second == "0" || it->second == "no") return false;
  throw ConfigError("config: key '" + key + "' is not a boolean: " + it->second);
}

unsigned long long ExperimentConfig::seed() const {
  auto it = kv.find("seed");
  return it == kv.end() ? 0ull : std::stoull(it->second);
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("config line " + std::to_string(lineno) +
                                                ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ConfigError("config line " + std::to_string(lineno) +
                                             ": empty section name");
      continue;
    }
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    cfg.kv[section.empty() ? key : section + "." + key] = value;
  }
  cfg.experiment = cfg.get_string("experiment", "");
  cfg.out_dir = cfg.get_string("out", "");
  cfg.threads = cfg.get_int("threads", 1);
  cfg.oracle_mode = cfg.get_bool("oracle_mode", false);
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void write_manifest(const ExperimentConfig& cfg, double wall_seconds) {
  if (cfg.out_dir.empty()) return;
  auto out = open_out(cfg.out_dir, "manifest.txt");
  out << "qlab " << kVersion << "\n";
  out << "modules qpoints domains dirichlet frequency topology transport cones cli\n";
  out << "experiment " << cfg.experiment << "\n";
  out << "threads " << cfg.threads << "\n";
  out << "oracle_mode " << (cfg.oracle_mode ? "yes" : "no") << "\n";
  out << "config:\n";
  for (const auto& [k, v] : cfg.kv) out << "  " << k << " = " << v << "\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "wall_time_seconds %.3f\n", wall_seconds);
  out << buf;
}

// Quarter-ball frequency experiment --------------------------------------

QuarterFrequencyResult run_quarter_frequency(const ExperimentConfig& cfg) {
  const double t0 = wall_now();
  const double h = cfg.get_double("h", 1.0 / 64);
  const double radius = cfg.get_double("radius", 1.0);
  const int k = cfg.get_int("k", 2);
  const std::string data = cfg.get_string("data", "sin");
  const double tol = cfg.get_double("solver.tol", 1e-9);
  const int max_sweeps = cfg.get_int("solver.max_sweeps", kDefaultMaxSweeps);
  const double slack = cfg.get_double("frequency.slack", 0.05);

  const Mesh mesh = quarter_ball(2, radius, h);
  QuarterFrequencyResult res;
  MultiField field(mesh, 2, 1);

  if (data == "zero") {
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      if (mesh.tags[v] != Tag::Free) field.set_fixed(v);
    }
    res.degenerate = true;  // nothing to measure; field stays identically zero
  } else if (data == "sin") {
    const HomogeneousSolution2D sol = homogeneous_2d_solution(k, {{1.0}, {-1.0}});
    if (cfg.oracle_mode) {
      field = sample_field(mesh, sol);
    } else {
      for (int v = 0; v < mesh.vertex_count(); ++v) {
        if (mesh.tags[v] == Tag::Free) continue;
        field.set(v, sol.at(mesh.vertices[v][0], mesh.vertices[v][1]));
        field.set_fixed(v);
      }
      initialize_split(field);
      field = minimize(field, tol, max_sweeps, &res.convergence);
      if (!res.convergence.converged) {
        throw NotConvergedError("quarter-frequency: solver hit max_sweeps");
      }
    }
  } else {
    throw ConfigError("quarter-frequency: unknown data kind '" + data + "'");
  }

  if (!res.degenerate) {
    std::vector<double> radii;
    const double rmax = std::min(0.75 * radius, max_profile_radius(mesh, {0, 0, 0}));
    for (double r = 8 * h; r <= rmax + 1e-12; r += h) radii.push_back(r);
    res.profile = frequency_profile(field, {0, 0, 0}, radii);
    res.degenerate = res.profile.degenerate;
    res.monotone = check_monotone(res.profile, slack);
    res.corner = corner_frequency_bound(res.profile);
  }

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    if (!res.profile.radii.empty()) res.profile.export_csv_file(cfg.out_dir + "/frequency.csv");
    if (!res.convergence.energy_history.empty()) {
      res.convergence.export_csv_file(cfg.out_dir + "/energy_history.csv");
    }
    field.export_text_file(cfg.out_dir + "/solution.txt");
    auto out = open_out(cfg.out_dir, "verdicts.txt");
    if (res.degenerate) {
      out << "degenerate yes\n";
    } else {
      char buf[128];
      out << "degenerate no\n";
      std::snprintf(buf, sizeof buf, "monotone %s worst_violation %.6g\n",
                    res.monotone.pass ? "PASS" : "FAIL", res.monotone.worst_violation);
      out << buf;
      const char* verdict = res.corner.verdict == CornerVerdict::Pass ? "PASS"
                            : res.corner.verdict == CornerVerdict::Fail ? "FAIL"
                                                                        : "INCONCLUSIVE";
      std::snprintf(buf, sizeof buf, "corner_bound %s plateau %.6g\n", verdict, res.corner.plateau);
      out << buf;
    }
    write_manifest(cfg, wall_now() - t0);
  }
  return res;
}

// Cylinder singularity experiment -----------------------------------------

CylinderSingularityResult run_cylinder_singularity(const ExperimentConfig& cfg) {
  const double t0 = wall_now();
  const double h = cfg.get_double("h", 1.0 / 12);
  const double tol = cfg.get_double("solver.tol", 1e-9);
  const int max_sweeps = cfg.get_int("solver.max_sweeps", kDefaultMaxSweeps);

  const std::string trace_kind = cfg.get_string("trace", "sqrt");
  const Mesh mesh = cylinder(h);
  const Mesh disk_mesh = disk(1.0, h);
  MultiField u(mesh, 2, 2);

  Trace f;
  if (trace_kind == "sqrt") {
    f.kind = Trace::Kind::SqrtCylinder;
  } else if (trace_kind == "offset") {
    // Control fixture: {c t, -c t} has trivial monodromy, so the experiment
    // must flag NOT_FORCED.
    f.kind = Trace::Kind::Custom;
    f.custom = [](const Vec& x) {
      return QPoint(2, 2, {x[2], 0.0, -x[2], 0.0});
    };
  } else {
    throw ConfigError("cylinder-singularity: unknown trace kind '" + trace_kind + "'");
  }

  if (cfg.oracle_mode) {
    for (int v = 0; v < mesh.vertex_count(); ++v) {
      const Vec& p = mesh.vertices[v];
      u.set(v, trace_kind == "sqrt" ? sqrt_cylinder_value(p[0], p[1], p[2]) : f(p));
    }
  } else {
    impose_trace(u, f, {Tag::Lateral, Tag::Top});
    Trace zero;
    zero.kind = Trace::Kind::Zero;
    impose_trace(u, zero, {Tag::Bottom});
  }

  CylinderSingularityResult res;
  if (!cfg.oracle_mode) {
    initialize_split(u);
    u = minimize(u, tol, max_sweeps, &res.convergence);
    if (!res.convergence.converged) {
      throw NotConvergedError("cylinder-singularity: solver hit max_sweeps");
    }
  }

  const MultiField eta = extract_normal_map(u, disk_mesh);
  res.s_min = cfg.has("topology.s_min") ? cfg.get_double("topology.s_min", 0.0)
                                        : choose_s_min(eta);
  res.report = locate_essential_singularity(eta, res.s_min);

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    res.report.export_text_file(cfg.out_dir + "/singularity_report.txt");
    eta.export_text_file(cfg.out_dir + "/eta_field.txt");
    if (!res.convergence.energy_history.empty()) {
      res.convergence.export_csv_file(cfg.out_dir + "/energy_history.csv");
    }
    auto out = open_out(cfg.out_dir, "verdicts.txt");
    char buf[128];
    std::snprintf(buf, sizeof buf, "s_min %.17g\n", res.s_min);
    out << buf;
    out << "boundary_monodromy " << cycle_notation(res.report.boundary_monodromy) << "\n";
    out << "forced " << (res.report.forced ? "yes" : "no") << "\n";
    out << "components " << res.report.components.size() << "\n";
    write_manifest(cfg, wall_now() - t0);
  }

  if (!res.report.forced) {
    throw ExperimentInvariantViolation(
        "cylinder-singularity: boundary monodromy trivial (NOT_FORCED) — solver or trace bug");
  }
  if (!is_transposition(res.report.boundary_monodromy)) {
    throw ExperimentInvariantViolation(
        "cylinder-singularity: boundary monodromy is not a transposition");
  }
  return res;
}

// Excess decay experiment --------------------------------------------------

ExcessDecayResult run_excess_decay(const ExperimentConfig& cfg) {
  const double t0 = wall_now();
  const double lambda = cfg.get_double("excess.lambda", 0.01);
  const double delta = cfg.get_double("excess.delta", 1.0 / 16);
  const double rho = cfg.get_double("excess.rho", 0.5);
  const int levels = cfg.get_int("excess.levels", 3);
  const double regime = cfg.get_double("excess.regime_threshold", 0.1);
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("excess.rho must lie in (0,1)");

  // Reference cone: one positive boundary piece of multiplicity 2 against
  // two negative unit pieces, whose unique admissible book is the pair of
  // quadrants sharing the positive piece.
  BoundaryConfig b;
  b.q0 = {2};
  b.q1 = {1, 1};
  const auto books = enumerate_admissible_books(b, 4);
  const CorneredOpenBook& book = books.front();
  const BookFrame frame = standard_frame(b);
  const WedgeBoundary wedge = frame_wedge(frame);
  const DiscreteMeasure cone = book_measure(book, frame, 1.0, delta);

  // Graph perturbation vanishing on the boundary half-planes: each quadrant
  // point s u + t v moves by lambda s t e3 (orthogonal to both rays).
  DiscreteMeasure perturbed(frame.dim);
  {
    const int cells = static_cast<int>(std::ceil(1.0 / delta));
    std::vector<double> point(frame.dim);
    for (const auto& quad : book.quadrants) {
      const auto& uray = frame.rays0[quad.k0];
      const auto& vray = frame.rays1[quad.k1];
      for (int i = 0; i < cells; ++i) {
        for (int j = 0; j < cells; ++j) {
          const double s = (i + 0.5) * delta;
          const double t = (j + 0.5) * delta;
          if (s * s + t * t > 1.0) continue;
          for (int d = 0; d < frame.dim; ++d) point[d] = s * uray[d] + t * vray[d];
          point[2] += lambda * s * t;
          perturbed.add(point, delta * delta * quad.multiplicity);
        }
      }
    }
  }

  ExcessDecayResult res;
  res.no_decay_claim = lambda > regime;
  for (int l = 0; l < levels; ++l) res.radii.push_back(std::pow(rho, l));
  res.excess.resize(res.radii.size());
  const int workers = std::max(1, std::min<int>(cfg.threads, levels));
  std::atomic<size_t> cursor{0};
  auto work = [&]() {
    for (size_t k = cursor.fetch_add(1); k < res.radii.size(); k = cursor.fetch_add(1)) {
      res.excess[k] = strong_excess(perturbed, cone, wedge, res.radii[k], 2);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }

  if (!cfg.out_dir.empty()) {
    auto out = open_out(cfg.out_dir, "excess.csv");
    out << "r,excess,ratio_to_previous\n";
    char buf[128];
    for (size_t k = 0; k < res.radii.size(); ++k) {
      const double ratio = k == 0 || res.excess[k - 1] == 0.0
                               ? std::numeric_limits<double>::quiet_NaN()
                               : res.excess[k] / res.excess[k - 1];
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", res.radii[k], res.excess[k], ratio);
      out << buf;
    }
    auto flags = open_out(cfg.out_dir, "flags.txt");
    flags << "no_decay_claim " << (res.no_decay_claim ? "yes" : "no") << "\n";
    write_manifest(cfg, wall_now() - t0);
  }
  return res;
}

// Cone census ---------------------------------------------------------------

namespace {

void compositions(int total, int parts, std::vector<int>& cur,
                  std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    if (total >= 1) {
      cur.push_back(total);
      out.push_back(cur);
      cur.pop_back();
    }
    return;
  }
  for (int first = 1; first + parts - 1 <= total; ++first) {
    cur.push_back(first);
    compositions(total - first, parts - 1, cur, out);
    cur.pop_back();
  }
}

}  // namespace

ConeCensusResult run_cone_census(const ExperimentConfig& cfg) {
  const double t0 = wall_now();
  const int q_max = cfg.get_int("census.q_max", 3);
  const int n_max = cfg.get_int("census.n_max", 2);
  const double gap_delta = cfg.get_double("census.gap_delta", 1.0 / 6);

  ConeCensusResult res;
  for (int q = 1; q <= q_max; ++q) {
    for (int n0 = 1; n0 <= std::min(n_max, q); ++n0) {
      std::vector<std::vector<int>> comps0;
      std::vector<int> cur;
      compositions(q, n0, cur, comps0);
      for (int n1 = 1; n1 <= std::min(n_max, q); ++n1) {
        std::vector<std::vector<int>> comps1;
        compositions(q, n1, cur, comps1);
        for (const auto& c0 : comps0) {
          for (const auto& c1 : comps1) {
            BoundaryConfig b;
            b.q0 = c0;
            b.q1 = c1;
            const auto books = enumerate_admissible_books(b, n0 * n1);
            const auto gap = uniqueness_gap(b, gap_delta, cfg.threads);
            for (size_t bi = 0; bi < books.size(); ++bi) {
              ConeCensusRow row;
              row.config = b;
              row.book_index = static_cast<int>(bi);
              row.book_count = static_cast<int>(books.size());
              row.book = books[bi];
              row.density = book_density(books[bi]);
              std::vector<std::pair<PieceType, int>> decomposition;
              for (const auto& quad : books[bi].quadrants) {
                decomposition.push_back({PieceType::Type1, quad.multiplicity});
              }
              row.verdict = classify_2d_cone(decomposition).verdict;
              row.gap = gap;
              res.rows.push_back(std::move(row));
            }
          }
        }
      }
    }
  }

  if (!cfg.out_dir.empty()) {
    auto out = open_out(cfg.out_dir, "census.csv");
    out << "Q,N0,N1,q0,q1,books,book_index,book,density,verdict,gap\n";
    char buf[64];
    for (const auto& row : res.rows) {
      std::string q0s, q1s;
      for (size_t i = 0; i < row.config.q0.size(); ++i) {
        q0s += (i ? "+" : "") + std::to_string(row.config.q0[i]);
      }
      for (size_t i = 0; i < row.config.q1.size(); ++i) {
        q1s += (i ? "+" : "") + std::to_string(row.config.q1[i]);
      }
      const char* verdict = row.verdict == ConeVerdict::MinimalBook ? "MINIMAL_BOOK"
                            : row.verdict == ConeVerdict::DensityAboveQ4 ? "DENSITY_ABOVE_Q4"
                                                                         : "INADMISSIBLE";
      std::string gap = "INF";
      if (row.gap) {
        std::snprintf(buf, sizeof buf, "%.17g", *row.gap);
        gap = buf;
      }
      out << row.config.total() << "," << row.config.n0() << "," << row.config.n1() << "," << q0s
          << "," << q1s << "," << row.book_count << "," << row.book_index << ","
          << row.book.str() << "," << row.density.str() << "," << verdict << "," << gap << "\n";
    }
    write_manifest(cfg, wall_now() - t0);
  }
  return res;
}

}  // namespace qlab
