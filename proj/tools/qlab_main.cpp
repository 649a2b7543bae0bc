// qlab: batch experiment runner for the Q-valued Dirichlet laboratory.
//
// Exit codes: 0 success, 2 usage/config error, 3 experiment invariant
// violated, 4 solver non-convergence.

#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "qlab/experiments.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  int threads = 0;  // 0 = keep config value
  bool oracle_mode = false;
};

void add_common(CLI::App* sub, CommonArgs& args) {
  sub->add_option("--config", args.config_path, "experiment config file (key = value)");
  sub->add_option("--out", args.out_dir, "output directory (overrides config)");
  sub->add_option("--threads", args.threads, "worker thread cap");
  sub->add_flag("--oracle-mode", args.oracle_mode,
                "substitute exact analytic fields for solves where defined");
}

qlab::ExperimentConfig load(const CommonArgs& args, const std::string& name) {
  qlab::ExperimentConfig cfg;
  if (!args.config_path.empty()) cfg = qlab::parse_config_file(args.config_path);
  if (!cfg.experiment.empty() && cfg.experiment != name) {
    throw qlab::ConfigError("config is for experiment '" + cfg.experiment + "', subcommand is '" +
                            name + "'");
  }
  cfg.experiment = name;
  if (!args.out_dir.empty()) cfg.out_dir = args.out_dir;
  if (args.threads > 0) cfg.threads = args.threads;
  if (args.oracle_mode) cfg.oracle_mode = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qlab: Q-valued Dirichlet minimizer laboratory"};
  app.require_subcommand(1);

  CommonArgs qf_args, cs_args, ed_args, cc_args;
  CLI::App* qf = app.add_subcommand("quarter-frequency",
                                    "quarter-ball solve + corner frequency diagnostics");
  add_common(qf, qf_args);
  CLI::App* cs = app.add_subcommand("cylinder-singularity",
                                    "cylinder solve + forced-singularity certificate");
  add_common(cs, cs_args);
  CLI::App* ed = app.add_subcommand("excess-decay", "strong excess of a perturbed cone");
  add_common(ed, ed_args);
  CLI::App* cc = app.add_subcommand("cone-census", "admissible cornered open book census");
  add_common(cc, cc_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (qf->parsed()) {
      const auto res = qlab::run_quarter_frequency(load(qf_args, "quarter-frequency"));
      if (res.degenerate) {
        std::printf("degenerate profile (zero data)\n");
      } else {
        std::printf("monotone %s (worst violation %.3g), corner bound %s (plateau %.4f)\n",
                    res.monotone.pass ? "PASS" : "FAIL", res.monotone.worst_violation,
                    res.corner.verdict == qlab::CornerVerdict::Pass ? "PASS" : "FAIL",
                    res.corner.plateau);
      }
    } else if (cs->parsed()) {
      const auto res = qlab::run_cylinder_singularity(load(cs_args, "cylinder-singularity"));
      std::printf("boundary monodromy %s, %zu forced component(s), s_min %.4g\n",
                  qlab::cycle_notation(res.report.boundary_monodromy).c_str(),
                  res.report.components.size(), res.s_min);
    } else if (ed->parsed()) {
      const auto res = qlab::run_excess_decay(load(ed_args, "excess-decay"));
      for (size_t k = 0; k < res.radii.size(); ++k) {
        std::printf("E(B_%.4g) = %.6g\n", res.radii[k], res.excess[k]);
      }
      if (res.no_decay_claim) std::printf("NO_DECAY_CLAIM (outside small-excess regime)\n");
    } else if (cc->parsed()) {
      const auto res = qlab::run_cone_census(load(cc_args, "cone-census"));
      std::printf("census rows: %zu\n", res.rows.size());
    }
  } catch (const qlab::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const qlab::ResolutionError& e) {
    std::fprintf(stderr, "resolution error: %s\n", e.what());
    return 2;
  } catch (const qlab::ExperimentInvariantViolation& e) {
    std::fprintf(stderr, "experiment invariant violated: %s\n", e.what());
    return 3;
  } catch (const qlab::NotConvergedError& e) {
    std::fprintf(stderr, "solver did not converge: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
