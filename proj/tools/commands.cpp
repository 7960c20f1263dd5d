#include "commands.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>

#include "lyapvec/config.hpp"
#include "lyapvec/error.hpp"
#include "lyapvec/experiment.hpp"
#include "lyapvec/io.hpp"
#include "lyapvec/validate.hpp"

namespace lyapvec::cli {

namespace fs = std::filesystem;
using harness::ExperimentConfig;
using nlohmann::ordered_json;

namespace {

// Config from --config, else per-model defaults (from the input's model when there is one), then the
// global overrides.
ExperimentConfig resolve(const GlobalOptions& g, const models::ModelSpec* hint = nullptr) {
  ExperimentConfig cfg;
  if (g.config) {
    cfg = ExperimentConfig::load(*g.config);
  } else if (hint != nullptr) {
    cfg = ExperimentConfig::defaults(hint->kind(), hint->dimension());
    cfg.params.assign(hint->params().begin(), hint->params().end());
  } else {
    cfg = ExperimentConfig::defaults(models::ModelKind::kLorenz63, 3);
  }
  if (g.seed) cfg.master_seed = *g.seed;
  if (g.out) cfg.output_dir = *g.out;
  if (g.threads) cfg.threads = *g.threads;
  cfg.validate();
  return cfg;
}

fs::path output_path(const ExperimentConfig& cfg, const std::string& explicit_path, const std::string& name) {
  fs::path p = explicit_path.empty() ? fs::path(cfg.output_dir) / name : fs::path(explicit_path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  return p;
}

void emit(const ordered_json& j) { std::cout << j.dump(2) << "\n"; }

std::vector<double> to_vector(const Vector& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

int run_trajectory(const GlobalOptions& g, const TrajectoryArgs& a) {
  const auto cfg = resolve(g);
  const auto truth = harness::make_truth(cfg);
  const auto path = output_path(cfg, a.output, "truth.traj");
  io::write_trajectory(path, truth);
  emit({{"output", path.string()},
        {"model", models::to_string(truth.model().kind())},
        {"dimension", truth.model().dimension()},
        {"samples", truth.size()},
        {"window_offset", cfg.window_offset()}});
  return 0;
}

int run_lyapunov(const GlobalOptions& g, const LyapunovArgs& a) {
  const auto traj = io::read_trajectory(a.input);
  const auto cfg = resolve(g, &traj.model());
  const auto set = harness::lyapunov_of(cfg, traj, a.skip);
  const auto path = output_path(cfg, a.output, fs::path(a.input).stem().string() + ".lyap");
  io::write_lyapunov_set(path, set);
  ordered_json j{{"output", path.string()}, {"frames", set.size()}, {"exponents", to_vector(set.exponents)}};
  if (set.vectors() == set.dimension()) j["kaplan_yorke"] = ginelli::kaplan_yorke(set.exponents);
  emit(j);
  return 0;
}

int run_observe(const GlobalOptions& g, const ObserveArgs& a) {
  const auto truth = io::read_trajectory(a.input);
  const auto cfg = resolve(g, &truth.model());
  const auto obs = harness::observe(cfg, truth, a.mu);
  const auto path = output_path(cfg, a.output, "obs_mu_" + io::format_double(a.mu) + ".obs");
  io::write_observations(path, obs);
  emit({{"output", path.string()}, {"observed", obs.model.observed()}, {"times", obs.size()}});
  return 0;
}

int run_assimilate(const GlobalOptions& g, const AssimilateArgs& a) {
  const auto truth = io::read_trajectory(a.truth);
  const auto obs = io::read_observations(a.obs);
  const auto cfg = resolve(g, &truth.model());
  const auto run = harness::assimilate(cfg, truth, obs);
  const auto free = harness::assimilate(cfg, truth, obs, false);
  const double mu = obs.model.noise_std;

  const auto path = output_path(cfg, a.output, "analysis_mu_" + io::format_double(mu) + ".traj");
  io::write_trajectory(path, run.analysis.window(0, std::min(run.analysis.size(), cfg.window_samples())));

  auto table = harness::make_filter_table();
  table.add_row({cfg.id, io::format_double(mu), io::format_double(run.mean_rmse), io::format_double(run.mean_spread),
                 io::format_double(free.mean_rmse), io::format_double(enkf::climatological_spread(truth)),
                 run.diverged ? "1" : "0"});
  fs::create_directories(cfg.output_dir);
  harness::write_table(cfg.output_dir, table, cfg);
  emit({{"output", path.string()},
        {"analysis_rmse", run.mean_rmse},
        {"free_run_rmse", free.mean_rmse},
        {"mean_spread", run.mean_spread},
        {"diverged", run.diverged}});
  return 0;
}

int run_perturb(const GlobalOptions& g, const PerturbArgs& a) {
  const auto truth = io::read_trajectory(a.input);
  const auto cfg = resolve(g, &truth.model());
  const auto out = harness::perturbed_source(cfg, truth, a.sigma);
  const auto path = output_path(cfg, a.output, "perturbed_sigma_" + io::format_double(a.sigma) + ".traj");
  io::write_trajectory(path, out);
  emit({{"output", path.string()}, {"samples", out.size()}, {"sigma", a.sigma}});
  return 0;
}

int run_angles(const GlobalOptions& g, const AnglesArgs& a) {
  const auto reference = io::read_lyapunov_set(a.reference);
  const auto candidate = io::read_lyapunov_set(a.candidate);
  if (reference.dimension() != candidate.dimension()) {
    throw Error(ErrorCode::kDimensionMismatch, "reference and candidate sets have different state dimensions");
  }
  if (reference.size() != candidate.size()) {
    throw Error(ErrorCode::kMisaligned, "reference and candidate sets have different frame counts");
  }
  const auto model = reference.dimension() == 3 ? models::ModelSpec::lorenz63()
                                                : models::ModelSpec::lorenz96(reference.dimension());
  auto cfg = resolve(g, &model);
  std::erase_if(cfg.k_grid, [&](int k) { return k > std::min(reference.vectors(), candidate.vectors()); });

  auto angles = harness::make_angle_table();
  auto pas = harness::make_principal_angle_table();
  auto exps = harness::make_exponent_table();
  harness::add_angle_rows(angles, cfg.id, a.source, a.param, reference, candidate);
  harness::add_principal_angle_rows(pas, cfg.id, a.source, a.param, reference, candidate, cfg.k_grid);
  const int m = std::min(reference.vectors(), candidate.vectors());
  harness::add_exponent_rows(exps, cfg.id, a.source, a.param, candidate.exponents.head(m), reference.exponents.head(m));

  fs::create_directories(cfg.output_dir);
  for (const auto* t : {&angles, &pas, &exps}) harness::write_table(cfg.output_dir, *t, cfg);
  emit({{"output", cfg.output_dir}, {"frames", reference.size()}, {"vectors", m}});
  return 0;
}

int run_experiment(const GlobalOptions& g) {
  const auto cfg = resolve(g);
  const auto result = harness::run_experiment(cfg, cfg.output_dir);
  ordered_json tables = ordered_json::array();
  for (const auto& t : result.tables) tables.push_back(t.name() + ".csv");
  emit({{"output", cfg.output_dir},
        {"tables", tables},
        {"truth_exponents", to_vector(result.truth_exponents)},
        {"warnings", result.warnings}});
  return 0;
}

int run_validate(const GlobalOptions& g) {
  const auto checks = harness::run_invariant_suite(g.seed.value_or(0));
  bool ok = true;
  ordered_json list = ordered_json::array();
  for (const auto& c : checks) {
    list.push_back({{"check", c.name}, {"passed", c.passed}, {"value", c.value}, {"threshold", c.threshold}});
    ok = ok && c.passed;
  }
  emit({{"passed", ok}, {"checks", list}});
  return ok ? 0 : 3;
}

}  // namespace lyapvec::cli
