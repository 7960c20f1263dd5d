#include "lyapvec/experiment.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

#include "lyapvec/error.hpp"
#include "lyapvec/metrics.hpp"
#include "lyapvec/perturb.hpp"
#include "lyapvec/random.hpp"

namespace lyapvec::harness {

namespace {

using io::format_double;

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Everything one grid point contributes; merged in grid order afterwards.
struct GridOutput {
  io::ResultTable angles = make_angle_table();
  io::ResultTable pas = make_principal_angle_table();
  io::ResultTable exponents = make_exponent_table();
  io::ResultTable rmse = make_rmse_table();
  io::ResultTable filter = make_filter_table();
  io::ResultTable geometry = make_geometry_table();
  std::vector<std::string> warnings;
};

}  // namespace

// -----------------------------------------------------------------------------

models::Trajectory make_truth(const ExperimentConfig& config) {
  const auto model = config.model();
  Rng rng = make_rng(config.master_seed, streams::kInitialCondition);
  const Vector x0 = standard_normal(model.dimension(), 1, rng);
  return models::integrate_trajectory(model, x0, config.spinup, config.truth_total(), config.solver_step,
                                      config.save_interval);
}

Matrix backward_seed(const ExperimentConfig& config) {
  Rng rng = make_rng(config.master_seed, streams::kBackwardSeed);
  return ginelli::generic_upper_triangular(config.vectors, rng);
}

ginelli::LyapunovSet lyapunov_of(const ExperimentConfig& config, const models::Trajectory& trajectory,
                                 std::size_t skip) {
  const auto schedule = config.schedule();
  if (skip + schedule.required_samples() > trajectory.size()) {
    throw Error(ErrorCode::kInvalidArgument,
                "trajectory too short for the configured intervals: need " +
                    std::to_string(skip + schedule.required_samples()) + " samples, have " +
                    std::to_string(trajectory.size()));
  }
  if (!(trajectory.model() == config.model())) {
    throw Error(ErrorCode::kConfig, "trajectory model does not match the configured model");
  }
  const auto window = trajectory.window(skip, schedule.required_samples());
  return ginelli::compute_lyapunov(window, schedule, config.vectors, backward_seed(config));
}

models::Trajectory perturbed_source(const ExperimentConfig& config, const models::Trajectory& window, double sigma) {
  return perturb::perturb_trajectory(window, {sigma, stream_seed(config.master_seed, streams::perturb(sigma))});
}

enkf::ObservationSet observe(const ExperimentConfig& config, const models::Trajectory& truth, double mu) {
  return enkf::generate_observations(truth, config.observation_model(mu),
                                     stream_seed(config.master_seed, streams::observations(mu)));
}

enkf::FilterRun assimilate(const ExperimentConfig& config, const models::Trajectory& truth,
                           const enkf::ObservationSet& obs, bool with_analysis) {
  const auto cfg = config.enkf_config(stream_seed(config.master_seed, streams::filter(obs.model.noise_std)));
  return enkf::run_filter(truth, obs, cfg, with_analysis);
}

// -----------------------------------------------------------------------------

io::ResultTable make_angle_table() {
  io::ResultTable t("angles", {"experiment_id", "source", "param_value", "vector_kind", "vector_index", "median_deg",
                               "p25_deg", "p75_deg", "n_samples"});
  for (const char* c : {"median_deg", "p25_deg", "p75_deg"}) t.set_unit(c, "degree");
  return t;
}

io::ResultTable make_principal_angle_table() {
  io::ResultTable t("principal_angles", {"experiment_id", "source", "param_value", "subspace_dim", "pa_index",
                                         "median_deg", "p25_deg", "p75_deg"});
  for (const char* c : {"median_deg", "p25_deg", "p75_deg"}) t.set_unit(c, "degree");
  return t;
}

io::ResultTable make_exponent_table() {
  io::ResultTable t("exponents", {"experiment_id", "source", "param_value", "exp_index", "lambda", "abs_error_vs_truth"});
  t.set_unit("lambda", "1/time");
  t.set_unit("abs_error_vs_truth", "1/time");
  return t;
}

io::ResultTable make_rmse_table() {
  io::ResultTable t("rmse", {"experiment_id", "source", "param_value", "rmse_sampling", "rmse_window"});
  t.set_unit("rmse_sampling", "state units");
  t.set_unit("rmse_window", "state units");
  return t;
}

io::ResultTable make_filter_table() {
  io::ResultTable t("filter", {"experiment_id", "param_value", "analysis_rmse", "mean_spread", "free_run_rmse",
                               "climatological_spread", "diverged"});
  for (const char* c : {"analysis_rmse", "mean_spread", "free_run_rmse", "climatological_spread"}) t.set_unit(c, "state units");
  return t;
}

io::ResultTable make_geometry_table() {
  io::ResultTable t("clv_geometry", {"experiment_id", "source", "param_value", "frame", "time", "x_first", "x_last",
                                     "clv1_first", "clv1_last", "clvm_first", "clvm_last", "cos_clv1_clv2"});
  t.set_unit("time", "time");
  return t;
}

void add_angle_rows(io::ResultTable& table, const std::string& id, const std::string& source, double param,
                    const ginelli::LyapunovSet& reference, const ginelli::LyapunovSet& candidate) {
  const int m = std::min(reference.vectors(), candidate.vectors());
  for (auto kind : {metrics::VectorKind::kBlv, metrics::VectorKind::kClv}) {
    for (int i = 0; i < m; ++i) {
      const auto series = metrics::vector_angle_series(reference, candidate, kind, i);
      const auto s = metrics::summarize(series);
      table.add_row({id, source, format_double(param), kind == metrics::VectorKind::kBlv ? "BLV" : "CLV",
                     std::to_string(i + 1), format_double(s.median), format_double(s.p25), format_double(s.p75),
                     std::to_string(series.size())});
    }
  }
}

void add_principal_angle_rows(io::ResultTable& table, const std::string& id, const std::string& source,
                              double param, const ginelli::LyapunovSet& reference,
                              const ginelli::LyapunovSet& candidate, const std::vector<int>& k_grid) {
  for (int k : k_grid) {
    const auto series = metrics::principal_angle_series(reference, candidate, k);
    for (std::size_t i = 0; i < series.size(); ++i) {
      const auto s = metrics::summarize(series[i]);
      table.add_row({id, source, format_double(param), std::to_string(k), std::to_string(i + 1),
                     format_double(s.median), format_double(s.p25), format_double(s.p75)});
    }
  }
}

void add_exponent_rows(io::ResultTable& table, const std::string& id, const std::string& source, double param,
                       const Vector& exponents, const Vector& reference) {
  for (Eigen::Index i = 0; i < exponents.size(); ++i) {
    table.add_row({id, source, format_double(param), std::to_string(i + 1), format_double(exponents(i)),
                   format_double(std::abs(exponents(i) - reference(i)))});
  }
}

void add_geometry_rows(io::ResultTable& table, const std::string& id, const std::string& source, double param,
                       const ginelli::LyapunovSet& set, const models::Trajectory& window) {
  const int m = set.vectors();
  const Eigen::Index last = set.dimension() - 1;
  for (std::size_t k = 0; k < set.size(); ++k) {
    const Vector x = window.state(set.sample_index(k));
    const Matrix& c = set.clvs[k];
    const double cos12 = m >= 2 ? c.col(0).dot(c.col(1)) : 1.0;
    table.add_row({id, source, format_double(param), std::to_string(k), format_double(set.time(k)),
                   format_double(x(0)), format_double(x(last)), format_double(c(0, 0)), format_double(c(last, 0)),
                   format_double(c(0, m - 1)), format_double(c(last, m - 1)), format_double(cos12)});
  }
}

void add_random_baseline_rows(io::ResultTable& table, const ExperimentConfig& config,
                              const ginelli::LyapunovSet& reference) {
  const auto realizations = static_cast<std::size_t>(config.random_realizations);
  if (realizations == 0) return;
  for (int k : config.k_grid) {
    std::vector<metrics::AngleSeries> per_index(static_cast<std::size_t>(k));
    for (std::size_t r = 0; r < realizations; ++r) {
      const std::size_t frame = r * reference.size() / realizations;
      const Matrix random = metrics::random_orthonormal_subspace(
          reference.dimension(), k, stream_seed(config.master_seed, streams::random_subspace(k), r));
      const auto angles = metrics::principal_angles(metrics::subspace_from_blvs(reference, frame, k), random);
      for (std::size_t i = 0; i < angles.size(); ++i) per_index[i].push_back(angles[i]);
    }
    for (std::size_t i = 0; i < per_index.size(); ++i) {
      const auto s = metrics::summarize(per_index[i]);
      table.add_row({config.id, "random", "0", std::to_string(k), std::to_string(i + 1), format_double(s.median),
                     format_double(s.p25), format_double(s.p75)});
    }
  }
}

// -----------------------------------------------------------------------------

void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  std::size_t workers = threads > 0 ? static_cast<std::size_t>(threads) : std::max(1U, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

void write_table(const std::filesystem::path& out_dir, const io::ResultTable& table, const ExperimentConfig& config) {
  table.write_csv(out_dir / (table.name() + ".csv"));
  nlohmann::ordered_json meta;
  meta["table"] = table.name() + ".csv";
  meta["experiment_id"] = config.id;
  meta["config_hash"] = hex(config.hash());
  meta["master_seed"] = config.master_seed;
  meta["code_version"] = kCodeVersion;
  meta["columns"] = table.columns();
  meta["units"] = table.units();
  meta["percentile_method"] = "linear interpolation between order statistics";
  meta["angle_window"] = "QR sample times in [I, F]";
  meta["rows"] = table.rows().size();
  io::write_text(out_dir / (table.name() + ".json"), meta.dump(2) + "\n");
}

ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  config.validate();
  const bool writing = !out_dir.empty();
  const auto write_manifest = [&](const char* status) {
    if (!writing) return;
    nlohmann::ordered_json manifest;
    manifest["experiment_id"] = config.id;
    manifest["status"] = status;
    manifest["config_hash"] = hex(config.hash());
    manifest["master_seed"] = config.master_seed;
    manifest["code_version"] = kCodeVersion;
    io::write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");
  };
  if (writing) {
    std::filesystem::create_directories(out_dir);
    io::write_text(out_dir / "config.ini", config.canonical());
  }
  write_manifest("incomplete");

  const auto truth = make_truth(config);
  const auto window = truth.window(config.window_offset(), config.window_samples());
  const auto truth_set = lyapunov_of(config, window);
  const std::string& id = config.id;

  GridOutput base;
  add_exponent_rows(base.exponents, id, "truth", 0.0, truth_set.exponents, truth_set.exponents);
  if (config.clv_geometry) add_geometry_rows(base.geometry, id, "truth", 0.0, truth_set, window);
  add_random_baseline_rows(base.pas, config, truth_set);
  if (writing && config.write_intermediates) {
    io::write_trajectory(out_dir / "truth.traj", window);
    io::write_lyapunov_set(out_dir / "truth.lyap", truth_set);
  }

  const std::vector<double>& grid = config.source == SourceKind::kPerturbed   ? config.sigma_grid
                                    : config.source == SourceKind::kAssimilated ? config.mu_grid
                                                                                : std::vector<double>{};
  const std::string source = to_string(config.source);
  std::vector<GridOutput> outputs(grid.size());

  parallel_for(grid.size(), config.threads, [&](std::size_t g) {
    const double param = grid[g];
    GridOutput& out = outputs[g];
    std::optional<models::Trajectory> candidate;
    if (config.source == SourceKind::kPerturbed) {
      candidate = perturbed_source(config, window, param);
    } else {
      const auto obs = observe(config, truth, param);
      const auto run = assimilate(config, truth, obs);
      const auto free = assimilate(config, truth, obs, false);
      candidate = run.analysis.window(0, config.window_samples());
      out.filter.add_row({id, format_double(param), format_double(run.mean_rmse), format_double(run.mean_spread),
                          format_double(free.mean_rmse), format_double(enkf::climatological_spread(truth)),
                          run.diverged ? "1" : "0"});
      if (run.diverged) out.warnings.push_back("filter diverged at mu = " + format_double(param));
    }
    const auto set = lyapunov_of(config, *candidate);

    const auto err = enkf::rmse(candidate->states(), window.states());
    const auto first = static_cast<Eigen::Index>(truth_set.first_sample);
    const auto span = static_cast<Eigen::Index>((truth_set.size() - 1) * static_cast<std::size_t>(truth_set.qr_interval) + 1);
    out.rmse.add_row({id, source, format_double(param), format_double(err.per_step.segment(first, span).mean()),
                      format_double(err.time_mean)});
    add_angle_rows(out.angles, id, source, param, truth_set, set);
    add_principal_angle_rows(out.pas, id, source, param, truth_set, set, config.k_grid);
    add_exponent_rows(out.exponents, id, source, param, set.exponents, truth_set.exponents);
    if (config.clv_geometry) add_geometry_rows(out.geometry, id, source, param, set, *candidate);
    if (writing && config.write_intermediates) {
      const std::string tag = source + "_" + format_double(param);
      io::write_trajectory(out_dir / (tag + ".traj"), *candidate);
      io::write_lyapunov_set(out_dir / (tag + ".lyap"), set);
    }
  });

  for (const auto& out : outputs) {
    base.angles.append(out.angles);
    base.pas.append(out.pas);
    base.exponents.append(out.exponents);
    base.rmse.append(out.rmse);
    base.filter.append(out.filter);
    base.geometry.append(out.geometry);
    base.warnings.insert(base.warnings.end(), out.warnings.begin(), out.warnings.end());
  }

  ExperimentResult result;
  result.truth_exponents = truth_set.exponents;
  result.warnings = std::move(base.warnings);
  result.tables.push_back(std::move(base.exponents));
  if (config.source != SourceKind::kTruth) {
    result.tables.push_back(std::move(base.angles));
    result.tables.push_back(std::move(base.rmse));
  }
  if (!base.pas.rows().empty()) result.tables.push_back(std::move(base.pas));
  if (config.source == SourceKind::kAssimilated) result.tables.push_back(std::move(base.filter));
  if (config.clv_geometry) result.tables.push_back(std::move(base.geometry));

  if (writing) {
    for (const auto& table : result.tables) write_table(out_dir, table, config);
  }
  write_manifest("complete");
  return result;
}

}  // namespace lyapvec::harness
