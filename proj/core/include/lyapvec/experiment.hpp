#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "lyapvec/config.hpp"
#include "lyapvec/enkf.hpp"
#include "lyapvec/ginelli.hpp"
#include "lyapvec/io.hpp"
#include "lyapvec/models.hpp"

namespace lyapvec::harness {

inline constexpr const char* kCodeVersion = "0.1.0";

// Pipeline stages. `experiment` and the individual CLI subcommands both go through these, with the
// same named RNG streams, so chaining subcommands reproduces experiment output exactly.

/// Spin-up from a seeded N(0, I) state, then the saved truth run of length truth_total().
models::Trajectory make_truth(const ExperimentConfig& config);
/// Generic upper-triangular seed for the backward sweep.
Matrix backward_seed(const ExperimentConfig& config);
/// Ginelli on samples [skip, skip + window_samples()) of `trajectory`.
ginelli::LyapunovSet lyapunov_of(const ExperimentConfig& config, const models::Trajectory& trajectory,
                                 std::size_t skip = 0);
models::Trajectory perturbed_source(const ExperimentConfig& config, const models::Trajectory& window, double sigma);
enkf::ObservationSet observe(const ExperimentConfig& config, const models::Trajectory& truth, double mu);
enkf::FilterRun assimilate(const ExperimentConfig& config, const models::Trajectory& truth,
                           const enkf::ObservationSet& obs, bool with_analysis = true);

// Table schemas (headers are part of the external interface).
io::ResultTable make_angle_table();
io::ResultTable make_principal_angle_table();
io::ResultTable make_exponent_table();
io::ResultTable make_rmse_table();
io::ResultTable make_filter_table();
io::ResultTable make_geometry_table();

void add_angle_rows(io::ResultTable& table, const std::string& id, const std::string& source, double param,
                    const ginelli::LyapunovSet& reference, const ginelli::LyapunovSet& candidate);
void add_principal_angle_rows(io::ResultTable& table, const std::string& id, const std::string& source,
                              double param, const ginelli::LyapunovSet& reference,
                              const ginelli::LyapunovSet& candidate, const std::vector<int>& k_grid);
void add_exponent_rows(io::ResultTable& table, const std::string& id, const std::string& source, double param,
                       const Vector& exponents, const Vector& reference);
void add_geometry_rows(io::ResultTable& table, const std::string& id, const std::string& source, double param,
                       const ginelli::LyapunovSet& set, const models::Trajectory& window);
/// PAs between the reference leading-k BLV subspace and Haar-random k-subspaces, summarized over
/// realizations; realization r is compared at frame r * frames / realizations.
void add_random_baseline_rows(io::ResultTable& table, const ExperimentConfig& config,
                              const ginelli::LyapunovSet& reference);

struct ExperimentResult {
  std::vector<io::ResultTable> tables;
  std::vector<std::string> warnings;
  Vector truth_exponents;
};

/// Runs `fn(i)` for i in [0, count) on at most `threads` workers (0: hardware concurrency).
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

/// Full config-driven pipeline. Writes tables and sidecars to `out_dir` when it is non-empty.
ExperimentResult run_experiment(const ExperimentConfig& config, const std::filesystem::path& out_dir);

/// CSV plus a JSON sidecar (config hash, seed, units, percentile method) per table.
void write_table(const std::filesystem::path& out_dir, const io::ResultTable& table, const ExperimentConfig& config);

}  // namespace lyapvec::harness
