#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lyapvec/enkf.hpp"
#include "lyapvec/ginelli.hpp"
#include "lyapvec/models.hpp"

namespace lyapvec::harness {

enum class SourceKind { kTruth, kPerturbed, kAssimilated };

std::string to_string(SourceKind kind);

struct FilterSettings {
  int ensemble_size = 25;
  /// Observed state indices; ignored when `operator_rows` is non-empty.
  std::vector<int> observed_indices;
  /// Explicit observation operator rows (each of length d).
  std::vector<std::vector<double>> operator_rows;
  double obs_interval = 0.01;
  double initial_offset = 0.0;  // added to every component of x_0
  double initial_cov_scale = 1.0;
  double localization_radius = 0.0;
  double inflation = 1.0;
  int burn_in = 0;
};

/// Full description of one experiment. Missing keys fall back to per-model defaults
/// (see docs/config.md).
struct ExperimentConfig {
  std::string id = "experiment";
  std::uint64_t master_seed = 0;
  std::string output_dir = "out";
  int threads = 0;  // 0: available parallelism

  models::ModelKind model_kind = models::ModelKind::kLorenz63;
  int dimension = 3;
  std::vector<double> params{10.0, 28.0, 8.0 / 3.0};

  double solver_step = 0.002;
  double save_interval = 0.01;
  double spinup = 500.0;
  double forward_transient = 100.0;
  double sampling = 100.0;
  double backward_transient = 100.0;

  int qr_interval = 1;
  int vectors = 3;

  SourceKind source = SourceKind::kTruth;
  std::vector<double> sigma_grid;
  std::vector<double> mu_grid;

  FilterSettings filter;

  std::vector<int> k_grid;
  int random_realizations = 0;
  bool clv_geometry = false;
  bool write_intermediates = false;

  /// Paper-setup defaults for a model kind and dimension.
  static ExperimentConfig defaults(models::ModelKind kind, int dimension);
  static ExperimentConfig parse(std::istream& in);
  static ExperimentConfig load(const std::filesystem::path& path);

  /// Every problem found, empty when valid.
  std::vector<std::string> problems() const;
  /// Throws Error(kConfig) listing every problem.
  void validate() const;

  models::ModelSpec model() const;
  ginelli::GinelliSchedule schedule() const;
  /// Samples in the window the Lyapunov vectors are computed on ([0, E]).
  std::size_t window_samples() const { return schedule().required_samples(); }
  /// Truth sample where that window starts (after the filter burn-in for assimilated runs).
  std::size_t window_offset() const;
  /// Length of the saved truth run.
  double truth_total() const;

  enkf::ObservationModel observation_model(double noise_std) const;
  enkf::EnkfConfig enkf_config(std::uint64_t seed) const;

  /// Canonical sectioned text; parse(canonical()) reproduces the config. Output directory and thread
  /// count are runtime settings and can be left out.
  std::string canonical(bool with_runtime = true) const;
  /// FNV-1a of canonical(false); runtime settings do not change results.
  std::uint64_t hash() const;
};

/// Stream names shared by `experiment` and the individual subcommands.
namespace streams {
inline constexpr const char* kInitialCondition = "initial_condition";
inline constexpr const char* kBackwardSeed = "backward_seed";
std::string perturb(double sigma);
std::string observations(double mu);
std::string filter(double mu);
std::string random_subspace(int k);
}  // namespace streams

}  // namespace lyapvec::harness
