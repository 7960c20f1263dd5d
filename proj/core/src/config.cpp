#include "lyapvec/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <type_traits>

#include "lyapvec/error.hpp"
#include "lyapvec/io.hpp"
#include "lyapvec/random.hpp"

namespace lyapvec::harness {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_real(const std::string& key, const std::string& text) {
  try {
    std::size_t used = 0;
    const double v = std::stod(trim(text), &used);
    if (used != trim(text).size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kConfig, key + ": expected a number, got '" + text + "'");
  }
}

std::vector<double> parse_reals(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!trim(item).empty()) out.push_back(parse_real(key, item));
  }
  return out;
}

std::vector<int> parse_ints(const std::string& key, const std::string& text) {
  std::vector<int> out;
  for (double v : parse_reals(key, text)) {
    if (v != std::floor(v)) throw Error(ErrorCode::kConfig, key + ": expected integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw Error(ErrorCode::kConfig, key + ": expected true/false");
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ", ";
    if constexpr (std::is_floating_point_v<T>) {
      out += io::format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

std::string fmt(double v) {
  if (std::isinf(v)) return "inf";
  return io::format_double(v);
}

}  // namespace

std::string to_string(SourceKind kind) {
  switch (kind) {
    case SourceKind::kTruth: return "truth";
    case SourceKind::kPerturbed: return "perturbed";
    case SourceKind::kAssimilated: return "assimilated";
  }
  return "truth";
}

namespace streams {
std::string perturb(double sigma) { return "perturb/sigma=" + io::format_double(sigma); }
std::string observations(double mu) { return "observations/mu=" + io::format_double(mu); }
std::string filter(double mu) { return "enkf/mu=" + io::format_double(mu); }
std::string random_subspace(int k) { return "random_subspace/k=" + std::to_string(k); }
}  // namespace streams

// -----------------------------------------------------------------------------

ExperimentConfig ExperimentConfig::defaults(models::ModelKind kind, int dimension) {
  ExperimentConfig c;
  c.model_kind = kind;
  if (kind == models::ModelKind::kLorenz63) {
    c.dimension = 3;
    c.params = {10.0, 28.0, 8.0 / 3.0};
    c.solver_step = 0.002;
    c.save_interval = 0.01;
    c.spinup = 500.0;
    c.forward_transient = c.sampling = c.backward_transient = 100.0;
    c.qr_interval = 1;
    c.vectors = 3;
    c.sigma_grid = {0.1, 0.2, 0.3, 0.4, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0};
    c.mu_grid = {0.1, 0.3, 0.5, 0.7, 0.9};
    c.filter.observed_indices = {1};
    c.filter.obs_interval = 0.01;
    c.filter.initial_offset = 6.0;
    c.filter.initial_cov_scale = 2.0;
    c.filter.localization_radius = std::numeric_limits<double>::infinity();
    c.filter.burn_in = 5000;
    c.k_grid = {1, 2};
  } else {
    c.dimension = dimension;
    c.params = {8.0};
    c.solver_step = 0.01;
    c.save_interval = 0.05;
    c.spinup = 500.0;
    c.forward_transient = c.backward_transient = dimension >= 40 ? 400.0 : 200.0;
    c.sampling = 200.0;
    c.qr_interval = 5;
    c.vectors = dimension;
    c.sigma_grid = {0.1, 0.2, 0.3, 0.4, 0.5};
    c.mu_grid = {0.3, 0.7, 1.0};
    for (int k = 0; k < dimension; k += 2) c.filter.observed_indices.push_back(k);
    c.filter.obs_interval = 0.05;
    c.filter.initial_offset = 5.0;
    c.filter.initial_cov_scale = 1.0;
    c.filter.localization_radius = 4.0;
    c.filter.burn_in = 1000;
    for (int k : {2, 5, 10, 15, 20}) {
      if (k <= dimension) c.k_grid.push_back(k);
    }
    c.random_realizations = 100;
  }
  c.filter.ensemble_size = 25;
  c.filter.inflation = 1.0;
  return c;
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::kConfig, std::string("config syntax: ") + e.what());
  }
  const auto get = [&](const std::string& key) -> std::optional<std::string> {
    if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) return trim(*v);
    return std::nullopt;
  };

  const auto kind = models::parse_model_kind(get("model.kind").value_or("l63"));
  const int dim = get("model.dimension") ? static_cast<int>(parse_real("model.dimension", *get("model.dimension")))
                                         : (kind == models::ModelKind::kLorenz63 ? 3 : 40);
  ExperimentConfig c = defaults(kind, dim);

  const auto real = [&](const std::string& key, double& target) {
    if (auto v = get(key)) target = parse_real(key, *v);
  };
  const auto integer = [&](const std::string& key, int& target) {
    if (auto v = get(key)) {
      const double x = parse_real(key, *v);
      if (x != std::floor(x)) throw Error(ErrorCode::kConfig, key + ": expected an integer");
      target = static_cast<int>(x);
    }
  };

  if (auto v = get("experiment.id")) c.id = *v;
  if (auto v = get("experiment.master_seed")) {
    try {
      c.master_seed = std::stoull(*v);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kConfig, "experiment.master_seed: expected an unsigned integer");
    }
  }
  if (auto v = get("experiment.output_dir")) c.output_dir = *v;
  integer("experiment.threads", c.threads);

  if (kind == models::ModelKind::kLorenz63) {
    real("model.sigma", c.params[0]);
    real("model.rho", c.params[1]);
    real("model.beta", c.params[2]);
  } else {
    real("model.forcing", c.params[0]);
  }

  real("trajectory.solver_step", c.solver_step);
  real("trajectory.save_interval", c.save_interval);
  real("trajectory.spinup", c.spinup);
  real("trajectory.forward_transient", c.forward_transient);
  real("trajectory.sampling", c.sampling);
  real("trajectory.backward_transient", c.backward_transient);

  integer("ginelli.qr_interval", c.qr_interval);
  integer("ginelli.vectors", c.vectors);

  if (auto v = get("source.kind")) {
    if (*v == "truth") c.source = SourceKind::kTruth;
    else if (*v == "perturbed") c.source = SourceKind::kPerturbed;
    else if (*v == "assimilated") c.source = SourceKind::kAssimilated;
    else throw Error(ErrorCode::kConfig, "source.kind: expected truth | perturbed | assimilated");
  }
  if (auto v = get("source.sigma_grid")) c.sigma_grid = parse_reals("source.sigma_grid", *v);
  if (auto v = get("source.mu_grid")) c.mu_grid = parse_reals("source.mu_grid", *v);

  integer("enkf.ensemble_size", c.filter.ensemble_size);
  if (auto v = get("enkf.observe")) {
    if (*v == "even") {
      c.filter.observed_indices.clear();
      for (int k = 0; k < c.dimension; k += 2) c.filter.observed_indices.push_back(k);
    } else {
      c.filter.observed_indices = parse_ints("enkf.observe", *v);
    }
  }
  if (auto v = get("enkf.operator")) {
    c.filter.operator_rows.clear();
    std::stringstream rows(*v);
    std::string row;
    while (std::getline(rows, row, ';')) {
      if (!trim(row).empty()) c.filter.operator_rows.push_back(parse_reals("enkf.operator", row));
    }
  }
  real("enkf.obs_interval", c.filter.obs_interval);
  real("enkf.initial_offset", c.filter.initial_offset);
  real("enkf.initial_cov_scale", c.filter.initial_cov_scale);
  real("enkf.localization_radius", c.filter.localization_radius);
  real("enkf.inflation", c.filter.inflation);
  integer("enkf.burn_in", c.filter.burn_in);

  if (auto v = get("metrics.k_grid")) c.k_grid = parse_ints("metrics.k_grid", *v);
  integer("metrics.random_realizations", c.random_realizations);
  if (auto v = get("metrics.clv_geometry")) c.clv_geometry = parse_bool("metrics.clv_geometry", *v);
  if (auto v = get("metrics.write_intermediates")) c.write_intermediates = parse_bool("metrics.write_intermediates", *v);
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open config " + path.string());
  return parse(in);
}

// -----------------------------------------------------------------------------

std::vector<std::string> ExperimentConfig::problems() const {
  std::vector<std::string> out;
  const auto check = [&](bool ok, const std::string& what) {
    if (!ok) out.push_back(what);
  };
  try {
    (void)model();
  } catch (const Error& e) {
    out.emplace_back(std::string("model: ") + e.what());
  }
  check(solver_step > 0.0, "trajectory.solver_step must be positive");
  check(save_interval > 0.0, "trajectory.save_interval must be positive");
  check(spinup >= 0.0, "trajectory.spinup must be >= 0");
  if (solver_step > 0.0 && save_interval > 0.0) {
    try {
      (void)models::steps_per_interval(save_interval, solver_step);
    } catch (const Error& e) {
      out.emplace_back(std::string("trajectory: ") + e.what());
    }
  }
  check(qr_interval >= 1, "ginelli.qr_interval must be >= 1");
  check(vectors >= 1 && vectors <= dimension, "ginelli.vectors must lie in [1, dimension]");
  if (qr_interval >= 1 && save_interval > 0.0) {
    try {
      (void)schedule();
    } catch (const Error& e) {
      out.emplace_back(std::string("trajectory intervals: ") + e.what());
    }
  }
  if (source == SourceKind::kPerturbed) {
    check(!sigma_grid.empty(), "source.sigma_grid must be non-empty for a perturbed source");
    for (double s : sigma_grid) check(s >= 0.0 && std::isfinite(s), "source.sigma_grid values must be finite and >= 0");
  }
  if (source == SourceKind::kAssimilated) {
    check(!mu_grid.empty(), "source.mu_grid must be non-empty for an assimilated source");
    for (double m : mu_grid) check(m > 0.0 && std::isfinite(m), "source.mu_grid values must be positive");
    check(filter.ensemble_size >= 2, "enkf.ensemble_size must be >= 2");
    check(filter.inflation >= 1.0, "enkf.inflation must be >= 1");
    check(filter.localization_radius > 0.0, "enkf.localization_radius must be > 0 (inf disables)");
    check(filter.burn_in >= 0, "enkf.burn_in must be >= 0");
    check(filter.initial_cov_scale >= 0.0, "enkf.initial_cov_scale must be >= 0");
    check(std::abs(filter.obs_interval - save_interval) <= 1e-12 * save_interval,
          "enkf.obs_interval must equal trajectory.save_interval (the analysis means form the pseudo-trajectory)");
    if (filter.operator_rows.empty()) {
      check(!filter.observed_indices.empty(), "enkf.observe must select at least one component");
      for (int i : filter.observed_indices) check(i >= 0 && i < dimension, "enkf.observe index out of range");
    } else {
      for (const auto& row : filter.operator_rows) {
        check(static_cast<int>(row.size()) == dimension, "enkf.operator rows must have the model dimension");
      }
    }
  }
  for (int k : k_grid) check(k >= 1 && k <= vectors, "metrics.k_grid values must lie in [1, ginelli.vectors]");
  check(random_realizations >= 0, "metrics.random_realizations must be >= 0");
  check(threads >= 0, "experiment.threads must be >= 0");
  return out;
}

void ExperimentConfig::validate() const {
  const auto list = problems();
  if (list.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& p : list) msg += "\n  - " + p;
  throw Error(ErrorCode::kConfig, msg);
}

models::ModelSpec ExperimentConfig::model() const {
  return models::ModelSpec::from_parts(model_kind, dimension, params);
}

ginelli::GinelliSchedule ExperimentConfig::schedule() const {
  return ginelli::GinelliSchedule::from_lengths(forward_transient, sampling, backward_transient, qr_interval,
                                                save_interval);
}

std::size_t ExperimentConfig::window_offset() const {
  if (source != SourceKind::kAssimilated) return 0;
  const auto stride = static_cast<std::size_t>(models::steps_per_interval(filter.obs_interval, save_interval));
  return static_cast<std::size_t>(filter.burn_in) * stride;
}

double ExperimentConfig::truth_total() const {
  return static_cast<double>(window_offset() + window_samples() - 1) * save_interval;
}

enkf::ObservationModel ExperimentConfig::observation_model(double noise_std) const {
  if (filter.operator_rows.empty()) {
    return enkf::ObservationModel::select(dimension, filter.observed_indices, noise_std, filter.obs_interval);
  }
  enkf::ObservationModel m;
  m.h.resize(static_cast<Eigen::Index>(filter.operator_rows.size()), dimension);
  for (std::size_t r = 0; r < filter.operator_rows.size(); ++r) {
    for (int c = 0; c < dimension; ++c) m.h(static_cast<Eigen::Index>(r), c) = filter.operator_rows[r][static_cast<std::size_t>(c)];
  }
  m.noise_std = noise_std;
  m.obs_interval = filter.obs_interval;
  m.validate(dimension);
  return m;
}

enkf::EnkfConfig ExperimentConfig::enkf_config(std::uint64_t seed) const {
  enkf::EnkfConfig e;
  e.ensemble_size = filter.ensemble_size;
  e.initial_offset = Vector::Constant(dimension, filter.initial_offset);
  e.initial_cov_scale = filter.initial_cov_scale;
  e.localization_radius = filter.localization_radius;
  e.inflation = filter.inflation;
  e.burn_in = filter.burn_in;
  e.seed = seed;
  return e;
}

std::string ExperimentConfig::canonical(bool with_runtime) const {
  std::ostringstream out;
  out << "[experiment]\nid = " << id << "\nmaster_seed = " << master_seed << "\n";
  if (with_runtime) out << "output_dir = " << output_dir << "\nthreads = " << threads << "\n";
  out << "\n";
  out << "[model]\nkind = " << models::to_string(model_kind) << "\ndimension = " << dimension << "\n";
  if (model_kind == models::ModelKind::kLorenz63) {
    out << "sigma = " << fmt(params[0]) << "\nrho = " << fmt(params[1]) << "\nbeta = " << fmt(params[2]) << "\n\n";
  } else {
    out << "forcing = " << fmt(params[0]) << "\n\n";
  }
  out << "[trajectory]\nsolver_step = " << fmt(solver_step) << "\nsave_interval = " << fmt(save_interval)
      << "\nspinup = " << fmt(spinup) << "\nforward_transient = " << fmt(forward_transient)
      << "\nsampling = " << fmt(sampling) << "\nbackward_transient = " << fmt(backward_transient) << "\n\n";
  out << "[ginelli]\nqr_interval = " << qr_interval << "\nvectors = " << vectors << "\n\n";
  out << "[source]\nkind = " << to_string(source) << "\nsigma_grid = " << join(sigma_grid)
      << "\nmu_grid = " << join(mu_grid) << "\n\n";
  out << "[enkf]\nensemble_size = " << filter.ensemble_size << "\nobserve = " << join(filter.observed_indices) << "\n";
  if (!filter.operator_rows.empty()) {
    out << "operator = ";
    for (std::size_t r = 0; r < filter.operator_rows.size(); ++r) out << (r ? "; " : "") << join(filter.operator_rows[r]);
    out << "\n";
  }
  out << "obs_interval = " << fmt(filter.obs_interval) << "\ninitial_offset = " << fmt(filter.initial_offset)
      << "\ninitial_cov_scale = " << fmt(filter.initial_cov_scale)
      << "\nlocalization_radius = " << fmt(filter.localization_radius) << "\ninflation = " << fmt(filter.inflation)
      << "\nburn_in = " << filter.burn_in << "\n\n";
  out << "[metrics]\nk_grid = " << join(k_grid) << "\nrandom_realizations = " << random_realizations
      << "\nclv_geometry = " << (clv_geometry ? "true" : "false")
      << "\nwrite_intermediates = " << (write_intermediates ? "true" : "false") << "\n";
  return out.str();
}

std::uint64_t ExperimentConfig::hash() const { return fnv1a(canonical(false)); }

}  // namespace lyapvec::harness
