#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstring>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "lyapvec/config.hpp"
#include "lyapvec/experiment.hpp"
#include "lyapvec/io.hpp"
#include "lyapvec/validate.hpp"
#include "support.hpp"

using namespace lyapvec;
using harness::ExperimentConfig;
using harness::SourceKind;
using lyapvec::testing::expect_error;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::path(::testing::TempDir()) / ("lyapvec_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// Short Lorenz-63 setup so whole pipelines run in well under a second.
ExperimentConfig small_l63(SourceKind source) {
  auto c = ExperimentConfig::defaults(models::ModelKind::kLorenz63, 3);
  c.id = "small";
  c.master_seed = 5;
  c.spinup = 20.0;
  c.forward_transient = c.sampling = c.backward_transient = 5.0;
  c.source = source;
  c.sigma_grid = {0.0, 0.2};
  c.mu_grid = {0.3};
  c.k_grid = {1, 2};
  c.filter.burn_in = 200;
  c.threads = 1;
  return c;
}

std::vector<std::string> lines(const fs::path& p) {
  std::ifstream in(p);
  std::vector<std::string> out;
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> rows_with(const fs::path& p, const std::string& needle) {
  std::vector<std::string> out;
  for (const auto& l : lines(p)) {
    if (l.find(needle) != std::string::npos) out.push_back(l);
  }
  return out;
}

struct Run {
  int status;
  std::string err;
};

Run cli(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string(LYAPVEC_CLI) + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + err.string();
  const int raw = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, ss.str()};
}

}  // namespace

// -----------------------------------------------------------------------------

TEST(Config, CanonicalRoundTrip) {
  for (auto c : {ExperimentConfig::defaults(models::ModelKind::kLorenz63, 3),
                 ExperimentConfig::defaults(models::ModelKind::kLorenz96, 40), small_l63(SourceKind::kAssimilated)}) {
    c.filter.operator_rows = {};
    std::istringstream in(c.canonical());
    const auto back = ExperimentConfig::parse(in);
    EXPECT_EQ(back.canonical(), c.canonical());
    EXPECT_EQ(back.hash(), c.hash());
  }
}

TEST(Config, HashIgnoresRuntimeSettings) {
  auto a = small_l63(SourceKind::kPerturbed);
  auto b = a;
  b.output_dir = "elsewhere";
  b.threads = 7;
  EXPECT_EQ(a.hash(), b.hash());
  b.master_seed = 6;
  EXPECT_NE(a.hash(), b.hash());
}

TEST(Config, ParsesSectionsAndDefaults) {
  std::istringstream in(
      "[model]\nkind = l96\ndimension = 20\nforcing = 8\n"
      "[source]\nkind = assimilated\nmu_grid = 0.3, 1\n"
      "[enkf]\nobserve = even\nlocalization_radius = inf\noperator = \n"
      "[metrics]\nk_grid = 2, 5\n");
  const auto c = ExperimentConfig::parse(in);
  EXPECT_EQ(c.dimension, 20);
  EXPECT_EQ(c.qr_interval, 5);
  EXPECT_EQ(c.forward_transient, 200.0);
  EXPECT_EQ(c.mu_grid, (std::vector<double>{0.3, 1.0}));
  EXPECT_EQ(c.filter.observed_indices.size(), 10U);
  EXPECT_TRUE(std::isinf(c.filter.localization_radius));
  EXPECT_EQ(c.k_grid, (std::vector<int>{2, 5}));
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.window_offset(), 1000U);
  EXPECT_EQ(c.window_samples(), 12001U);
}

TEST(Config, AlternativeObservationOperator) {
  std::istringstream in("[source]\nkind = assimilated\n[enkf]\noperator = 1, 0, 1\n");
  const auto c = ExperimentConfig::parse(in);
  const auto h = c.observation_model(0.3).h;
  ASSERT_EQ(h.rows(), 1);
  EXPECT_EQ(h(0, 0), 1.0);
  EXPECT_EQ(h(0, 1), 0.0);
  EXPECT_EQ(h(0, 2), 1.0);

  std::istringstream two("[source]\nkind = assimilated\n[enkf]\noperator = 1, 0, 0; 0, 0, 1\n");
  const auto h2 = ExperimentConfig::parse(two).observation_model(0.3).h;
  ASSERT_EQ(h2.rows(), 2);
  EXPECT_EQ(h2(1, 2), 1.0);
}

TEST(Config, ValidationListsEveryProblem) {
  auto c = small_l63(SourceKind::kPerturbed);
  c.solver_step = -1.0;
  c.vectors = 0;
  c.sigma_grid.clear();
  c.k_grid = {4};
  const auto problems = c.problems();
  EXPECT_GE(problems.size(), 4U);
  try {
    c.validate();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    for (const auto& p : problems) EXPECT_NE(std::string(e.what()).find(p), std::string::npos) << p;
  }
}

TEST(Config, SyntaxAndValueErrors) {
  std::istringstream bad("[model\nkind = l63\n");
  expect_error(ErrorCode::kConfig, [&] { ExperimentConfig::parse(bad); });
  std::istringstream kind("[model]\nkind = l84\n");
  expect_error(ErrorCode::kConfig, [&] { ExperimentConfig::parse(kind); });
  std::istringstream num("[trajectory]\nspinup = lots\n");
  expect_error(ErrorCode::kConfig, [&] { ExperimentConfig::parse(num); });
  expect_error(ErrorCode::kIo, [] { ExperimentConfig::load("/nonexistent/config.ini"); });
}

TEST(Config, ShippedConfigsAreValid) {
  int count = 0;
  for (const auto& entry : fs::directory_iterator(LYAPVEC_CONFIG_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    ++count;
    const auto c = ExperimentConfig::load(entry.path());
    EXPECT_TRUE(c.problems().empty()) << entry.path();
    EXPECT_EQ(c.id, entry.path().stem().string());
  }
  EXPECT_GE(count, 6);
}

TEST(Streams, NamedAndIndependent) {
  EXPECT_NE(stream_seed(0, "initial_condition"), stream_seed(0, "backward_seed"));
  EXPECT_NE(stream_seed(0, "x", 0), stream_seed(0, "x", 1));
  EXPECT_NE(stream_seed(0, "x"), stream_seed(1, "x"));
  EXPECT_EQ(stream_seed(9, harness::streams::perturb(0.3)), stream_seed(9, "perturb/sigma=0.3"));
  EXPECT_EQ(harness::streams::observations(1.0), "observations/mu=1");
  EXPECT_EQ(fnv1a(""), 14695981039346656037ULL);
}

// -----------------------------------------------------------------------------

TEST(Tables, HeadersAreFixed) {
  EXPECT_EQ(harness::make_angle_table().to_csv(),
            "experiment_id,source,param_value,vector_kind,vector_index,median_deg,p25_deg,p75_deg,n_samples\n");
  EXPECT_EQ(harness::make_principal_angle_table().to_csv(),
            "experiment_id,source,param_value,subspace_dim,pa_index,median_deg,p25_deg,p75_deg\n");
  EXPECT_EQ(harness::make_exponent_table().to_csv(),
            "experiment_id,source,param_value,exp_index,lambda,abs_error_vs_truth\n");
  EXPECT_EQ(harness::make_rmse_table().to_csv(), "experiment_id,source,param_value,rmse_sampling,rmse_window\n");
  EXPECT_EQ(harness::make_filter_table().to_csv(),
            "experiment_id,param_value,analysis_rmse,mean_spread,free_run_rmse,climatological_spread,diverged\n");
}

TEST(Tables, RejectNanAndBadWidth) {
  auto t = harness::make_rmse_table();
  expect_error(ErrorCode::kNonFinite, [&] { t.add_row({"a", "b", "0", "nan", "1"}); });
  expect_error(ErrorCode::kInvalidArgument, [&] { t.add_row({"a", "b"}); });
  t.add_row({"a", "b", "0", "1", "2"});
  EXPECT_EQ(t.rows().size(), 1U);
}

TEST(Tables, FormatDouble) {
  EXPECT_EQ(io::format_double(0.3), "0.3");
  EXPECT_EQ(io::format_double(-0.0), "0");
  EXPECT_EQ(io::format_double(1.0), "1");
  const double x = 0.1 + 0.2;
  EXPECT_EQ(std::stod(io::format_double(x)), x);
}

// -----------------------------------------------------------------------------

TEST(Binary, TrajectoryRoundTripProperty) {
  const auto dir = scratch("binary");
  Rng rng(1);
  for (int trial = 0; trial < 25; ++trial) {
    const bool l63 = trial % 2 == 0;
    const int d = l63 ? 3 : 4 + trial;
    const auto model = l63 ? models::ModelSpec::lorenz63(10.0 + trial, 28.0, 8.0 / 3.0)
                           : models::ModelSpec::lorenz96(d, 8.0 - 0.1 * trial);
    const auto count = 1 + trial * 7;
    const Matrix states = 1e3 * standard_normal(d, count, rng);
    const models::Trajectory t(model, -1.5 + trial, 0.001, 0.004, states, trial % 3 != 0);
    io::write_trajectory(dir / "t.traj", t);
    const auto back = io::read_trajectory(dir / "t.traj");
    EXPECT_EQ(back.model(), t.model());
    EXPECT_EQ(back.states(), t.states());
    EXPECT_EQ(back.t0(), t.t0());
    EXPECT_EQ(back.solver_step(), t.solver_step());
    EXPECT_EQ(back.save_interval(), t.save_interval());
    EXPECT_EQ(back.dynamical(), t.dynamical());
    EXPECT_EQ(io::encode_trajectory(back), io::encode_trajectory(t));
  }
}

TEST(Binary, HeaderLayout) {
  const models::Trajectory t(models::ModelSpec::lorenz63(), 0.0, 0.002, 0.01, Matrix::Identity(3, 2));
  const auto bytes = io::encode_trajectory(t);
  ASSERT_GE(bytes.size(), 16U);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 8), std::string("LYAPVEC\0", 8));
  EXPECT_EQ(bytes[8], 1);  // version, little-endian
  EXPECT_EQ(bytes[9] | bytes[10] | bytes[11], 0);
  EXPECT_EQ(bytes[12], 1);  // trajectory payload
  // states are row-major: the first sample's three components come first
  const auto n = bytes.size();
  double last;
  std::memcpy(&last, bytes.data() + n - 8, 8);
  EXPECT_EQ(last, 0.0);
  double first;
  std::memcpy(&first, bytes.data() + n - 48, 8);
  EXPECT_EQ(first, 1.0);
}

TEST(Binary, LyapunovSetAndObservationsRoundTrip) {
  const auto dir = scratch("binary_sets");
  auto cfg = small_l63(SourceKind::kTruth);
  const auto truth = harness::make_truth(cfg);
  const auto set = harness::lyapunov_of(cfg, truth);
  io::write_lyapunov_set(dir / "s.lyap", set);
  const auto back = io::read_lyapunov_set(dir / "s.lyap");
  EXPECT_EQ(io::encode_lyapunov_set(back), io::encode_lyapunov_set(set));
  EXPECT_EQ(back.exponents, set.exponents);
  EXPECT_EQ(back.first_sample, set.first_sample);
  EXPECT_EQ(back.t_first, set.t_first);

  const auto obs = harness::observe(cfg, truth, 0.3);
  io::write_observations(dir / "o.obs", obs);
  const auto ob = io::read_observations(dir / "o.obs");
  EXPECT_EQ(ob.values, obs.values);
  EXPECT_EQ(ob.model.h, obs.model.h);
  EXPECT_EQ(ob.seed, obs.seed);
  EXPECT_EQ(ob.model.noise_std, 0.3);
}

TEST(Binary, CorruptInputs) {
  const auto dir = scratch("binary_bad");
  io::write_text(dir / "junk", "not a container at all");
  expect_error(ErrorCode::kIo, [&] { io::read_trajectory(dir / "junk"); });
  const models::Trajectory t(models::ModelSpec::lorenz63(), 0.0, 0.002, 0.01, Matrix::Ones(3, 4));
  io::write_trajectory(dir / "t.traj", t);
  expect_error(ErrorCode::kIo, [&] { io::read_lyapunov_set(dir / "t.traj"); });
  auto bytes = io::encode_trajectory(t);
  bytes.resize(bytes.size() - 3);
  io::write_text(dir / "short", std::string(bytes.begin(), bytes.end()));
  expect_error(ErrorCode::kIo, [&] { io::read_trajectory(dir / "short"); });
  expect_error(ErrorCode::kIo, [&] { io::read_trajectory(dir / "missing"); });
}

// -----------------------------------------------------------------------------

TEST(Experiment, ZeroSigmaGivesZeroAngles) {
  auto cfg = small_l63(SourceKind::kPerturbed);
  cfg.sigma_grid = {0.0};
  const auto result = harness::run_experiment(cfg, "");
  bool seen = false;
  for (const auto& t : result.tables) {
    if (t.name() == "angles") {
      for (const auto& row : t.rows()) {
        EXPECT_NEAR(std::stod(row[5]), 0.0, 1e-5) << row[3] << row[4];
        seen = true;
      }
    }
    if (t.name() == "exponents") {
      for (const auto& row : t.rows()) EXPECT_EQ(std::stod(row[5]), 0.0);
    }
  }
  EXPECT_TRUE(seen);
}

TEST(Experiment, ByteIdenticalReruns) {
  auto cfg = small_l63(SourceKind::kAssimilated);
  cfg.clv_geometry = true;
  cfg.write_intermediates = true;
  const auto a = scratch("rerun_a");
  const auto b = scratch("rerun_b");
  harness::run_experiment(cfg, a);
  cfg.threads = 3;
  cfg.mu_grid = {0.3};
  harness::run_experiment(cfg, b);
  int compared = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const auto name = entry.path().filename();
    if (name == "config.ini") continue;  // records the thread count
    EXPECT_EQ(io::read_text(entry.path()), io::read_text(b / name)) << name;
    ++compared;
  }
  EXPECT_GE(compared, 10);
}

TEST(Experiment, OutputsAndProvenance) {
  auto cfg = small_l63(SourceKind::kAssimilated);
  cfg.k_grid = {1, 2};
  const auto dir = scratch("outputs");
  const auto result = harness::run_experiment(cfg, dir);
  for (const char* name : {"angles", "principal_angles", "exponents", "rmse", "filter"}) {
    ASSERT_TRUE(fs::exists(dir / (std::string(name) + ".csv"))) << name;
    const auto meta = nlohmann::json::parse(io::read_text(dir / (std::string(name) + ".json")));
    EXPECT_EQ(meta["master_seed"], 5);
    EXPECT_EQ(meta["config_hash"].get<std::string>().size(), 16U);
    EXPECT_EQ(meta["rows"], lines(dir / (std::string(name) + ".csv")).size() - 1);
  }
  const auto manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  EXPECT_EQ(manifest["status"], "complete");

  // three BLV and three CLV rows per noise level
  EXPECT_EQ(rows_with(dir / "angles.csv", ",BLV,").size(), 3U);
  EXPECT_EQ(rows_with(dir / "angles.csv", ",CLV,").size(), 3U);
  EXPECT_EQ(rows_with(dir / "angles.csv", ",BLV,1,").front().substr(0, 26), "small,assimilated,0.3,BLV,");
  EXPECT_EQ(lines(dir / "filter.csv").size(), 2U);
  EXPECT_EQ(result.truth_exponents.size(), 3);
}

TEST(Experiment, FailureLeavesIncompleteManifest) {
  auto cfg = small_l63(SourceKind::kTruth);
  cfg.params = {1e9, 28.0, 8.0 / 3.0};
  const auto dir = scratch("blowup");
  expect_error(ErrorCode::kBlowUp, [&] { harness::run_experiment(cfg, dir); });
  EXPECT_EQ(nlohmann::json::parse(io::read_text(dir / "manifest.json"))["status"], "incomplete");
}

TEST(Experiment, InvalidConfigStopsBeforeAnyOutput) {
  auto cfg = small_l63(SourceKind::kPerturbed);
  cfg.sigma_grid.clear();
  const auto dir = scratch("invalid") / "out";
  expect_error(ErrorCode::kConfig, [&] { harness::run_experiment(cfg, dir); });
  EXPECT_FALSE(fs::exists(dir));
}

TEST(ParallelFor, CoversEveryIndexOnceAndRethrows) {
  std::vector<int> hits(50, 0);
  harness::parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) EXPECT_EQ(h, 1);
  EXPECT_THROW(harness::parallel_for(10, 3, [](std::size_t i) {
                 if (i == 7) throw Error(ErrorCode::kBlowUp, "x");
               }),
               Error);
}

TEST(Validate, InvariantSuitePasses) {
  const auto checks = harness::run_invariant_suite(0);
  EXPECT_EQ(checks.size(), 6U);
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.name << " " << c.value;
}

// -----------------------------------------------------------------------------

TEST(Cli, ValidateExitsZero) {
  const auto dir = scratch("cli_validate");
  EXPECT_EQ(cli("validate", dir).status, 0);
  const auto out = nlohmann::json::parse(io::read_text(dir / "stdout.txt"));
  EXPECT_TRUE(out["passed"].get<bool>());
}

TEST(Cli, LyapunovOnTwoSampleTrajectoryFails) {
  const auto dir = scratch("cli_short");
  const auto t = models::integrate_trajectory(models::ModelSpec::lorenz63(), Vector::Ones(3), 0.0, 0.01, 0.002, 0.01);
  ASSERT_EQ(t.size(), 2U);
  io::write_trajectory(dir / "two.traj", t);
  const auto run = cli("lyapunov --input " + (dir / "two.traj").string() + " --out " + dir.string(), dir);
  EXPECT_NE(run.status, 0);
  const auto err = nlohmann::json::parse(run.err);
  EXPECT_EQ(err["error"], "invalid_argument");
  EXPECT_NE(err["message"].get<std::string>().find("too short"), std::string::npos);
}

TEST(Cli, UsageAndIoErrorsAreJson) {
  const auto dir = scratch("cli_usage");
  auto run = cli("frobnicate", dir);
  EXPECT_EQ(run.status, 2);
  EXPECT_EQ(nlohmann::json::parse(run.err)["error"], "usage");
  io::write_text(dir / "bad.traj", "garbage");
  run = cli("lyapunov --input " + (dir / "bad.traj").string(), dir);
  EXPECT_EQ(run.status, 1);
  EXPECT_EQ(nlohmann::json::parse(run.err)["error"], "io");
}

// `experiment` and the chained subcommands share stages and stream names, so the tables agree.
TEST(Cli, ExperimentEqualsChainedSubcommandsPerturbed) {
  const auto dir = scratch("chain_perturbed");
  auto cfg = small_l63(SourceKind::kPerturbed);
  io::write_text(dir / "c.ini", cfg.canonical());
  const std::string base = "--config " + (dir / "c.ini").string() + " --out ";
  const std::string d = (dir / "chain").string();
  ASSERT_EQ(cli(base + (dir / "exp").string() + " experiment", dir).status, 0);
  ASSERT_EQ(cli(base + d + " trajectory", dir).status, 0);
  ASSERT_EQ(cli(base + d + " lyapunov -i " + d + "/truth.traj", dir).status, 0);
  ASSERT_EQ(cli(base + d + " perturb -i " + d + "/truth.traj --sigma 0.2", dir).status, 0);
  ASSERT_EQ(cli(base + d + " lyapunov -i " + d + "/perturbed_sigma_0.2.traj", dir).status, 0);
  ASSERT_EQ(cli(base + d + " angles --reference " + d + "/truth.lyap --candidate " + d +
                    "/perturbed_sigma_0.2.lyap --source perturbed --param 0.2",
                dir)
                .status,
            0);
  for (const char* table : {"angles.csv", "principal_angles.csv", "exponents.csv"}) {
    const auto expected = rows_with(dir / "exp" / table, ",perturbed,0.2,");
    ASSERT_FALSE(expected.empty()) << table;
    EXPECT_EQ(rows_with(dir / "chain" / table, ",perturbed,0.2,"), expected) << table;
  }
}

TEST(Cli, ExperimentEqualsChainedSubcommandsAssimilated) {
  const auto dir = scratch("chain_assimilated");
  auto cfg = small_l63(SourceKind::kAssimilated);
  io::write_text(dir / "c.ini", cfg.canonical());
  const std::string base = "--config " + (dir / "c.ini").string() + " --out ";
  const std::string d = (dir / "chain").string();
  ASSERT_EQ(cli(base + (dir / "exp").string() + " experiment", dir).status, 0);
  ASSERT_EQ(cli(base + d + " trajectory", dir).status, 0);
  ASSERT_EQ(cli(base + d + " lyapunov -i " + d + "/truth.traj --skip " + std::to_string(cfg.window_offset()), dir).status, 0);
  ASSERT_EQ(cli(base + d + " observe -i " + d + "/truth.traj --mu 0.3", dir).status, 0);
  ASSERT_EQ(cli(base + d + " assimilate --truth " + d + "/truth.traj --obs " + d + "/obs_mu_0.3.obs", dir).status, 0);
  ASSERT_EQ(cli(base + d + " lyapunov -i " + d + "/analysis_mu_0.3.traj", dir).status, 0);
  ASSERT_EQ(cli(base + d + " angles --reference " + d + "/truth.lyap --candidate " + d +
                    "/analysis_mu_0.3.lyap --source assimilated --param 0.3",
                dir)
                .status,
            0);
  for (const char* table : {"angles.csv", "principal_angles.csv", "exponents.csv"}) {
    const auto expected = rows_with(dir / "exp" / table, ",assimilated,0.3,");
    ASSERT_FALSE(expected.empty()) << table;
    EXPECT_EQ(rows_with(dir / "chain" / table, ",assimilated,0.3,"), expected) << table;
  }
  EXPECT_EQ(lines(dir / "chain" / "filter.csv"), lines(dir / "exp" / "filter.csv"));
}
