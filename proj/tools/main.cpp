#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <exception>
#include <functional>
#include <iostream>

#include "commands.hpp"
#include "lyapvec/error.hpp"
#include "lyapvec/experiment.hpp"

namespace {

int fail(const std::string& code, const std::string& message, int status) {
  std::cerr << nlohmann::json{{"error", code}, {"message", message}}.dump() << "\n";
  return status;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace lyapvec::cli;

  CLI::App app{"Backward and covariant Lyapunov vectors from exact, perturbed and assimilated trajectories",
               "lyapvec"};
  app.set_version_flag("--version", std::string(lyapvec::harness::kCodeVersion));
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  auto* opts = app.add_option_group("global");
  opts->add_option("--config", g.config, "Experiment config (INI)")->check(CLI::ExistingFile);
  opts->add_option("--seed", g.seed, "Master seed");
  opts->add_option("--out", g.out, "Output directory");
  opts->add_option("--threads", g.threads, "Worker threads (0: available parallelism)")->check(CLI::NonNegativeNumber);

  std::function<int()> action;

  TrajectoryArgs traj;
  auto* c_traj = app.add_subcommand("trajectory", "Spin up and integrate the truth trajectory");
  c_traj->add_option("-o,--output", traj.output, "Output file (default <out>/truth.traj)");
  c_traj->callback([&] { action = [&] { return run_trajectory(g, traj); }; });

  LyapunovArgs lyap;
  auto* c_lyap = app.add_subcommand("lyapunov", "Ginelli algorithm on a trajectory file");
  c_lyap->add_option("-i,--input", lyap.input, "Trajectory file")->required()->check(CLI::ExistingFile);
  c_lyap->add_option("--skip", lyap.skip, "Leading samples to skip");
  c_lyap->add_option("-o,--output", lyap.output, "Output file (default <out>/<input stem>.lyap)");
  c_lyap->callback([&] { action = [&] { return run_lyapunov(g, lyap); }; });

  ObserveArgs obs;
  auto* c_obs = app.add_subcommand("observe", "Synthetic noisy observations of a truth trajectory");
  c_obs->add_option("-i,--input", obs.input, "Truth trajectory file")->required()->check(CLI::ExistingFile);
  c_obs->add_option("--mu", obs.mu, "Observation noise standard deviation")->required();
  c_obs->add_option("-o,--output", obs.output, "Output file");
  c_obs->callback([&] { action = [&] { return run_observe(g, obs); }; });

  AssimilateArgs da;
  auto* c_da = app.add_subcommand("assimilate", "EnKF twin experiment; writes the analysis-mean trajectory");
  c_da->add_option("--truth", da.truth, "Truth trajectory file")->required()->check(CLI::ExistingFile);
  c_da->add_option("--obs", da.obs, "Observation file")->required()->check(CLI::ExistingFile);
  c_da->add_option("-o,--output", da.output, "Output file");
  c_da->callback([&] { action = [&] { return run_assimilate(g, da); }; });

  PerturbArgs pert;
  auto* c_pert = app.add_subcommand("perturb", "Add independent Gaussian noise to every sample");
  c_pert->add_option("-i,--input", pert.input, "Trajectory file")->required()->check(CLI::ExistingFile);
  c_pert->add_option("--sigma", pert.sigma, "Noise standard deviation")->required();
  c_pert->add_option("-o,--output", pert.output, "Output file");
  c_pert->callback([&] { action = [&] { return run_perturb(g, pert); }; });

  AnglesArgs ang;
  auto* c_ang = app.add_subcommand("angles", "Vector and principal angles between two Lyapunov sets");
  c_ang->add_option("--reference", ang.reference, "Reference set")->required()->check(CLI::ExistingFile);
  c_ang->add_option("--candidate", ang.candidate, "Candidate set")->required()->check(CLI::ExistingFile);
  c_ang->add_option("--source", ang.source, "Source label for the rows");
  c_ang->add_option("--param", ang.param, "Parameter value for the rows");
  c_ang->callback([&] { action = [&] { return run_angles(g, ang); }; });

  app.add_subcommand("experiment", "Full config-driven pipeline")->callback([&] {
    action = [&] { return run_experiment(g); };
  });
  app.add_subcommand("validate", "Invariant suite")->callback([&] { action = [&] { return run_validate(g); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("usage", e.what(), 2);
  }

  try {
    return action();
  } catch (const lyapvec::Error& e) {
    return fail(std::string(lyapvec::to_string(e.code())), e.what(), 1);
  } catch (const std::exception& e) {
    return fail("internal", e.what(), 1);
  }
}
