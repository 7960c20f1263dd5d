#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace lyapvec::cli {

struct GlobalOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

struct TrajectoryArgs {
  std::string output;
};

struct LyapunovArgs {
  std::string input;
  std::size_t skip = 0;
  std::string output;
};

struct ObserveArgs {
  std::string input;
  double mu = 0.0;
  std::string output;
};

struct AssimilateArgs {
  std::string truth;
  std::string obs;
  std::string output;
};

struct PerturbArgs {
  std::string input;
  double sigma = 0.0;
  std::string output;
};

struct AnglesArgs {
  std::string reference;
  std::string candidate;
  std::string source = "candidate";
  double param = 0.0;
};

// Each returns the process exit code; library errors propagate as exceptions.
int run_trajectory(const GlobalOptions& g, const TrajectoryArgs& a);
int run_lyapunov(const GlobalOptions& g, const LyapunovArgs& a);
int run_observe(const GlobalOptions& g, const ObserveArgs& a);
int run_assimilate(const GlobalOptions& g, const AssimilateArgs& a);
int run_perturb(const GlobalOptions& g, const PerturbArgs& a);
int run_angles(const GlobalOptions& g, const AnglesArgs& a);
int run_experiment(const GlobalOptions& g);
int run_validate(const GlobalOptions& g);

}  // namespace lyapvec::cli
