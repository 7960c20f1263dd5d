#include "lyapvec/validate.hpp"

#include <algorithm>
#include <cmath>

#include "lyapvec/config.hpp"
#include "lyapvec/experiment.hpp"
#include "lyapvec/ginelli.hpp"
#include "lyapvec/io.hpp"
#include "lyapvec/metrics.hpp"
#include "lyapvec/random.hpp"
#include "lyapvec/tangent.hpp"

namespace lyapvec::harness {

namespace {

struct Case {
  models::Trajectory trajectory;
  ginelli::GinelliSchedule schedule;
};

Case short_case(const models::ModelSpec& model, double dt, double save, int l, double length, std::uint64_t seed) {
  Rng rng = make_rng(seed, "validate/initial");
  const Vector x0 = standard_normal(model.dimension(), 1, rng);
  auto schedule = ginelli::GinelliSchedule::from_lengths(length, length, length, l, save);
  auto traj = models::integrate_trajectory(model, x0, 50.0, 3.0 * length, dt, save);
  return {std::move(traj), schedule};
}

}  // namespace

std::vector<CheckResult> run_invariant_suite(std::uint64_t seed) {
  std::vector<CheckResult> out;
  const std::vector<Case> cases = {
      short_case(models::ModelSpec::lorenz63(), 0.002, 0.01, 1, 5.0, seed),
      short_case(models::ModelSpec::lorenz96(10), 0.01, 0.05, 5, 10.0, seed),
  };

  double ortho = 0.0;
  double recon = 0.0;
  double below_diag = 0.0;
  for (const auto& c : cases) {
    const int d = c.trajectory.model().dimension();
    const auto fwd = ginelli::forward_sweep(c.trajectory, ginelli::standard_frame(d, d), c.schedule);
    for (const auto& b : fwd.history.blvs) ortho = std::max(ortho, orthonormality_defect(b));
    const auto l = static_cast<std::size_t>(c.schedule.qr_interval);
    const std::size_t first = static_cast<std::size_t>(c.schedule.n_forward) * l;
    for (std::size_t k = 0; k + 1 < fwd.history.blvs.size(); ++k) {
      const Matrix lhs = tangent::propagate_along(c.trajectory, first + k * l, l, fwd.history.blvs[k]);
      const Matrix rhs = fwd.history.blvs[k + 1] * fwd.history.growth[k];
      recon = std::max(recon, (lhs - rhs).norm() / lhs.norm());
    }
    Rng rng = make_rng(seed, "validate/backward");
    const auto coeffs = ginelli::backward_sweep(fwd.history, ginelli::generic_upper_triangular(d, rng));
    for (const auto& u : coeffs) {
      for (Eigen::Index j = 0; j < u.cols(); ++j) {
        for (Eigen::Index i = j + 1; i < u.rows(); ++i) below_diag = std::max(below_diag, std::abs(u(i, j)));
      }
    }
  }
  out.push_back({"blv_orthonormality", ortho < 1e-10, ortho, 1e-10});
  out.push_back({"qr_reconstruction", recon < 1e-8, recon, 1e-8});
  out.push_back({"coefficient_triangularity", below_diag == 0.0, below_diag, 0.0});

  // Principal angles are unchanged by rotating either basis.
  double pa_drift = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix p = metrics::random_orthonormal_subspace(8, 3, stream_seed(seed, "validate/pa_p", trial));
    const Matrix q = metrics::random_orthonormal_subspace(8, 3, stream_seed(seed, "validate/pa_q", trial));
    const Matrix rot_p = metrics::random_orthonormal_subspace(3, 3, stream_seed(seed, "validate/rot_p", trial));
    const Matrix rot_q = metrics::random_orthonormal_subspace(3, 3, stream_seed(seed, "validate/rot_q", trial));
    const auto a = metrics::principal_angles(p, q);
    const auto b = metrics::principal_angles(p * rot_p, q * rot_q);
    for (std::size_t i = 0; i < a.size(); ++i) pa_drift = std::max(pa_drift, std::abs(a[i] - b[i]));
  }
  out.push_back({"principal_angle_basis_invariance", pa_drift < 1e-8, pa_drift, 1e-8});

  // Jacobian against central differences at attractor points.
  double fd = 0.0;
  const double h = 1e-5;
  for (const auto& c : cases) {
    const auto& model = c.trajectory.model();
    for (std::size_t j = 0; j < c.trajectory.size(); j += c.trajectory.size() / 20) {
      const Vector x = c.trajectory.state(j);
      const Matrix jac = models::jacobian(model, x);
      for (int k = 0; k < model.dimension(); ++k) {
        Vector e = Vector::Zero(model.dimension());
        e(k) = h;
        const Vector diff = (models::vector_field(model, x + e) - models::vector_field(model, x - e)) / (2.0 * h);
        fd = std::max(fd, (diff - jac.col(k)).norm() / std::max(1.0, jac.col(k).norm()));
      }
    }
  }
  out.push_back({"jacobian_finite_difference", fd < 1e-6, fd, 1e-6});

  // The same seed twice gives identical bytes.
  auto cfg = ExperimentConfig::defaults(models::ModelKind::kLorenz63, 3);
  cfg.master_seed = seed;
  cfg.spinup = 10.0;
  cfg.forward_transient = cfg.sampling = cfg.backward_transient = 2.0;
  const auto traj_a = make_truth(cfg);
  const auto traj_b = make_truth(cfg);
  const auto pert_a = perturbed_source(cfg, traj_a, 0.3);
  const auto pert_b = perturbed_source(cfg, traj_b, 0.3);
  const bool same = io::encode_trajectory(traj_a) == io::encode_trajectory(traj_b) &&
                    io::encode_lyapunov_set(lyapunov_of(cfg, pert_a)) == io::encode_lyapunov_set(lyapunov_of(cfg, pert_b));
  out.push_back({"determinism", same, same ? 0.0 : 1.0, 0.0});
  return out;
}

}  // namespace lyapvec::harness
