#include "hires/integrate.hpp"

#include <cmath>

namespace hires {

int IntegratorConfig::grid_points() const {
  if (!(grid_step > 0.0)) throw InputError("integrator: grid_step must be positive");
  if (!(t_end >= 0.0)) throw InputError("integrator: t_end must be nonnegative");
  const double q = t_end / grid_step;
  const double N = std::round(q);
  if (std::abs(q - N) > 1e-9 * std::max(1.0, q))
    throw InputError("integrator: t_end must be an integer multiple of grid_step");
  return static_cast<int>(N);
}

namespace {

Trajectory rk4(const VectorField& field, const Vec& X0, double grid_step, int N, int substeps) {
  if (substeps < 1) throw InputError("integrator: substeps_per_grid must be >= 1");
  if (X0.size() != field.dim) throw InputError("integrator: initial state has wrong dimension");
  const double h = grid_step / substeps;
  Trajectory traj(grid_step);
  traj.states.reserve(N + 1);
  traj.times.reserve(N + 1);
  Vec X = X0;
  traj.push(X);
  for (int k = 0; k < N; ++k) {
    for (int j = 0; j < substeps; ++j) {
      const Vec k1 = field(X);
      const Vec k2 = field(X + 0.5 * h * k1);
      const Vec k3 = field(X + 0.5 * h * k2);
      const Vec k4 = field(X + h * k3);
      X += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if (!X.allFinite()) throw BlowUpError("integrator: state became non-finite", k * grid_step);
    traj.push(X);
  }
  return traj;
}

double discrepancy(const Trajectory& coarse, const Trajectory& fine) {
  double worst = 0.0;
  for (std::size_t k = 0; k < coarse.size(); ++k) {
    const double scale = std::max(1.0, fine.states[k].norm());
    worst = std::max(worst, (coarse.states[k] - fine.states[k]).norm() / scale);
  }
  return worst;
}

}  // namespace

Trajectory integrate(const VectorField& field, const Vec& X0, const IntegratorConfig& cfg) {
  return rk4(field, X0, cfg.grid_step, cfg.grid_points(), cfg.substeps_per_grid);
}

double richardson_check(const VectorField& field, const Vec& X0, const IntegratorConfig& cfg) {
  const int N = cfg.grid_points();
  const Trajectory a = rk4(field, X0, cfg.grid_step, N, cfg.substeps_per_grid);
  const Trajectory b = rk4(field, X0, cfg.grid_step, N, 2 * cfg.substeps_per_grid);
  return discrepancy(a, b);
}

CertifiedTrajectory integrate_certified(const VectorField& field, const Vec& X0,
                                        const IntegratorConfig& cfg, double target,
                                        int max_substeps) {
  const int N = cfg.grid_points();
  int sub = cfg.substeps_per_grid;
  Trajectory coarse = rk4(field, X0, cfg.grid_step, N, sub);
  for (;;) {
    Trajectory fine = rk4(field, X0, cfg.grid_step, N, 2 * sub);
    const double est = discrepancy(coarse, fine);
    if (est <= target || 2 * sub >= max_substeps) {
      return CertifiedTrajectory{std::move(fine), 2 * sub, est, est <= target};
    }
    sub *= 2;
    coarse = std::move(fine);
  }
}

}  // namespace hires
