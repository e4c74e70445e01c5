#pragma once

#include "hires/core.hpp"
#include "hires/resolution.hpp"

namespace hires {

struct IntegratorConfig {
  int substeps_per_grid = 64;
  double grid_step = 0.0;
  double t_end = 0.0;

  int grid_points() const;  // N with t_end = N * grid_step
};

// Classical RK4 with fixed substeps; states at t_k = k * grid_step.
Trajectory integrate(const VectorField& field, const Vec& X0, const IntegratorConfig& cfg);

// Max over grid points of |X_h - X_{h/2}| / max(1, |X_{h/2}|) between cfg and 2x substeps.
double richardson_check(const VectorField& field, const Vec& X0, const IntegratorConfig& cfg);

struct CertifiedTrajectory {
  Trajectory trajectory;
  int substeps = 0;
  double richardson = 0.0;
  bool certified = false;
};

// Doubles substeps from cfg.substeps_per_grid up to max_substeps until the Richardson
// estimate reaches target. Returns the finer of the last compared pair.
CertifiedTrajectory integrate_certified(const VectorField& field, const Vec& X0,
                                        const IntegratorConfig& cfg, double target = 1e-12,
                                        int max_substeps = 1024);

}  // namespace hires
