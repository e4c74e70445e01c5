#pragma once

#include "hires/core.hpp"
#include "hires/resolution.hpp"

#include <limits>
#include <optional>
#include <utility>
#include <vector>

namespace hires {

struct CpdhgParams {
  double s = 0.0;
  double eta1 = 1.5;
  double eta2 = 1.0 / 12.0;
  double theta = 1.0;
  double L = 0.0;  // max(L_f, L_g); 0 for bilinear problems

  double C1() const { return (4.0 - eta1 - 2.0 * theta * eta2) / 4.0; }
  double C2() const { return s * (2.0 - s * L) * (eta1 - 2.0 * eta2) / 4.0; }
  // 2 eta2 < eta1 < 4 - 2 theta eta2, theta >= -1, C1 > 0, C2 > 0
  void validate_window() const;
  // Right-hand side of the discrete step-size condition; +inf when L = 0.
  double max_step(double normQ) const;
};

// Throws ParameterError unless the window holds and, when L > 0, s <= max_step(|A|).
void validate_cpdhg(const SaddleSystem& sys, const CpdhgParams& p);

// Correction matrix eta1 Q + 2 eta2 Q I_theta, with theta from p.
Mat cpdhg_correction_matrix(const SaddleSystem& sys, const CpdhgParams& p);

VectorField cpdhg_field(const SaddleSystem& sys, const CpdhgParams& p);
Vec step_cpdhg(const Vec& z, const SaddleSystem& sys, const CpdhgParams& p);
Trajectory run_cpdhg(const Vec& z0, const SaddleSystem& sys, const CpdhgParams& p, int n_steps);

struct ChbParams {
  double s = 0.0;
  double eta = 0.0;
  double mu = 0.0;
  double L = 0.0;

  double q() const;  // eta sqrt(mu s)
  double b() const;
  double rho() const;
  // 3 eta sqrt(mu s) < 1, L >= mu > 0, eta > 0, s > 0
  void validate() const;
  // 9 L eta^2 s + 4 (1 + 5q/2)(1 - 3q) <= 12 eta, up to relative rounding
  bool step_condition_holds() const;
};

ChbParams optimal_chb_params(double mu, double L);

// (x, w) form
VectorField chb_field(const ObjectiveOracle& F, const ChbParams& p);
// (x, v) form with v = sqrt(mu) (w - x)
VectorField chb_field_xv(const ObjectiveOracle& F, const ChbParams& p);
std::pair<Vec, Vec> step_chb(const Vec& x, const Vec& w, const ObjectiveOracle& F, const ChbParams& p);
// States are packed (x, w).
Trajectory run_chb(const Vec& x0, const Vec& w0, const ObjectiveOracle& F, const ChbParams& p, int n_steps);

struct ContractionVerdict {
  bool pass = true;
  std::optional<std::size_t> first_violation;
  double worst_excess = -std::numeric_limits<double>::infinity();
};

// E_{k+1} <= E_k / (1 + rho) + slack
ContractionVerdict certify_contraction(const std::vector<double>& lyapunov, double rho,
                                       double slack = 1e-12);
// E_k <= E_0 * factor^k + slack
ContractionVerdict certify_envelope(const std::vector<double>& lyapunov, double factor,
                                    double slack = 1e-12);
// E(Z_{k+1}) - E(Z_k) <= -s [(C1/2) <M(Z_k), Z_k - Z*> + (C2/2) |Q (Z_k - Z*)|^2] + slack
ContractionVerdict certify_contraction_cpdhg(const Trajectory& traj, const SaddleSystem& sys,
                                             const CpdhgParams& p, const Vec& z_star,
                                             double slack = 1e-12);
// |Q (mean_{i<=k} Z_i - Z*)|^2 <= (2 E(Z_0) + s C2 |Q (Z_0 - Z*)|^2) / (s C2 (1 + k)) + slack
ContractionVerdict certify_ergodic_cpdhg(const Trajectory& traj, const SaddleSystem& sys,
                                         const CpdhgParams& p, const Vec& z_star,
                                         double slack = 1e-12);

// -<Z - Z*, G(Z)> - C1 <M(Z), Z - Z*> - C2 |Q (Z - Z*)|^2
double slp_margin_cpdhg(const Vec& z, const SaddleSystem& sys, const CpdhgParams& p, const Vec& z_star);
// -<grad E, G> - sqrt(mu)(1 - 3q) E - (3 eta sqrt(s) / 2) |grad F|^2
double slp_margin_chb(const Vec& x, const Vec& w, const ObjectiveOracle& F, const ChbParams& p,
                      const Vec& x_star);

}  // namespace hires
