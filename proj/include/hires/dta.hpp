#pragma once

#include "hires/core.hpp"

#include <optional>
#include <utility>

namespace hires {

enum class Method { GD, HB, NAG_GENERAL, NAG_SC, NAG_C, MD_DUAL, AMD, GDA, PPM, EGM, PDHG, CP };
enum class MinimaxScheme { GDA, PPM, EGM, PDHG_CP };
enum class LiftVariant { HB_XV, NAG_XV, NAGC_XVT, AMD_XZT, PLAIN_Z };

const char* method_name(Method m);
LiftVariant lift_variant(Method m);
bool is_lifted(Method m);

// Problem oracles a method may need. Only the relevant members are read.
struct Problem {
  std::optional<ObjectiveOracle> F;
  std::optional<SaddleSystem> saddle;
  std::optional<ProxFunction> prox;

  const ObjectiveOracle& objective() const;
  const SaddleSystem& saddle_system() const;
  const ProxFunction& prox_function() const;
};

struct SolverOptions {
  double tol = 1e-12;
  int max_iter = 100;
  double damping = 1.0;
};

using BetaSchedule = std::function<double(int k, double tau)>;
using TauSchedule = std::function<double(double tau)>;

struct DtaConfig {
  Method method = Method::GD;
  double s = 0.0;
  BetaSchedule beta_schedule;
  TauSchedule delta;
  TauSchedule eta;
  double theta = 0.0;
  SolverOptions solver;

  double tau() const;
  double beta(int k, double tau) const;
};

DtaConfig gd_config(double s);
// beta = (1 - sqrt(mu) tau)^2
DtaConfig hb_polyak_config(double mu, double s);
// beta = (1 - sqrt(mu) tau) / (1 + sqrt(mu) tau)
DtaConfig hb_alternate_config(double mu, double s);
DtaConfig nag_sc_config(double mu, double s);
DtaConfig nag_c_config(double s);
DtaConfig nag_general_config(double s, BetaSchedule beta, TauSchedule delta, TauSchedule eta);
DtaConfig md_dual_config(double s);
DtaConfig amd_config(double s);
DtaConfig minimax_config(Method m, double s, double theta = 0.0);

struct LiftedState {
  LiftVariant variant = LiftVariant::PLAIN_Z;
  Vec x;
  Vec aux;  // v for momentum variants, z for AMD, empty for PLAIN_Z
  double t = 0.0;

  Vec pack() const;
  static LiftedState unpack(LiftVariant variant, const Vec& X, int n);
  static LiftedState plain(const Vec& z);
};

int lifted_dim(LiftVariant variant, int n);

// Direct steppers.
Vec step_gd(const Vec& x, const ObjectiveOracle& F, double s);
Vec step_hb(const Vec& x_k, const Vec& x_prev, const ObjectiveOracle& F, double beta, double s);
Vec step_nag_general(const Vec& x_k, const Vec& x_prev, const ObjectiveOracle& F, double beta,
                     double delta, double eta, double s);
// x_{k+1} = y - s grad F(y), y = x_k + beta (x_k - x_prev)
Vec step_nag(const Vec& x_k, const Vec& x_prev, const ObjectiveOracle& F, double beta, double s);
Vec step_md_dual(const Vec& z, const ObjectiveOracle& F, const ProxFunction& prox, double s);
std::pair<Vec, Vec> step_amd(const Vec& x, const Vec& z, int k, const ObjectiveOracle& F,
                             const ProxFunction& prox, double s);
Vec step_minimax(const Vec& z, const SaddleSystem& sys, double s, MinimaxScheme scheme,
                 const SolverOptions& opts = {});

// Solves w + s grad F(w) = rhs.
Vec prox_step(const ObjectiveOracle& F, const Vec& rhs, double s, const SolverOptions& opts = {});

// Lifting from a two-term recursion.
LiftedState lift_hb(const Vec& x_k, const Vec& x_prev, double s);
LiftedState lift_nag(const Vec& x_k, const Vec& x_prev, const ObjectiveOracle& F, double beta,
                     double eta, double s);
// x_k, x_prev are points of the lifted sequence; v is set to 0 at k = 0.
LiftedState lift_nagc(const Vec& x_k, const Vec& x_prev, int k, const ObjectiveOracle& F, double s);
LiftedState lift_amd(const Vec& x, const Vec& z, int k, double s);

// Phi(X, tau) on packed states. tau = 0 returns X exactly.
Vec lifted_map(LiftVariant variant, const Vec& X, double tau, const DtaConfig& cfg,
               const Problem& problem);
LiftedState step_lifted(const LiftedState& X, const DtaConfig& cfg, const Problem& problem);

// Runs n_steps of the method from init; states are packed.
Trajectory run_dta(const DtaConfig& cfg, const Problem& problem, const LiftedState& init,
                   int n_steps);

// x-iterates of the direct two-term recursion (HB, NAG_GENERAL, NAG_SC, NAG_C) on the sqrt(s) grid.
Trajectory run_two_term(const DtaConfig& cfg, const Problem& problem, const Vec& x0,
                        const Vec& x_prev, int n_steps);

}  // namespace hires
