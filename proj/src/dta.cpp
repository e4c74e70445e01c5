#include "hires/dta.hpp"

#include <cmath>

namespace hires {

const char* method_name(Method m) {
  switch (m) {
    case Method::GD: return "GD";
    case Method::HB: return "HB";
    case Method::NAG_GENERAL: return "NAG_GENERAL";
    case Method::NAG_SC: return "NAG_SC";
    case Method::NAG_C: return "NAG_C";
    case Method::MD_DUAL: return "MD_DUAL";
    case Method::AMD: return "AMD";
    case Method::GDA: return "GDA";
    case Method::PPM: return "PPM";
    case Method::EGM: return "EGM";
    case Method::PDHG: return "PDHG";
    case Method::CP: return "CP";
  }
  return "?";
}

LiftVariant lift_variant(Method m) {
  switch (m) {
    case Method::HB: return LiftVariant::HB_XV;
    case Method::NAG_GENERAL:
    case Method::NAG_SC: return LiftVariant::NAG_XV;
    case Method::NAG_C: return LiftVariant::NAGC_XVT;
    case Method::AMD: return LiftVariant::AMD_XZT;
    default: return LiftVariant::PLAIN_Z;
  }
}

bool is_lifted(Method m) { return lift_variant(m) != LiftVariant::PLAIN_Z; }

const ObjectiveOracle& Problem::objective() const {
  if (!F) throw InputError("problem has no objective oracle");
  return *F;
}
const SaddleSystem& Problem::saddle_system() const {
  if (!saddle) throw InputError("problem has no saddle system");
  return *saddle;
}
const ProxFunction& Problem::prox_function() const {
  if (!prox) throw InputError("problem has no prox-function");
  return *prox;
}

double DtaConfig::tau() const { return std::sqrt(s); }

double DtaConfig::beta(int k, double tau) const {
  if (!beta_schedule) throw ConfigError("momentum schedule missing");
  return beta_schedule(k, tau);
}

namespace {
void require_step(double s) {
  if (!(s > 0.0) || !std::isfinite(s)) throw InputError("step size must be positive and finite");
}
}  // namespace

DtaConfig gd_config(double s) { return DtaConfig{Method::GD, s, {}, {}, {}, 0.0, {}}; }

DtaConfig hb_polyak_config(double mu, double s) {
  const double r = std::sqrt(mu);
  DtaConfig c{Method::HB, s, {}, {}, {}, 0.0, {}};
  c.beta_schedule = [r](int, double tau) { return (1.0 - r * tau) * (1.0 - r * tau); };
  return c;
}

DtaConfig hb_alternate_config(double mu, double s) {
  const double r = std::sqrt(mu);
  DtaConfig c{Method::HB, s, {}, {}, {}, 0.0, {}};
  c.beta_schedule = [r](int, double tau) { return (1.0 - r * tau) / (1.0 + r * tau); };
  return c;
}

DtaConfig nag_sc_config(double mu, double s) {
  const double r = std::sqrt(mu);
  DtaConfig c{Method::NAG_SC, s, {}, {}, {}, 0.0, {}};
  c.beta_schedule = [r](int, double tau) { return (1.0 - r * tau) / (1.0 + r * tau); };
  auto hist = [r](double tau) { return tau * tau * (1.0 - r * tau) / (1.0 + r * tau); };
  c.delta = hist;
  c.eta = hist;
  return c;
}

DtaConfig nag_c_config(double s) {
  DtaConfig c{Method::NAG_C, s, {}, {}, {}, 0.0, {}};
  c.beta_schedule = [](int k, double) { return static_cast<double>(k) / (k + 3.0); };
  return c;
}

DtaConfig nag_general_config(double s, BetaSchedule beta, TauSchedule delta, TauSchedule eta) {
  return DtaConfig{Method::NAG_GENERAL, s, std::move(beta), std::move(delta), std::move(eta), 0.0, {}};
}

DtaConfig md_dual_config(double s) { return DtaConfig{Method::MD_DUAL, s, {}, {}, {}, 0.0, {}}; }
DtaConfig amd_config(double s) { return DtaConfig{Method::AMD, s, {}, {}, {}, 0.0, {}}; }

DtaConfig minimax_config(Method m, double s, double theta) {
  if (m == Method::PDHG) theta = 0.0;
  if (m == Method::CP) theta = 1.0;
  return DtaConfig{m, s, {}, {}, {}, theta, {}};
}

int lifted_dim(LiftVariant variant, int n) {
  switch (variant) {
    case LiftVariant::HB_XV:
    case LiftVariant::NAG_XV: return 2 * n;
    case LiftVariant::NAGC_XVT:
    case LiftVariant::AMD_XZT: return 2 * n + 1;
    case LiftVariant::PLAIN_Z: return n;
  }
  return n;
}

Vec LiftedState::pack() const {
  const int n = static_cast<int>(x.size());
  Vec X(lifted_dim(variant, n));
  X.head(n) = x;
  if (variant != LiftVariant::PLAIN_Z) X.segment(n, n) = aux;
  if (variant == LiftVariant::NAGC_XVT || variant == LiftVariant::AMD_XZT) X[2 * n] = t;
  return X;
}

LiftedState LiftedState::unpack(LiftVariant variant, const Vec& X, int n) {
  if (X.size() != lifted_dim(variant, n)) throw InputError("lifted state: dimension mismatch");
  LiftedState s;
  s.variant = variant;
  s.x = X.head(n);
  if (variant != LiftVariant::PLAIN_Z) s.aux = X.segment(n, n);
  if (variant == LiftVariant::NAGC_XVT || variant == LiftVariant::AMD_XZT) s.t = X[2 * n];
  return s;
}

LiftedState LiftedState::plain(const Vec& z) { return LiftedState{LiftVariant::PLAIN_Z, z, Vec(), 0.0}; }

Vec step_gd(const Vec& x, const ObjectiveOracle& F, double s) { return x - s * F.gradient(x); }

Vec step_hb(const Vec& x_k, const Vec& x_prev, const ObjectiveOracle& F, double beta, double s) {
  require_step(s);
  return x_k + beta * (x_k - x_prev) - s * F.gradient(x_k);
}

Vec step_nag_general(const Vec& x_k, const Vec& x_prev, const ObjectiveOracle& F, double beta,
                     double delta, double eta, double s) {
  require_step(s);
  const Vec g = F.gradient(x_k);
  const Vec g_prev = F.gradient(x_prev);
  return x_k - s * g + beta * (x_k - x_prev) - (delta * g - eta * g_prev);
}

Vec step_nag(const Vec& x_k, const Vec& x_prev, const ObjectiveOracle& F, double beta, double s) {
  require_step(s);
  const Vec y = x_k + beta * (x_k - x_prev);
  return y - s * F.gradient(y);
}

Vec step_md_dual(const Vec& z, const ObjectiveOracle& F, const ProxFunction& prox, double s) {
  require_step(s);
  return z - s * F.gradient(prox.grad_phi_star(z));
}

std::pair<Vec, Vec> step_amd(const Vec& x, const Vec& z, int k, const ObjectiveOracle& F,
                             const ProxFunction& prox, double s) {
  require_step(s);
  if (k < 0) throw InputError("step_amd: k must be nonnegative");
  const Vec g = F.gradient(x);
  Vec zn = z - s * (k + 1.0) / 2.0 * g;
  Vec xn = 2.0 / (k + 3.0) * prox.grad_phi_star(zn) + (k + 1.0) / (k + 3.0) * (x - s * g);
  return {xn, zn};
}

namespace {

// Solves w + s grad F(w) = rhs by fixed-point iteration with a Newton fallback.
Vec solve_resolvent(const ObjectiveOracle& F, const Vec& rhs, double s, const SolverOptions& opts) {
  if (F.constant_hessian) {
    const int n = F.dim;
    const Vec g0 = F.grad(Vec::Zero(n));
    Mat K = Mat::Identity(n, n) + s * (*F.constant_hessian);
    return K.partialPivLu().solve(rhs - s * g0);
  }
  const double scale = std::max(1.0, rhs.norm());
  auto residual = [&](const Vec& w) -> Vec { return w + s * F.grad(w) - rhs; };
  Vec w = rhs;
  Vec r = residual(w);
  double rn = r.norm();
  int it = 0;
  for (; it < opts.max_iter && rn > opts.tol * scale; ++it) {
    Vec cand = (1.0 - opts.damping) * w + opts.damping * (rhs - s * F.grad(w));
    Vec rc = residual(cand);
    if (!rc.allFinite() || rc.norm() >= rn) break;
    w = cand;
    r = rc;
    rn = r.norm();
  }
  for (; it < opts.max_iter && rn > opts.tol * scale; ++it) {
    const int n = F.dim;
    Mat J = Mat::Identity(n, n) + s * F.hessian(w);
    w -= J.partialPivLu().solve(r);
    r = residual(w);
    rn = r.norm();
    if (!std::isfinite(rn)) break;
  }
  if (!(rn <= opts.tol * scale)) throw SolverError("implicit solve did not converge", rn);
  return w;
}

Vec solve_ppm(const Vec& z, const SaddleSystem& sys, double s, const SolverOptions& opts) {
  const int d = sys.dim();
  if (sys.affine()) {
    const Mat J = sys.jacobian_M(Vec::Zero(d));
    const Vec c = sys.M(Vec::Zero(d));
    Mat K = Mat::Identity(d, d) + s * J;
    return K.partialPivLu().solve(z - s * c);
  }
  const double scale = std::max(1.0, z.norm());
  auto residual = [&](const Vec& w) -> Vec { return w + s * sys.M(w) - z; };
  Vec w = z;
  Vec r = residual(w);
  double rn = r.norm();
  int it = 0;
  for (; it < opts.max_iter && rn > opts.tol * scale; ++it) {
    Vec cand = (1.0 - opts.damping) * w + opts.damping * (z - s * sys.M(w));
    Vec rc = residual(cand);
    if (!rc.allFinite() || rc.norm() >= rn) break;
    w = cand;
    r = rc;
    rn = r.norm();
  }
  for (; it < opts.max_iter && rn > opts.tol * scale; ++it) {
    Mat J = Mat::Identity(d, d) + s * sys.jacobian_M(w);
    w -= J.partialPivLu().solve(r);
    r = residual(w);
    rn = r.norm();
    if (!std::isfinite(rn)) break;
  }
  if (!(rn <= opts.tol * scale)) throw SolverError("PPM implicit solve did not converge", rn);
  return w;
}

}  // namespace

Vec prox_step(const ObjectiveOracle& F, const Vec& rhs, double s, const SolverOptions& opts) {
  return solve_resolvent(F, rhs, s, opts);
}

Vec step_minimax(const Vec& z, const SaddleSystem& sys, double s, MinimaxScheme scheme,
                 const SolverOptions& opts) {
  require_step(s);
  if (z.size() != sys.dim()) throw InputError("step_minimax: dimension mismatch");
  Vec out;
  switch (scheme) {
    case MinimaxScheme::GDA: out = z - s * sys.M(z); break;
    case MinimaxScheme::EGM: out = z - s * sys.M(z - s * sys.M(z)); break;
    case MinimaxScheme::PPM: out = solve_ppm(z, sys, s, opts); break;
    case MinimaxScheme::PDHG_CP: {
      const Vec x = z.head(sys.n());
      const Vec y = z.tail(sys.m());
      const Vec xn = solve_resolvent(sys.F, x - s * (sys.A.transpose() * y), s, opts);
      const Vec xbar = xn + sys.theta * (xn - x);
      const Vec yn = solve_resolvent(sys.G, y + s * (sys.A * xbar), s, opts);
      out.resize(sys.dim());
      out << xn, yn;
      break;
    }
  }
  require_finite(out, "step_minimax");
  return out;
}

LiftedState lift_hb(const Vec& x_k, const Vec& x_prev, double s) {
  require_step(s);
  return LiftedState{LiftVariant::HB_XV, x_k, (x_k - x_prev) / std::sqrt(s), 0.0};
}

LiftedState lift_nag(const Vec& x_k, const Vec& x_prev, const ObjectiveOracle& F, double beta,
                     double eta, double s) {
  require_step(s);
  if (beta == 0.0) throw ConfigError("lift_nag: beta must be nonzero");
  Vec v = (x_k - x_prev + (eta / beta) * F.gradient(x_prev)) / (std::sqrt(s) * beta);
  return LiftedState{LiftVariant::NAG_XV, x_k, v, 0.0};
}

LiftedState lift_nagc(const Vec& x_k, const Vec& x_prev, int k, const ObjectiveOracle& F, double s) {
  require_step(s);
  if (k < 0) throw InputError("lift_nagc: k must be nonnegative");
  const double tau = std::sqrt(s);
  const double t = (k + 3.0) * tau;
  Vec v = Vec::Zero(x_k.size());
  if (k > 0) v = (x_k - x_prev + s * F.gradient(x_prev)) / (tau - 3.0 * s / t);
  return LiftedState{LiftVariant::NAGC_XVT, x_k, v, t};
}

LiftedState lift_amd(const Vec& x, const Vec& z, int k, double s) {
  require_step(s);
  if (k < 0) throw InputError("lift_amd: k must be nonnegative");
  return LiftedState{LiftVariant::AMD_XZT, x, z, (k + 3.0) * std::sqrt(s)};
}

Vec lifted_map(LiftVariant variant, const Vec& X, double tau, const DtaConfig& cfg,
               const Problem& problem) {
  if (variant == LiftVariant::PLAIN_Z) throw InputError("lifted_map: plain state has no template");
  const ObjectiveOracle& F = problem.objective();
  const int n = F.dim;
  if (X.size() != lifted_dim(variant, n)) throw InputError("lifted_map: dimension mismatch");
  const Vec x = X.head(n);
  const Vec v = X.segment(n, n);
  Vec out(X.size());

  switch (variant) {
    case LiftVariant::HB_XV: {
      if (cfg.beta(0, 0.0) != 1.0) throw ConfigError("HB template requires beta(0) = 1");
      if (tau == 0.0) return X;
      const double b = cfg.beta(0, tau);
      const Vec vn = b * v - tau * F.gradient(x);
      out << x + tau * vn, vn;
      return out;
    }
    case LiftVariant::NAG_XV: {
      if (cfg.beta(0, 0.0) != 1.0) throw ConfigError("NAG template requires beta(0) = 1");
      if (cfg.method == Method::NAG_SC) {
        if (tau == 0.0) return X;
        const double b = cfg.beta(0, tau);
        const Vec g = F.gradient(x);
        out << x + tau * b * b * v - tau * tau * (1.0 + b) * g, b * v - tau * g;
        return out;
      }
      if (!cfg.delta || !cfg.eta) throw ConfigError("NAG template requires delta and eta");
      if (cfg.delta(0.0) != 0.0) throw ConfigError("NAG template requires delta(0) = 0");
      if (tau == 0.0) return X;
      const double b = cfg.beta(0, tau);
      const double d = cfg.delta(tau);
      const double e = cfg.eta(tau);
      const Vec g = F.gradient(x);
      out << x + tau * b * b * v - (d + tau * tau) * g, b * v - (d + tau * tau - e / b) / (tau * b) * g;
      return out;
    }
    case LiftVariant::NAGC_XVT: {
      const double t = X[2 * n];
      if (!(t > 0.0)) throw InputError("NAG-C template requires t > 0");
      const double c0 = 1.0 - 3.0 * tau / t;
      const double c1 = 1.0 - 3.0 * tau / (t + tau);
      const Vec g = F.gradient(x);
      out << x - tau * tau * (1.0 + c1) * g + tau * c0 * c1 * v, c0 * v - tau * g, t + tau;
      return out;
    }
    case LiftVariant::AMD_XZT: {
      const ProxFunction& prox = problem.prox_function();
      const double t = X[2 * n];
      if (!(t > 0.0)) throw InputError("AMD template requires t > 0");
      const Vec g = F.gradient(x);
      const double w = 2.0 * tau / t;
      const Vec zn = v - tau * (t / 2.0 - tau) * g;
      out << (1.0 - w) * x + w * prox.grad_phi_star(zn) - tau * tau * (1.0 - w) * g, zn, t + tau;
      return out;
    }
    case LiftVariant::PLAIN_Z: break;
  }
  return X;
}

LiftedState step_lifted(const LiftedState& X, const DtaConfig& cfg, const Problem& problem) {
  require_step(cfg.s);
  const int n = static_cast<int>(X.x.size());
  const Vec out = lifted_map(X.variant, X.pack(), cfg.tau(), cfg, problem);
  require_finite(out, "step_lifted");
  return LiftedState::unpack(X.variant, out, n);
}

namespace {
Vec plain_step(const Vec& z, const DtaConfig& cfg, const Problem& problem) {
  switch (cfg.method) {
    case Method::GD: return step_gd(z, problem.objective(), cfg.s);
    case Method::MD_DUAL: return step_md_dual(z, problem.objective(), problem.prox_function(), cfg.s);
    case Method::GDA: return step_minimax(z, problem.saddle_system(), cfg.s, MinimaxScheme::GDA, cfg.solver);
    case Method::PPM: return step_minimax(z, problem.saddle_system(), cfg.s, MinimaxScheme::PPM, cfg.solver);
    case Method::EGM: return step_minimax(z, problem.saddle_system(), cfg.s, MinimaxScheme::EGM, cfg.solver);
    case Method::PDHG:
    case Method::CP: {
      SaddleSystem sys = problem.saddle_system();
      sys.theta = cfg.theta;
      return step_minimax(z, sys, cfg.s, MinimaxScheme::PDHG_CP, cfg.solver);
    }
    default: break;
  }
  throw InputError("plain_step: method requires a lifted state");
}
}  // namespace

Trajectory run_dta(const DtaConfig& cfg, const Problem& problem, const LiftedState& init, int n_steps) {
  require_step(cfg.s);
  if (n_steps < 0) throw InputError("run_dta: n_steps must be nonnegative");
  const bool lifted = is_lifted(cfg.method);
  if (lifted && init.variant != lift_variant(cfg.method))
    throw InputError("run_dta: initial state variant does not match method");
  Trajectory traj(lifted ? cfg.tau() : cfg.s);
  traj.states.reserve(n_steps + 1);
  traj.times.reserve(n_steps + 1);
  if (lifted) {
    LiftedState X = init;
    traj.push(X.pack());
    for (int k = 0; k < n_steps; ++k) {
      X = step_lifted(X, cfg, problem);
      traj.push(X.pack());
    }
  } else {
    Vec z = init.x;
    traj.push(z);
    for (int k = 0; k < n_steps; ++k) {
      z = plain_step(z, cfg, problem);
      traj.push(z);
    }
  }
  return traj;
}

Trajectory run_two_term(const DtaConfig& cfg, const Problem& problem, const Vec& x0,
                        const Vec& x_prev, int n_steps) {
  require_step(cfg.s);
  const ObjectiveOracle& F = problem.objective();
  const double tau = cfg.tau();
  Trajectory traj(tau);
  Vec prev = x_prev;
  Vec cur = x0;
  traj.push(cur);
  for (int k = 0; k < n_steps; ++k) {
    Vec next;
    switch (cfg.method) {
      case Method::HB: next = step_hb(cur, prev, F, cfg.beta(k, tau), cfg.s); break;
      case Method::NAG_SC: {
        const double b = cfg.beta(k, tau);
        next = step_nag_general(cur, prev, F, b, cfg.s * b, cfg.s * b, cfg.s);
        break;
      }
      case Method::NAG_GENERAL:
        next = step_nag_general(cur, prev, F, cfg.beta(k, tau), cfg.delta(tau), cfg.eta(tau), cfg.s);
        break;
      case Method::NAG_C: next = step_nag(cur, prev, F, k / (k + 3.0), cfg.s); break;
      default: throw InputError("run_two_term: method is not a two-term recursion");
    }
    prev = cur;
    cur = next;
    traj.push(cur);
  }
  return traj;
}

}  // namespace hires
