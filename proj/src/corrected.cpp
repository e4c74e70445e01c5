#include "hires/corrected.hpp"

#include "hires/metrics.hpp"

#include <cmath>

namespace hires {

void CpdhgParams::validate_window() const {
  if (!(s > 0.0)) throw ParameterError("cPDHG: s must be positive");
  if (!(eta1 > 0.0) || !(eta2 > 0.0)) throw ParameterError("cPDHG: eta1, eta2 must be positive");
  if (!(theta >= -1.0)) throw ParameterError("cPDHG: theta must be >= -1");
  if (!(2.0 * eta2 < eta1 && eta1 < 4.0 - 2.0 * theta * eta2))
    throw ParameterError("cPDHG: need 2 eta2 < eta1 < 4 - 2 theta eta2");
  if (L > 0.0 && !(s < 2.0 / L)) throw ParameterError("cPDHG: need s < 2/L");
  if (!(C1() > 0.0) || !(C2() > 0.0)) throw ParameterError("cPDHG: C1 and C2 must be positive");
}

double CpdhgParams::max_step(double normQ) const {
  if (!(L > 0.0)) return std::numeric_limits<double>::infinity();
  const double q2 = normQ * normQ * (eta1 * eta1 + 4.0 * theta * theta * eta2 * eta2);
  const double a = 1.0 / L;
  const double b = L * L * C1() / (4.0 * L * L + 2.0 * q2);
  const double e = eta1 - 2.0 * eta2;
  const double c = 2.0 * L * L * e / (e * L * L * L + 8.0 * (2.0 * L * L + q2));
  return std::min({a, b, c});
}

void validate_cpdhg(const SaddleSystem& sys, const CpdhgParams& p) {
  p.validate_window();
  if (p.L > 0.0) {
    Eigen::JacobiSVD<Mat> svd(sys.A);
    const double normQ = svd.singularValues()(0);
    if (!(p.s <= p.max_step(normQ) * (1.0 + 1e-12)))
      throw ParameterError("cPDHG: step size violates the discrete step-size condition");
  }
}

Mat cpdhg_correction_matrix(const SaddleSystem& sys, const CpdhgParams& p) {
  SaddleSystem s2 = sys;
  s2.theta = p.theta;
  return p.eta1 * s2.Q() + 2.0 * p.eta2 * s2.Q_theta();
}

VectorField cpdhg_field(const SaddleSystem& sys, const CpdhgParams& p) {
  p.validate_window();
  const Mat K = (p.s / 2.0) * cpdhg_correction_matrix(sys, p);
  VectorField vf;
  vf.dim = sys.dim();
  vf.order = 1;
  vf.label = "cpdhg";
  vf.s = p.s;
  vf.rhs = [sys, K](const Vec& z) -> Vec {
    const Vec Mz = sys.M(z);
    return -Mz + K * Mz;
  };
  return vf;
}

namespace {
Vec cpdhg_step_unchecked(const Vec& z, const VectorField& field, double s) { return z + s * field(z); }
}  // namespace

Vec step_cpdhg(const Vec& z, const SaddleSystem& sys, const CpdhgParams& p) {
  validate_cpdhg(sys, p);
  Vec out = cpdhg_step_unchecked(z, cpdhg_field(sys, p), p.s);
  require_finite(out, "step_cpdhg");
  return out;
}

Trajectory run_cpdhg(const Vec& z0, const SaddleSystem& sys, const CpdhgParams& p, int n_steps) {
  validate_cpdhg(sys, p);
  const VectorField field = cpdhg_field(sys, p);
  Trajectory traj(p.s);
  Vec z = z0;
  traj.push(z);
  for (int k = 0; k < n_steps; ++k) {
    z = cpdhg_step_unchecked(z, field, p.s);
    require_finite(z, "run_cpdhg");
    traj.push(z);
  }
  return traj;
}

double ChbParams::q() const { return eta * std::sqrt(mu * s); }
double ChbParams::b() const { return mu * (1.0 - 3.0 * q()) / (1.0 + 2.5 * q()); }
double ChbParams::rho() const { return std::sqrt(mu * s) * (1.0 - 3.0 * q()); }

void ChbParams::validate() const {
  if (!(mu > 0.0)) throw ParameterError("cHB: mu must be positive");
  if (!(L >= mu)) throw ParameterError("cHB: need L >= mu");
  if (!(s > 0.0) || !(eta > 0.0)) throw ParameterError("cHB: s and eta must be positive");
  if (!(3.0 * q() < 1.0)) throw ParameterError("cHB: need 3 eta sqrt(mu s) < 1");
}

bool ChbParams::step_condition_holds() const {
  const double lhs = 9.0 * L * eta * eta * s + 4.0 * (1.0 + 2.5 * q()) * (1.0 - 3.0 * q());
  return lhs <= 12.0 * eta * (1.0 + 1e-12);
}

ChbParams optimal_chb_params(double mu, double L) {
  if (!(mu > 0.0)) throw ParameterError("optimal_chb_params: mu must be positive");
  if (!(L >= mu)) throw ParameterError("optimal_chb_params: need L >= mu");
  const double rm = std::sqrt(mu);
  const double rL = std::sqrt(L);
  const double a = 2.0 * rm + rL;
  const double c = 11.0 * rm + 6.0 * rL;
  ChbParams p;
  p.mu = mu;
  p.L = L;
  p.eta = rL * c / (9.0 * a * a);
  p.s = 36.0 * a * a / (L * c * c);
  return p;
}

VectorField chb_field(const ObjectiveOracle& F, const ChbParams& p) {
  p.validate();
  const double rm = std::sqrt(p.mu);
  const double q = p.q();
  const double a = rm * (1.0 - 3.0 * q);
  const double gx = 1.5 * p.eta * std::sqrt(p.s);
  const double c = rm / 2.0 * (2.0 + 5.0 * q);
  const double gw = (2.0 + 5.0 * q) / (2.0 * rm);
  const int n = F.dim;
  VectorField vf;
  vf.dim = 2 * n;
  vf.order = 1;
  vf.label = "chb";
  vf.s = p.s;
  vf.rhs = [F, n, a, gx, c, gw](const Vec& X) -> Vec {
    const Vec x = X.head(n);
    const Vec w = X.tail(n);
    const Vec g = F.grad(x);
    Vec out(2 * n);
    out << a * (w - x) - gx * g, c * (x - w) - gw * g;
    return out;
  };
  return vf;
}

VectorField chb_field_xv(const ObjectiveOracle& F, const ChbParams& p) {
  p.validate();
  const double rm = std::sqrt(p.mu);
  const double k = p.eta * std::sqrt(p.s) / 2.0;
  const double mu = p.mu;
  const int n = F.dim;
  VectorField vf;
  vf.dim = 2 * n;
  vf.order = 1;
  vf.label = "chb-xv";
  vf.s = p.s;
  vf.rhs = [F, n, rm, k, mu](const Vec& X) -> Vec {
    const Vec x = X.head(n);
    const Vec v = X.tail(n);
    const Vec g = F.grad(x);
    Vec out(2 * n);
    out << v + k * (-6.0 * rm * v - 3.0 * g), -2.0 * rm * v - g + k * (mu * v - 2.0 * rm * g);
    return out;
  };
  return vf;
}

std::pair<Vec, Vec> step_chb(const Vec& x, const Vec& w, const ObjectiveOracle& F, const ChbParams& p) {
  p.validate();
  const double rs = std::sqrt(p.s);
  const double rm = std::sqrt(p.mu);
  const double q = p.q();
  const double a = rm * (1.0 - 3.0 * q);
  const double c = rm / 2.0 * (2.0 + 5.0 * q);
  const double d = (2.0 + 5.0 * q) / (2.0 * rm);
  const Vec xn = (x + rs * a * w - 1.5 * p.eta * p.s * F.gradient(x)) / (1.0 + rs * a);
  const Vec wn = (w + rs * c * xn - rs * d * F.gradient(xn)) / (1.0 + rs * c);
  return {xn, wn};
}

Trajectory run_chb(const Vec& x0, const Vec& w0, const ObjectiveOracle& F, const ChbParams& p, int n_steps) {
  p.validate();
  const int n = F.dim;
  Trajectory traj(std::sqrt(p.s));
  Vec X(2 * n);
  X << x0, w0;
  traj.push(X);
  Vec x = x0, w = w0;
  for (int k = 0; k < n_steps; ++k) {
    std::tie(x, w) = step_chb(x, w, F, p);
    X << x, w;
    traj.push(X);
  }
  return traj;
}

namespace {
void record(ContractionVerdict& v, std::size_t k, double excess, double slack) {
  v.worst_excess = std::max(v.worst_excess, excess);
  if (excess > slack && v.pass) {
    v.pass = false;
    v.first_violation = k;
  }
}
}  // namespace

ContractionVerdict certify_contraction(const std::vector<double>& E, double rho, double slack) {
  ContractionVerdict v;
  for (std::size_t k = 0; k + 1 < E.size(); ++k) record(v, k, E[k + 1] - E[k] / (1.0 + rho), slack);
  return v;
}

ContractionVerdict certify_envelope(const std::vector<double>& E, double factor, double slack) {
  ContractionVerdict v;
  if (E.empty()) return v;
  double env = E[0];
  for (std::size_t k = 1; k < E.size(); ++k) {
    env *= factor;
    record(v, k, E[k] - env, slack);
  }
  return v;
}

ContractionVerdict certify_contraction_cpdhg(const Trajectory& traj, const SaddleSystem& sys,
                                             const CpdhgParams& p, const Vec& z_star, double slack) {
  ContractionVerdict v;
  const Mat Q = sys.Q();
  for (std::size_t k = 0; k + 1 < traj.size(); ++k) {
    const Vec& z = traj.states[k];
    const Vec dz = z - z_star;
    const double lhs = lyapunov_saddle(traj.states[k + 1], z_star) - lyapunov_saddle(z, z_star);
    const double rhs = -p.s * (p.C1() / 2.0 * sys.M(z).dot(dz) + p.C2() / 2.0 * (Q * dz).squaredNorm());
    record(v, k, lhs - rhs, slack);
  }
  return v;
}

ContractionVerdict certify_ergodic_cpdhg(const Trajectory& traj, const SaddleSystem& sys,
                                         const CpdhgParams& p, const Vec& z_star, double slack) {
  ContractionVerdict v;
  if (traj.size() == 0) return v;
  const Mat Q = sys.Q();
  const Vec d0 = traj.states[0] - z_star;
  const double sc2 = p.s * p.C2();
  const double num = 2.0 * lyapunov_saddle(traj.states[0], z_star) + sc2 * (Q * d0).squaredNorm();
  Vec sum = Vec::Zero(d0.size());
  for (std::size_t k = 0; k < traj.size(); ++k) {
    sum += traj.states[k];
    const Vec avg = sum / static_cast<double>(k + 1);
    const double lhs = (Q * (avg - z_star)).squaredNorm();
    record(v, k, lhs - num / (sc2 * (1.0 + k)), slack);
  }
  return v;
}

double slp_margin_cpdhg(const Vec& z, const SaddleSystem& sys, const CpdhgParams& p, const Vec& z_star) {
  const VectorField G = cpdhg_field(sys, p);
  const Vec dz = z - z_star;
  return -dz.dot(G(z)) - p.C1() * sys.M(z).dot(dz) - p.C2() * (sys.Q() * dz).squaredNorm();
}

double slp_margin_chb(const Vec& x, const Vec& w, const ObjectiveOracle& F, const ChbParams& p,
                      const Vec& x_star) {
  const VectorField G = chb_field(F, p);
  const int n = F.dim;
  Vec X(2 * n);
  X << x, w;
  const Vec g = F.grad(x);
  Vec gradE(2 * n);
  gradE << g, p.b() * (w - x_star);
  const double E = lyapunov_hb(x, w, F, x_star, p.eta, p.s);
  return -gradE.dot(G(X)) - std::sqrt(p.mu) * (1.0 - 3.0 * p.q()) * E -
         1.5 * p.eta * std::sqrt(p.s) * g.squaredNorm();
}

}  // namespace hires
