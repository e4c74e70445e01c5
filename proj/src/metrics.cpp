#include "hires/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace hires {

Vec Projector::apply(const Vec& X) const {
  const int n = count < 0 ? static_cast<int>(X.size()) - begin : count;
  if (begin < 0 || n < 0 || begin + n > X.size()) throw InputError("projector out of range");
  return X.segment(begin, n);
}

ErrorReport compute_errors(const Trajectory& ode, const Trajectory& dta, const Projector& proj,
                           double s) {
  if (ode.size() != dta.size() || ode.size() < 2) throw InputError("compute_errors: grid lengths differ");
  if (std::abs(ode.grid_step - dta.grid_step) > 1e-12 * std::max(ode.grid_step, dta.grid_step))
    throw InputError("compute_errors: grid steps differ");
  const Vec a0 = proj.apply(ode.states[0]);
  const Vec b0 = proj.apply(dta.states[0]);
  if ((a0 - b0).norm() > 1e-12 * std::max(1.0, b0.norm()))
    throw InputError("compute_errors: initial states differ");

  ErrorReport rep;
  rep.s = s;
  rep.projector = proj;
  double sq = 0.0;
  for (std::size_t k = 1; k < ode.size(); ++k) {
    const double e = (proj.apply(ode.states[k]) - proj.apply(dta.states[k])).norm();
    if (k == 1) rep.E1 = e;
    rep.E2 += e;
    sq += ode.grid_step * e * e;
  }
  rep.E3 = std::sqrt(sq);
  return rep;
}

namespace {
std::optional<double> rate(double prev, double cur) {
  if (!(prev > 0.0) || !(cur > 0.0)) return std::nullopt;
  return std::log2(prev / cur);
}
}  // namespace

OrderTable empirical_orders(const std::vector<ErrorReport>& reports) {
  if (reports.empty()) throw InputError("empirical_orders: no reports");
  OrderTable table;
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const ErrorReport& r = reports[i];
    OrderRow row{r.s, r.E1, r.E2, r.E3, std::nullopt, std::nullopt, std::nullopt};
    if (i > 0) {
      const ErrorReport& p = reports[i - 1];
      if (std::abs(p.s / r.s - 2.0) > 1e-9) throw InputError("empirical_orders: s must halve between rows");
      row.rate1 = rate(p.E1, r.E1);
      row.rate2 = rate(p.E2, r.E2);
      row.rate3 = rate(p.E3, r.E3);
    }
    table.rows.push_back(row);
  }
  return table;
}

double lyapunov_saddle(const Vec& z, const Vec& z_star) {
  if (z.size() != z_star.size()) throw InputError("lyapunov_saddle: dimension mismatch");
  return 0.5 * (z - z_star).squaredNorm();
}

double lyapunov_hb(const Vec& x, const Vec& w, const ObjectiveOracle& F, const Vec& x_star,
                   double eta, double s) {
  const double q = eta * std::sqrt(F.mu * s);
  const double b = F.mu * (1.0 - 3.0 * q) / (1.0 + 2.5 * q);
  if (!(b > 0.0)) throw ParameterError("lyapunov_hb: requires 3 eta sqrt(mu s) < 1 and mu > 0");
  return F.value(x) - F.value(x_star) + 0.5 * b * (w - x_star).squaredNorm();
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Converged: return "converged";
    case Verdict::Cycling: return "cycling";
    case Verdict::Diverging: return "diverging";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

Verdict detect_nonconvergence(const Trajectory& traj, const Vec& x_star, const NonconvergenceOptions& opts) {
  if (opts.window < 2) throw InputError("detect_nonconvergence: window must be >= 2");
  if (traj.size() == 0) throw InputError("detect_nonconvergence: empty trajectory");
  const std::size_t N = traj.size();
  std::vector<Vec> pts;
  pts.reserve(N);
  std::vector<double> d(N);
  for (std::size_t k = 0; k < N; ++k) {
    pts.push_back(opts.projector.apply(traj.states[k]));
    d[k] = (pts.back() - x_star).norm();
  }
  if (d.back() <= opts.tol) return Verdict::Converged;

  const std::size_t W = std::min<std::size_t>(opts.window, N);
  const std::size_t w0 = N - W;
  bool monotone = true;
  for (std::size_t k = w0 + 1; k < N; ++k) monotone = monotone && d[k] >= d[k - 1];
  const double ref = std::max(d[0], opts.tol);
  if (d.back() > 10.0 * ref && monotone) return Verdict::Diverging;

  double dmax = 0.0;
  double wmin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < N; ++k) dmax = std::max(dmax, d[k]);
  for (std::size_t k = w0; k < N; ++k) wmin = std::min(wmin, d[k]);
  if (!std::isfinite(dmax) || dmax > 10.0 * ref || wmin <= opts.tol) return Verdict::Inconclusive;
  // an orbit whose amplitude still shrinks window over window is a slow spiral, not a cycle
  if (N >= 2 * W) {
    const double last = *std::max_element(d.begin() + static_cast<std::ptrdiff_t>(w0), d.end());
    const double before = *std::max_element(d.begin() + static_cast<std::ptrdiff_t>(w0 - W),
                                            d.begin() + static_cast<std::ptrdiff_t>(w0));
    if (last < 0.9 * before) return Verdict::Inconclusive;
  }

  // a revisit: some earlier state within tol after an excursion of more than 2 tol
  for (std::size_t i = w0; i < N; ++i) {
    double excursion = 0.0;
    for (std::size_t j = i; j-- > 0;) {
      const double dist = (pts[i] - pts[j]).norm();
      if (dist <= opts.tol && excursion > 2.0 * opts.tol) return Verdict::Cycling;
      excursion = std::max(excursion, dist);
    }
  }
  return Verdict::Inconclusive;
}

}  // namespace hires
