#pragma once

#include "hires/core.hpp"

#include <optional>
#include <vector>

namespace hires {

// Selects coordinates [begin, begin + count); count < 0 means "to the end".
struct Projector {
  int begin = 0;
  int count = -1;

  static Projector full() { return {}; }
  static Projector block(int begin, int count) { return {begin, count}; }
  Vec apply(const Vec& X) const;
};

struct ErrorReport {
  double s = 0.0;
  double E1 = 0.0;
  double E2 = 0.0;
  double E3 = 0.0;
  Projector projector;
};

// s labels the report (the row key of an order table); the grids must match.
ErrorReport compute_errors(const Trajectory& ode, const Trajectory& dta, const Projector& proj,
                           double s);

struct OrderRow {
  double s = 0.0;
  double E1 = 0.0, E2 = 0.0, E3 = 0.0;
  std::optional<double> rate1, rate2, rate3;
};

struct OrderTable {
  std::vector<OrderRow> rows;
};

OrderTable empirical_orders(const std::vector<ErrorReport>& reports);

double lyapunov_saddle(const Vec& z, const Vec& z_star);

// F(x) - F(x*) + b/2 |w - x*|^2 with b = mu (1 - 3 eta sqrt(mu s)) / (1 + 5 eta sqrt(mu s) / 2)
double lyapunov_hb(const Vec& x, const Vec& w, const ObjectiveOracle& F, const Vec& x_star,
                   double eta, double s);

enum class Verdict { Converged, Cycling, Diverging, Inconclusive };
const char* verdict_name(Verdict v);

struct NonconvergenceOptions {
  int window = 50;
  double tol = 1e-3;
  Projector projector;
};

Verdict detect_nonconvergence(const Trajectory& traj, const Vec& x_star,
                              const NonconvergenceOptions& opts = {});

}  // namespace hires
