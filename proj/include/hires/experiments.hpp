#pragma once

#include "hires/core.hpp"
#include "hires/corrected.hpp"
#include "hires/dta.hpp"
#include "hires/integrate.hpp"
#include "hires/metrics.hpp"
#include "hires/resolution.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace hires {

enum class Execution { Serial, Parallel };

// Failure of an experiment run, with the experiment name and step size in the message.
struct ExperimentError : Error {
  using Error::Error;
};

// Problem catalog ids: "quartic_saddle" (L = x^4 + xy - y^2), "bilinear_xy" (L = xy),
// "half_square" (F = x^2 / 2, mu = 1).
struct ExperimentSpec {
  std::string name;
  std::string anchor;
  Method method = Method::GD;
  Model model = Model::GD;
  int ode_order = 0;
  std::string problem;
  // Trajectory experiments plot these methods after `method`.
  std::vector<Method> extra_methods;
  // Algorithm step sizes. Rows are labelled by the grid step: s, or sqrt(s) with sqrt_grid.
  std::vector<double> s_values;
  bool sqrt_grid = false;
  double T = 0.0;
  // Trajectory length; when unset, T / grid step.
  std::optional<int> steps;
  std::string output_path;
  Vec z0;
  Projector projector;
  double mu = 1.0;
  std::uint64_t seed = 42;
  // Stored finest-row (rate1, rate2, rate3) for regression comparison.
  std::optional<std::array<double, 3>> expected_rates;
  double rate_tol = 0.1;

  double grid_step(double s) const;
  // Nonempty s_values whose grid steps halve row to row, T > 0.
  void validate_rates() const;
};

std::vector<std::string> builtin_names();
// Throws ConfigError for unknown names.
ExperimentSpec builtin_spec(const std::string& name);

struct RateRun {
  ErrorReport report;
  int substeps = 0;
  double richardson = 0.0;
  bool certified = false;
};

struct RatesResult {
  OrderTable table;
  std::vector<RateRun> runs;
  bool regression_pass = true;
  std::string regression_detail;
  std::string csv;
};

// DTA trajectory, resolution field and initial state for one row.
struct RowSetup {
  Trajectory dta;
  VectorField field;
  Vec X0;
  IntegratorConfig integrator;
};
RowSetup rate_row_setup(const ExperimentSpec& spec, double s);

RateRun rate_row(const ExperimentSpec& spec, double s);
RatesResult cmd_rates(const ExperimentSpec& spec, Execution exec = Execution::Parallel);
std::string rates_csv(const ExperimentSpec& spec, const OrderTable& table);

struct TrajectoryResult {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string csv;
};
TrajectoryResult cmd_trajectory(const ExperimentSpec& spec);

struct CounterexampleOverrides {
  std::optional<double> x0;
  std::optional<double> s;
  std::optional<int> steps;
  std::optional<std::uint64_t> seed;
  std::string output_path;
};

struct CounterexampleCase {
  std::string label;
  Verdict verdict = Verdict::Inconclusive;
  std::optional<ContractionVerdict> certificate;
  std::string certificate_kind;
  std::vector<double> distances;
  bool corrected = false;
};

struct CounterexampleReport {
  std::string which;
  std::uint64_t seed = 0;
  std::vector<CounterexampleCase> cases;
  // Every corrected method satisfied its certificate; hb_lessard also needs cHB to converge.
  bool pass = true;
  std::string csv;
};

// which: "hb_lessard" or "pdhg_bilinear"; throws ConfigError otherwise.
CounterexampleReport cmd_counterexample(const std::string& which, const CounterexampleOverrides& ov = {});

// Seeded m x n matrix with entries uniform on [-1, 1].
Mat random_matrix(int m, int n, std::uint64_t seed);

struct PropertyResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct VerifyOptions {
  // Relative perturbation of closed-form first-order coefficients.
  double perturbation = 0.0;
  bool disable_hessian = false;
  Execution exec = Execution::Parallel;
  std::uint64_t seed = 42;
};

PropertyResult check_fixed_point(std::uint64_t seed);
PropertyResult check_oracle_equivalence(std::uint64_t seed, double perturbation, Execution exec);
PropertyResult check_lifted_equivalence(std::uint64_t seed);
PropertyResult check_slp_cpdhg(std::uint64_t seed, Execution exec);
PropertyResult check_slp_chb(std::uint64_t seed, Execution exec);
PropertyResult check_step_contraction();
PropertyResult check_rk4_order();
PropertyResult check_richardson(const std::vector<ExperimentSpec>& specs, Execution exec);
PropertyResult check_order1_capability(bool disable_hessian);

std::vector<PropertyResult> cmd_verify(const VerifyOptions& opts = {});

// Shortest round-trip decimal text.
std::string format_double(double v);

}  // namespace hires
