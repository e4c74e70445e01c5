#include "hires/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <random>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace hires {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

void write_file(const std::string& path, const std::string& text) {
  if (path.empty()) return;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open output file: " + path);
  out << text;
  if (!out) throw InputError("failed writing output file: " + path);
}

bool is_minimax(Method m) { return m == Method::PDHG || m == Method::CP; }

double theta_of(Method m) { return m == Method::CP ? 1.0 : 0.0; }

std::string lower_name(Method m) {
  std::string s = method_name(m);
  for (char& c : s) c = c == '-' ? '_' : static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

Problem make_problem(const std::string& id, Method m) {
  Problem p;
  if (id == "quartic_saddle") {
    p.saddle = make_quartic_saddle(theta_of(m));
  } else if (id == "bilinear_xy") {
    p.saddle = make_bilinear(Mat::Ones(1, 1), theta_of(m));
  } else if (id == "half_square") {
    p.F = make_scaled_identity_quadratic(1, 1.0);
  } else {
    throw ConfigError("unknown problem id: " + id);
  }
  return p;
}

DtaConfig make_config(Method m, double s, double mu) {
  switch (m) {
    case Method::PDHG:
    case Method::CP: return minimax_config(m, s, theta_of(m));
    case Method::HB: return hb_polyak_config(mu, s);
    case Method::NAG_SC: return nag_sc_config(mu, s);
    case Method::NAG_C: return nag_c_config(s);
    default: break;
  }
  throw ConfigError(std::string("experiments do not support method ") + method_name(m));
}

LiftedState initial_state(Method m, const Vec& z0, double s, const Problem& problem) {
  switch (m) {
    case Method::PDHG:
    case Method::CP: return LiftedState::plain(z0);
    case Method::HB:
    case Method::NAG_SC: {
      if (z0.size() % 2 != 0) throw ConfigError("momentum experiments need z0 = (x0, v0)");
      const int n = static_cast<int>(z0.size() / 2);
      return LiftedState{lift_variant(m), z0.head(n), z0.tail(n), 0.0};
    }
    case Method::NAG_C: {
      if (z0.size() % 2 != 0) throw ConfigError("NAG-C experiments need z0 = (x0, v0)");
      const int n = static_cast<int>(z0.size() / 2);
      LiftedState X = lift_nagc(z0.head(n), z0.head(n), 0, problem.objective(), s);
      X.aux = z0.tail(n);
      return X;
    }
    default: break;
  }
  throw ConfigError(std::string("experiments do not support method ") + method_name(m));
}

std::string context(const ExperimentSpec& spec, double s) {
  return "experiment " + spec.name + " at s=" + format_double(s) + ": ";
}

template <class F>
void parallel_for(int n, Execution exec, F&& body) {
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
#pragma omp parallel for schedule(dynamic) if (exec == Execution::Parallel)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      errors[static_cast<std::size_t>(i)] = std::current_exception();
    }
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

ExperimentSpec minimax_rates(const std::string& name, const std::string& anchor, Method m, int order,
                             std::array<double, 3> expected) {
  ExperimentSpec s;
  s.name = name;
  s.anchor = anchor;
  s.method = m;
  s.model = Model::PDHG;
  s.ode_order = order;
  s.problem = "quartic_saddle";
  s.s_values = {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  s.T = 20.0;
  s.z0 = Vec::Constant(2, 0.5);
  s.projector = Projector::full();
  s.expected_rates = expected;
  s.rate_tol = 0.1;
  return s;
}

ExperimentSpec momentum_rates(const std::string& name, const std::string& anchor, Method m, Model model,
                              int order, std::array<double, 3> expected) {
  ExperimentSpec s;
  s.name = name;
  s.anchor = anchor;
  s.method = m;
  s.model = model;
  s.ode_order = order;
  s.problem = "half_square";
  s.sqrt_grid = true;
  s.s_values = {std::ldexp(1.0, -8), std::ldexp(1.0, -10), std::ldexp(1.0, -12), std::ldexp(1.0, -14)};
  s.T = 10.0;
  s.z0 = Vec::Ones(2);
  s.projector = Projector::block(0, 1);
  s.expected_rates = expected;
  s.rate_tol = 0.15;
  return s;
}

ExperimentSpec trajectory_spec(const std::string& name, const std::string& anchor, Method m,
                               const std::string& problem, double s, int steps, Vec z0) {
  ExperimentSpec e;
  e.name = name;
  e.anchor = anchor;
  e.method = m;
  e.problem = problem;
  e.s_values = {s};
  e.sqrt_grid = !is_minimax(m);
  e.steps = steps;
  e.z0 = std::move(z0);
  e.projector = is_minimax(m) ? Projector::full() : Projector::block(0, 1);
  e.T = steps * e.grid_step(s);
  return e;
}

}  // namespace

double ExperimentSpec::grid_step(double s) const { return sqrt_grid ? std::sqrt(s) : s; }

void ExperimentSpec::validate_rates() const {
  if (s_values.empty()) throw ConfigError(name + ": s_values is empty");
  for (double s : s_values)
    if (!(s > 0.0) || !std::isfinite(s)) throw ConfigError(name + ": s values must be positive");
  for (std::size_t i = 1; i < s_values.size(); ++i) {
    const double r = grid_step(s_values[i - 1]) / grid_step(s_values[i]);
    if (std::abs(r - 2.0) > 1e-9) throw ConfigError(name + ": grid steps must halve between rows");
  }
  if (!(T > 0.0)) throw ConfigError(name + ": T must be positive");
}

std::vector<std::string> builtin_names() {
  return {"table1_pdhg", "table1_cp",  "table2_pdhg", "table2_cp",  "table3_hb",   "table3_hb_shi",
          "table3_nag",  "table4_hb",  "table4_nag",  "fig1_pdhg",  "fig1_cp",     "fig2_hb_nag",
          "fig3_nagc"};
}

ExperimentSpec builtin_spec(const std::string& name) {
  if (name == "table1_pdhg")
    return minimax_rates(name, "PDHG against its O(1)-resolution ODE on L = x^4 + xy - y^2", Method::PDHG, 0, {1.95, 0.00, 1.00});
  if (name == "table1_cp")
    return minimax_rates(name, "CP against its O(1)-resolution ODE on L = x^4 + xy - y^2", Method::CP, 0, {1.95, -0.01, 0.99});
  if (name == "table2_pdhg")
    return minimax_rates(name, "PDHG against its O(s)-resolution ODE on L = x^4 + xy - y^2", Method::PDHG, 1, {2.94, 1.01, 2.00});
  if (name == "table2_cp")
    return minimax_rates(name, "CP against its O(s)-resolution ODE on L = x^4 + xy - y^2", Method::CP, 1, {2.95, 1.00, 2.00});
  if (name == "table3_hb")
    return momentum_rates(name, "HB against its O(1)-resolution ODE on F = x^2/2", Method::HB, Model::HB_POLYAK, 0,
                          {2.00, 0.00, 1.00});
  if (name == "table3_hb_shi")
    return momentum_rates(name, "HB against the Shi et al. high-resolution ODE on F = x^2/2", Method::HB,
                          Model::SHI_HB, 1, {1.99, -0.01, 1.00});
  if (name == "table3_nag")
    return momentum_rates(name, "NAG-SC against its O(1)-resolution ODE on F = x^2/2", Method::NAG_SC, Model::NAG_SC,
                          0, {1.98, -0.02, 0.98});
  if (name == "table4_hb")
    return momentum_rates(name, "HB against its O(sqrt(s))-resolution ODE on F = x^2/2", Method::HB,
                          Model::HB_POLYAK, 1, {3.03, 0.98, 1.98});
  if (name == "table4_nag")
    return momentum_rates(name, "NAG-SC against its O(sqrt(s))-resolution ODE on F = x^2/2", Method::NAG_SC,
                          Model::NAG_SC, 1, {2.97, 0.96, 1.97});
  if (name == "fig1_pdhg")
    return trajectory_spec(name, "PDHG and its ODEs on L = xy", Method::PDHG, "bilinear_xy", 0.3, 100,
                           Vec::Ones(2));
  if (name == "fig1_cp")
    return trajectory_spec(name, "CP and its ODEs on L = xy", Method::CP, "bilinear_xy", 0.3, 100, Vec::Ones(2));
  if (name == "fig2_hb_nag") {
    ExperimentSpec e = trajectory_spec(name, "HB, NAG-SC and their ODEs on F = x^2/2", Method::HB, "half_square",
                                       0.02, 100, Vec::Constant(2, 0.8));
    e.extra_methods = {Method::NAG_SC};
    return e;
  }
  if (name == "fig3_nagc") {
    Vec z0(2);
    z0 << 1.0, 0.0;
    return trajectory_spec(name, "NAG-C and its ODEs on F = x^2/2", Method::NAG_C, "half_square", 0.1, 60, z0);
  }
  throw ConfigError("unknown builtin spec: " + name);
}

RowSetup rate_row_setup(const ExperimentSpec& spec, double s) {
  const double h = spec.grid_step(s);
  IntegratorConfig ic;
  ic.grid_step = h;
  ic.t_end = spec.T;
  const int N = ic.grid_points();
  const Problem problem = make_problem(spec.problem, spec.method);
  const DtaConfig cfg = make_config(spec.method, s, spec.mu);
  const LiftedState init = initial_state(spec.method, spec.z0, s, problem);

  ResolutionParams rp;
  rp.s = s;
  rp.mu = spec.mu;
  RowSetup out{run_dta(cfg, problem, init, N), make_resolution_rhs(spec.model, spec.ode_order, rp, problem),
               init.pack(), ic};
  if (out.X0.size() != out.field.dim) throw ConfigError(spec.name + ": model and method state layouts differ");
  return out;
}

RateRun rate_row(const ExperimentSpec& spec, double s) {
  try {
    RowSetup setup = rate_row_setup(spec, s);
    CertifiedTrajectory ct = integrate_certified(setup.field, setup.X0, setup.integrator);
    RateRun run;
    run.report = compute_errors(ct.trajectory, setup.dta, spec.projector, spec.grid_step(s));
    run.substeps = ct.substeps;
    run.richardson = ct.richardson;
    run.certified = ct.certified;
    return run;
  } catch (const BlowUpError& e) {
    throw ExperimentError(context(spec, s) + e.what() + " (last finite t=" + format_double(e.last_finite_time) +
                          ")");
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ExperimentError(context(spec, s) + e.what());
  }
}

std::string rates_csv(const ExperimentSpec& spec, const OrderTable& table) {
  std::ostringstream os;
  os << "# " << spec.anchor << "; spec=" << spec.name << "; method=" << method_name(spec.method)
     << "; ode=" << model_name(spec.model) << "; order=" << spec.ode_order << "; T=" << format_double(spec.T)
     << "; z0=";
  for (int i = 0; i < spec.z0.size(); ++i) os << (i ? " " : "") << format_double(spec.z0[i]);
  if (spec.sqrt_grid) os << "; the s column is the grid step sqrt(s_alg)";
  os << "\n";
  os << "s,E1,rate1,E2,rate2,E3,rate3\n";
  auto opt = [](const std::optional<double>& r) { return r ? format_double(*r) : std::string(); };
  for (const OrderRow& r : table.rows) {
    os << format_double(r.s) << ',' << format_double(r.E1) << ',' << opt(r.rate1) << ',' << format_double(r.E2)
       << ',' << opt(r.rate2) << ',' << format_double(r.E3) << ',' << opt(r.rate3) << "\n";
  }
  return os.str();
}

RatesResult cmd_rates(const ExperimentSpec& spec, Execution exec) {
  spec.validate_rates();
  const int n = static_cast<int>(spec.s_values.size());
  RatesResult res;
  res.runs.resize(static_cast<std::size_t>(n));
  parallel_for(n, exec, [&](int i) { res.runs[static_cast<std::size_t>(i)] = rate_row(spec, spec.s_values[i]); });

  std::vector<ErrorReport> reports;
  for (const RateRun& r : res.runs) reports.push_back(r.report);
  res.table = empirical_orders(reports);
  res.csv = rates_csv(spec, res.table);

  if (spec.expected_rates) {
    const OrderRow& last = res.table.rows.back();
    const std::array<std::optional<double>, 3> got{last.rate1, last.rate2, last.rate3};
    std::ostringstream os;
    for (int k = 0; k < 3; ++k) {
      const double want = (*spec.expected_rates)[k];
      const bool ok = got[k] && std::abs(*got[k] - want) <= spec.rate_tol;
      if (!ok) {
        res.regression_pass = false;
        os << "rate" << k + 1 << "=" << (got[k] ? format_double(*got[k]) : std::string("n/a")) << " expected "
           << format_double(want) << "+-" << format_double(spec.rate_tol) << "; ";
      }
    }
    res.regression_detail = res.regression_pass ? "finest-row rates match stored expectations" : os.str();
  }
  write_file(spec.output_path, res.csv);
  return res;
}

namespace {

struct Series {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};

void add_block(Series& out, const std::string& prefix, const Trajectory& traj, const Projector& proj, int N) {
  const int d = static_cast<int>(proj.apply(traj.states[0]).size());
  const std::size_t first = out.columns.size();
  for (int i = 0; i < d; ++i) {
    out.names.push_back(d == 1 ? prefix : prefix + "_" + std::to_string(i + 1));
    out.columns.emplace_back();
  }
  for (int k = 0; k <= N; ++k) {
    const Vec p = proj.apply(traj.states[static_cast<std::size_t>(k)]);
    for (int i = 0; i < d; ++i) out.columns[first + static_cast<std::size_t>(i)].push_back(p[i]);
  }
}

std::vector<std::pair<std::string, Model>> companion_models(Method m) {
  switch (m) {
    case Method::PDHG:
    case Method::CP: return {{"o0", Model::PDHG}, {"o1", Model::PDHG}};
    case Method::HB: return {{"o0", Model::HB_POLYAK}, {"o1", Model::HB_POLYAK}, {"shi", Model::SHI_HB}};
    case Method::NAG_SC: return {{"o0", Model::NAG_SC}, {"o1", Model::NAG_SC}, {"shi", Model::SHI_NAG_SC}};
    case Method::NAG_C: return {{"o0", Model::LOW_RES_AVD}, {"o1", Model::NAG_C}, {"shi", Model::SHI_NAG_C}};
    default: break;
  }
  throw ConfigError(std::string("no trajectory companions for ") + method_name(m));
}

std::vector<std::string> trajectory_columns(const ExperimentSpec& spec) {
  std::vector<std::string> cols{"t"};
  std::vector<Method> methods{spec.method};
  methods.insert(methods.end(), spec.extra_methods.begin(), spec.extra_methods.end());
  for (Method m : methods) {
    const Problem problem = make_problem(spec.problem, m);
    const LiftedState init = initial_state(m, spec.z0, spec.s_values.at(0), problem);
    const int d = static_cast<int>(spec.projector.apply(init.pack()).size());
    std::vector<std::string> prefixes{lower_name(m)};
    for (const auto& c : companion_models(m)) prefixes.push_back(lower_name(m) + "_" + c.first);
    for (const std::string& p : prefixes)
      for (int i = 0; i < d; ++i) cols.push_back(d == 1 ? p : p + "_" + std::to_string(i + 1));
  }
  return cols;
}

}  // namespace

TrajectoryResult cmd_trajectory(const ExperimentSpec& spec) {
  if (spec.s_values.size() != 1) throw ConfigError(spec.name + ": trajectory experiments take one s value");
  const double s = spec.s_values[0];
  if (!(s > 0.0)) throw ConfigError(spec.name + ": s must be positive");
  const double h = spec.grid_step(s);
  int N = 0;
  if (spec.steps) {
    N = *spec.steps;
  } else {
    IntegratorConfig ic;
    ic.grid_step = h;
    ic.t_end = spec.T;
    N = ic.grid_points();
  }
  if (N < 0) throw ConfigError(spec.name + ": steps must be nonnegative");

  TrajectoryResult res;
  res.columns = trajectory_columns(spec);
  std::vector<double> times;

  if (N > 0) {
    Series series;
    std::vector<Method> methods{spec.method};
    methods.insert(methods.end(), spec.extra_methods.begin(), spec.extra_methods.end());
    double t0 = 0.0;
    try {
      for (Method m : methods) {
        const Problem problem = make_problem(spec.problem, m);
        const DtaConfig cfg = make_config(m, s, spec.mu);
        const LiftedState init = initial_state(m, spec.z0, s, problem);
        if (m == Method::NAG_C) t0 = init.t;
        add_block(series, lower_name(m), run_dta(cfg, problem, init, N), spec.projector, N);
        ResolutionParams rp;
        rp.s = s;
        rp.mu = spec.mu;
        IntegratorConfig ic;
        ic.grid_step = h;
        ic.t_end = N * h;
        for (const auto& c : companion_models(m)) {
          const int order = c.first == "o0" ? 0 : 1;
          const VectorField field = make_resolution_rhs(c.second, order, rp, problem);
          const Trajectory ode = integrate(field, init.pack(), ic);
          add_block(series, lower_name(m) + "_" + c.first, ode, spec.projector, N);
        }
      }
    } catch (const BlowUpError& e) {
      throw ExperimentError(context(spec, s) + e.what());
    } catch (const ConfigError&) {
      throw;
    } catch (const Error& e) {
      throw ExperimentError(context(spec, s) + e.what());
    }
    for (int k = 0; k <= N; ++k) {
      std::vector<double> row{t0 + k * h};
      for (const auto& col : series.columns) row.push_back(col[static_cast<std::size_t>(k)]);
      res.rows.push_back(std::move(row));
    }
  }

  std::ostringstream os;
  os << "# " << spec.anchor << "; spec=" << spec.name << "; s=" << format_double(s) << "; grid step="
     << format_double(h) << "; steps=" << N << "\n";
  for (std::size_t i = 0; i < res.columns.size(); ++i) os << (i ? "," : "") << res.columns[i];
  os << "\n";
  for (const auto& row : res.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_double(row[i]);
    os << "\n";
  }
  res.csv = os.str();
  write_file(spec.output_path, res.csv);
  return res;
}

Mat random_matrix(int m, int n, std::uint64_t seed) {
  if (m < 1 || n < 1) throw InputError("random_matrix: sizes must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  Mat A(m, n);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < m; ++i) A(i, j) = U(rng);
  return A;
}

namespace {

std::vector<double> distances(const Trajectory& traj, const Vec& x_star, const Projector& proj) {
  std::vector<double> d;
  d.reserve(traj.size());
  for (const Vec& X : traj.states) d.push_back((proj.apply(X) - x_star).norm());
  return d;
}

std::string series_csv(const std::string& comment, const std::vector<CounterexampleCase>& cases) {
  std::ostringstream os;
  os << "# " << comment << "\n";
  os << "k";
  for (const auto& c : cases) os << "," << c.label;
  os << "\n";
  std::size_t n = 0;
  for (const auto& c : cases) n = std::max(n, c.distances.size());
  for (std::size_t k = 0; k < n; ++k) {
    os << k;
    for (const auto& c : cases) os << "," << (k < c.distances.size() ? format_double(c.distances[k]) : "");
    os << "\n";
  }
  return os.str();
}

CounterexampleReport lessard_case(const CounterexampleOverrides& ov) {
  const ObjectiveOracle F = make_lessard();
  const double x0v = ov.x0.value_or(3.25);
  const int steps = ov.steps.value_or(500);
  if (steps < 0) throw ConfigError("steps must be nonnegative");
  const double s = ov.s.value_or(1.0 / 9.0);
  const double beta = 4.0 / 9.0;
  const Vec x0 = Vec::Constant(1, x0v);
  const Vec zero = Vec::Zero(1);
  const NonconvergenceOptions nopts{50, 1e-3, Projector::block(0, 1)};

  CounterexampleReport rep;
  rep.which = "hb_lessard";

  Trajectory hb(std::sqrt(s));
  Vec prev = x0, cur = x0;
  hb.push(cur);
  for (int k = 0; k < steps; ++k) {
    Vec next = step_hb(cur, prev, F, beta, s);
    prev = cur;
    cur = next;
    hb.push(cur);
  }
  CounterexampleCase c_hb;
  c_hb.label = "hb";
  c_hb.verdict = detect_nonconvergence(hb, zero, nopts);
  c_hb.distances = distances(hb, zero, nopts.projector);
  rep.cases.push_back(std::move(c_hb));

  const ChbParams p = optimal_chb_params(1.0, 25.0);
  const Trajectory chb = run_chb(x0, zero, F, p, steps);
  std::vector<double> E;
  for (const Vec& X : chb.states) E.push_back(lyapunov_hb(X.head(1), X.tail(1), F, zero, p.eta, p.s));
  CounterexampleCase c_chb;
  c_chb.label = "chb";
  c_chb.corrected = true;
  c_chb.verdict = detect_nonconvergence(chb, zero, nopts);
  c_chb.certificate = certify_envelope(E, 1.0 / (1.0 + p.rho()), 1e-12);
  c_chb.certificate_kind = "E_k <= (1 + rho)^-k E_0";
  c_chb.distances = distances(chb, zero, nopts.projector);
  rep.pass = c_chb.certificate->pass && c_chb.verdict == Verdict::Converged;
  rep.cases.push_back(std::move(c_chb));

  rep.csv = series_csv("Lessard counterexample; HB beta=4/9 s=" + format_double(s) +
                           "; cHB eta=205/441 s=1764/42025; x0=" + format_double(x0v),
                       rep.cases);
  return rep;
}

CounterexampleReport bilinear_case(const CounterexampleOverrides& ov) {
  const std::uint64_t seed = ov.seed.value_or(42);
  const int steps = ov.steps.value_or(2000);
  if (steps < 0) throw ConfigError("steps must be nonnegative");
  const std::vector<std::pair<int, int>> sizes{{1, 1}, {5, 8}, {50, 50}};

  CounterexampleReport rep;
  rep.which = "pdhg_bilinear";
  rep.seed = seed;
  std::ostringstream comment;
  comment << "bilinear counterexample; A uniform on [-1,1], seed=" << seed
          << "; cPDHG eta1=3/2 eta2=1/12 theta=1";

  for (const auto& [m, n] : sizes) {
    const Mat A = random_matrix(m, n, seed);
    Eigen::JacobiSVD<Mat> svd(A);
    const Vec sv = svd.singularValues();
    const double smax = sv(0);
    double smin = smax;
    for (int i = 0; i < sv.size(); ++i)
      if (sv(i) > 1e-12 * smax) smin = sv(i);
    const double s = ov.s.value_or(0.5 / smax);
    const Vec z0 = Vec::Constant(m + n, ov.x0.value_or(1.0));
    const SaddleSystem sys0 = make_bilinear(A, 0.0);
    const Mat Q = sys0.Q();
    const Vec z_star = z0 - Q.completeOrthogonalDecomposition().solve(Q * z0);
    const std::string tag = std::to_string(m) + "x" + std::to_string(n);
    const NonconvergenceOptions nopts{50, 1e-3, Projector::full()};

    Problem prob;
    prob.saddle = sys0;
    const Trajectory pd = run_dta(minimax_config(Method::PDHG, s), prob, LiftedState::plain(z0), steps);
    CounterexampleCase c_pd;
    c_pd.label = "pdhg_" + tag;
    c_pd.verdict = detect_nonconvergence(pd, z_star, nopts);
    c_pd.distances = distances(pd, z_star, nopts.projector);
    rep.cases.push_back(std::move(c_pd));

    const SaddleSystem sys1 = make_bilinear(A, 1.0);
    CpdhgParams p;
    p.s = s;
    const Trajectory cp = run_cpdhg(z0, sys1, p, steps);
    std::vector<double> E;
    for (const Vec& z : cp.states) E.push_back(lyapunov_saddle(z, z_star));
    CounterexampleCase c_cp;
    c_cp.label = "cpdhg_" + tag;
    c_cp.corrected = true;
    c_cp.verdict = detect_nonconvergence(cp, z_star, nopts);
    c_cp.certificate = certify_envelope(E, 1.0 - p.C2() * smin * smin, 1e-12);
    c_cp.certificate_kind = "E_k <= (1 - C2 sigma_min^2)^k E_0";
    c_cp.distances = distances(cp, z_star, nopts.projector);
    rep.pass = rep.pass && c_cp.certificate->pass;
    rep.cases.push_back(std::move(c_cp));
    comment << "; " << tag << " s=" << format_double(s);
  }
  rep.csv = series_csv(comment.str(), rep.cases);
  return rep;
}

}  // namespace

CounterexampleReport cmd_counterexample(const std::string& which, const CounterexampleOverrides& ov) {
  CounterexampleReport rep;
  if (which == "hb_lessard")
    rep = lessard_case(ov);
  else if (which == "pdhg_bilinear")
    rep = bilinear_case(ov);
  else
    throw ConfigError("unknown counterexample: " + which);
  write_file(ov.output_path, rep.csv);
  return rep;
}

namespace {

template <class F>
double parallel_max(int n, Execution exec, F&& body) {
  std::vector<double> vals(static_cast<std::size_t>(n), 0.0);
  parallel_for(n, exec, [&](int i) { vals[static_cast<std::size_t>(i)] = body(i); });
  double worst = -std::numeric_limits<double>::infinity();
  for (double v : vals) worst = std::max(worst, std::isnan(v) ? std::numeric_limits<double>::infinity() : v);
  return worst;
}

double parallel_min(int n, Execution exec, const std::function<double(int)>& body) {
  return -parallel_max(n, exec, [&](int i) { return -body(i); });
}

PropertyResult result(const std::string& name, bool pass, const std::string& detail) {
  return PropertyResult{name, pass, detail};
}

Mat random_spd(std::mt19937_64& rng, int n, double lo, double hi) {
  const Mat R = random_matrix(n, n, rng());
  Eigen::HouseholderQR<Mat> qr(R);
  const Mat U = qr.householderQ();
  Vec ev = random_vec(rng, n, lo, hi);
  ev(0) = lo;
  ev(n - 1) = hi;
  return U * ev.asDiagonal() * U.transpose();
}

}  // namespace

PropertyResult check_fixed_point(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const Mat P = random_spd(rng, 3, 1.0, 10.0);
  Problem prob;
  prob.F = make_quadratic(P);
  prob.prox = make_quadratic_prox(random_spd(rng, 3, 1.0, 2.0));
  const double mu = prob.F->mu;
  bool ok = true;
  std::string bad;
  auto check = [&](const std::string& what, const Vec& X, const Vec& Y) {
    if (!(X.array() == Y.array()).all()) {
      ok = false;
      bad += what + " ";
    }
  };
  for (int trial = 0; trial < 20; ++trial) {
    Vec X2 = random_vec(rng, 6, -1.0, 1.0);
    Vec X3 = random_vec(rng, 7, -1.0, 1.0);
    X3(6) = 1.0 + std::abs(X3(6));
    check("hb", lifted_map(LiftVariant::HB_XV, X2, 0.0, hb_polyak_config(mu, 0.01), prob), X2);
    check("nag-sc", lifted_map(LiftVariant::NAG_XV, X2, 0.0, nag_sc_config(mu, 0.01), prob), X2);
    check("nag-c", lifted_map(LiftVariant::NAGC_XVT, X3, 0.0, nag_c_config(0.01), prob), X3);
    check("amd", lifted_map(LiftVariant::AMD_XZT, X3, 0.0, amd_config(0.01), prob), X3);
  }
  const SaddleSystem sys = make_bilinear(random_matrix(2, 3, rng()), 1.0);
  for (MinimaxScheme sc : {MinimaxScheme::GDA, MinimaxScheme::PPM, MinimaxScheme::EGM, MinimaxScheme::PDHG_CP}) {
    const AffineMapSeries ser = minimax_affine_series(sys, sc, 1);
    if (!ser.G[0].isIdentity(0.0) || !ser.c[0].isZero(0.0)) {
      ok = false;
      bad += "minimax-series ";
    }
  }
  return result("fixed-point", ok, ok ? "Phi(X, 0) = X for all templates and minimax series" : "failed: " + bad);
}

PropertyResult check_oracle_equivalence(std::uint64_t seed, double perturbation, Execution exec) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> dim(1, 4);
  const double s = 0.1;
  struct Case {
    MinimaxScheme scheme;
    Model model;
    double theta;
    const char* name;
  };
  const std::vector<Case> cases{{MinimaxScheme::GDA, Model::GDA, 0.0, "gda"},
                                {MinimaxScheme::PPM, Model::PPM, 0.0, "ppm"},
                                {MinimaxScheme::EGM, Model::EGM, 0.0, "egm"},
                                {MinimaxScheme::PDHG_CP, Model::PDHG, 0.0, "pdhg"},
                                {MinimaxScheme::PDHG_CP, Model::PDHG, 1.0, "cp"}};
  double worst = 0.0;
  std::string worst_case;
  for (int inst = 0; inst < 3; ++inst) {
    const int m = dim(rng), n = dim(rng);
    const Mat A = random_matrix(m, n, rng());
    std::vector<Vec> pts;
    for (int i = 0; i < 100; ++i) pts.push_back(random_vec(rng, m + n, -1.0, 1.0));
    for (const Case& c : cases) {
      Problem prob;
      prob.saddle = make_bilinear(A, c.theta);
      const auto coeffs = resolution_coeffs_affine(minimax_affine_series(*prob.saddle, c.scheme, 1), 1);
      const VectorField rec = affine_resolution_field(coeffs, s, c.name);
      ResolutionParams rp;
      rp.s = s;
      rp.perturbation = perturbation;
      const VectorField closed = make_resolution_rhs(c.model, 1, rp, prob);
      const double err = parallel_max(100, exec, [&](int i) {
        return (rec(pts[static_cast<std::size_t>(i)]) - closed(pts[static_cast<std::size_t>(i)])).cwiseAbs().maxCoeff();
      });
      if (err > worst) {
        worst = err;
        worst_case = c.name;
      }
    }
  }
  const bool ok = worst <= 1e-12;
  return result("oracle-equivalence", ok,
                "max |affine recursion - closed form| = " + format_double(worst) +
                    (worst_case.empty() ? std::string() : " (" + worst_case + ")") + ", bound 1e-12");
}

PropertyResult check_lifted_equivalence(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int n = 3;
  Problem prob;
  prob.F = make_quadratic(random_spd(rng, n, 1.0, 10.0));
  prob.prox = make_quadratic_prox(random_spd(rng, n, 1.0, 2.0));
  const ObjectiveOracle& F = *prob.F;
  const double mu = F.mu;
  const double s = 0.01;
  const int K = 100;
  const Vec x0 = random_vec(rng, n, -1.0, 1.0);
  const Vec xp = random_vec(rng, n, -1.0, 1.0);
  double worst = 0.0;
  std::string where;
  auto track = [&](const char* name, double e) {
    if (!(e <= worst)) {
      worst = std::isnan(e) ? std::numeric_limits<double>::infinity() : e;
      where = name;
    }
  };

  {
    const DtaConfig cfg = hb_polyak_config(mu, s);
    const Trajectory direct = run_two_term(cfg, prob, x0, xp, K);
    const Trajectory lifted = run_dta(cfg, prob, lift_hb(x0, xp, s), K);
    double e = 0.0;
    for (int k = 0; k <= K; ++k) e = std::max(e, (direct.states[k] - lifted.states[k].head(n)).norm());
    track("hb", e);
  }
  {
    const DtaConfig cfg = nag_sc_config(mu, s);
    const double b = cfg.beta(0, cfg.tau());
    const Trajectory direct = run_two_term(cfg, prob, x0, xp, K);
    const Trajectory lifted = run_dta(cfg, prob, lift_nag(x0, xp, F, b, s * b, s), K);
    double e = 0.0;
    for (int k = 0; k <= K; ++k) e = std::max(e, (direct.states[k] - lifted.states[k].head(n)).norm());
    track("nag-sc", e);
  }
  {
    const DtaConfig cfg = nag_c_config(s);
    const Trajectory direct = run_two_term(cfg, prob, x0, x0, K);
    const Trajectory lifted = run_dta(cfg, prob, lift_nagc(x0, x0, 0, F, s), K);
    double e = 0.0;
    for (int k = 0; k <= K; ++k) {
      const Vec& xk = direct.states[k];
      const Vec y = k == 0 ? xk : Vec(xk + (k / (k + 3.0)) * (xk - direct.states[k - 1]));
      e = std::max(e, (y - lifted.states[k].head(n)).norm());
    }
    track("nag-c", e);
  }
  {
    const DtaConfig cfg = amd_config(s);
    const Vec z0 = random_vec(rng, n, -1.0, 1.0);
    const Trajectory lifted = run_dta(cfg, prob, lift_amd(x0, z0, 0, s), K);
    Vec x = x0, z = z0;
    double e = (lifted.states[0].head(2 * n) - (Vec(2 * n) << x, z).finished()).norm();
    for (int k = 0; k < K; ++k) {
      std::tie(x, z) = step_amd(x, z, k, F, *prob.prox, s);
      Vec xz(2 * n);
      xz << x, z;
      e = std::max(e, (lifted.states[k + 1].head(2 * n) - xz).norm());
    }
    track("amd", e);
  }
  const bool ok = worst <= 1e-10;
  return result("lifted-equivalence", ok,
                "max |lifted - direct| over 100 steps = " + format_double(worst) + " (" + where + "), bound 1e-10");
}

PropertyResult check_slp_cpdhg(std::uint64_t seed, Execution exec) {
  std::mt19937_64 rng(seed);
  struct Inst {
    std::string name;
    SaddleSystem sys;
    CpdhgParams p;
  };
  std::vector<Inst> insts;
  {
    SaddleSystem sys = make_quartic_saddle(1.0);
    CpdhgParams p;
    p.L = sys.lipschitz_L();
    p.s = p.max_step(1.0);
    insts.push_back({"quartic", sys, p});
  }
  {
    const Mat A = random_matrix(3, 3, rng());
    SaddleSystem sys = make_quadratic_saddle(A, 1.0, 1.0, 1.0);
    Eigen::JacobiSVD<Mat> svd(A);
    CpdhgParams p;
    p.L = 1.0;
    p.s = p.max_step(svd.singularValues()(0));
    insts.push_back({"quadratic", sys, p});
  }
  {
    const Mat A = random_matrix(4, 3, rng());
    Eigen::JacobiSVD<Mat> svd(A);
    CpdhgParams p;
    p.s = 0.5 / svd.singularValues()(0);
    insts.push_back({"bilinear", make_bilinear(A, 1.0), p});
  }
  double worst = std::numeric_limits<double>::infinity();
  std::string where;
  for (const Inst& in : insts) {
    const Vec zs = in.sys.z_star.value_or(Vec::Zero(in.sys.dim()));
    std::vector<Vec> pts;
    for (int i = 0; i < 1000; ++i) pts.push_back(random_vec(rng, in.sys.dim(), -1.0, 1.0));
    const double m = parallel_min(1000, exec, [&](int i) {
      return slp_margin_cpdhg(pts[static_cast<std::size_t>(i)], in.sys, in.p, zs);
    });
    if (m < worst) {
      worst = m;
      where = in.name;
    }
  }
  const bool ok = worst >= -1e-10;
  return result("slp-cpdhg", ok,
                "min margin over 3 x 1000 points = " + format_double(worst) + " (" + where + "), slack 1e-10");
}

PropertyResult check_slp_chb(std::uint64_t seed, Execution exec) {
  std::mt19937_64 rng(seed);
  struct Inst {
    std::string name;
    ObjectiveOracle F;
  };
  Mat P = Mat::Identity(2, 2);
  P(1, 1) = 25.0;
  const std::vector<Inst> insts{{"lessard", make_lessard()},
                                {"quadratic", make_quadratic(P)},
                                {"half-square", make_scaled_identity_quadratic(1, 1.0)}};
  double worst = std::numeric_limits<double>::infinity();
  std::string where;
  for (const Inst& in : insts) {
    const ChbParams p = optimal_chb_params(in.F.mu, in.F.lipschitz_L);
    const int n = in.F.dim;
    const Vec xs = in.F.minimizer.value_or(Vec::Zero(n));
    std::vector<Vec> pts;
    for (int i = 0; i < 1000; ++i) pts.push_back(random_vec(rng, 2 * n, -5.0, 5.0));
    const double m = parallel_min(1000, exec, [&](int i) {
      const Vec& X = pts[static_cast<std::size_t>(i)];
      return slp_margin_chb(X.head(n), X.tail(n), in.F, p, xs);
    });
    if (m < worst) {
      worst = m;
      where = in.name;
    }
  }
  const bool ok = worst >= -1e-10;
  return result("slp-chb", ok,
                "min margin over 3 x 1000 points = " + format_double(worst) + " (" + where + "), slack 1e-10");
}

PropertyResult check_step_contraction() {
  std::ostringstream os;
  bool ok = true;
  auto note = [&](const std::string& name, const ContractionVerdict& v) {
    ok = ok && v.pass;
    os << name << " worst excess " << format_double(v.worst_excess) << (v.pass ? "" : " FAIL") << "; ";
  };
  {
    const ObjectiveOracle F = make_lessard();
    const ChbParams p = optimal_chb_params(1.0, 25.0);
    const Vec zero = Vec::Zero(1);
    const Trajectory tr = run_chb(Vec::Constant(1, 3.25), zero, F, p, 500);
    std::vector<double> E;
    for (const Vec& X : tr.states) E.push_back(lyapunov_hb(X.head(1), X.tail(1), F, zero, p.eta, p.s));
    note("chb-lessard", certify_contraction(E, p.rho(), 1e-12));
  }
  {
    Mat P = Mat::Identity(2, 2);
    P(1, 1) = 25.0;
    const ObjectiveOracle F = make_quadratic(P);
    const ChbParams p = optimal_chb_params(F.mu, F.lipschitz_L);
    const Vec zero = Vec::Zero(2);
    const Trajectory tr = run_chb(Vec::Ones(2), zero, F, p, 500);
    std::vector<double> E;
    for (const Vec& X : tr.states) E.push_back(lyapunov_hb(X.head(2), X.tail(2), F, zero, p.eta, p.s));
    note("chb-quadratic", certify_contraction(E, p.rho(), 1e-12));
  }
  {
    const SaddleSystem sys = make_quartic_saddle(1.0);
    CpdhgParams p;
    p.L = sys.lipschitz_L();
    p.s = p.max_step(1.0);
    const Trajectory tr = run_cpdhg(Vec::Constant(2, 0.5), sys, p, 500);
    note("cpdhg-quartic", certify_contraction_cpdhg(tr, sys, p, Vec::Zero(2), 1e-12));
  }
  {
    const Mat A = random_matrix(3, 3, 7);
    const SaddleSystem sys = make_quadratic_saddle(A, 1.0, 1.0, 1.0);
    Eigen::JacobiSVD<Mat> svd(A);
    CpdhgParams p;
    p.L = 1.0;
    p.s = p.max_step(svd.singularValues()(0));
    const Trajectory tr = run_cpdhg(Vec::Ones(6), sys, p, 500);
    note("cpdhg-quadratic", certify_contraction_cpdhg(tr, sys, p, Vec::Zero(6), 1e-12));
  }
  return result("step-contraction", ok, os.str());
}

PropertyResult check_rk4_order() {
  VectorField f;
  f.dim = 1;
  f.rhs = [](const Vec& x) -> Vec { return -x; };
  const Vec x0 = Vec::Ones(1);
  auto err = [&](int sub) {
    const Trajectory tr = integrate(f, x0, IntegratorConfig{sub, 0.1, 1.0});
    return std::abs(tr.back()(0) - std::exp(-1.0));
  };
  const double e1 = err(1), e2 = err(2);
  const double factor = e1 / e2;
  const bool ok = factor >= 12.0 && factor <= 20.0;
  return result("rk4-order", ok, "error ratio under step halving = " + format_double(factor) + ", band [12, 20]");
}

PropertyResult check_richardson(const std::vector<ExperimentSpec>& specs, Execution exec) {
  const int n = static_cast<int>(specs.size());
  std::vector<double> est(static_cast<std::size_t>(n));
  std::vector<int> subs(static_cast<std::size_t>(n));
  parallel_for(n, exec, [&](int i) {
    const ExperimentSpec& sp = specs[static_cast<std::size_t>(i)];
    RowSetup setup = rate_row_setup(sp, sp.s_values.back());
    IntegratorConfig ic = setup.integrator;
    double r = richardson_check(setup.field, setup.X0, ic);
    while (r > 1e-12 && 2 * ic.substeps_per_grid < 1024) {
      ic.substeps_per_grid *= 2;
      r = richardson_check(setup.field, setup.X0, ic);
    }
    est[static_cast<std::size_t>(i)] = r;
    subs[static_cast<std::size_t>(i)] = ic.substeps_per_grid;
  });
  bool ok = true;
  std::ostringstream os;
  for (int i = 0; i < n; ++i) {
    const bool pass = est[static_cast<std::size_t>(i)] <= 1e-12;
    ok = ok && pass;
    os << specs[static_cast<std::size_t>(i)].name << "=" << format_double(est[static_cast<std::size_t>(i)]) << "@"
       << subs[static_cast<std::size_t>(i)] << (pass ? "" : " FAIL") << "; ";
  }
  return result("richardson", ok, os.str());
}

PropertyResult check_order1_capability(bool disable_hessian) {
  ObjectiveOracle F = make_scaled_identity_quadratic(1, 1.0);
  Problem with;
  with.F = disable_hessian ? without_hessian(F) : F;
  Problem without;
  without.F = without_hessian(F);
  ResolutionParams rp;
  rp.s = 0.01;
  rp.mu = 1.0;
  try {
    (void)make_resolution_rhs(Model::NAG_SC, 1, rp, with);
  } catch (const CapabilityError& e) {
    return result("order1-capability", false, std::string("capability error: ") + e.what());
  }
  try {
    (void)make_resolution_rhs(Model::NAG_SC, 1, rp, without);
  } catch (const CapabilityError&) {
    return result("order1-capability", true,
                  "order-1 NAG-SC field built; missing Hessian oracle reports a capability error");
  }
  return result("order1-capability", false, "missing Hessian oracle was not reported");
}

std::vector<PropertyResult> cmd_verify(const VerifyOptions& opts) {
  std::vector<ExperimentSpec> specs;
  for (const char* name : {"table1_pdhg", "table1_cp", "table2_pdhg", "table2_cp", "table3_hb", "table3_nag",
                           "table4_hb", "table4_nag"})
    specs.push_back(builtin_spec(name));
  std::vector<PropertyResult> out;
  auto guarded = [&](const std::string& name, const std::function<PropertyResult()>& f) {
    try {
      out.push_back(f());
    } catch (const std::exception& e) {
      out.push_back(result(name, false, std::string("error: ") + e.what()));
    }
  };
  guarded("fixed-point", [&] { return check_fixed_point(opts.seed); });
  guarded("oracle-equivalence", [&] { return check_oracle_equivalence(opts.seed, opts.perturbation, opts.exec); });
  guarded("lifted-equivalence", [&] { return check_lifted_equivalence(opts.seed); });
  guarded("slp-cpdhg", [&] { return check_slp_cpdhg(opts.seed, opts.exec); });
  guarded("slp-chb", [&] { return check_slp_chb(opts.seed, opts.exec); });
  guarded("step-contraction", [&] { return check_step_contraction(); });
  guarded("rk4-order", [&] { return check_rk4_order(); });
  guarded("richardson", [&] { return check_richardson(specs, opts.exec); });
  guarded("order1-capability", [&] { return check_order1_capability(opts.disable_hessian); });
  return out;
}

}  // namespace hires
