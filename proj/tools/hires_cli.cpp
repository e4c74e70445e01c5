#include "hires/config.hpp"
#include "hires/experiments.hpp"

#include "CLI11.hpp"

#include <iostream>

namespace {

using namespace hires;

struct CommonFlags {
  std::string s;
  std::optional<double> T;
  std::optional<int> steps;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  bool serial = false;

  void attach(CLI::App* app) {
    app->add_option("--s", s, "step sizes, comma separated");
    app->add_option("--T", T, "time horizon");
    app->add_option("--steps", steps, "number of iterations");
    app->add_option("--out", out, "output CSV path");
    app->add_option("--seed", seed, "random seed");
  }

  ConfigOverrides overrides() const {
    ConfigOverrides ov;
    if (!s.empty()) ov.s = parse_real_list(s);
    ov.T = T;
    ov.steps = steps;
    ov.out = out;
    ov.seed = seed;
    return ov;
  }
};

int run_rates(const std::string& arg, const CommonFlags& flags) {
  const ExperimentSpec spec = resolve_spec(arg, flags.overrides());
  const RatesResult res = cmd_rates(spec, flags.serial ? Execution::Serial : Execution::Parallel);
  std::cout << res.csv;
  if (spec.expected_rates) {
    std::cout << "# regression: " << (res.regression_pass ? "PASS" : "FAIL") << " " << res.regression_detail << "\n";
  }
  for (const RateRun& r : res.runs)
    if (!r.certified) std::cerr << "warning: integrator not certified at s=" << format_double(r.report.s) << "\n";
  return res.regression_pass ? 0 : 1;
}

int run_trajectory(const std::string& arg, const CommonFlags& flags) {
  const ExperimentSpec spec = resolve_spec(arg, flags.overrides());
  const TrajectoryResult res = cmd_trajectory(spec);
  if (spec.output_path.empty())
    std::cout << res.csv;
  else
    std::cout << "wrote " << res.rows.size() << " rows to " << spec.output_path << "\n";
  return 0;
}

int run_counterexample(const std::string& which, const CommonFlags& flags, std::optional<double> x0) {
  CounterexampleOverrides ov;
  ov.x0 = x0;
  if (!flags.s.empty()) {
    const std::vector<double> s = parse_real_list(flags.s);
    if (s.size() != 1) throw ConfigError("counterexample takes a single --s value");
    ov.s = s[0];
  }
  ov.steps = flags.steps;
  ov.seed = flags.seed;
  ov.output_path = flags.out.value_or("");
  const CounterexampleReport rep = cmd_counterexample(which, ov);
  for (const CounterexampleCase& c : rep.cases) {
    std::cout << c.label << ": verdict=" << verdict_name(c.verdict);
    if (c.certificate)
      std::cout << " certificate[" << c.certificate_kind << "]=" << (c.certificate->pass ? "pass" : "fail")
                << " worst_excess=" << format_double(c.certificate->worst_excess);
    if (!c.distances.empty()) std::cout << " final_distance=" << format_double(c.distances.back());
    std::cout << "\n";
  }
  if (ov.output_path.empty()) std::cout << rep.csv;
  std::cout << "overall: " << (rep.pass ? "PASS" : "FAIL") << "\n";
  return rep.pass ? 0 : 1;
}

int run_verify(const CommonFlags& flags, double perturbation, bool no_hessian) {
  VerifyOptions opts;
  opts.perturbation = perturbation;
  opts.disable_hessian = no_hessian;
  opts.exec = flags.serial ? Execution::Serial : Execution::Parallel;
  if (flags.seed) opts.seed = *flags.seed;
  bool ok = true;
  for (const PropertyResult& r : cmd_verify(opts)) {
    ok = ok && r.pass;
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-resolution ODE models of first-order methods: rate tables, trajectories, counterexamples"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string target;
  std::optional<double> x0;
  double perturbation = 0.0;
  bool no_hessian = false;

  auto* rates = app.add_subcommand("rates", "empirical convergence orders of a resolution ODE");
  rates->add_option("spec", target, "builtin spec name or config file")->required();
  flags.attach(rates);
  rates->add_flag("--serial", flags.serial, "run the s sweep serially");

  auto* traj = app.add_subcommand("trajectory", "trajectory CSV of iterates and ODE solutions");
  traj->add_option("spec", target, "builtin spec name or config file")->required();
  flags.attach(traj);

  auto* ce = app.add_subcommand("counterexample", "uncorrected versus corrected method");
  ce->add_option("which", target, "hb_lessard or pdhg_bilinear")->required();
  flags.attach(ce);
  ce->add_option("--x0", x0, "initial value");

  auto* verify = app.add_subcommand("verify", "run the invariant suite");
  verify->add_option("--perturb", perturbation, "relative perturbation of closed-form coefficients");
  verify->add_flag("--no-hessian", no_hessian, "drop the Hessian oracle of the order-1 NAG check");
  verify->add_option("--seed", flags.seed, "random seed");
  verify->add_flag("--serial", flags.serial, "run property sweeps serially");

  auto* list = app.add_subcommand("list", "list builtin specs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (rates->parsed()) return run_rates(target, flags);
    if (traj->parsed()) return run_trajectory(target, flags);
    if (ce->parsed()) return run_counterexample(target, flags, x0);
    if (verify->parsed()) return run_verify(flags, perturbation, no_hessian);
    if (list->parsed()) {
      for (const std::string& n : builtin_names()) std::cout << n << "\n";
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}
