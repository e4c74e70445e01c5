#include "hires/experiments.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>

using namespace hires;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string rates_text(const OrderRow& r) {
  std::ostringstream os;
  os << "(" << format_double(std::round(r.rate1.value_or(NAN) * 1000) / 1000) << ", "
     << format_double(std::round(r.rate2.value_or(NAN) * 1000) / 1000) << ", "
     << format_double(std::round(r.rate3.value_or(NAN) * 1000) / 1000) << ")";
  return os.str();
}

bool within(const std::optional<double>& v, double target, double tol) {
  return v.has_value() && std::abs(*v - target) <= tol;
}

ExperimentSpec short_horizon(const char* name) {
  ExperimentSpec s = builtin_spec(name);
  s.T = 5.0;
  s.steps.reset();
  return s;
}

Outcome table2() {
  const auto t0 = std::chrono::steady_clock::now();
  const RatesResult pd = cmd_rates(builtin_spec("table2_pdhg"));
  const RatesResult cp = cmd_rates(builtin_spec("table2_cp"));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const OrderRow& a = pd.table.rows.back();
  const OrderRow& b = cp.table.rows.back();
  const bool ok = within(a.rate1, 2.94, 0.10) && within(a.rate2, 1.01, 0.10) && within(a.rate3, 2.00, 0.10) &&
                  within(b.rate1, 2.95, 0.10) && within(b.rate2, 1.00, 0.10) && within(b.rate3, 2.00, 0.10) &&
                  secs < 10.0;
  return {ok, "PDHG " + rates_text(a) + ", CP " + rates_text(b) + ", runtime " +
                  format_double(std::round(secs * 100) / 100) + " s"};
}

Outcome table1() {
  bool ok = true;
  std::string detail;
  for (const char* name : {"table1_pdhg", "table1_cp"}) {
    const OrderRow& r = cmd_rates(builtin_spec(name)).table.rows.back();
    ok = ok && within(r.rate2, 0.0, 0.05) && within(r.rate3, 1.0, 0.05);
    detail += std::string(name) + " " + rates_text(r) + " ";
  }
  return {ok, detail};
}

Outcome tables34() {
  bool ok = true;
  std::string detail;
  const std::pair<const char*, std::array<double, 3>> cases[] = {{"table3_hb", {2.0, 0.0, 1.0}},
                                                                 {"table3_nag", {2.0, 0.0, 1.0}},
                                                                 {"table4_hb", {3.0, 1.0, 2.0}},
                                                                 {"table4_nag", {3.0, 1.0, 2.0}}};
  for (const auto& [name, want] : cases) {
    const OrderRow& r = cmd_rates(short_horizon(name)).table.rows.back();
    ok = ok && within(r.rate1, want[0], 0.15) && within(r.rate2, want[1], 0.15) && within(r.rate3, want[2], 0.15);
    detail += std::string(name) + " " + rates_text(r) + " ";
  }
  return {ok, detail + "(T = 5)"};
}

Outcome lessard() {
  const CounterexampleReport r = cmd_counterexample("hb_lessard");
  const CounterexampleCase& hb = r.cases.at(0);
  const CounterexampleCase& chb = r.cases.at(1);
  const auto tail = hb.distances.end() - 100;
  const double lo = *std::min_element(tail, hb.distances.end());
  const double hi = *std::max_element(tail, hb.distances.end());
  const bool hb_ok = hb.verdict == Verdict::Cycling && lo >= 0.5 && hi <= 10.0;
  std::size_t reach = chb.distances.size();
  for (std::size_t k = 0; k < chb.distances.size(); ++k)
    if (chb.distances[k] < 1e-8) {
      reach = k;
      break;
    }
  const bool chb_ok = chb.certificate && chb.certificate->pass && chb.distances.size() >= 501 && reach <= 400;
  std::ostringstream os;
  os << "HB " << verdict_name(hb.verdict) << " with final-100 distance in [" << lo << ", " << hi << "]; cHB envelope "
     << (chb.certificate && chb.certificate->pass ? "holds" : "violated") << ", |x_k| < 1e-8 at k = " << reach;
  return {hb_ok && chb_ok, os.str()};
}

Outcome bilinear() {
  const CounterexampleReport r = cmd_counterexample("pdhg_bilinear");
  const CounterexampleCase* pd = nullptr;
  const CounterexampleCase* cp = nullptr;
  for (const auto& c : r.cases) {
    if (c.label == "pdhg_50x50") pd = &c;
    if (c.label == "cpdhg_50x50") cp = &c;
  }
  if (!pd || !cp) return {false, "50 x 50 cases missing"};
  const Mat A = random_matrix(50, 50, 42);
  const double smin = Eigen::JacobiSVD<Mat>(A).singularValues()(49);
  const bool ok = pd->verdict != Verdict::Converged && smin > 0.0 && cp->certificate && cp->certificate->pass;
  std::ostringstream os;
  os << "PDHG " << verdict_name(pd->verdict) << " after 2000 steps (distance " << pd->distances.back()
     << "); cPDHG envelope " << (cp->certificate->pass ? "holds" : "violated") << ", worst excess "
     << cp->certificate->worst_excess << ", sigma_min " << smin;
  return {ok, os.str()};
}

Outcome property(const PropertyResult& p) { return {p.pass, p.detail}; }

Outcome lyapunov() {
  const PropertyResult a = check_slp_cpdhg(42, Execution::Parallel);
  const PropertyResult b = check_slp_chb(42, Execution::Parallel);
  const PropertyResult c = check_step_contraction();
  return {a.pass && b.pass && c.pass, a.detail + " | " + b.detail + " | " + c.detail};
}

Outcome integrator() {
  std::vector<ExperimentSpec> specs;
  for (const char* name : {"table1_pdhg", "table1_cp", "table2_pdhg", "table2_cp"}) specs.push_back(builtin_spec(name));
  for (const char* name : {"table3_hb", "table3_nag", "table4_hb", "table4_nag"}) specs.push_back(short_horizon(name));
  const PropertyResult r = check_richardson(specs, Execution::Parallel);
  const PropertyResult o = check_rk4_order();
  return {r.pass && o.pass, r.detail + "| " + o.detail};
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"table 2 rates and runtime", table2},
      {"table 1 order-0 stagnation", table1},
      {"tables 3-4 rates", tables34},
      {"Lessard counterexample", lessard},
      {"bilinear counterexample", bilinear},
      {"oracle equivalence", [] { return property(check_oracle_equivalence(42, 0.0, Execution::Parallel)); }},
      {"lifted-template equivalence", [] { return property(check_lifted_equivalence(42)); }},
      {"strong Lyapunov and step contraction", lyapunov},
      {"integrator certification", integrator},
  };
  int failed = 0;
  int index = 0;
  for (const auto& [name, run] : criteria) {
    ++index;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("criterion %d %s: %s: %s\n", index, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
