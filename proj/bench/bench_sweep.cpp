#include "hires/experiments.hpp"

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

using namespace hires;

namespace {

template <class F>
double seconds(F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool row(const char* label, const std::function<std::string(Execution)>& run) {
  std::string serial, parallel;
  const double ts = seconds([&] { serial = run(Execution::Serial); });
  const double tp = seconds([&] { parallel = run(Execution::Parallel); });
  const bool same = serial == parallel;
  std::printf("%-28s serial %8.3f s  parallel %8.3f s  speedup %5.2fx  outputs %s\n", label, ts, tp, ts / tp,
              same ? "identical" : "DIFFER");
  return same;
}

}  // namespace

int main(int argc, char** argv) {
  const std::string spec = argc > 1 ? argv[1] : "table2_pdhg";
  std::printf("OpenMP threads: %d\n", omp_get_max_threads());
  bool ok = true;
  ok &= row(("rates " + spec).c_str(), [&](Execution e) { return cmd_rates(builtin_spec(spec), e).csv; });
  ok &= row("oracle-equivalence sweep", [](Execution e) { return check_oracle_equivalence(42, 0.0, e).detail; });
  ok &= row("slp-cpdhg sweep", [](Execution e) { return check_slp_cpdhg(42, e).detail; });
  ok &= row("slp-chb sweep", [](Execution e) { return check_slp_chb(42, e).detail; });
  return ok ? 0 : 1;
}
