#include "doctest.h"

#include "hires/corrected.hpp"
#include "hires/dta.hpp"
#include "hires/experiments.hpp"
#include "hires/metrics.hpp"

#include <cmath>
#include <random>

using namespace hires;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Vec v1(double a) { return Vec::Constant(1, a); }
CpdhgParams xy_params() {
  CpdhgParams p;
  p.s = 0.5;
  p.eta1 = 1.5;
  p.eta2 = 1.0 / 12.0;
  p.theta = 1.0;
  return p;
}
std::vector<double> saddle_energies(const Trajectory& t, const Vec& z_star) {
  std::vector<double> E;
  for (const Vec& z : t.states) E.push_back(lyapunov_saddle(z, z_star));
  return E;
}
}  // namespace

TEST_CASE("cPDHG correction matrix and field on xy") {
  const SaddleSystem sys = make_bilinear(Mat::Constant(1, 1, 1.0), 1.0);
  const CpdhgParams p = xy_params();
  const Mat K = cpdhg_correction_matrix(sys, p);
  CHECK(K(0, 0) == 0.0);
  CHECK(K(0, 1) == doctest::Approx(4.0 / 3.0));
  CHECK(K(1, 0) == doctest::Approx(-5.0 / 3.0));
  CHECK(K(1, 1) == 0.0);
  const Vec G = cpdhg_field(sys, p)(v2(1, 1));
  CHECK(G[0] == doctest::Approx(-4.0 / 3.0));
  CHECK(G[1] == doctest::Approx(7.0 / 12.0));
  CHECK(cpdhg_field(sys, p)(v2(0, 0)).norm() == 0.0);
}

TEST_CASE("cPDHG step on xy") {
  const SaddleSystem sys = make_bilinear(Mat::Constant(1, 1, 1.0), 1.0);
  const CpdhgParams p = xy_params();
  const Vec z = step_cpdhg(v2(1, 1), sys, p);
  CHECK(z[0] == doctest::Approx(1.0 / 3.0));
  CHECK(z[1] == doctest::Approx(31.0 / 24.0));
  CHECK(step_cpdhg(v2(0, 0), sys, p).norm() == 0.0);
  const Vec euler = v2(1, 1) + p.s * cpdhg_field(sys, p)(v2(1, 1));
  CHECK((z.array() == euler.array()).all());
}

TEST_CASE("vanishing eta2 leaves a pure skew correction") {
  const SaddleSystem sys = make_quartic_saddle(0.3);
  CpdhgParams p;
  p.s = 0.05;
  p.eta1 = 1.0;
  p.eta2 = 0.0;
  p.theta = 0.3;
  const Mat K = cpdhg_correction_matrix(sys, p);
  CHECK((K - p.eta1 * sys.Q()).norm() == 0.0);
  // the strict window needs eta2 > 0, so the field itself is rejected
  CHECK_THROWS_AS(cpdhg_field(sys, p), ParameterError);
}

TEST_CASE("cPDHG parameter validation") {
  const SaddleSystem quartic = make_quartic_saddle(1.0);
  CpdhgParams p;
  p.L = 12.0;
  p.s = p.max_step(1.0);
  CHECK(p.s > 0.0);
  CHECK_NOTHROW(validate_cpdhg(quartic, p));
  CpdhgParams big = p;
  big.s = 1.01 * p.s;
  CHECK_THROWS_AS(validate_cpdhg(quartic, big), ParameterError);
  CpdhgParams window = p;
  window.eta1 = 0.1;
  CHECK_THROWS_AS(validate_cpdhg(quartic, window), ParameterError);
  CpdhgParams theta = p;
  theta.theta = -2.0;
  CHECK_THROWS_AS(validate_cpdhg(quartic, theta), ParameterError);
  CHECK(p.C1() > 0.0);
  CHECK(p.C2() > 0.0);
  CpdhgParams bil;
  CHECK(std::isinf(bil.max_step(3.0)));
}

TEST_CASE("cPDHG contracts on the quartic saddle") {
  const SaddleSystem sys = make_quartic_saddle(1.0);
  CpdhgParams p;
  p.L = 12.0;
  p.s = p.max_step(1.0);
  const Vec z_star = v2(0, 0);
  const Trajectory t = run_cpdhg(v2(0.5, 0.5), sys, p, 500);
  CHECK(certify_contraction_cpdhg(t, sys, p, z_star).pass);
  CHECK(certify_ergodic_cpdhg(t, sys, p, z_star).pass);
  const std::vector<double> E = saddle_energies(t, z_star);
  for (std::size_t k = 1; k < E.size(); ++k) CHECK(E[k] <= E[k - 1]);
}

TEST_CASE("cPDHG envelope on the 50 x 50 random bilinear instance") {
  const Mat A = random_matrix(50, 50, 42);
  const SaddleSystem sys = make_bilinear(A, 1.0);
  const Eigen::JacobiSVD<Mat> svd(A);
  CpdhgParams p;
  p.s = 0.5 / svd.singularValues()(0);
  const double smin = svd.singularValues()(49);
  const Vec z_star = Vec::Zero(100);
  const Trajectory t = run_cpdhg(Vec::Ones(100), sys, p, 500);
  const std::vector<double> E = saddle_energies(t, z_star);
  CHECK(certify_envelope(E, 1.0 - p.C2() * smin * smin).pass);
  CHECK(E.back() < E.front());
}

TEST_CASE("cPDHG strong Lyapunov margin on random points") {
  const SaddleSystem sys = make_quartic_saddle(1.0);
  CpdhgParams p;
  p.L = 12.0;
  p.s = p.max_step(1.0);
  std::mt19937_64 rng(42);
  for (int i = 0; i < 200; ++i) CHECK(slp_margin_cpdhg(random_vec(rng, 2, -1.0, 1.0), sys, p, v2(0, 0)) >= -1e-10);
}

TEST_CASE("cHB field") {
  const ObjectiveOracle F = make_scaled_identity_quadratic(1, 1.0);
  ChbParams p;
  p.mu = 1.0;
  p.L = 1.0;
  p.s = 1.0;
  p.eta = 0.1;
  const Vec G = chb_field(F, p)(v2(1.0, 0.0));
  CHECK(G[0] == doctest::Approx(-0.85));
  CHECK(G[1] == doctest::Approx(0.0));
  CHECK(chb_field(F, p)(v2(0.0, 0.0)).norm() == 0.0);

  SUBCASE("(x, v) and (x, w) forms agree") {
    ChbParams q = optimal_chb_params(2.0, 9.0);
    const ObjectiveOracle H = make_quartic(1, 0.5);
    std::mt19937_64 rng(4);
    const double rm = std::sqrt(q.mu);
    for (int i = 0; i < 20; ++i) {
      const Vec xv = random_vec(rng, 2, -2.0, 2.0);
      const Vec xw = v2(xv[0], xv[1] / rm + xv[0]);
      const Vec dxv = chb_field_xv(H, q)(xv);
      const Vec dxw = chb_field(H, q)(xw);
      CHECK(std::abs(dxv[0] - dxw[0]) < 1e-12);
      CHECK(std::abs(dxv[1] / rm + dxv[0] - dxw[1]) < 1e-12);
    }
  }
}

TEST_CASE("optimal cHB parameters") {
  SUBCASE("mu = 1, L = 25") {
    const ChbParams p = optimal_chb_params(1.0, 25.0);
    CHECK(p.eta == doctest::Approx(205.0 / 441.0).epsilon(1e-14));
    CHECK(p.s == doctest::Approx(1764.0 / 42025.0).epsilon(1e-14));
    CHECK(p.rho() == doctest::Approx(6.0 / 41.0).epsilon(1e-14));
    CHECK(3.0 * p.q() == doctest::Approx(2.0 / 7.0).epsilon(1e-14));
    CHECK(p.b() == doctest::Approx(15.0 / 26.0).epsilon(1e-14));
    CHECK_NOTHROW(p.validate());
    CHECK(p.step_condition_holds());
  }
  SUBCASE("mu = L") {
    for (double L : {1.0, 4.0}) {
      const ChbParams p = optimal_chb_params(L, L);
      CHECK(p.eta == doctest::Approx(17.0 / 81.0).epsilon(1e-14));
      CHECK(p.s == doctest::Approx(324.0 / (289.0 * L)).epsilon(1e-14));
      CHECK(p.rho() == doctest::Approx(6.0 / 17.0).epsilon(1e-14));
      CHECK(p.step_condition_holds());
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(optimal_chb_params(0.0, 1.0), ParameterError);
    CHECK_THROWS_AS(optimal_chb_params(2.0, 1.0), ParameterError);
    ChbParams bad = optimal_chb_params(1.0, 25.0);
    bad.eta = 10.0;
    CHECK_THROWS_AS(bad.validate(), ParameterError);
    CHECK_THROWS_AS(chb_field(make_lessard(), bad), ParameterError);
  }
}

TEST_CASE("cHB step") {
  const ObjectiveOracle F = make_scaled_identity_quadratic(1, 1.0);
  const ChbParams p = optimal_chb_params(1.0, 1.0);
  SUBCASE("fixed point") {
    const auto [x, w] = step_chb(v1(0.0), v1(0.0), F, p);
    CHECK(x[0] == 0.0);
    CHECK(w[0] == 0.0);
  }
  SUBCASE("closed-form divisions from (1, 1)") {
    const double rs = std::sqrt(p.s);
    const double q = p.q();
    const double a = 1.0 - 3.0 * q;
    const double c = 0.5 * (2.0 + 5.0 * q);
    const double x1 = (1.0 + rs * a * 1.0 - 1.5 * p.eta * p.s * 1.0) / (1.0 + rs * a);
    const double w1 = (1.0 + rs * c * x1 - rs * c * x1) / (1.0 + rs * c);
    const auto [x, w] = step_chb(v1(1.0), v1(1.0), F, p);
    CHECK(x[0] == doctest::Approx(x1).epsilon(1e-15));
    CHECK(w[0] == doctest::Approx(w1).epsilon(1e-15));
  }
  SUBCASE("small steps move little") {
    ChbParams tiny = p;
    double prev = 0.0;
    for (double s : {1e-4, 1e-6}) {
      tiny.s = s;
      const auto [x, w] = step_chb(v1(1.0), v1(0.5), F, tiny);
      const double d = std::hypot(x[0] - 1.0, w[0] - 0.5);
      if (prev > 0.0) CHECK(prev / d == doctest::Approx(10.0).epsilon(0.05));
      prev = d;
    }
  }
}

TEST_CASE("cHB on the Lessard objective") {
  const ObjectiveOracle F = make_lessard();
  const ChbParams p = optimal_chb_params(1.0, 25.0);
  const Trajectory t = run_chb(v1(3.25), v1(0.0), F, p, 500);
  std::vector<double> E;
  for (const Vec& X : t.states) E.push_back(lyapunov_hb(X.head(1), X.tail(1), F, v1(0.0), p.eta, p.s));
  const ContractionVerdict step = certify_contraction(E, p.rho());
  CHECK(step.pass);
  CHECK(certify_envelope(E, 1.0 / (1.0 + p.rho())).pass);
  CHECK(std::abs(t.back()[0]) < 1e-8);
  NonconvergenceOptions o;
  o.projector = Projector::block(0, 1);
  CHECK(detect_nonconvergence(t, v1(0.0), o) == Verdict::Converged);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 200; ++i) {
    const Vec X = random_vec(rng, 2, -5.0, 5.0);
    CHECK(slp_margin_chb(X.head(1), X.tail(1), F, p, v1(0.0)) >= -1e-10);
  }
}

TEST_CASE("uncorrected HB cycles on the Lessard objective") {
  Problem pr;
  pr.F = make_lessard();
  const DtaConfig cfg = hb_polyak_config(1.0, 1.0 / 9.0);
  CHECK(cfg.beta(0, cfg.tau()) == doctest::Approx(4.0 / 9.0));
  const Trajectory t = run_two_term(cfg, pr, v1(3.25), v1(3.25), 500);
  CHECK(detect_nonconvergence(t, v1(0.0)) == Verdict::Cycling);
}

TEST_CASE("certificates") {
  SUBCASE("constant trajectory at the optimum passes") {
    const std::vector<double> E(10, 0.0);
    CHECK(certify_contraction(E, 0.5).pass);
    CHECK(certify_envelope(E, 0.5).pass);
  }
  SUBCASE("violations carry the first index") {
    const ContractionVerdict v = certify_contraction({1.0, 0.5, 0.6, 0.1}, 0.5);
    CHECK_FALSE(v.pass);
    REQUIRE(v.first_violation.has_value());
    CHECK(*v.first_violation == 1);
    CHECK(v.worst_excess == doctest::Approx(0.6 - 0.5 / 1.5));
    const ContractionVerdict e = certify_envelope({1.0, 0.5, 0.3}, 0.5);
    CHECK_FALSE(e.pass);
    CHECK(*e.first_violation == 2);
  }
}
