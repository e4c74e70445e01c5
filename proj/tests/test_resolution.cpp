#include "doctest.h"

#include "hires/integrate.hpp"
#include "hires/resolution.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace hires;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
Mat skew2() {
  Mat A(2, 2);
  A << 0.0, 1.0, -1.0, 0.0;
  return A;
}
AffineMapSeries linear_series(const std::vector<Mat>& G) {
  AffineMapSeries s;
  s.order = static_cast<int>(G.size()) - 2;
  s.G = G;
  for (const Mat& g : G) s.c.push_back(Vec::Zero(g.rows()));
  return s;
}
Problem objective_problem(const ObjectiveOracle& F) {
  Problem p;
  p.F = F;
  return p;
}
double max_of(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }
}  // namespace

TEST_CASE("affine resolution coefficients of GDA on a rotation") {
  const Mat A = skew2();
  const Mat I = Mat::Identity(2, 2);
  const auto f = resolution_coeffs_affine(linear_series({I, -A, Mat::Zero(2, 2)}), 1);
  REQUIRE(f.size() == 2);
  CHECK((f[0].F + A).norm() < 1e-15);
  CHECK((f[1].F - 0.5 * I).norm() < 1e-15);
  CHECK((f[1].F + 0.5 * A * A).norm() < 1e-15);
}

TEST_CASE("affine resolution coefficients of PPM on a rotation") {
  const Mat A = skew2();
  const Mat I = Mat::Identity(2, 2);
  const auto f = resolution_coeffs_affine(linear_series({I, -A, A * A}), 1);
  CHECK((f[0].F + A).norm() < 1e-15);
  CHECK((f[1].F - 0.5 * A * A).norm() < 1e-15);
}

TEST_CASE("stationary map has zero resolution coefficients") {
  const Mat I = Mat::Identity(3, 3);
  const auto f = resolution_coeffs_affine(linear_series({I, Mat::Zero(3, 3), Mat::Zero(3, 3), Mat::Zero(3, 3)}), 2);
  for (const auto& fj : f) {
    CHECK(fj.F.norm() == 0.0);
    CHECK(fj.d.norm() == 0.0);
  }
}

TEST_CASE("affine series errors") {
  const Mat I = Mat::Identity(2, 2);
  CHECK_THROWS_AS(resolution_coeffs_affine(linear_series({I, I, I}), 2), InputError);
  CHECK_THROWS_AS(resolution_coeffs_affine(linear_series({2.0 * I, I, I}), 1), InputError);
  CHECK_THROWS_AS(minimax_affine_series(make_quartic_saddle(0.0), MinimaxScheme::GDA, 1), CapabilityError);
}

TEST_CASE("minimax series agree with the closed-form first-order fields") {
  std::mt19937_64 rng(21);
  const SaddleSystem sys = make_quadratic_saddle(Mat::Random(2, 3), 0.6, 0.9, 0.0);
  Problem p;
  p.saddle = sys;
  ResolutionParams rp;
  rp.s = 0.05;
  const std::pair<MinimaxScheme, Model> cases[] = {
      {MinimaxScheme::GDA, Model::GDA}, {MinimaxScheme::PPM, Model::PPM}, {MinimaxScheme::PDHG_CP, Model::PDHG}};
  for (const auto& [scheme, model] : cases) {
    const auto f = resolution_coeffs_affine(minimax_affine_series(sys, scheme, 1), 1);
    const VectorField series = affine_resolution_field(f, rp.s, "series");
    const VectorField closed = make_resolution_rhs(model, 1, rp, p);
    for (int i = 0; i < 5; ++i) {
      const Vec z = random_vec(rng, 5, -1.0, 1.0);
      CHECK((series(z) - closed(z)).norm() < 1e-12);
    }
  }
}

TEST_CASE("HB-Polyak first-order field vanishes at the equilibrium") {
  ResolutionParams rp;
  rp.s = 0.02;
  rp.mu = 1.0;
  const VectorField f = make_resolution_rhs(Model::HB_POLYAK, 1, rp, objective_problem(make_scaled_identity_quadratic(1, 1.0)));
  CHECK(f(v2(0.0, 0.0)).norm() == 0.0);
}

TEST_CASE("NAG-SC first-order field at (1,1)") {
  ResolutionParams rp;
  rp.s = 0.04;
  rp.mu = 1.0;
  const Problem p = objective_problem(make_scaled_identity_quadratic(1, 1.0));
  const Vec r1 = make_resolution_rhs(Model::NAG_SC, 1, rp, p)(v2(1.0, 1.0));
  CHECK(r1[0] == doctest::Approx(0.1));
  CHECK(r1[1] == doctest::Approx(-3.1));
  const Vec r0 = make_resolution_rhs(Model::NAG_SC, 0, rp, p)(v2(1.0, 1.0));
  CHECK(r0[0] == doctest::Approx(1.0));
  CHECK(r0[1] == doctest::Approx(-3.0));
}

TEST_CASE("PDHG first-order field on xy") {
  SaddleSystem sys = make_bilinear(Mat::Constant(1, 1, 1.0), 1.0);
  Problem p;
  p.saddle = sys;
  ResolutionParams rp;
  rp.s = 0.3;
  const Vec z = v2(1.0, 1.0);
  const Vec M = sys.M(z);
  const Mat K = sys.Q() + 2.0 * sys.Q_theta();
  const Vec expect = -M + 0.15 * K * M;
  CHECK((make_resolution_rhs(Model::PDHG, 1, rp, p)(z) - expect).norm() < 1e-15);
  // at theta = 1 the correction matrix has a nonzero symmetric part; Q alone has none
  CHECK((K + K.transpose()).norm() > 0.0);
}

TEST_CASE("order-1 fields need a Hessian-action oracle") {
  ResolutionParams rp;
  rp.s = 0.04;
  rp.mu = 1.0;
  const Problem p = objective_problem(without_hessian(make_quartic(1, 1.0)));
  CHECK_THROWS_AS(make_resolution_rhs(Model::NAG_SC, 1, rp, p), CapabilityError);
  CHECK_NOTHROW(make_resolution_rhs(Model::NAG_SC, 0, rp, p));
  CHECK_THROWS_AS(make_resolution_rhs(Model::NAG_SC, 2, rp, p), InputError);
}

TEST_CASE("generic finite-difference field matches the closed form for HB") {
  const ObjectiveOracle F = make_quartic(1, 1.0);
  const Problem p = objective_problem(F);
  const double s = 0.01;
  const DtaConfig cfg = hb_polyak_config(1.0, s);
  ParametricMap phi = [&](const Vec& X, double h) { return lifted_map(LiftVariant::HB_XV, X, h, cfg, p); };
  const VectorField gen = generic_first_order_field(phi, 2, std::sqrt(s), 1, "generic");
  ResolutionParams rp;
  rp.s = s;
  rp.mu = 1.0;
  const VectorField closed = make_resolution_rhs(Model::HB_POLYAK, 1, rp, p);
  const Vec X = v2(0.6, -0.3);
  CHECK((gen(X) - closed(X)).norm() < 1e-4);
}

TEST_CASE("second-order form residuals") {
  const ObjectiveOracle F = make_scaled_identity_quadratic(1, 1.0);
  SUBCASE("constant trajectory at the minimizer") {
    Trajectory t(0.1);
    for (int k = 0; k < 5; ++k) t.push(v2(0.0, 0.0));
    CHECK(max_of(second_order_form_residual(Model::HB_POLYAK, t, F, 0.01, 1.0)) == 0.0);
  }
  SUBCASE("HB-Polyak system solution") {
    const double s = std::pow(2.0, -6);
    ResolutionParams rp;
    rp.s = s;
    rp.mu = 1.0;
    const VectorField f = make_resolution_rhs(Model::HB_POLYAK, 1, rp, objective_problem(F));
    IntegratorConfig ic;
    ic.grid_step = 1e-3;
    ic.t_end = 1.0;
    ic.substeps_per_grid = 1;
    const Trajectory t = integrate(f, v2(0.8, 0.8), ic);
    CHECK(max_of(second_order_form_residual(Model::HB_POLYAK, t, F, s, 1.0)) < 1e-3);
  }
  SUBCASE("Shi NAG-SC equation along the first-order trajectory") {
    ResolutionParams rp;
    rp.mu = 1.0;
    double prev = 0.0;
    for (double s : {1.0 / 64.0, 1.0 / 256.0}) {
      rp.s = s;
      const VectorField f = make_resolution_rhs(Model::NAG_SC, 1, rp, objective_problem(F));
      IntegratorConfig ic;
      ic.grid_step = 1e-3;
      ic.t_end = 1.0;
      ic.substeps_per_grid = 1;
      const Trajectory t = integrate(f, v2(0.8, 0.8), ic);
      const double own = max_of(second_order_form_residual(Model::NAG_SC, t, F, s, 1.0));
      const double shi = max_of(second_order_form_residual(Model::SHI_NAG_SC, t, F, s, 1.0));
      CHECK(own < 1e-4);
      CHECK(shi > 10.0 * own);
      if (prev > 0.0) CHECK(prev / shi == doctest::Approx(4.0).epsilon(0.2));
      prev = shi;
    }
  }
  SUBCASE("errors") {
    Trajectory t(0.1);
    t.push(v2(0, 0));
    t.push(v2(0, 0));
    CHECK_THROWS_AS(second_order_form_residual(Model::HB_POLYAK, t, F, 0.01, 1.0), InputError);
    t.push(v2(0, 0));
    CHECK_THROWS_AS(second_order_form_residual(Model::GDA, t, F, 0.01, 1.0), InputError);
  }
}
