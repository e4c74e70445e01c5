#include "doctest.h"

#include "hires/integrate.hpp"

#include <cmath>

using namespace hires;

namespace {
VectorField linear_field(const Mat& K) {
  VectorField f;
  f.dim = static_cast<int>(K.rows());
  f.rhs = [K](const Vec& x) -> Vec { return K * x; };
  return f;
}
IntegratorConfig config(double grid, double t_end, int substeps) {
  IntegratorConfig c;
  c.grid_step = grid;
  c.t_end = t_end;
  c.substeps_per_grid = substeps;
  return c;
}
}  // namespace

TEST_CASE("zero field keeps the initial state") {
  Vec X0(3);
  X0 << 1.0, -2.0, 0.5;
  const VectorField f = linear_field(Mat::Zero(3, 3));
  const Trajectory t = integrate(f, X0, config(0.1, 1.0, 4));
  REQUIRE(t.size() == 11);
  for (const Vec& X : t.states) CHECK((X - X0).norm() == 0.0);
  CHECK(richardson_check(f, X0, config(0.1, 1.0, 4)) == 0.0);
}

TEST_CASE("exponential decay") {
  const VectorField f = linear_field(-Mat::Identity(1, 1));
  const Trajectory t = integrate(f, Vec::Constant(1, 1.0), config(0.1, 1.0, 10));
  CHECK(std::abs(t.back()[0] - std::exp(-1.0)) < 1e-10);
  CHECK(t.times.back() == doctest::Approx(1.0));
}

TEST_CASE("RK4 order: doubling substeps cuts the Richardson estimate by about 16") {
  const VectorField f = linear_field(-Mat::Identity(1, 1));
  const double a = richardson_check(f, Vec::Constant(1, 1.0), config(0.1, 1.0, 1));
  const double b = richardson_check(f, Vec::Constant(1, 1.0), config(0.1, 1.0, 2));
  CHECK(a / b > 12.0);
  CHECK(a / b < 20.0);
}

TEST_CASE("skew field conserves the norm") {
  Mat Q(2, 2);
  Q << 0.0, 1.0, -1.0, 0.0;
  Vec z0(2);
  z0 << 1.0, 1.0;
  const Trajectory t = integrate(linear_field(Q), z0, config(0.1, 20.0, 16));
  for (const Vec& z : t.states) CHECK(std::abs(z.norm() - z0.norm()) < 1e-9);
}

TEST_CASE("quartic saddle first-order field is resolved at default substeps") {
  Problem p;
  p.saddle = make_quartic_saddle(0.0);
  ResolutionParams rp;
  rp.s = std::pow(2.0, -8);
  const VectorField f = make_resolution_rhs(Model::PDHG, 1, rp, p);
  Vec z0(2);
  z0 << 0.5, 0.5;
  IntegratorConfig c = config(rp.s, 20.0, 64);
  CHECK(richardson_check(f, z0, c) < 1e-12);
}

TEST_CASE("certified integration doubles substeps until the target is met") {
  const VectorField f = linear_field(-Mat::Identity(1, 1));
  const CertifiedTrajectory c = integrate_certified(f, Vec::Constant(1, 1.0), config(0.1, 1.0, 1), 1e-12);
  CHECK(c.certified);
  CHECK(c.richardson <= 1e-12);
  CHECK(c.substeps >= 2);
  const CertifiedTrajectory capped = integrate_certified(f, Vec::Constant(1, 1.0), config(0.1, 1.0, 1), 0.0, 4);
  CHECK_FALSE(capped.certified);
  CHECK(capped.substeps == 4);
}

TEST_CASE("integrator errors") {
  const VectorField f = linear_field(-Mat::Identity(1, 1));
  const Vec x = Vec::Constant(1, 1.0);
  CHECK_THROWS_AS(integrate(f, x, config(0.0, 1.0, 1)), InputError);
  CHECK_THROWS_AS(integrate(f, x, config(0.3, 1.0, 1)), InputError);
  CHECK_THROWS_AS(integrate(f, x, config(0.1, 1.0, 0)), InputError);
  CHECK_THROWS_AS(integrate(f, Vec::Zero(2), config(0.1, 1.0, 1)), InputError);
  VectorField blow;
  blow.dim = 1;
  blow.rhs = [](const Vec& v) -> Vec { return v.array().square().matrix(); };
  try {
    integrate(blow, Vec::Constant(1, 1.0), config(0.5, 10.0, 1));
    FAIL("expected a blow-up");
  } catch (const BlowUpError& e) {
    CHECK(e.last_finite_time > 0.0);
    CHECK(e.last_finite_time < 10.0);
  }
}
