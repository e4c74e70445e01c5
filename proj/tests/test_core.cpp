#include "doctest.h"

#include "hires/core.hpp"

#include <cmath>
#include <random>

using namespace hires;

namespace {
Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}
}  // namespace

TEST_CASE("bilinear xy operator at (1,1)") {
  const SaddleSystem sys = make_bilinear(Mat::Constant(1, 1, 1.0), 0.0);
  const Vec M = eval_M(sys, v2(1, 1));
  CHECK(M[0] == 1.0);
  CHECK(M[1] == -1.0);
}

TEST_CASE("zero coupling and zero objectives give a zero operator") {
  const SaddleSystem sys = make_bilinear(Mat::Zero(2, 3), 0.0);
  std::mt19937_64 rng(3);
  const Vec z = random_vec(rng, 5, -2.0, 2.0);
  CHECK(eval_M(sys, z).norm() == 0.0);
}

TEST_CASE("quartic saddle operator at (1,1)") {
  // M = (4x^3 + y, 2y - x) for F = x^4, G = y^2, A = [1]
  const SaddleSystem sys = make_quartic_saddle(0.0);
  const Vec M = eval_M(sys, v2(1, 1));
  CHECK(M[0] == 5.0);
  CHECK(M[1] == 1.0);
}

TEST_CASE("operator decomposes as H plus Q z, Q skew") {
  std::mt19937_64 rng(11);
  const Mat A = Mat::Random(3, 2);
  const SaddleSystem sys = make_quadratic_saddle(A, 0.7, 1.3, 0.5);
  const Mat Q = sys.Q();
  CHECK((Q + Q.transpose()).norm() == 0.0);
  for (int i = 0; i < 5; ++i) {
    const Vec z = random_vec(rng, 5, -1.0, 1.0);
    CHECK((sys.M(z) - sys.H(z) - Q * z).norm() < 1e-14);
  }
  const Mat It = sys.I_theta();
  CHECK(It(0, 0) == 0.5);
  CHECK(It(4, 4) == -1.0);
  CHECK((sys.Q_theta() - Q * It).norm() == 0.0);
}

TEST_CASE("operator dimension mismatch is an input error") {
  const SaddleSystem sys = make_bilinear(Mat::Constant(1, 1, 1.0), 0.0);
  CHECK_THROWS_AS(eval_M(sys, Vec::Zero(3)), InputError);
}

TEST_CASE("finite-difference Jacobian") {
  SUBCASE("identity map") {
    const Mat J = fd_jacobian([](const Vec& z) { return z; }, v2(0.3, -2.0));
    CHECK((J - Mat::Identity(2, 2)).norm() < 1e-10);
  }
  SUBCASE("skew linear map") {
    const Mat Q = make_bilinear(Mat::Constant(1, 1, 1.0), 0.0).Q();
    const Mat J = fd_jacobian([&](const Vec& z) -> Vec { return Q * z; }, v2(1.0, 2.0));
    CHECK((J - Q).norm() < 1e-10);
  }
  SUBCASE("gradient of x^4 / 4 at 2") {
    const ObjectiveOracle F = make_quartic(1, 0.25);
    const Mat J = fd_jacobian([&](const Vec& x) { return F.grad(x); }, Vec::Constant(1, 2.0), 1e-4);
    CHECK(std::abs(J(0, 0) - 12.0) < 1e-6);
  }
  SUBCASE("nonpositive step") {
    CHECK_THROWS_AS(fd_jacobian([](const Vec& z) { return z; }, v2(0, 0), 0.0), InputError);
  }
  SUBCASE("non-finite output") {
    CHECK_THROWS_AS(fd_jacobian([](const Vec& z) -> Vec { return z / 0.0; }, v2(1, 1)), NumericError);
  }
}

TEST_CASE("quadratic oracle is exact and the fallback Hessian is second-order accurate") {
  Mat P(2, 2);
  P << 3.0, 1.0, 1.0, 2.0;
  const ObjectiveOracle F = make_quadratic(P);
  const Vec x = v2(0.4, -1.1);
  const Vec v = v2(1.0, 0.5);
  CHECK((F.grad(x) - P * x).norm() == 0.0);
  CHECK((F.hessian_action(x, v) - P * v).norm() == 0.0);
  CHECK(F.mu <= F.lipschitz_L);

  const ObjectiveOracle Q4 = make_quartic(2, 1.0);
  const ObjectiveOracle Q4fd = without_hessian(Q4);
  CHECK_FALSE(Q4fd.has_hessian());
  const double e1 = (Q4fd.hessian_action(x, v, 1e-2) - Q4.hessian_action(x, v)).norm();
  const double e2 = (Q4fd.hessian_action(x, v, 5e-3) - Q4.hessian_action(x, v)).norm();
  CHECK(e1 < 1e-3);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("Lessard objective pieces") {
  const ObjectiveOracle F = make_lessard();
  CHECK(F.grad(Vec::Constant(1, 0.5))[0] == 12.5);
  CHECK(F.grad(Vec::Constant(1, 1.5))[0] == 25.5);
  CHECK(F.grad(Vec::Constant(1, 3.25))[0] == 57.25);
  CHECK(F.value(Vec::Constant(1, 1.0)) == doctest::Approx(12.5));
  CHECK(F.value(Vec::Constant(1, 2.0)) == doctest::Approx(38.0));
  CHECK(F.kappa() == 25.0);
}

TEST_CASE("quadratic prox inverts its own gradient") {
  Mat P(2, 2);
  P << 2.0, 0.5, 0.5, 1.0;
  const ProxFunction prox = make_quadratic_prox(P);
  std::mt19937_64 rng(5);
  for (int i = 0; i < 10; ++i) {
    const Vec x = random_vec(rng, 2, -3.0, 3.0);
    CHECK((prox.grad_phi_star(prox.grad_phi(x)) - x).norm() < 1e-13);
  }
  CHECK(prox.bregman(v2(1, 1), v2(1, 1)) == 0.0);
  CHECK_THROWS_AS(make_quadratic_prox(-Mat::Identity(2, 2)), InputError);
}

TEST_CASE("trajectory grid is uniform") {
  Trajectory t(0.25);
  t.push(v2(0, 0));
  t.push(v2(1, 0));
  t.push(v2(2, 0));
  REQUIRE(t.size() == 3);
  CHECK(t.times[2] == 0.5);
  CHECK_THROWS_AS(t.push(Vec::Zero(3)), InputError);
}
