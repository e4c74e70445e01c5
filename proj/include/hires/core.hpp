#pragma once

#include <Eigen/Dense>

#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace hires {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using VecMap = std::function<Vec(const Vec&)>;

// Error hierarchy. Every library failure derives from Error.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InputError : Error {
  using Error::Error;
};
struct NumericError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};
struct CapabilityError : Error {
  using Error::Error;
};
struct ParameterError : Error {
  using Error::Error;
};
struct SolverError : Error {
  SolverError(const std::string& what, double residual_norm)
      : Error(what), residual(residual_norm) {}
  double residual;
};
struct BlowUpError : Error {
  BlowUpError(const std::string& what, double last_finite)
      : Error(what), last_finite_time(last_finite) {}
  double last_finite_time;
};

void require_finite(const Vec& v, const char* where);

constexpr double kDefaultFdStep = 1e-5;

// Smooth convex objective with metadata. hess_vec may be empty, in which case
// hessian_action falls back to central differences of grad.
struct ObjectiveOracle {
  int dim = 0;
  std::function<double(const Vec&)> value;
  std::function<Vec(const Vec&)> grad;
  std::function<Vec(const Vec&, const Vec&)> hess_vec;
  double mu = 0.0;
  double lipschitz_L = 1.0;
  std::string name;
  std::optional<Mat> constant_hessian;
  std::optional<Vec> minimizer;

  bool has_hessian() const { return static_cast<bool>(hess_vec); }
  double kappa() const;
  Vec gradient(const Vec& x) const;
  Vec hessian_action(const Vec& x, const Vec& v, double h_fd = kDefaultFdStep) const;
  Mat hessian(const Vec& x, double h_fd = kDefaultFdStep) const;
};

ObjectiveOracle make_quadratic(const Mat& P, double mu, double L);
ObjectiveOracle make_quadratic(const Mat& P);
ObjectiveOracle make_scaled_identity_quadratic(int dim, double a);
// F(x) = c * sum x_i^4
ObjectiveOracle make_quartic(int dim, double c);
// Piecewise objective with gradient 25x, x+24, 25x-24 on x<1, [1,2), x>=2; F(0)=0.
ObjectiveOracle make_lessard();
ObjectiveOracle make_zero(int dim);
ObjectiveOracle without_hessian(ObjectiveOracle F);

// min_x max_y F(x) + <y, Ax> - G(y), z = (x, y).
struct SaddleSystem {
  ObjectiveOracle F;
  ObjectiveOracle G;
  Mat A;
  double theta = 0.0;
  std::optional<Vec> z_star;

  int n() const { return static_cast<int>(A.cols()); }
  int m() const { return static_cast<int>(A.rows()); }
  int dim() const { return n() + m(); }
  bool affine() const { return F.constant_hessian.has_value() && G.constant_hessian.has_value(); }
  double lipschitz_L() const;

  Vec M(const Vec& z) const;
  Vec H(const Vec& z) const;
  Mat Q() const;
  Mat I_theta() const;
  Mat Q_theta() const;
  Mat jacobian_M(const Vec& z) const;
  // Action of the Jacobian of M at z on d.
  Vec jacobian_M_action(const Vec& z, const Vec& d) const;
  double lagrangian(const Vec& x, const Vec& y) const;
};

Vec eval_M(const SaddleSystem& sys, const Vec& z);

SaddleSystem make_bilinear(const Mat& A, double theta);
// F = x^4, G = y^2, A = [1]
SaddleSystem make_quartic_saddle(double theta);
// F = a/2 |x|^2, G = b/2 |y|^2
SaddleSystem make_quadratic_saddle(const Mat& A, double a, double b, double theta);

// Quadratic prox-function phi(x) = 1/2 x^T P x with P symmetric positive definite.
struct ProxFunction {
  Mat P;
  Mat P_inv;

  double phi(const Vec& x) const;
  Vec grad_phi(const Vec& x) const;
  Vec grad_phi_star(const Vec& z) const;
  Mat hess_phi_star(const Vec& z) const;
  double bregman(const Vec& x, const Vec& y) const;
};

ProxFunction make_quadratic_prox(const Mat& P);
ProxFunction make_euclidean_prox(int dim);

struct Trajectory {
  double grid_step = 0.0;
  std::vector<double> times;
  std::vector<Vec> states;

  Trajectory() = default;
  explicit Trajectory(double step) : grid_step(step) {}
  std::size_t size() const { return states.size(); }
  // Appends a state stamped at index * grid_step.
  void push(const Vec& state);
  const Vec& back() const { return states.back(); }
};

Mat fd_jacobian(const VecMap& map, const Vec& z, double h_fd = kDefaultFdStep);

// Random vector with i.i.d. entries uniform on [lo, hi].
template <class Rng>
Vec random_vec(Rng& rng, int dim, double lo, double hi);

}  // namespace hires

#include <random>

namespace hires {
template <class Rng>
Vec random_vec(Rng& rng, int dim, double lo, double hi) {
  std::uniform_real_distribution<double> U(lo, hi);
  Vec v(dim);
  for (int i = 0; i < dim; ++i) v[i] = U(rng);
  return v;
}
}  // namespace hires
