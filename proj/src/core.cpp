#include "hires/core.hpp"

#include <cmath>
#include <limits>

namespace hires {

void require_finite(const Vec& v, const char* where) {
  if (!v.allFinite()) throw NumericError(std::string("non-finite value in ") + where);
}

double ObjectiveOracle::kappa() const {
  if (mu <= 0.0) return std::numeric_limits<double>::infinity();
  return lipschitz_L / mu;
}

Vec ObjectiveOracle::gradient(const Vec& x) const {
  Vec g = grad(x);
  require_finite(g, "gradient");
  return g;
}

Vec ObjectiveOracle::hessian_action(const Vec& x, const Vec& v, double h_fd) const {
  if (hess_vec) return hess_vec(x, v);
  const double nv = v.norm();
  if (nv == 0.0) return Vec::Zero(dim);
  const double h = h_fd / nv;
  return (grad(x + h * v) - grad(x - h * v)) / (2.0 * h);
}

Mat ObjectiveOracle::hessian(const Vec& x, double h_fd) const {
  if (constant_hessian) return *constant_hessian;
  Mat Hm(dim, dim);
  for (int j = 0; j < dim; ++j) Hm.col(j) = hessian_action(x, Vec::Unit(dim, j), h_fd);
  return Hm;
}

ObjectiveOracle make_quadratic(const Mat& P, double mu, double L) {
  if (P.rows() != P.cols()) throw InputError("quadratic: P must be square");
  ObjectiveOracle F;
  F.dim = static_cast<int>(P.rows());
  F.value = [P](const Vec& x) { return 0.5 * x.dot(P * x); };
  F.grad = [P](const Vec& x) -> Vec { return P * x; };
  F.hess_vec = [P](const Vec&, const Vec& v) -> Vec { return P * v; };
  F.mu = mu;
  F.lipschitz_L = L;
  F.name = "quadratic";
  F.constant_hessian = P;
  F.minimizer = Vec::Zero(F.dim);
  return F;
}

ObjectiveOracle make_quadratic(const Mat& P) {
  Eigen::SelfAdjointEigenSolver<Mat> es(P, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  return make_quadratic(P, std::max(lo, 0.0), std::max(hi, 1e-300));
}

ObjectiveOracle make_scaled_identity_quadratic(int dim, double a) {
  return make_quadratic(a * Mat::Identity(dim, dim), a, a);
}

ObjectiveOracle make_quartic(int dim, double c) {
  ObjectiveOracle F;
  F.dim = dim;
  F.value = [c](const Vec& x) { return c * x.array().pow(4).sum(); };
  F.grad = [c](const Vec& x) -> Vec { return 4.0 * c * x.array().cube().matrix(); };
  F.hess_vec = [c](const Vec& x, const Vec& v) -> Vec {
    return (12.0 * c * x.array().square() * v.array()).matrix();
  };
  F.mu = 0.0;
  F.lipschitz_L = 12.0 * c;  // on the unit box
  F.name = "quartic";
  F.minimizer = Vec::Zero(dim);
  return F;
}

namespace {
double lessard_value(double x) {
  if (x < 1.0) return 12.5 * x * x;
  if (x < 2.0) return 12.5 + 0.5 * (x * x - 1.0) + 24.0 * (x - 1.0);
  return 38.0 + 12.5 * (x * x - 4.0) - 24.0 * (x - 2.0);
}
double lessard_grad(double x) {
  if (x < 1.0) return 25.0 * x;
  if (x < 2.0) return x + 24.0;
  return 25.0 * x - 24.0;
}
double lessard_curv(double x) { return (x >= 1.0 && x < 2.0) ? 1.0 : 25.0; }
}  // namespace

ObjectiveOracle make_lessard() {
  ObjectiveOracle F;
  F.dim = 1;
  F.value = [](const Vec& x) { return lessard_value(x[0]); };
  F.grad = [](const Vec& x) -> Vec { return Vec::Constant(1, lessard_grad(x[0])); };
  F.hess_vec = [](const Vec& x, const Vec& v) -> Vec { return lessard_curv(x[0]) * v; };
  F.mu = 1.0;
  F.lipschitz_L = 25.0;
  F.name = "lessard";
  F.minimizer = Vec::Zero(1);
  return F;
}

ObjectiveOracle make_zero(int dim) {
  ObjectiveOracle F = make_quadratic(Mat::Zero(dim, dim), 0.0, 0.0);
  F.name = "zero";
  F.minimizer.reset();
  return F;
}

ObjectiveOracle without_hessian(ObjectiveOracle F) {
  F.hess_vec = nullptr;
  F.constant_hessian.reset();
  return F;
}

double SaddleSystem::lipschitz_L() const { return std::max(F.lipschitz_L, G.lipschitz_L); }

Vec SaddleSystem::M(const Vec& z) const {
  if (z.size() != dim()) throw InputError("eval_M: dimension mismatch");
  const int nn = n();
  const int mm = m();
  const Vec x = z.head(nn);
  const Vec y = z.tail(mm);
  Vec out(nn + mm);
  out.head(nn) = F.grad(x) + A.transpose() * y;
  out.tail(mm) = G.grad(y) - A * x;
  return out;
}

Vec SaddleSystem::H(const Vec& z) const {
  if (z.size() != dim()) throw InputError("H: dimension mismatch");
  Vec out(dim());
  out.head(n()) = F.grad(z.head(n()));
  out.tail(m()) = G.grad(z.tail(m()));
  return out;
}

Mat SaddleSystem::Q() const {
  const int nn = n();
  const int mm = m();
  Mat q = Mat::Zero(nn + mm, nn + mm);
  q.topRightCorner(nn, mm) = A.transpose();
  q.bottomLeftCorner(mm, nn) = -A;
  return q;
}

Mat SaddleSystem::I_theta() const {
  Vec d(dim());
  d.head(n()).setConstant(theta);
  d.tail(m()).setConstant(-1.0);
  return d.asDiagonal();
}

Mat SaddleSystem::Q_theta() const { return Q() * I_theta(); }

Mat SaddleSystem::jacobian_M(const Vec& z) const {
  Mat J = Q();
  J.topLeftCorner(n(), n()) += F.hessian(z.head(n()));
  J.bottomRightCorner(m(), m()) += G.hessian(z.tail(m()));
  return J;
}

Vec SaddleSystem::jacobian_M_action(const Vec& z, const Vec& d) const {
  Vec out(dim());
  const Vec dx = d.head(n());
  const Vec dy = d.tail(m());
  out.head(n()) = F.hessian_action(z.head(n()), dx) + A.transpose() * dy;
  out.tail(m()) = G.hessian_action(z.tail(m()), dy) - A * dx;
  return out;
}

double SaddleSystem::lagrangian(const Vec& x, const Vec& y) const {
  return F.value(x) + y.dot(A * x) - G.value(y);
}

Vec eval_M(const SaddleSystem& sys, const Vec& z) { return sys.M(z); }

SaddleSystem make_bilinear(const Mat& A, double theta) {
  return SaddleSystem{make_zero(static_cast<int>(A.cols())), make_zero(static_cast<int>(A.rows())), A,
                      theta, Vec::Zero(A.rows() + A.cols())};
}

SaddleSystem make_quartic_saddle(double theta) {
  ObjectiveOracle G = make_quadratic(Mat::Constant(1, 1, 2.0));
  SaddleSystem sys{make_quartic(1, 1.0), G, Mat::Constant(1, 1, 1.0), theta, Vec::Zero(2)};
  return sys;
}

SaddleSystem make_quadratic_saddle(const Mat& A, double a, double b, double theta) {
  SaddleSystem sys{make_scaled_identity_quadratic(static_cast<int>(A.cols()), a),
                   make_scaled_identity_quadratic(static_cast<int>(A.rows()), b), A, theta,
                   Vec::Zero(A.rows() + A.cols())};
  return sys;
}

double ProxFunction::phi(const Vec& x) const { return 0.5 * x.dot(P * x); }
Vec ProxFunction::grad_phi(const Vec& x) const { return P * x; }
Vec ProxFunction::grad_phi_star(const Vec& z) const {
  Vec x = P_inv * z;
  require_finite(x, "grad_phi_star");
  return x;
}
Mat ProxFunction::hess_phi_star(const Vec&) const { return P_inv; }
double ProxFunction::bregman(const Vec& x, const Vec& y) const {
  return phi(x) - phi(y) - grad_phi(y).dot(x - y);
}

ProxFunction make_quadratic_prox(const Mat& P) {
  Eigen::LLT<Mat> llt(P);
  if (llt.info() != Eigen::Success) throw InputError("prox: P must be symmetric positive definite");
  return ProxFunction{P, llt.solve(Mat::Identity(P.rows(), P.cols()))};
}

ProxFunction make_euclidean_prox(int dim) { return make_quadratic_prox(Mat::Identity(dim, dim)); }

void Trajectory::push(const Vec& state) {
  if (!states.empty() && state.size() != states.front().size())
    throw InputError("trajectory: state dimension changed");
  times.push_back(static_cast<double>(states.size()) * grid_step);
  states.push_back(state);
}

Mat fd_jacobian(const VecMap& map, const Vec& z, double h_fd) {
  if (!(h_fd > 0.0)) throw InputError("fd_jacobian: h_fd must be positive");
  const Vec f0 = map(z);
  require_finite(f0, "fd_jacobian");
  Mat J(f0.size(), z.size());
  Vec zp = z;
  for (int j = 0; j < z.size(); ++j) {
    zp[j] = z[j] + h_fd;
    const Vec fp = map(zp);
    zp[j] = z[j] - h_fd;
    const Vec fm = map(zp);
    zp[j] = z[j];
    require_finite(fp, "fd_jacobian");
    require_finite(fm, "fd_jacobian");
    J.col(j) = (fp - fm) / (2.0 * h_fd);
  }
  return J;
}

}  // namespace hires
