#include "hires/resolution.hpp"

#include <cmath>

namespace hires {

void AffineMapSeries::validate() const {
  if (G.size() != c.size() || G.empty()) throw InputError("affine series: malformed coefficients");
  const int d = dim();
  for (std::size_t j = 0; j < G.size(); ++j) {
    if (G[j].rows() != d || G[j].cols() != d || c[j].size() != d)
      throw InputError("affine series: inconsistent dimensions");
  }
  if (!G[0].isIdentity(0.0) || !c[0].isZero(0.0))
    throw InputError("affine series: g(z, 0) must be the identity");
}

std::vector<AffineField> resolution_coeffs_affine(const AffineMapSeries& series, int r) {
  series.validate();
  if (r < 0 || r > series.order || static_cast<int>(series.G.size()) < r + 2)
    throw InputError("resolution_coeffs_affine: order exceeds the available series");
  const int d = series.dim();

  std::vector<AffineField> f;
  // h[k][i] for k >= 1; h[1][i] = f[i]
  std::vector<std::vector<AffineField>> h(r + 2);
  auto factorial = [](int k) {
    double v = 1.0;
    for (int i = 2; i <= k; ++i) v *= i;
    return v;
  };

  for (int j = 0; j <= r; ++j) {
    // every h[k][i] with k >= 2 and k + i = j + 1 only needs f[0..j-1]
    for (int k = 2; k <= j + 1; ++k) {
      const int i = j + 1 - k;
      AffineField hk{Mat::Zero(d, d), Vec::Zero(d)};
      for (int l = 0; l <= i; ++l) {
        const Mat& P = h[k - 1][l].F;
        hk.F += P * f[i - l].F;
        hk.d += P * f[i - l].d;
      }
      if (static_cast<int>(h[k].size()) != i) throw Error("resolution recursion: index drift");
      h[k].push_back(hk);
    }
    AffineField fj{series.G[j + 1], series.c[j + 1]};
    for (int k = 2; k <= j + 1; ++k) {
      const AffineField& hk = h[k][j + 1 - k];
      fj.F -= hk.F / factorial(k);
      fj.d -= hk.d / factorial(k);
    }
    f.push_back(fj);
    h[1].push_back(fj);
  }
  return f;
}

namespace {

struct AffineTerm {
  Mat A;  // rows x d
  Vec b;
};
using AffineSeries = std::vector<AffineTerm>;

AffineSeries zero_series(int rows, int d, int terms) {
  return AffineSeries(terms, AffineTerm{Mat::Zero(rows, d), Vec::Zero(rows)});
}

// (sum_i s^i R_i) * (sum_j s^j u_j), truncated
AffineSeries apply_series(const std::vector<Mat>& R, const AffineSeries& u) {
  const int terms = static_cast<int>(u.size());
  AffineSeries out = zero_series(static_cast<int>(R[0].rows()), static_cast<int>(u[0].A.cols()), terms);
  for (int k = 0; k < terms; ++k)
    for (int i = 0; i <= k; ++i) {
      out[k].A += R[i] * u[k - i].A;
      out[k].b += R[i] * u[k - i].b;
    }
  return out;
}

// (I + sP)^{-1} = sum_j (-P)^j s^j
std::vector<Mat> resolvent_series(const Mat& P, int terms) {
  std::vector<Mat> R;
  Mat cur = Mat::Identity(P.rows(), P.cols());
  for (int j = 0; j < terms; ++j) {
    R.push_back(cur);
    cur = -P * cur;
  }
  return R;
}

}  // namespace

AffineMapSeries minimax_affine_series(const SaddleSystem& sys, MinimaxScheme scheme, int order) {
  if (!sys.affine()) throw CapabilityError("affine series requires affine gradients of F and G");
  if (order < 0) throw InputError("affine series: negative order");
  const int d = sys.dim();
  const int terms = order + 2;
  const Mat J = sys.jacobian_M(Vec::Zero(d));
  const Vec c0 = sys.M(Vec::Zero(d));
  const Mat I = Mat::Identity(d, d);

  AffineMapSeries out;
  out.order = order;
  out.G.assign(terms, Mat::Zero(d, d));
  out.c.assign(terms, Vec::Zero(d));
  out.G[0] = I;

  switch (scheme) {
    case MinimaxScheme::GDA:
      if (terms > 1) {
        out.G[1] = -J;
        out.c[1] = -c0;
      }
      break;
    case MinimaxScheme::EGM:
      if (terms > 1) {
        out.G[1] = -J;
        out.c[1] = -c0;
      }
      if (terms > 2) {
        out.G[2] = J * J;
        out.c[2] = J * c0;
      }
      break;
    case MinimaxScheme::PPM: {
      // (I + sJ)^{-1}(z - s c0)
      Mat pw = I;
      for (int j = 1; j < terms; ++j) {
        out.c[j] = -pw * c0;
        pw = -J * pw;
        out.G[j] = pw;
      }
      break;
    }
    case MinimaxScheme::PDHG_CP: {
      const int n = sys.n();
      const int m = sys.m();
      const Mat P = *sys.F.constant_hessian;
      const Mat R = *sys.G.constant_hessian;
      const Vec f0 = sys.F.grad(Vec::Zero(n));
      const Vec g0 = sys.G.grad(Vec::Zero(m));
      Mat Ex = Mat::Zero(n, d);
      Ex.leftCols(n) = Mat::Identity(n, n);
      Mat Ey = Mat::Zero(m, d);
      Ey.rightCols(m) = Mat::Identity(m, m);

      AffineSeries u = zero_series(n, d, terms);
      u[0].A = Ex;
      if (terms > 1) {
        u[1].A = -sys.A.transpose() * Ey;
        u[1].b = -f0;
      }
      const AffineSeries xp = apply_series(resolvent_series(P, terms), u);

      AffineSeries w = zero_series(m, d, terms);
      w[0].A = Ey;
      for (int k = 1; k < terms; ++k) {
        w[k].A = (1.0 + sys.theta) * sys.A * xp[k - 1].A;
        w[k].b = (1.0 + sys.theta) * sys.A * xp[k - 1].b;
        if (k == 1) {
          w[k].A -= sys.theta * sys.A * Ex;
          w[k].b -= g0;
        }
      }
      const AffineSeries yp = apply_series(resolvent_series(R, terms), w);
      for (int k = 0; k < terms; ++k) {
        out.G[k].topRows(n) = xp[k].A;
        out.G[k].bottomRows(m) = yp[k].A;
        out.c[k].head(n) = xp[k].b;
        out.c[k].tail(m) = yp[k].b;
      }
      break;
    }
  }
  return out;
}

VectorField affine_resolution_field(const std::vector<AffineField>& coeffs, double h,
                                    const std::string& label) {
  if (coeffs.empty()) throw InputError("affine_resolution_field: no coefficients");
  Mat F = Mat::Zero(coeffs[0].F.rows(), coeffs[0].F.cols());
  Vec d = Vec::Zero(coeffs[0].d.size());
  double hp = 1.0;
  for (const auto& c : coeffs) {
    F += hp * c.F;
    d += hp * c.d;
    hp *= h;
  }
  VectorField vf;
  vf.dim = static_cast<int>(d.size());
  vf.rhs = [F, d](const Vec& z) -> Vec { return F * z + d; };
  vf.order = static_cast<int>(coeffs.size()) - 1;
  vf.label = label;
  vf.s = h;
  return vf;
}

const char* model_name(Model m) {
  switch (m) {
    case Model::GD: return "gd";
    case Model::GDA: return "gda";
    case Model::PPM: return "ppm";
    case Model::EGM: return "egm";
    case Model::MD_DUAL: return "md-dual";
    case Model::PDHG: return "pdhg";
    case Model::HB_GENERAL: return "hb";
    case Model::HB_POLYAK: return "hb-polyak";
    case Model::HB_ALTERNATE: return "hb-alternate";
    case Model::NAG_GENERAL: return "nag";
    case Model::NAG_SC: return "nag-sc";
    case Model::NAG_C: return "nag-c";
    case Model::AMD: return "amd";
    case Model::LOW_RES_HB: return "hb-o1";
    case Model::LOW_RES_AVD: return "avd";
    case Model::PDHG_O1: return "pdhg-o1";
    case Model::SHI_HB: return "hb-os-shi";
    case Model::SHI_NAG_SC: return "os-nag-sc";
    case Model::SHI_NAG_C: return "os-ode-nag-c";
  }
  return "?";
}

namespace {

void need_hessian(const ObjectiveOracle& F, const char* what) {
  if (!F.has_hessian())
    throw CapabilityError(std::string(what) + ": first-order field needs a Hessian-action oracle");
}

struct MomentumCoeffs {
  double b1, b2, eta1, eta2, delta1, delta2;
};

}  // namespace

VectorField make_resolution_rhs(Model model, int order, const ResolutionParams& p,
                                const Problem& problem) {
  if (order != 0 && order != 1) throw InputError("make_resolution_rhs: order must be 0 or 1");
  if (!(p.s >= 0.0)) throw InputError("make_resolution_rhs: s must be nonnegative");
  VectorField vf;
  vf.order = order;
  vf.label = model_name(model);
  vf.s = p.s;
  const double on = order == 1 ? 1.0 : 0.0;
  // coefficient of the first-order term: s/2 on the s-grid, sqrt(s)/2 on the sqrt(s)-grid
  const double cs = on * (1.0 + p.perturbation) * p.s / 2.0;
  const double ct = on * (1.0 + p.perturbation) * std::sqrt(p.s) / 2.0;
  const double rt_s = std::sqrt(p.s);
  const double rt_mu = std::sqrt(p.mu);

  switch (model) {
    case Model::GD: {
      const ObjectiveOracle F = problem.objective();
      if (order == 1) need_hessian(F, "gd");
      vf.dim = F.dim;
      vf.rhs = [F, cs](const Vec& x) -> Vec {
        const Vec g = F.grad(x);
        if (cs == 0.0) return -g;
        return -g - cs * F.hessian_action(x, g);
      };
      return vf;
    }
    case Model::GDA:
    case Model::PPM:
    case Model::EGM:
    case Model::PDHG:
    case Model::PDHG_O1: {
      const SaddleSystem sys = problem.saddle_system();
      const bool first = order == 1 && model != Model::PDHG_O1;
      if (first) {
        need_hessian(sys.F, vf.label.c_str());
        need_hessian(sys.G, vf.label.c_str());
      }
      if (model == Model::PDHG_O1) vf.order = 0;
      vf.dim = sys.dim();
      const double sign = model == Model::GDA ? -1.0 : 1.0;
      const double c = first ? cs : 0.0;
      const bool pdhg = model == Model::PDHG;
      const Mat Qt = sys.Q_theta();
      vf.rhs = [sys, sign, c, pdhg, Qt](const Vec& z) -> Vec {
        const Vec Mz = sys.M(z);
        if (c == 0.0) return -Mz;
        Vec corr = sign * sys.jacobian_M_action(z, Mz);
        if (pdhg) corr += 2.0 * (Qt * Mz);
        return -Mz + c * corr;
      };
      return vf;
    }
    case Model::MD_DUAL: {
      const ObjectiveOracle F = problem.objective();
      const ProxFunction prox = problem.prox_function();
      if (order == 1) need_hessian(F, "md-dual");
      vf.dim = F.dim;
      vf.rhs = [F, prox, cs](const Vec& z) -> Vec {
        const Vec x = prox.grad_phi_star(z);
        const Vec u = F.grad(x);
        if (cs == 0.0) return -u;
        return -u - cs * F.hessian_action(x, prox.hess_phi_star(z) * u);
      };
      return vf;
    }
    case Model::HB_GENERAL:
    case Model::HB_POLYAK:
    case Model::HB_ALTERNATE: {
      const ObjectiveOracle F = problem.objective();
      if (order == 1) need_hessian(F, vf.label.c_str());
      double b1 = p.beta_d1, b2 = p.beta_d2;
      if (model == Model::HB_POLYAK) {
        b1 = -2.0 * rt_mu;
        b2 = 2.0 * p.mu;
      } else if (model == Model::HB_ALTERNATE) {
        b1 = -2.0 * rt_mu;
        b2 = 4.0 * p.mu;
      }
      const int n = F.dim;
      vf.dim = 2 * n;
      vf.rhs = [F, n, b1, b2, ct](const Vec& X) -> Vec {
        const Vec x = X.head(n);
        const Vec v = X.tail(n);
        const Vec g = F.grad(x);
        Vec out(2 * n);
        out << v, b1 * v - g;
        if (ct == 0.0) return out;
        out.head(n) += ct * (b1 * v - g);
        out.tail(n) += ct * ((b2 - b1 * b1) * v + F.hessian_action(x, v) + b1 * g);
        return out;
      };
      return vf;
    }
    case Model::NAG_GENERAL:
    case Model::NAG_SC: {
      const ObjectiveOracle F = problem.objective();
      if (order == 1) need_hessian(F, vf.label.c_str());
      MomentumCoeffs k{p.beta_d1, p.beta_d2, p.eta1, p.eta2, p.delta1, p.delta2};
      const int n = F.dim;
      vf.dim = 2 * n;
      if (model == Model::NAG_SC) {
        vf.rhs = [F, n, rt_mu, ct](const Vec& X) -> Vec {
          const Vec x = X.head(n);
          const Vec v = X.tail(n);
          const Vec g = F.grad(x);
          Vec out(2 * n);
          out << v, -2.0 * rt_mu * v - g;
          if (ct == 0.0) return out;
          out.head(n) += ct * (-6.0 * rt_mu * v - 3.0 * g);
          out.tail(n) += ct * (F.hessian_action(x, v) - 2.0 * rt_mu * g);
          return out;
        };
        return vf;
      }
      vf.rhs = [F, n, k, ct](const Vec& X) -> Vec {
        const Vec x = X.head(n);
        const Vec v = X.tail(n);
        const Vec g = F.grad(x);
        Vec out(2 * n);
        out << v - k.eta1 * g, k.b1 * v - k.delta1 * g;
        if (ct == 0.0) return out;
        const Vec Hg = F.hessian_action(x, g);
        const Vec Hv = F.hessian_action(x, v);
        const Vec g11x = 4.0 * k.b1 * v - (2.0 * k.eta2 + 2.0 * k.delta1) * g;
        const Vec g11v = k.b2 * v - 2.0 * k.delta2 * g;
        const Vec g12x = k.eta1 * k.eta1 * Hg - k.eta1 * Hv + k.b1 * v - k.delta1 * g;
        const Vec g12v = k.eta1 * k.delta1 * Hg - k.delta1 * Hv + k.b1 * k.b1 * v - k.b1 * k.delta1 * g;
        out.head(n) += ct * (g11x - g12x);
        out.tail(n) += ct * (g11v - g12v);
        return out;
      };
      return vf;
    }
    case Model::NAG_C: {
      const ObjectiveOracle F = problem.objective();
      if (order == 1) need_hessian(F, "nag-c");
      const int n = F.dim;
      vf.dim = 2 * n + 1;
      vf.rhs = [F, n, ct](const Vec& X) -> Vec {
        const Vec x = X.head(n);
        const Vec v = X.segment(n, n);
        const double t = X[2 * n];
        const Vec g = F.grad(x);
        Vec out(2 * n + 1);
        out << v, -3.0 / t * v - g, 1.0;
        if (ct == 0.0) return out;
        out.head(n) += ct * (-9.0 / t * v - 3.0 * g);
        out.segment(n, n) += ct * (F.hessian_action(x, v) - 12.0 / (t * t) * v - 3.0 / t * g);
        return out;
      };
      return vf;
    }
    case Model::AMD: {
      const ObjectiveOracle F = problem.objective();
      const ProxFunction prox = problem.prox_function();
      if (order == 1) need_hessian(F, "amd");
      const int n = F.dim;
      vf.dim = 2 * n + 1;
      vf.rhs = [F, prox, n, ct](const Vec& X) -> Vec {
        const Vec x = X.head(n);
        const Vec z = X.segment(n, n);
        const double t = X[2 * n];
        const Vec g = F.grad(x);
        const Vec gap = prox.grad_phi_star(z) - x;
        Vec out(2 * n + 1);
        out << 2.0 / t * gap, -t / 2.0 * g, 1.0;
        if (ct == 0.0) return out;
        out.head(n) += ct * (-(prox.hess_phi_star(z) * g) - 2.0 * g + 6.0 / (t * t) * gap);
        out.segment(n, n) += ct * (2.5 * g + F.hessian_action(x, gap));
        return out;
      };
      return vf;
    }
    case Model::LOW_RES_HB:
    case Model::SHI_HB:
    case Model::SHI_NAG_SC: {
      const ObjectiveOracle F = problem.objective();
      const bool shi = model != Model::LOW_RES_HB;
      if (model == Model::SHI_NAG_SC) need_hessian(F, "os-nag-sc");
      const int n = F.dim;
      vf.dim = 2 * n;
      vf.order = shi ? 1 : 0;
      const double gc = shi ? 1.0 + rt_mu * rt_s : 1.0;
      const double hd = model == Model::SHI_NAG_SC ? rt_s : 0.0;
      vf.rhs = [F, n, rt_mu, gc, hd](const Vec& X) -> Vec {
        const Vec x = X.head(n);
        const Vec v = X.tail(n);
        Vec out(2 * n);
        out << v, -2.0 * rt_mu * v - gc * F.grad(x);
        if (hd != 0.0) out.tail(n) -= hd * F.hessian_action(x, v);
        return out;
      };
      return vf;
    }
    case Model::LOW_RES_AVD:
    case Model::SHI_NAG_C: {
      const ObjectiveOracle F = problem.objective();
      const bool shi = model == Model::SHI_NAG_C;
      if (shi) need_hessian(F, "os-ode-nag-c");
      const int n = F.dim;
      vf.dim = 2 * n + 1;
      vf.order = shi ? 1 : 0;
      const double rs = shi ? rt_s : 0.0;
      vf.rhs = [F, n, rs](const Vec& X) -> Vec {
        const Vec x = X.head(n);
        const Vec v = X.segment(n, n);
        const double t = X[2 * n];
        Vec out(2 * n + 1);
        out << v, -3.0 / t * v - (1.0 + 1.5 * rs / t) * F.grad(x), 1.0;
        if (rs != 0.0) out.segment(n, n) -= rs * F.hessian_action(x, v);
        return out;
      };
      return vf;
    }
  }
  throw InputError("make_resolution_rhs: unknown model");
}

VectorField generic_first_order_field(ParametricMap phi, int dim, double h, int order,
                                      const std::string& label, double fd_h, double fd_jac) {
  if (order != 0 && order != 1) throw InputError("generic field: order must be 0 or 1");
  auto phi1 = [phi, fd_h](const Vec& X) -> Vec {
    return (-phi(X, 2.0 * fd_h) + 8.0 * phi(X, fd_h) - 8.0 * phi(X, -fd_h) + phi(X, -2.0 * fd_h)) /
           (12.0 * fd_h);
  };
  VectorField vf;
  vf.dim = dim;
  vf.order = order;
  vf.label = label;
  vf.s = h;
  if (order == 0) {
    vf.rhs = phi1;
    return vf;
  }
  vf.rhs = [phi, phi1, fd_h, fd_jac, h](const Vec& X) -> Vec {
    const Vec p1 = phi1(X);
    const Vec p2 = (-phi(X, 2.0 * fd_h) + 16.0 * phi(X, fd_h) - 30.0 * phi(X, 0.0) +
                    16.0 * phi(X, -fd_h) - phi(X, -2.0 * fd_h)) /
                   (12.0 * fd_h * fd_h);
    const Mat J = fd_jacobian(phi1, X, fd_jac);
    const Vec gamma1 = 0.5 * p2 - 0.5 * J * p1;
    return p1 + h * gamma1;
  };
  return vf;
}

std::vector<double> second_order_form_residual(Model model, const Trajectory& traj,
                                               const ObjectiveOracle& F, double s, double mu,
                                               double t_offset) {
  if (traj.size() < 3) throw InputError("second_order_form_residual: need at least three states");
  const int n = F.dim;
  const double dt = traj.grid_step;
  const double rs = std::sqrt(s);
  const double rm = std::sqrt(mu);
  std::vector<double> res;
  res.reserve(traj.size() - 2);
  for (std::size_t k = 1; k + 1 < traj.size(); ++k) {
    const Vec xm = traj.states[k - 1].head(n);
    const Vec x = traj.states[k].head(n);
    const Vec xp = traj.states[k + 1].head(n);
    const Vec x2 = (xp - 2.0 * x + xm) / (dt * dt);
    const Vec x1 = (xp - xm) / (2.0 * dt);
    const Vec g = F.grad(x);
    const double t = t_offset + traj.times[k];
    Vec r;
    switch (model) {
      case Model::HB_ALTERNATE:
        r = x2 + 2.0 * rm * x1 + (1.0 + rm * rs - mu * s) * g - s / 4.0 * F.hessian_action(x, g);
        break;
      case Model::HB_POLYAK:
        r = x2 + (2.0 * rm + mu * rs) * x1 + (1.0 + rm * rs - mu * s / 2.0) * g -
            s / 4.0 * F.hessian_action(x, g);
        break;
      case Model::NAG_SC:
        r = x2 + 2.0 * rm * x1 + rs * F.hessian_action(x, x1) + (1.0 + rm * rs - 3.0 * mu * s) * g -
            0.75 * s * F.hessian_action(x, g);
        break;
      case Model::NAG_C:
        r = x2 + (3.0 / t + 6.0 * rs / (t * t)) * x1 + rs * F.hessian_action(x, x1) +
            (1.0 + 1.5 * rs / t + 2.25 * s / (t * t)) * g - 0.75 * s * F.hessian_action(x, g);
        break;
      case Model::LOW_RES_HB: r = x2 + 2.0 * rm * x1 + g; break;
      case Model::LOW_RES_AVD: r = x2 + 3.0 / t * x1 + g; break;
      case Model::SHI_HB: r = x2 + 2.0 * rm * x1 + (1.0 + rm * rs) * g; break;
      case Model::SHI_NAG_SC:
        r = x2 + 2.0 * rm * x1 + (1.0 + rm * rs) * g + rs * F.hessian_action(x, x1);
        break;
      case Model::SHI_NAG_C:
        r = x2 + 3.0 / t * x1 + (1.0 + 1.5 * rs / t) * g + rs * F.hessian_action(x, x1);
        break;
      default: throw InputError("second_order_form_residual: model has no second-order form");
    }
    res.push_back(r.lpNorm<Eigen::Infinity>());
  }
  return res;
}

}  // namespace hires
