#pragma once

#include "hires/core.hpp"
#include "hires/dta.hpp"

#include <string>
#include <vector>

namespace hires {

// g(z, s) = sum_j s^j (G[j] z + c[j]), G[0] = I, c[0] = 0.
struct AffineMapSeries {
  int order = 0;
  std::vector<Mat> G;
  std::vector<Vec> c;

  int dim() const { return G.empty() ? 0 : static_cast<int>(G.front().rows()); }
  void validate() const;
};

// f(z) = F z + d
struct AffineField {
  Mat F;
  Vec d;
  Vec operator()(const Vec& z) const { return F * z + d; }
};

std::vector<AffineField> resolution_coeffs_affine(const AffineMapSeries& series, int r);

// Taylor series in s of one step of an affine minimax scheme, through s^(order+1).
AffineMapSeries minimax_affine_series(const SaddleSystem& sys, MinimaxScheme scheme, int order);

struct VectorField {
  int dim = 0;
  std::function<Vec(const Vec&)> rhs;
  int order = 0;
  std::string label;
  double s = 0.0;

  Vec operator()(const Vec& X) const { return rhs(X); }
};

// Sum_j h^j f_j(z) for affine coefficients, with h the expansion parameter.
VectorField affine_resolution_field(const std::vector<AffineField>& coeffs, double h,
                                    const std::string& label);

enum class Model {
  GD,
  GDA,
  PPM,
  EGM,
  MD_DUAL,
  PDHG,
  HB_GENERAL,
  HB_POLYAK,
  HB_ALTERNATE,
  NAG_GENERAL,
  NAG_SC,
  NAG_C,
  AMD,
  LOW_RES_HB,
  LOW_RES_AVD,
  PDHG_O1,
  SHI_HB,
  SHI_NAG_SC,
  SHI_NAG_C,
};

const char* model_name(Model m);

struct ResolutionParams {
  double s = 0.0;
  double mu = 0.0;
  // derivatives of beta(tau) at tau = 0
  double beta_d1 = 0.0;
  double beta_d2 = 0.0;
  // expansion coefficients of the general NAG template
  double eta1 = 0.0;
  double eta2 = 0.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  // relative perturbation of the first-order coefficient (test hook)
  double perturbation = 0.0;
};

// State layouts: z for GD/MD/minimax, (x, v) for HB/NAG-SC, (x, v, t) for NAG-C,
// (x, z, t) for AMD. PDHG uses the theta stored in the saddle system.
VectorField make_resolution_rhs(Model model, int order, const ResolutionParams& params,
                                const Problem& problem);

using ParametricMap = std::function<Vec(const Vec& X, double h)>;

// First-order resolution field Gamma0 + h Gamma1 of a one-step map with Phi(X, 0) = X,
// from finite differences in h and a finite-difference Jacobian.
VectorField generic_first_order_field(ParametricMap phi, int dim, double h, int order,
                                      const std::string& label, double fd_h = 5e-3,
                                      double fd_jac = 1e-4);

// Residual of the eliminated second-order form along the x-block of a trajectory.
// Supported: HB_POLYAK, HB_ALTERNATE, NAG_SC, NAG_C, LOW_RES_HB, LOW_RES_AVD, SHI_HB,
// SHI_NAG_SC, SHI_NAG_C. For time-dependent models t = t_offset + times[k].
std::vector<double> second_order_form_residual(Model model, const Trajectory& traj,
                                               const ObjectiveOracle& F, double s, double mu,
                                               double t_offset = 0.0);

}  // namespace hires
