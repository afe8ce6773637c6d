#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <string>

#include "tubeq/geometry.hpp"
#include "tubeq/smooth_function.hpp"
#include "tubeq/transverse.hpp"

namespace tubeq {

/// Axis data the effective Hamiltonians need: omega = theta', tau, kappa.
struct AxisData {
  SmoothFunction omega;
  SmoothFunction tau;
  std::function<double(double)> kappa = [](double) { return 0.0; };

  static AxisData from(const Curve& curve, const TransformProfile& profile);
  /// constant omega, tau, kappa
  static AxisData uniform(double omega, double tau, double kappa = 0.0);
};

struct EffectiveMeta {
  CrossSection cross;
  TransformKind kind = TransformKind::Rotation;
  int n1 = 0, n2 = 0, n = 0, l = 0;
  double delta = 0.0;
  double delta_e = 0.0;  // E_{n2} - E_{n1}
  double L_exp = 0.0;
  /// second basis vector is minus_phase |->
  std::complex<double> minus_phase = 1.0;
  bool delta_coupling = true;
  std::string label;
};

/// -1/2 (d_s - i alpha sigma_z)^2 + Vg + v0 I + vx sigma_x.
/// For dim == 1 sigma_z -> 1 and vx is unused.
struct EffectiveHamiltonian {
  int dim = 2;
  SmoothFunction alpha;
  std::function<double(double)> vg = [](double) { return 0.0; };
  SmoothFunction v0;
  SmoothFunction vx;
  EffectiveMeta meta;

  [[nodiscard]] Eigen::Matrix2cd vmat(double s) const;
  /// Vg + Vmat
  [[nodiscard]] Eigen::Matrix2cd potential(double s) const;
};

double geometric_potential(double kappa);

EffectiveHamiltonian assemble_rotation_circular(const AxisData& ax, int l);
EffectiveHamiltonian assemble_rotation_square(const AxisData& ax, int n1, int n2, double d);
EffectiveHamiltonian assemble_scaling_circular(const AxisData& ax, const SmoothFunction& f1,
                                               const SmoothFunction& f2, double delta,
                                               const TransverseMode& mode);
EffectiveHamiltonian assemble_scaling_square(const AxisData& ax, const SmoothFunction& f1,
                                             const SmoothFunction& f2, double delta, int n1,
                                             int n2, double d);
EffectiveHamiltonian assemble_shearing(const AxisData& ax, const SmoothFunction& f,
                                       const CrossSection& cross, const TransverseMode& mode);
/// Vmat = 2 delta f dE sigma_x with delta_coupling, 2 f dE sigma_x otherwise.
EffectiveHamiltonian assemble_combined(const AxisData& ax, const SmoothFunction& f, double delta,
                                       int n1, int n2, double d, bool delta_coupling = true);

/// Shear sigma_x coefficient per unit f in the (|+>, i|->) basis; 0 for even n1 + n2.
double shear_coefficient(int n1, int n2, double d);

/// Dispatch on profile kind and cross section.
EffectiveHamiltonian assemble(const Curve& curve, const TransformProfile& profile,
                              const TransverseMode& mode, bool delta_coupling = true);

struct ExpansionReport {
  double delta_used = 0.0;
  double vt_estimate = 0.0;  // max |V_T| / 2 over the sample grid
  double slow_var_ratio = 0.0;
};

struct VtGrid {
  double s_begin = 0.0, s_end = 1.0;
  int s_samples = 65;
  int q_samples = 9;  // per transverse axis
};

/// V_T at raw coordinates (s, q'), from the closed form with D = d_a A^a = -|T|'.
double transverse_potential(const Curve& curve, const TransformProfile& profile, double s,
                            const Vec2& qp);

ExpansionReport vt_diagnostic(const Curve& curve, const TransformProfile& profile,
                              const CrossSection& cross, const VtGrid& grid);

}  // namespace tubeq
