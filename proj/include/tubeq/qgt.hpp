#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace tubeq {

/// Two-level model over the parameter plane (omega, f):
/// (alpha p) sigma_z + 2 f dE sigma_x with alpha = (omega + tau) <L>.
struct QgtModel {
  double tau = 0.0;
  double delta = 0.0;
  int n1 = 1, n2 = 2;
  double d = 1.0;
  bool delta_coupling = true;

  [[nodiscard]] double L() const;
  /// hbar <L> / 2m
  [[nodiscard]] double B() const { return 0.5 * L(); }
  /// dE, times delta when delta_coupling is on
  [[nodiscard]] double delta_e() const;
  [[nodiscard]] double alpha(double omega) const { return (omega + tau) * L(); }
};

struct MixingAngle {
  double phi = 0.0;  // (0, pi)
  double lambda = 0.0;
  double cos_phi = 0.0, sin_phi = 0.0;
  double cos2 = 0.0, sin2 = 0.0;  // cos 2phi = alpha p / Lambda, sin 2phi = 2 f dE / Lambda
};

/// Throws DegeneracyError when Lambda (Lambda - alpha p) < 1e-10.
MixingAngle mixing_angle(double f, double alpha_p, double delta_e);

struct QgtPoint {
  double omega = 0.0, f = 0.0, p = 0.0;
  double phi = 0.0, phi_dot = 0.0, lambda = 0.0, B = 0.0;
  Eigen::Matrix2d g = Eigen::Matrix2d::Zero();
  Eigen::Matrix2d F = Eigen::Matrix2d::Zero();
};

QgtPoint qgt_analytic(double omega, double f, double p, double phi_dot, const QgtModel& model);

/// Pure-state metric Re<du|(1 - |u><u|)|du> of the upper eigenvector, central differences
/// with steps h * max(1, |omega|) and h * max(1, |f|).
Eigen::Matrix2d qgt_fd_oracle(double omega, double f, double p, const QgtModel& model,
                              double h = 1e-5);

/// Chain rule through the mixing angle at fixed rates d omega/ds and df/ds.
double phi_dot(double omega, double f, double p, double omega_rate, double f_rate,
               const QgtModel& model, double h = 1e-6);

/// d phi/ds along configured omega(s), f(s) by central differences in s.
double phi_dot_along(const std::function<double(double)>& omega,
                     const std::function<double(double)>& f, double s, double p,
                     const QgtModel& model, double h = 1e-5);

using PhiDotField = std::function<double(double omega, double f)>;

struct BerryLoopResult {
  double area_integral = 0.0;  // integral of F12 over the enclosed region
  double line_integral = 0.0;  // loop integral of A_f df, A_f = integral of F12 d omega
  double enclosed_area = 0.0;  // signed, counterclockwise positive
};

/// `loop` is a closed polyline in (omega, f); the last vertex connects back to the first.
/// `resolution` sub-cells per triangle side / per edge for the composite Gauss rules.
BerryLoopResult berry_loop(const std::vector<Eigen::Vector2d>& loop, double p,
                           const PhiDotField& phi_dot_field, const QgtModel& model,
                           int resolution = 4);

}  // namespace tubeq
