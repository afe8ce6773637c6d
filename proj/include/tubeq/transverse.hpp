#pragma once

#include <Eigen/Dense>
#include <complex>

namespace tubeq {

struct CrossSection {
  enum class Kind { Square, Circular };
  Kind kind = Kind::Square;
  double size = 1.0;  // side d or radius R_c

  static CrossSection square(double d);
  static CrossSection circular(double radius);
};

struct TransverseMode {
  CrossSection cross;
  int n1 = 0, n2 = 0;     // square quantum numbers
  int n = 0, l = 0;       // circular quantum numbers
  double e1 = 0.0, e2 = 0.0;  // square: E_{n1}, E_{n2}
  double energy = 0.0;        // total transverse energy
  double L_exp = 0.0;         // <L>/hbar
};

/// sqrt(2/d) sin(n pi q/d - n pi/2) on [-d/2, d/2]
double box_mode(int n, double d, double q);
double box_mode_d1(int n, double d, double q);
/// (n pi/d)^2 / 2
double box_energy(int n, double d);

TransverseMode square_mode(double d, int n1, int n2);

/// Closed form 16 n1^2 n2^2 [-1+(-1)^(n1+n2)]^2 / ((n1^2-n2^2)^3 pi^2); 0 for n1 == n2.
double angular_expectation(int n1, int n2);

/// <+|L|+> on the unit square by a grid x grid trapezoid rule.
double angular_expectation_quadrature(int n1, int n2, int grid);

/// n-th positive zero of J_|l|, absolute accuracy 1e-10. Memoized, thread safe.
double bessel_zero(int l, int n);

TransverseMode circular_mode(double radius, int n, int l);

/// (|n1 n2> + sign i |n2 n1>)/sqrt(2) evaluated at (q1, q2).
std::complex<double> degenerate_state(int sign, int n1, int n2, double d, double q1, double q2);

/// Second-order transverse operator c11 d1^2 + c22 d2^2 + c12 d1 d2 with constant coefficients.
struct TransverseOperator {
  double c11 = 0.0, c22 = 0.0, c12 = 0.0;
};

/// Matrix of op in the basis (|+>, minus_phase |->), by 2-D trapezoid quadrature
/// on a grid x grid mesh.
Eigen::Matrix2cd projected_operator_quadrature(const TransverseOperator& op, int n1, int n2,
                                               double d, int grid,
                                               std::complex<double> minus_phase = 1.0);

}  // namespace tubeq
