#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "tubeq/effective.hpp"
#include "tubeq/eigensolver.hpp"

namespace tubeq {

enum class Boundary { Dirichlet, Periodic };

struct Grid1D {
  double length = 1.0;
  int points = 256;
  Boundary bc = Boundary::Periodic;

  /// s0/N periodic, s0/(N+1) Dirichlet
  [[nodiscard]] double spacing() const;
  [[nodiscard]] double node(int j) const;
  void validate() const;
};

/// Block tridiagonal (plus corner blocks for periodic) finite-difference operator.
/// Vector index of node j, component c is j*dim + c.
struct DiscreteOperator {
  int dim = 2;
  Grid1D grid;
  std::vector<Eigen::Matrix2cd> diag;   // H(j, j)
  std::vector<Eigen::Matrix2cd> upper;  // H(j, j+1); periodic has N entries, the last one couples N-1 -> 0
  std::vector<Eigen::Matrix2cd> lower;  // H(j+1, j)

  [[nodiscard]] int size() const { return dim * grid.points; }
  [[nodiscard]] Eigen::MatrixXcd dense() const;
  [[nodiscard]] Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  /// max |M - M^H| entrywise
  [[nodiscard]] double hermiticity_residual() const;
  /// Band form. Periodic grids use the folded node order 0, N-1, 1, N-2, ...
  /// perm[i] = band index of natural index i.
  [[nodiscard]] HermitianBand band(std::vector<int>* perm = nullptr) const;
};

/// -1/2 d^2 + (i/2){d, A} + A^2/2 + V with A = alpha sigma_z, central differences.
DiscreteOperator discretize(const EffectiveHamiltonian& h, const Grid1D& grid);

/// Dense path; rejects non-Hermitian input.
EigenPairs eigensolve(const Eigen::MatrixXcd& m, int k);
/// k lowest pairs of a discretized operator; vectors in natural ordering.
EigenPairs eigensolve(const DiscreteOperator& op, int k);
std::vector<double> all_eigenvalues(const DiscreteOperator& op);

/// Constant-coefficient lattice dispersion for plane wave k and constant A.
double lattice_dispersion(double k, double a, double h);

struct TwoLevelField {
  std::vector<double> s;
  std::vector<Eigen::Vector2cd> values;
  std::vector<double> flux;  // Im(phi^H (d - iA) phi)
  double norm = 0.0;         // trapezoid integral of |phi|^2
};

/// Eigenvector column j as a field normalized to unit integral.
TwoLevelField eigenstate_field(const DiscreteOperator& op, const EigenPairs& pairs, int j);

struct SRange {
  double begin = 0.0, end = 1.0;
  int samples = 257;
};

/// Fixed-energy ODE, adaptive Dormand-Prince with local tolerance `tol`.
TwoLevelField propagate(const EffectiveHamiltonian& h, double energy, const Eigen::Vector2cd& phi0,
                        const Eigen::Vector2cd& dphi0, const SRange& range, double tol = 1e-10);

struct WkbMomenta {
  double p_plus = 0.0, p_minus = 0.0;
  bool regime_ok = true;  // E >= 10 max(|X|, alpha^2/2)
};

/// p+ = alpha + sqrt(2(E - X) - alpha^2), p- = -alpha - sqrt(2(E + X) - alpha^2);
/// X is the sigma_x coefficient of the two-level potential.
WkbMomenta wkb_momenta(double energy, double alpha, double offdiag);

struct WkbSample {
  double s = 0.0;
  double p = 0.0;
  double lambda = 0.0;
  Eigen::Vector2d u = Eigen::Vector2d::Zero();
  double prefactor = 0.0;  // 1/sqrt|p -+ alpha|, without C
};

/// sign = +1 or -1. Energy is measured from Vg + v0.
WkbSample wkb_spinor(double s, int sign, const EffectiveHamiltonian& h, double energy);

struct WkbBranch {
  int sign = 1;
  double C = 0.0;  // C^2 * integral of prefactor^2 = 1
  std::vector<WkbSample> samples;
  std::vector<double> phase;  // integral of p from range.begin
  double max_mixing_rate = 0.0;  // max |u_-^T du_+/ds|
};

WkbBranch wkb_branch(const EffectiveHamiltonian& h, double energy, int sign, const SRange& range);

/// 100 * max(|X|, alpha^2/2) sampled over [0, length].
double auto_energy(const EffectiveHamiltonian& h, double length, int samples = 1025);

struct CrossSectionField {
  double s = 0.0;
  int grid = 0;
  double d = 1.0;
  std::vector<double> q;          // cell centres along each axis
  std::vector<double> amplitude;  // row-major, index i1 * grid + i2
  std::vector<double> phase;      // (-pi, pi]
  std::vector<std::complex<double>> value;
};

/// psi = u1 |+> + u2 minus_phase |->
CrossSectionField reconstruct_field(const Eigen::Vector2cd& u, int n1, int n2, double d, int grid,
                                    std::complex<double> minus_phase = 1.0);

/// integral of |psi|^2 by the midpoint rule
double field_norm(const CrossSectionField& f);

/// Circular median of the pointwise phase difference b - a over points above
/// 1e-3 of the peak amplitude in both fields. Result in (-pi, pi].
double phase_jump(const CrossSectionField& a, const CrossSectionField& b);

/// amplitude array rotated by +pi/2 about the centre
std::vector<double> rotate90(const std::vector<double>& a, int grid);
double pattern_correlation(const std::vector<double>& a, const std::vector<double>& b);

struct PhaseScan {
  std::vector<CrossSectionField> fields;
  std::vector<double> jumps;  // jumps[k] between fields k and k+1
};

PhaseScan phase_evolution_scan(const EffectiveHamiltonian& h, double energy, int sign,
                               const std::vector<double>& s_samples, int grid);

struct SplittingPrediction {
  int m = 0;
  double k = 0.0;  // 2 pi m / s0
  double e_forward = 0.0, e_backward = 0.0;
  double splitting = 0.0;  // |e_backward - e_forward|
};

/// Bohr-Sommerfeld levels of forward and backward movers of the + branch on a ring:
/// loop integral of (alpha +- sqrt(2(E - V0 - X) - alpha^2)) ds = +-2 pi m, m nearest to
/// the reference energy.
SplittingPrediction wkb_splitting(const EffectiveHamiltonian& h, double length, double energy,
                                  int quadrature = 4096);

/// mean(upper two) - mean(lower two) of the four eigenvalues nearest `centre`.
double doublet_gap(const std::vector<double>& eigenvalues, double centre);

}  // namespace tubeq
