#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace tubeq {

struct EigenPairs {
  Eigen::VectorXd values;    // ascending
  Eigen::MatrixXcd vectors;  // columns, orthonormal
};

/// Implicit QL on a real symmetric tridiagonal matrix. d: diagonal (overwritten with
/// eigenvalues, unsorted), e: e[i] = T(i+1, i), size n with e[n-1] unused.
/// If z is non-null its columns are rotated along (pass identity to get eigenvectors).
void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, Eigen::MatrixXd* z);

/// Dense Hermitian solver: Householder tridiagonalization, phase scaling to a real
/// tridiagonal, implicit QL. Returns the k lowest pairs (k <= 0 means all).
EigenPairs eigensolve_dense(const Eigen::MatrixXcd& m, int k = 0);

/// Hermitian band matrix, both triangles stored, |i - j| <= b.
class HermitianBand {
 public:
  HermitianBand(int n, int bandwidth);

  [[nodiscard]] int size() const noexcept { return n_; }
  [[nodiscard]] int bandwidth() const noexcept { return b_; }
  [[nodiscard]] std::complex<double> operator()(int i, int j) const;
  /// sets (i, j) and its mirror (j, i) = conj
  void set(int i, int j, std::complex<double> v);
  void add(int i, int j, std::complex<double> v);

  [[nodiscard]] Eigen::VectorXcd apply(const Eigen::VectorXcd& x) const;
  [[nodiscard]] Eigen::MatrixXcd dense() const;
  [[nodiscard]] double norm_inf() const;

 private:
  friend std::vector<double> band_eigenvalues(const HermitianBand&);
  int n_, b_;
  std::vector<std::complex<double>> a_;  // row-major, (2b+1) per row
};

/// All eigenvalues, ascending. Givens band-to-tridiagonal reduction then QL.
std::vector<double> band_eigenvalues(const HermitianBand& a);

/// Eigenvector for a known eigenvalue by inverse iteration with a banded LU.
/// Vectors in `against` (orthonormal) are projected out every sweep.
Eigen::VectorXcd inverse_iteration(const HermitianBand& a, double lambda,
                                   const std::vector<Eigen::VectorXcd>& against,
                                   unsigned seed = 1);

/// k lowest eigenpairs of a band matrix.
EigenPairs eigensolve_band(const HermitianBand& a, int k);

}  // namespace tubeq
