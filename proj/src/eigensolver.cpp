#include "tubeq/eigensolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "tubeq/error.hpp"

namespace tubeq {

using cd = std::complex<double>;

void tridiagonal_ql(std::vector<double>& d, std::vector<double>& e, Eigen::MatrixXd* z) {
  const int n = static_cast<int>(d.size());
  if (static_cast<int>(e.size()) < n) e.resize(n, 0.0);
  if (n == 0) return;
  e[n - 1] = 0.0;
  const double eps = std::numeric_limits<double>::epsilon();
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (iter++ == 60) throw ModelError("tridiagonal QL did not converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        bool underflow = false;
        int i;
        for (i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (z) {
            for (int k = 0; k < z->rows(); ++k) {
              double t = (*z)(k, i + 1);
              (*z)(k, i + 1) = s * (*z)(k, i) + c * t;
              (*z)(k, i) = c * (*z)(k, i) - s * t;
            }
          }
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
}

namespace {

double hermitian_defect(const Eigen::MatrixXcd& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

std::vector<int> ascending_order(const std::vector<double>& v) {
  std::vector<int> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] < v[b]; });
  return idx;
}

}  // namespace

EigenPairs eigensolve_dense(const Eigen::MatrixXcd& m, int k) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw ModelError("eigensolve: matrix is not square");
  if (n == 0) throw ModelError("eigensolve: empty matrix");
  double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if (hermitian_defect(m) > 1e-10 * scale) throw ModelError("eigensolve: matrix is not Hermitian");
  if (k <= 0 || k > n) k = n;

  Eigen::MatrixXcd a = 0.5 * (m + m.adjoint());
  Eigen::MatrixXcd q = Eigen::MatrixXcd::Identity(n, n);
  std::vector<cd> sub(n, 0.0);

  for (int c = 0; c + 2 < n; ++c) {
    const int len = n - c - 1;
    Eigen::VectorXcd x = a.block(c + 1, c, len, 1);
    double xn = x.norm();
    if (xn == 0.0) continue;
    cd ph = std::abs(x(0)) > 0 ? x(0) / std::abs(x(0)) : cd(1.0);
    cd alpha = -ph * xn;
    Eigen::VectorXcd v = x;
    v(0) -= alpha;
    double vn = v.norm();
    if (vn == 0.0) continue;
    v /= vn;
    auto blk = a.block(c + 1, c + 1, len, len);
    Eigen::VectorXcd p = blk * v;
    cd kk = v.dot(p);  // v^H p
    Eigen::VectorXcd w = p - kk * v;
    blk -= 2.0 * (v * w.adjoint() + w * v.adjoint());
    a.block(c + 1, c, len, 1).setZero();
    a.block(c, c + 1, 1, len).setZero();
    a(c + 1, c) = alpha;
    a(c, c + 1) = std::conj(alpha);
    // Q <- Q H
    auto qb = q.block(0, c + 1, n, len);
    Eigen::VectorXcd qv = qb * v;
    qb -= 2.0 * qv * v.adjoint();
  }
  for (int i = 0; i + 1 < n; ++i) sub[i] = a(i + 1, i);

  std::vector<double> d(n), e(n, 0.0);
  std::vector<cd> phase(n, 1.0);
  for (int i = 0; i < n; ++i) d[i] = a(i, i).real();
  for (int i = 0; i + 1 < n; ++i) {
    double r = std::abs(sub[i]);
    e[i] = r;
    phase[i + 1] = r > 0 ? phase[i] * sub[i] / r : phase[i];
  }
  Eigen::MatrixXd z = Eigen::MatrixXd::Identity(n, n);
  tridiagonal_ql(d, e, &z);

  auto order = ascending_order(d);
  EigenPairs out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  for (int j = 0; j < k; ++j) {
    int src = order[j];
    out.values(j) = d[src];
    Eigen::VectorXcd y(n);
    for (int i = 0; i < n; ++i) y(i) = phase[i] * z(i, src);
    out.vectors.col(j) = q * y;
  }
  return out;
}

HermitianBand::HermitianBand(int n, int bandwidth) : n_(n), b_(bandwidth) {
  if (n <= 0 || bandwidth < 0) throw ModelError("HermitianBand: invalid size");
  a_.assign(static_cast<size_t>(n) * (2 * b_ + 1), cd(0.0));
}

cd HermitianBand::operator()(int i, int j) const {
  if (std::abs(i - j) > b_) return 0.0;
  return a_[static_cast<size_t>(i) * (2 * b_ + 1) + (j - i + b_)];
}

void HermitianBand::set(int i, int j, cd v) {
  if (std::abs(i - j) > b_ || i < 0 || j < 0 || i >= n_ || j >= n_)
    throw ModelError("HermitianBand: entry outside the band");
  a_[static_cast<size_t>(i) * (2 * b_ + 1) + (j - i + b_)] = v;
  a_[static_cast<size_t>(j) * (2 * b_ + 1) + (i - j + b_)] = std::conj(v);
  if (i == j) a_[static_cast<size_t>(i) * (2 * b_ + 1) + b_] = v.real();
}

void HermitianBand::add(int i, int j, cd v) { set(i, j, (*this)(i, j) + v); }

Eigen::VectorXcd HermitianBand::apply(const Eigen::VectorXcd& x) const {
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(n_);
  for (int i = 0; i < n_; ++i) {
    int j0 = std::max(0, i - b_), j1 = std::min(n_ - 1, i + b_);
    cd acc = 0.0;
    for (int j = j0; j <= j1; ++j) acc += (*this)(i, j) * x(j);
    y(i) = acc;
  }
  return y;
}

Eigen::MatrixXcd HermitianBand::dense() const {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(n_, n_);
  for (int i = 0; i < n_; ++i)
    for (int j = std::max(0, i - b_); j <= std::min(n_ - 1, i + b_); ++j) m(i, j) = (*this)(i, j);
  return m;
}

double HermitianBand::norm_inf() const {
  double best = 0.0;
  for (int i = 0; i < n_; ++i) {
    double row = 0.0;
    for (int j = std::max(0, i - b_); j <= std::min(n_ - 1, i + b_); ++j)
      row += std::abs((*this)(i, j));
    best = std::max(best, row);
  }
  return best;
}

namespace {

// General (non-symmetric storage) band work array with half-width w.
struct BandWork {
  int n, w;
  std::vector<cd> a;
  BandWork(int n_, int w_) : n(n_), w(w_), a(static_cast<size_t>(n_) * (2 * w_ + 1), 0.0) {}
  cd& at(int i, int j) { return a[static_cast<size_t>(i) * (2 * w + 1) + (j - i + w)]; }
};

// Rotation G acting on coordinates (p, q), q = p + 1, chosen so that (G v)_q = 0 for
// v = (y, x) at positions (p, q). Applied as A <- G A G^H.
void rotate(BandWork& A, int p, int q, double c, cd s) {
  const int n = A.n, w = A.w;
  int lo = std::max(0, q - w), hi = std::min(n - 1, p + w);
  for (int j = lo; j <= hi; ++j) {
    cd ap = A.at(p, j), aq = A.at(q, j);
    A.at(p, j) = c * ap + s * aq;
    A.at(q, j) = -std::conj(s) * ap + c * aq;
  }
  for (int i = lo; i <= hi; ++i) {
    cd ap = A.at(i, p), aq = A.at(i, q);
    A.at(i, p) = c * ap + std::conj(s) * aq;
    A.at(i, q) = -s * ap + c * aq;
  }
}

// Zero A(q, col) against A(p, col).
void annihilate(BandWork& A, int p, int q, int col) {
  cd y = A.at(p, col), x = A.at(q, col);
  double ax = std::abs(x);
  if (ax == 0.0) return;
  double ay = std::abs(y);
  double nrm = std::hypot(ax, ay);
  double c;
  cd s;
  if (ay == 0.0) {
    c = 0.0;
    s = std::conj(x) / ax;
  } else {
    c = ay / nrm;
    s = (y / ay) * std::conj(x) / nrm;
  }
  rotate(A, p, q, c, s);
  A.at(q, col) = 0.0;
  A.at(col, q) = 0.0;
}

}  // namespace

std::vector<double> band_eigenvalues(const HermitianBand& band) {
  const int n = band.n_, b = band.b_;
  BandWork A(n, b + 2);
  for (int i = 0; i < n; ++i)
    for (int j = std::max(0, i - b); j <= std::min(n - 1, i + b); ++j) A.at(i, j) = band(i, j);

  if (b > 1) {
    for (int k = 0; k + 2 < n; ++k) {
      for (int r = std::min(k + b, n - 1); r >= k + 2; --r) {
        annihilate(A, r - 1, r, k);
        // chase the bulge created at (r + b, r - 1)
        int col = r - 1;
        int row = r + b;
        while (row < n) {
          if (A.at(row, col) == cd(0.0)) break;
          annihilate(A, row - 1, row, col);
          col = row - 1;
          row += b;
        }
      }
    }
  }
  std::vector<double> d(n), e(n, 0.0);
  for (int i = 0; i < n; ++i) d[i] = A.at(i, i).real();
  for (int i = 0; i + 1 < n; ++i) e[i] = std::abs(A.at(i + 1, i));
  tridiagonal_ql(d, e, nullptr);
  std::sort(d.begin(), d.end());
  return d;
}

namespace {

// LU with partial pivoting of (A - shift I) kept in band form: L has kl = b, U has 2b.
struct BandLU {
  int n, b, width;
  std::vector<cd> u;     // row i, columns i-b .. i+2b
  std::vector<cd> l;     // multipliers, row i, columns i-b .. i-1 (indexed k - i + b)
  std::vector<int> piv;  // row swapped with at step k

  cd& U(int i, int j) { return u[static_cast<size_t>(i) * width + (j - i + b)]; }

  BandLU(const HermitianBand& a, double shift, double tiny)
      : n(a.size()), b(a.bandwidth()), width(3 * a.bandwidth() + 1) {
    u.assign(static_cast<size_t>(n) * width, 0.0);
    l.assign(static_cast<size_t>(n) * (b + 1), 0.0);
    piv.assign(n, 0);
    for (int i = 0; i < n; ++i)
      for (int j = std::max(0, i - b); j <= std::min(n - 1, i + b); ++j)
        U(i, j) = a(i, j) - (i == j ? shift : 0.0);
    for (int k = 0; k < n; ++k) {
      int last = std::min(n - 1, k + b);
      int p = k;
      double best = std::abs(U(k, k));
      for (int i = k + 1; i <= last; ++i)
        if (std::abs(U(i, k)) > best) best = std::abs(U(i, k)), p = i;
      piv[k] = p;
      int jend = std::min(n - 1, k + 2 * b);
      if (p != k)
        for (int j = k; j <= jend; ++j) std::swap(U(k, j), U(p, j));
      if (std::abs(U(k, k)) < tiny) U(k, k) = tiny;
      for (int i = k + 1; i <= last; ++i) {
        cd f = U(i, k) / U(k, k);
        l[static_cast<size_t>(i) * (b + 1) + (k - i + b)] = f;
        U(i, k) = 0.0;
        if (f == cd(0.0)) continue;
        for (int j = k + 1; j <= jend; ++j) U(i, j) -= f * U(k, j);
      }
    }
  }

  Eigen::VectorXcd solve(Eigen::VectorXcd x) {
    for (int k = 0; k < n; ++k) {
      if (piv[k] != k) std::swap(x(k), x(piv[k]));
      int last = std::min(n - 1, k + b);
      for (int i = k + 1; i <= last; ++i) x(i) -= l[static_cast<size_t>(i) * (b + 1) + (k - i + b)] * x(k);
    }
    for (int i = n - 1; i >= 0; --i) {
      cd acc = x(i);
      int jend = std::min(n - 1, i + 2 * b);
      for (int j = i + 1; j <= jend; ++j) acc -= U(i, j) * x(j);
      x(i) = acc / U(i, i);
    }
    return x;
  }
};

void project_out(Eigen::VectorXcd& x, const std::vector<Eigen::VectorXcd>& against) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& v : against) x -= v.dot(x) * v;
}

}  // namespace

Eigen::VectorXcd inverse_iteration(const HermitianBand& a, double lambda,
                                   const std::vector<Eigen::VectorXcd>& against, unsigned seed) {
  const int n = a.size();
  double anorm = std::max(1.0, a.norm_inf());
  BandLU lu(a, lambda, std::numeric_limits<double>::epsilon() * anorm);
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::VectorXcd x(n);
  for (int i = 0; i < n; ++i) x(i) = cd(uni(rng), uni(rng));
  project_out(x, against);
  x.normalize();
  for (int it = 0; it < 4; ++it) {
    x = lu.solve(x);
    project_out(x, against);
    double nx = x.norm();
    if (!(nx > 0.0) || !std::isfinite(nx)) throw ModelError("inverse iteration broke down");
    x /= nx;
    double res = (a.apply(x) - lambda * x).norm();
    if (it >= 1 && res < 1e-12 * anorm) break;
  }
  return x;
}

EigenPairs eigensolve_band(const HermitianBand& a, int k) {
  const int n = a.size();
  if (k <= 0 || k > n) k = n;
  auto all = band_eigenvalues(a);
  EigenPairs out;
  out.values.resize(k);
  out.vectors.resize(n, k);
  std::vector<Eigen::VectorXcd> done;
  done.reserve(k);
  for (int j = 0; j < k; ++j) {
    out.values(j) = all[j];
    Eigen::VectorXcd v = inverse_iteration(a, all[j], done, 1000u + static_cast<unsigned>(j));
    out.vectors.col(j) = v;
    done.push_back(std::move(v));
  }
  return out;
}

}  // namespace tubeq
