#include "tubeq/transverse.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "tubeq/error.hpp"

namespace tubeq {

namespace {

using cd = std::complex<double>;
constexpr double kPi = std::numbers::pi;

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ModelError(std::string(what) + " must be positive");
}

// trapezoid weights on [-d/2, d/2]
std::vector<double> trapezoid_nodes(int grid, double d, std::vector<double>& w) {
  std::vector<double> x(static_cast<std::size_t>(grid));
  w.assign(static_cast<std::size_t>(grid), d / (grid - 1));
  for (int i = 0; i < grid; ++i) x[static_cast<std::size_t>(i)] = -d / 2 + d * i / (grid - 1);
  w.front() /= 2;
  w.back() /= 2;
  return x;
}

}  // namespace

CrossSection CrossSection::square(double d) {
  if (!(d > 0.0)) throw ModelError("square cross section: side must be positive");
  return {Kind::Square, d};
}

CrossSection CrossSection::circular(double radius) {
  if (!(radius > 0.0)) throw ModelError("circular cross section: radius must be positive");
  return {Kind::Circular, radius};
}

double box_mode(int n, double d, double q) {
  return std::sqrt(2.0 / d) * std::sin(n * kPi * q / d - n * kPi / 2);
}

double box_mode_d1(int n, double d, double q) {
  return std::sqrt(2.0 / d) * (n * kPi / d) * std::cos(n * kPi * q / d - n * kPi / 2);
}

double box_energy(int n, double d) {
  const double k = n * kPi / d;
  return 0.5 * k * k;
}

TransverseMode square_mode(double d, int n1, int n2) {
  if (n1 < 1 || n2 < 1)
    throw ModelError("square mode: quantum numbers must be >= 1 (got " + std::to_string(n1) +
                     ", " + std::to_string(n2) + ")");
  TransverseMode m;
  m.cross = CrossSection::square(d);
  m.n1 = n1;
  m.n2 = n2;
  m.e1 = box_energy(n1, d);
  m.e2 = box_energy(n2, d);
  m.energy = m.e1 + m.e2;
  m.L_exp = angular_expectation(n1, n2);
  return m;
}

double angular_expectation(int n1, int n2) {
  if (n1 < 1 || n2 < 1) throw ModelError("angular_expectation: quantum numbers must be >= 1");
  if (n1 == n2 || (n1 + n2) % 2 == 0) return 0.0;
  const double a = n1 * n1, b = n2 * n2;
  const double diff = a - b;
  // [-1 + (-1)^(n1+n2)]^2 = 4 for odd sums
  return 16.0 * a * b * 4.0 / (diff * diff * diff * kPi * kPi);
}

double angular_expectation_quadrature(int n1, int n2, int grid) {
  if (n1 < 1 || n2 < 1) throw ModelError("angular_expectation_quadrature: quantum numbers must be >= 1");
  if (n1 == n2) throw ModelError("angular_expectation_quadrature: requires n1 != n2");
  if (grid < 64) throw ModelError("angular_expectation_quadrature: grid must be >= 64");
  const double d = 1.0;
  std::vector<double> w;
  const auto x = trapezoid_nodes(grid, d, w);
  const std::size_t g = x.size();
  std::vector<double> p1(g), p2(g), dp1(g), dp2(g);
  for (std::size_t i = 0; i < g; ++i) {
    p1[i] = box_mode(n1, d, x[i]);
    p2[i] = box_mode(n2, d, x[i]);
    dp1[i] = box_mode_d1(n1, d, x[i]);
    dp2[i] = box_mode_d1(n2, d, x[i]);
  }
  const cd I(0.0, 1.0);
  cd acc = 0.0;
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      // psi = (a + i b)/sqrt2 with a = phi_n1(q1) phi_n2(q2), b = phi_n2(q1) phi_n1(q2)
      const cd psi = (p1[i] * p2[j] + I * p2[i] * p1[j]) / std::numbers::sqrt2;
      const cd d1 = (dp1[i] * p2[j] + I * dp2[i] * p1[j]) / std::numbers::sqrt2;
      const cd d2 = (p1[i] * dp2[j] + I * p2[i] * dp1[j]) / std::numbers::sqrt2;
      const cd Lpsi = I * (x[j] * d1 - x[i] * d2);
      acc += w[i] * w[j] * std::conj(psi) * Lpsi;
    }
  }
  return acc.real();
}

double bessel_zero(int l, int n) {
  if (n < 1) throw ModelError("bessel_zero: n must be >= 1");
  const int nu = std::abs(l);
  static std::mutex mtx;
  static std::map<std::pair<int, int>, double> cache;
  {
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find({nu, n});
    if (it != cache.end()) return it->second;
  }
  auto J = [nu](double x) { return std::cyl_bessel_j(static_cast<double>(nu), x); };
  // zeros of J_nu are spaced by roughly pi, the first one lies above nu
  const double step = 0.25;
  double a = nu > 0 ? static_cast<double>(nu) : step;
  double fa = J(a);
  int found = 0;
  double root = 0.0;
  while (found < n) {
    const double b = a + step;
    const double fb = J(b);
    if (fa == 0.0 && a > 0.0) {
      ++found;
      root = a;
    } else if (fa * fb < 0.0) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = J(mid);
        if (fm == 0.0) {
          lo = hi = mid;
          break;
        }
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      ++found;
      root = 0.5 * (lo + hi);
    }
    a = b;
    fa = fb;
  }
  std::lock_guard<std::mutex> lock(mtx);
  cache.emplace(std::make_pair(nu, n), root);
  return root;
}

TransverseMode circular_mode(double radius, int n, int l) {
  if (n < 1) throw ModelError("circular mode: n must be >= 1 (got " + std::to_string(n) + ")");
  require_positive(radius, "circular mode radius");
  TransverseMode m;
  m.cross = CrossSection::circular(radius);
  m.n = n;
  m.l = l;
  const double j = bessel_zero(l, n);
  m.energy = j * j / (2.0 * radius * radius);
  m.L_exp = l;
  return m;
}

std::complex<double> degenerate_state(int sign, int n1, int n2, double d, double q1,
                                      double q2) {
  const double a = box_mode(n1, d, q1) * box_mode(n2, d, q2);
  const double b = box_mode(n2, d, q1) * box_mode(n1, d, q2);
  return cd(a, sign * b) / std::numbers::sqrt2;
}

Eigen::Matrix2cd projected_operator_quadrature(const TransverseOperator& op, int n1, int n2,
                                               double d, int grid, std::complex<double> minus_phase) {
  if (n1 < 1 || n2 < 1 || n1 == n2)
    throw ModelError("projected_operator_quadrature: requires 1 <= n1 != n2");
  if (grid < 16) throw ModelError("projected_operator_quadrature: grid too small");
  std::vector<double> w;
  const auto x = trapezoid_nodes(grid, d, w);
  const std::size_t g = x.size();
  std::vector<double> p1(g), p2(g), dp1(g), dp2(g), ddp1(g), ddp2(g);
  const double k1 = n1 * kPi / d, k2 = n2 * kPi / d;
  for (std::size_t i = 0; i < g; ++i) {
    p1[i] = box_mode(n1, d, x[i]);
    p2[i] = box_mode(n2, d, x[i]);
    dp1[i] = box_mode_d1(n1, d, x[i]);
    dp2[i] = box_mode_d1(n2, d, x[i]);
    ddp1[i] = -k1 * k1 * p1[i];
    ddp2[i] = -k2 * k2 * p2[i];
  }
  const cd I(0.0, 1.0);
  const cd s2 = std::numbers::sqrt2;
  // basis states b0 = |+>, b1 = minus_phase |->
  const cd coef[2][2] = {{1.0 / s2, I / s2}, {minus_phase / s2, -I * minus_phase / s2}};
  Eigen::Matrix2cd M = Eigen::Matrix2cd::Zero();
  for (std::size_t i = 0; i < g; ++i) {
    for (std::size_t j = 0; j < g; ++j) {
      // product states a = phi_n1(q1) phi_n2(q2), b = phi_n2(q1) phi_n1(q2)
      const double a = p1[i] * p2[j], b = p2[i] * p1[j];
      const double Oa = op.c11 * ddp1[i] * p2[j] + op.c22 * p1[i] * ddp2[j] +
                        op.c12 * dp1[i] * dp2[j];
      const double Ob = op.c11 * ddp2[i] * p1[j] + op.c22 * p2[i] * ddp1[j] +
                        op.c12 * dp2[i] * dp1[j];
      const double ww = w[i] * w[j];
      for (int r = 0; r < 2; ++r) {
        const cd br = coef[r][0] * a + coef[r][1] * b;
        for (int c = 0; c < 2; ++c) {
          const cd Obc = coef[c][0] * Oa + coef[c][1] * Ob;
          M(r, c) += ww * std::conj(br) * Obc;
        }
      }
    }
  }
  return M;
}

}  // namespace tubeq
