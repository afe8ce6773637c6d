#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "tubeq/error.hpp"
#include "tubeq/qgt.hpp"

using namespace tubeq;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

QgtModel two_level() {
  QgtModel m;
  m.tau = 0.02;
  m.delta = 0.02;
  m.n1 = 1;
  m.n2 = 2;
  m.d = 1.0;
  return m;
}

const double kP = std::sqrt(2.0 * 59.2);

double max_rel(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
  return (a - b).cwiseAbs().maxCoeff() / std::max(1e-300, b.cwiseAbs().maxCoeff());
}

// tensor-product composite Simpson over a rectangle
template <class Fn>
double rectangle_simpson(Fn&& fn, double w0, double w1, double f0, double f1, int n) {
  auto wt = [n](int i) { return (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0); };
  const double hw = (w1 - w0) / n, hf = (f1 - f0) / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i)
    for (int j = 0; j <= n; ++j) acc += wt(i) * wt(j) * fn(w0 + i * hw, f0 + j * hf);
  return acc * hw * hf / 9.0;
}

}  // namespace

TEST_CASE("model constants") {
  QgtModel m = two_level();
  CHECK(m.L() == Approx(256.0 / (-27.0 * kPi * kPi)).epsilon(1e-14));
  CHECK(m.delta_e() == Approx(0.02 * 1.5 * kPi * kPi).epsilon(1e-14));
  m.delta_coupling = false;
  CHECK(m.delta_e() == Approx(1.5 * kPi * kPi).epsilon(1e-14));
  CHECK(m.alpha(0.02) == Approx(0.04 * m.L()));
}

TEST_CASE("mixing angle limits and identity") {
  auto pure_x = mixing_angle(0.3, 0.0, 2.0);
  CHECK(pure_x.phi == Approx(kPi / 4).epsilon(1e-14));
  CHECK(pure_x.lambda == Approx(1.2));
  CHECK(pure_x.cos_phi == Approx(1.0 / std::sqrt(2.0)));
  // f -> 0+ : alpha p > 0 gives phi -> 0, alpha p < 0 gives phi -> pi/2
  CHECK(mixing_angle(1e-4, 0.5, 1.0).phi == Approx(2e-4).epsilon(1e-6));
  CHECK(mixing_angle(1e-4, -0.5, 1.0).phi == Approx(kPi / 2 - 2e-4).epsilon(1e-6));
  // f < 0 puts the angle in (pi/2, pi)
  CHECK(mixing_angle(-0.2, -0.5, 1.0).phi > kPi / 2);

  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double f = u(rng), ap = 3 * u(rng), de = 0.1 + std::abs(u(rng));
    MixingAngle m;
    try {
      m = mixing_angle(f, ap, de);
    } catch (const DegeneracyError&) {
      continue;
    }
    CHECK(std::abs(m.cos_phi * m.cos_phi + m.sin_phi * m.sin_phi - 1.0) < 1e-12);
    CHECK(m.cos2 == Approx(std::cos(2 * m.phi)).epsilon(1e-10));
    CHECK(m.sin2 == Approx(std::sin(2 * m.phi)).epsilon(1e-10));
    CHECK(m.phi > 0.0);
    CHECK(m.phi < kPi);
  }
}

TEST_CASE("mixing angle rejects degenerate points") {
  CHECK_THROWS_AS((void)mixing_angle(0.0, 0.0, 1.0), DegeneracyError);
  CHECK_THROWS_AS((void)mixing_angle(0.0, 0.7, 1.0), DegeneracyError);
  CHECK_THROWS_AS((void)mixing_angle(1e-9, 0.7, 1.0), DegeneracyError);
  CHECK_NOTHROW((void)mixing_angle(0.0, -0.7, 1.0));
}

TEST_CASE("analytic tensor structure") {
  const QgtModel m = two_level();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> w(-0.1, 0.1), f(-1.0, 1.0), pd(-2.0, 2.0);
  for (int i = 0; i < 500; ++i) {
    QgtPoint q;
    try {
      q = qgt_analytic(w(rng), f(rng), kP, pd(rng), m);
    } catch (const DegeneracyError&) {
      continue;
    }
    CHECK(q.g(0, 1) == q.g(1, 0));
    CHECK(q.F(0, 0) == 0.0);
    CHECK(q.F(1, 1) == 0.0);
    CHECK(q.F(0, 1) == -q.F(1, 0));
    CHECK(std::isfinite(q.g.sum()));
  }
  auto still = qgt_analytic(0.01, 0.4, kP, 0.0, m);
  CHECK(still.F(0, 1) == 0.0);
  CHECK(still.F(1, 0) == 0.0);
  // phi = pi/4 where alpha p = 0, i.e. omega = -tau
  auto quarter = qgt_analytic(-0.02, 0.4, kP, 0.7, m);
  CHECK(quarter.phi == Approx(kPi / 4).epsilon(1e-12));
  CHECK(std::abs(quarter.g(1, 1)) < 1e-25);
  // mirrored angle phi -> pi/2 - phi flips g12: alpha p -> -alpha p
  auto a = qgt_analytic(0.01, 0.4, kP, 0.0, m);
  auto b = qgt_analytic(-0.05, 0.4, kP, 0.0, m);
  CHECK(a.phi + b.phi == Approx(kPi / 2).epsilon(1e-12));
  CHECK(b.g(0, 1) == Approx(-a.g(0, 1)).epsilon(1e-12));
  CHECK(b.g(1, 1) == Approx(a.g(1, 1)).epsilon(1e-12));
}

TEST_CASE("curvature and phi-dot terms follow the closed form") {
  const QgtModel m = two_level();
  const double w = 0.03, f = 0.5, pd = 0.8;
  auto q = qgt_analytic(w, f, kP, pd, m);
  const double b = m.alpha(w) * kP, x = 2 * f * m.delta_e();
  const double l2 = b * b + x * x;
  const double c2 = b * b / l2;
  CHECK(q.F(0, 1) == Approx(-2 * m.delta_e() * m.B() * pd * c2 / l2).epsilon(1e-12));
  const double g0 = qgt_analytic(w, f, kP, 0.0, m).g(0, 0);
  CHECK(q.g(0, 0) - g0 == Approx(m.B() * m.B() * pd * pd * c2 / l2).epsilon(1e-10));
}

TEST_CASE("finite-difference oracle agrees with the analytic metric at zero phi-dot") {
  const QgtModel m = two_level();
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> w(-0.1, 0.1), f(-1.0, 1.0);
  int checked = 0;
  for (int i = 0; i < 300; ++i) {
    const double ww = w(rng), ff = f(rng);
    Eigen::Matrix2d fd;
    QgtPoint q;
    try {
      q = qgt_analytic(ww, ff, kP, 0.0, m);
      fd = qgt_fd_oracle(ww, ff, kP, m);
    } catch (const DegeneracyError&) {
      continue;
    }
    if (q.lambda < 1e-2) continue;
    ++checked;
    CHECK(max_rel(q.g, fd) < 1e-4);
    CHECK(std::abs(fd(0, 1) - fd(1, 0)) < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(fd);
    CHECK(es.eigenvalues()(0) > -1e-10 * std::max(1.0, es.eigenvalues()(1)));
  }
  CHECK(checked > 250);
  auto quarter = qgt_fd_oracle(-0.02, 0.4, kP, m);
  CHECK(std::abs(quarter(1, 1)) < 1e-6);
}

TEST_CASE("phi-dot by the chain rule") {
  const QgtModel m = two_level();
  const double w = 0.01, f = 0.3, rate = 2 * kPi / 10.0;
  const double b = m.alpha(w) * kP, x = 2 * f * m.delta_e();
  // d phi/df = dE b / Lambda^2
  const double expect = rate * m.delta_e() * b / (b * b + x * x);
  CHECK(phi_dot(w, f, kP, 0.0, rate, m) == Approx(expect).epsilon(1e-7));
  auto omega = [](double) { return 0.01; };
  auto fs = [](double s) { return std::sin(2 * kPi * s / 10.0); };
  const double s = 0.4;
  const double along = phi_dot_along(omega, fs, s, kP, m);
  CHECK(along == Approx(phi_dot(0.01, fs(s), kP, 0.0, rate * std::cos(2 * kPi * s / 10.0), m)).epsilon(1e-6));
}

TEST_CASE("berry loop: zero curvature field") {
  const QgtModel m = two_level();
  std::vector<Eigen::Vector2d> sq = {{0.0, 0.2}, {0.05, 0.2}, {0.05, 0.8}, {0.0, 0.8}};
  auto r = berry_loop(sq, kP, [](double, double) { return 0.0; }, m);
  CHECK(r.area_integral == 0.0);
  CHECK(r.line_integral == 0.0);
  CHECK(r.enclosed_area == Approx(0.03));
}

TEST_CASE("berry loop: Stokes consistency on a smooth field") {
  const QgtModel m = two_level();
  auto field = [](double w, double f) { return 0.5 + 0.3 * std::sin(30 * w) * f; };
  auto f12 = [&](double w, double f) { return qgt_analytic(w, f, kP, field(w, f), m).F(0, 1); };

  std::vector<Eigen::Vector2d> rect = {{0.0, 0.2}, {0.05, 0.2}, {0.05, 0.8}, {0.0, 0.8}};
  auto r = berry_loop(rect, kP, field, m);
  const double oracle = rectangle_simpson(f12, 0.0, 0.05, 0.2, 0.8, 400);
  CHECK(r.area_integral == Approx(oracle).epsilon(1e-8));
  CHECK(std::abs(r.area_integral - r.line_integral) < 1e-4 * std::abs(r.area_integral));

  // non-convex pentagon, clockwise input
  std::vector<Eigen::Vector2d> penta = {{0.0, 0.2}, {0.02, 0.5}, {0.0, 0.8}, {0.06, 0.7}, {0.06, 0.3}};
  auto pr = berry_loop(penta, kP, field, m);
  CHECK(pr.enclosed_area < 0.0);
  CHECK(std::abs(pr.area_integral - pr.line_integral) < 1e-4 * std::abs(pr.area_integral));
  std::vector<Eigen::Vector2d> rev(penta.rbegin(), penta.rend());
  auto rr = berry_loop(rev, kP, field, m);
  CHECK(rr.area_integral == Approx(-pr.area_integral).epsilon(1e-12));
}

TEST_CASE("berry loop: shrinking loops scale with the enclosed area") {
  const QgtModel m = two_level();
  auto field = [](double, double) { return 0.5; };
  const double w0 = 0.01, f0 = 0.5;
  const double centre = qgt_analytic(w0, f0, kP, 0.5, m).F(0, 1);
  for (double e : {1e-2, 1e-3}) {
    std::vector<Eigen::Vector2d> sq = {{w0 - e, f0 - e}, {w0 + e, f0 - e}, {w0 + e, f0 + e}, {w0 - e, f0 + e}};
    auto r = berry_loop(sq, kP, field, m);
    CHECK(r.area_integral / r.enclosed_area == Approx(centre).epsilon(e * 10));
  }
}

TEST_CASE("berry loop: crossing the degenerate locus is an error") {
  const QgtModel m = two_level();
  std::vector<Eigen::Vector2d> sq = {{-0.06, -0.3}, {-0.03, -0.3}, {-0.03, 0.3}, {-0.06, 0.3}};
  CHECK_THROWS_AS((void)berry_loop(sq, kP, [](double, double) { return 0.3; }, m), DegeneracyError);
  CHECK_THROWS_AS((void)berry_loop({{0, 0}, {1, 1}}, kP, [](double, double) { return 0.3; }, m),
                  ModelError);
}
