#include <cmath>
#include <numbers>

#include "doctest.h"
#include "tubeq/effective.hpp"
#include "tubeq/error.hpp"

using namespace tubeq;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double hermitian_residual(const EffectiveHamiltonian& h, double s) {
  const Eigen::Matrix2cd m = h.vmat(s);
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

// V_T straight from its defining expression, every derivative by finite differences
double vt_oracle(const Curve& c, const TransformProfile& p, double s, const Vec2& q) {
  const double h = 1e-4;
  auto A = [&](double ss, const Vec2& qq) -> Vec2 { return metric_tensor(c, p, ss, qq).gauge; };
  auto gamma = [&](double ss, const Vec2& qq) { return metric_tensor(c, p, ss, qq).gamma; };
  auto div = [&](double ss, const Vec2& qq) {
    return (A(ss, qq + Vec2(h, 0))(0) - A(ss, qq - Vec2(h, 0))(0)) / (2 * h) +
           (A(ss, qq + Vec2(0, h))(1) - A(ss, qq - Vec2(0, h))(1)) / (2 * h);
  };
  const double T = p.det(s);
  const double g = gamma(s, q);
  const double D = div(s, q);
  auto inner = [&](const Vec2& qq) { return div(s, qq) / gamma(s, qq); };
  const Vec2 a = A(s, q);
  const double grad = a(0) * (inner(q + Vec2(h, 0)) - inner(q - Vec2(h, 0))) / (2 * h) +
                      a(1) * (inner(q + Vec2(0, h)) - inner(q - Vec2(0, h))) / (2 * h);
  auto outer = [&](double ss) { return p.det(ss) / gamma(ss, q) * div(ss, q); };
  const double ds = (outer(s + h) - outer(s - h)) / (2 * h);
  return grad / (2 * g * T * T) + D * D / (4 * g * g * T * T) + ds / (2 * g * T * T);
}

}  // namespace

TEST_CASE("geometric potential") {
  CHECK(geometric_potential(0.0) == 0.0);
  CHECK(geometric_potential(1.0) == -0.125);
  CHECK(geometric_potential(2.0) == -0.5);
}

TEST_CASE("rotation, circular") {
  auto h0 = assemble_rotation_circular(AxisData::uniform(0.02, 0.02, 0.1), 0);
  CHECK(h0.dim == 1);
  CHECK(h0.alpha(1.0) == 0.0);
  CHECK(h0.vg(0.0) == Approx(-0.1 * 0.1 / 8));
  auto h1 = assemble_rotation_circular(AxisData::uniform(0.02, 0.02), 1);
  CHECK(h1.alpha(3.0) == Approx(0.04).epsilon(1e-15));
  auto hc = assemble_rotation_circular(AxisData::uniform(-0.3, 0.3), 2);
  CHECK(hc.alpha(0.5) == 0.0);
  CHECK(h1.vmat(2.0).isZero(0.0));
}

TEST_CASE("rotation, square") {
  auto h = assemble_rotation_square(AxisData::uniform(0.02, 0.02), 1, 2, 1.0);
  CHECK(h.dim == 2);
  CHECK(h.alpha(0.0) == Approx(0.04 * 256.0 / (-27 * kPi * kPi)).epsilon(1e-14));
  CHECK(h.alpha(0.0) == Approx(-0.038427).epsilon(1e-4));
  CHECK(h.vmat(1.0).isZero(0.0));
  CHECK(assemble_rotation_square(AxisData::uniform(0.02, 0.02), 1, 3, 1.0).alpha(0.0) == 0.0);
  CHECK(assemble_rotation_square(AxisData::uniform(0.0, 0.0), 1, 2, 1.0).alpha(0.0) == 0.0);
  CHECK_THROWS_AS(assemble_rotation_square(AxisData::uniform(0.02, 0.02), 2, 2, 1.0), ModelError);

  // s-dependent omega = -tau pointwise cancels the gauge term
  AxisData ax;
  ax.omega = SmoothFunction::sine(0.1, 5.0);
  ax.tau = -ax.omega;
  auto hz = assemble_rotation_square(ax, 1, 2, 1.0);
  for (double s : {0.0, 0.3, 1.7, 4.9}) CHECK(hz.alpha(s) == 0.0);
}

TEST_CASE("scaling, circular") {
  auto mode = circular_mode(1.0, 1, 1);
  auto f = SmoothFunction::sine(1.0, 10.0);
  auto sq = assemble_scaling_circular(AxisData::uniform(0, 0.02), f, -f, 0.02, mode);
  for (double s : {0.0, 1.1, 2.5}) CHECK(sq.vmat(s).isZero(0.0));
  auto dil = assemble_scaling_circular(AxisData::uniform(0, 0.02), f, f, 0.02, mode);
  CHECK(dil.vmat(2.5)(0, 0).real() == Approx(2 * 0.02 * f(2.5) * mode.energy));
  CHECK(dil.alpha(0.0) == Approx(0.02));
  auto zero = assemble_scaling_circular(AxisData::uniform(0, 0.02), f, f, 0.0, mode);
  CHECK(zero.vmat(2.5).isZero(0.0));
}

TEST_CASE("scaling, square") {
  auto f = SmoothFunction::constant(0.7);
  auto uni = assemble_scaling_square(AxisData::uniform(0, 0.02), f, f, 0.02, 1, 2, 1.0);
  CHECK(uni.vmat(0.0)(0, 1) == 0.0);
  CHECK(uni.vmat(0.0)(0, 0).real() == Approx(0.02 * 1.4 * 2.5 * kPi * kPi));
  auto sq = assemble_scaling_square(AxisData::uniform(0, 0.02), f, -f, 0.02, 1, 2, 1.0);
  CHECK(sq.vmat(0.0)(0, 1).real() == Approx(2 * 0.02 * 0.7 * 1.5 * kPi * kPi).epsilon(1e-14));
  CHECK(sq.vmat(0.0)(0, 0) == 0.0);
  CHECK(assemble_scaling_square(AxisData::uniform(0, 0.02), f, -f, 0.0, 1, 2, 1.0).vmat(0.0).isZero(0.0));
  CHECK(sq.alpha(0.0) == Approx(0.02 * angular_expectation(1, 2)));
}

TEST_CASE("scaling sigma_x matches quadrature of V_H") {
  const double delta = 0.02;
  for (auto [n1, n2] : {std::pair{1, 2}, {2, 3}, {1, 4}, {2, 1}}) {
    for (double f1 : {1.0, 0.3}) {
      for (double f2 : {-1.0, 0.5}) {
        auto h = assemble_scaling_square(AxisData::uniform(0, 0), SmoothFunction::constant(f1),
                                         SmoothFunction::constant(f2), delta, n1, n2, 1.0);
        // V_H = delta (-W11 d2^2 - W22 d1^2)
        auto q = projected_operator_quadrature({-delta * f2, -delta * f1, 0.0}, n1, n2, 1.0, 256);
        CHECK(std::abs(q(0, 1).real() - h.vmat(0)(0, 1).real()) < 1e-6);
        CHECK(std::abs(q(0, 1).imag()) < 1e-9);
        CHECK(std::abs(q(0, 0).real() - h.vmat(0)(0, 0).real()) < 1e-6);
      }
    }
  }
}

TEST_CASE("shearing") {
  auto f = SmoothFunction::constant(1.0);
  auto sq = assemble_shearing(AxisData::uniform(0, 0.02), f, CrossSection::square(1.0),
                              square_mode(1.0, 1, 2));
  CHECK(sq.vmat(0)(0, 1).real() == Approx(-64.0 / 9.0).epsilon(1e-14));
  CHECK(shear_coefficient(1, 2, 1.0) == Approx(-7.1111).epsilon(1e-4));
  CHECK(sq.meta.minus_phase == std::complex<double>(0, 1));
  auto circ = assemble_shearing(AxisData::uniform(0, 0.02), f, CrossSection::circular(1.0),
                                circular_mode(1.0, 1, 1));
  CHECK(circ.vmat(0.3).isZero(0.0));
  auto zero = assemble_shearing(AxisData::uniform(0, 0.02), SmoothFunction{},
                                CrossSection::square(1.0), square_mode(1.0, 1, 2));
  CHECK(zero.vmat(0.3).isZero(0.0));
}

TEST_CASE("shear coefficient matches quadrature of f d1 d2 for many pairs") {
  for (int n1 = 1; n1 <= 4; ++n1) {
    for (int n2 = 1; n2 <= 4; ++n2) {
      if (n1 == n2) continue;
      for (double d : {1.0, 1.7}) {
        auto q = projected_operator_quadrature({0, 0, 1.0}, n1, n2, d, 256, {0.0, 1.0});
        CHECK(std::abs(q(0, 1).real() - shear_coefficient(n1, n2, d)) < 1e-6);
        CHECK(std::abs(q(0, 0)) < 1e-9);
      }
    }
  }
}

TEST_CASE("combined") {
  auto f = SmoothFunction::sine(1.0, 10.0);
  auto ax = AxisData::uniform(0.02, 0.02, 0.02);
  auto h = assemble_combined(ax, f, 0.02, 1, 2, 1.0);
  CHECK(h.vmat(2.5)(0, 1).real() == Approx(2 * 0.02 * 1.5 * kPi * kPi).epsilon(1e-14));
  CHECK(h.alpha(0.0) == Approx(0.04 * angular_expectation(1, 2)));
  auto literal = assemble_combined(ax, f, 0.02, 1, 2, 1.0, false);
  CHECK(literal.vmat(2.5)(0, 1).real() == Approx(2 * 1.5 * kPi * kPi).epsilon(1e-14));

  auto flat = assemble_combined(ax, SmoothFunction{}, 0.02, 1, 2, 1.0);
  auto rot = assemble_rotation_square(ax, 1, 2, 1.0);
  for (double s : {0.0, 1.0, 7.0}) {
    CHECK(flat.alpha(s) == rot.alpha(s));
    CHECK(flat.vmat(s) == rot.vmat(s));
    CHECK(flat.vg(s) == rot.vg(s));
  }
  auto cancel = assemble_combined(AxisData::uniform(-0.02, 0.02), SmoothFunction{}, 0.02, 1, 2, 1.0);
  CHECK(cancel.alpha(3.0) == 0.0);
  CHECK(cancel.vmat(3.0).isZero(0.0));
  CHECK_THROWS_AS(assemble_combined(ax, f, 0.02, 1, 1, 1.0), ModelError);
}

TEST_CASE("hermiticity and splitting of assembled potentials") {
  auto f = SmoothFunction::sine(0.8, 6.0, 0.4);
  auto ax = AxisData::uniform(0.02, 0.05);
  std::vector<EffectiveHamiltonian> hs{
      assemble_combined(ax, f, 0.02, 1, 2, 1.0),
      assemble_scaling_square(ax, f, -f, 0.02, 2, 3, 1.0),
      assemble_shearing(ax, f, CrossSection::square(1.0), square_mode(1.0, 1, 2)),
      assemble_rotation_square(ax, 1, 2, 1.0)};
  for (const auto& h : hs) {
    for (double s = 0; s < 6; s += 0.37) {
      CHECK(hermitian_residual(h, s) < 1e-12);
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> es(h.vmat(s));
      const double c = std::abs(h.vmat(s)(0, 1).real());
      CHECK(es.eigenvalues()(1) - es.eigenvalues()(0) == Approx(2 * c).epsilon(1e-12));
    }
  }
}

TEST_CASE("dispatch from curve and profile") {
  auto curve = Curve::helix(25.0, 25.0);
  auto profile = TransformProfile::combined(0.02, SmoothFunction::linear(0, 0.02),
                                            SmoothFunction::sine(1.0, 10.0));
  auto h = assemble(curve, profile, square_mode(1.0, 1, 2));
  CHECK(h.meta.kind == TransformKind::Combined);
  CHECK(h.alpha(0.0) == Approx(0.04 * angular_expectation(1, 2)).epsilon(1e-12));
  CHECK(h.vg(0.0) == Approx(-0.02 * 0.02 / 8).epsilon(1e-12));
  CHECK(h.vmat(2.5)(0, 1).real() == Approx(0.04 * 1.5 * kPi * kPi).epsilon(1e-12));

  auto hc = assemble(curve, profile, circular_mode(1.0, 1, 1));
  CHECK(hc.vmat(2.5).isZero(0.0));
  CHECK(hc.alpha(0.0) == Approx(0.04).epsilon(1e-12));
}

TEST_CASE("V_T closed form matches the finite-difference oracle") {
  auto c = Curve::helix(1.0, 0.5);
  TransformProfile p;
  p.kind = TransformKind::Combined;
  p.delta = 0.1;
  p.theta = SmoothFunction::sine(0.5, 7.0);
  p.w11 = SmoothFunction::sine(1.0, 3.0, 0.2);
  p.w12 = SmoothFunction::sine(0.7, 4.0, 1.0);
  p.w21 = SmoothFunction::sine(-0.4, 5.0);
  p.w22 = SmoothFunction::sine(0.9, 2.5, 0.3);
  for (double s : {0.3, 1.4, 2.9}) {
    for (const Vec2& q : {Vec2(0.05, -0.1), Vec2(-0.2, 0.15), Vec2(0.0, 0.0)}) {
      const double v = transverse_potential(c, p, s, q);
      const double o = vt_oracle(c, p, s, q);
      CHECK(std::abs(v - o) < 1e-6 * std::max(1.0, std::abs(o)));
    }
  }
}

TEST_CASE("V_T diagnostic") {
  auto c = Curve::helix(25.0, 25.0);
  VtGrid g{0.0, 10.0, 33, 7};
  auto rot = TransformProfile::rotation(SmoothFunction::sine(0.3, 10.0));
  CHECK(vt_diagnostic(c, rot, CrossSection::square(1.0), g).vt_estimate == 0.0);
  auto zero = TransformProfile::squeezing(0.0, SmoothFunction::sine(1.0, 10.0));
  CHECK(vt_diagnostic(c, zero, CrossSection::square(1.0), g).vt_estimate == 0.0);

  auto sc = TransformProfile::scaling(0.02, SmoothFunction::sine(1.0, 10.0),
                                      SmoothFunction::sine(0.5, 10.0));
  auto r = vt_diagnostic(c, sc, CrossSection::square(1.0), g);
  CHECK(r.vt_estimate > 0.0);
  CHECK(r.delta_used == 0.02);
  auto r2 = vt_diagnostic(c, TransformProfile::scaling(0.01, sc.w11, sc.w22),
                          CrossSection::square(1.0), g);
  // leading behaviour is linear in delta
  CHECK(r.vt_estimate / r2.vt_estimate == Approx(2.0).epsilon(0.05));
  CHECK(r.slow_var_ratio < 0.1);
}
