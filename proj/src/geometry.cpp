#include "tubeq/geometry.hpp"

#include <algorithm>
#include <math.h>  // boost 1.74 pchip calls unqualified isnan

#include <boost/math/interpolators/pchip.hpp>
#include <cmath>
#include <limits>

#include "tubeq/error.hpp"

namespace tubeq {

namespace {

constexpr double kKappaMin = 1e-12;

const Mat2 kJ = (Mat2() << 0.0, -1.0, 1.0, 0.0).finished();

Mat2 rot(double th) {
  const double c = std::cos(th), s = std::sin(th);
  return (Mat2() << c, -s, s, c).finished();
}

Mat2 adjugate(const Mat2& m) {
  return (Mat2() << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0)).finished();
}

}  // namespace

struct Curve::Table {
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  Pchip kappa, tau;
  double s_front, s_back, step;
  std::vector<State> nodes;  // nodes[k] at s_front + k*step

  Table(Pchip k, Pchip t, double a, double b, double h)
      : kappa(std::move(k)), tau(std::move(t)), s_front(a), s_back(b), step(h) {}
};

namespace {

struct Deriv {
  Vec3 r, t, n, b;
};

template <class KF, class TF>
Deriv frenet_rhs(double s, const Vec3& t, const Vec3& n, const Vec3& b, KF&& kf, TF&& tf) {
  const double k = kf(s), w = tf(s);
  return {t, k * n, -k * t + w * b, -w * n};
}

// one RK4 step followed by Gram-Schmidt
template <class St, class KF, class TF>
void rk4_step(St& st, double s0, double h, KF&& kf, TF&& tf) {
  const Deriv k1 = frenet_rhs(s0, st.t, st.n, st.b, kf, tf);
  const Deriv k2 = frenet_rhs(s0 + h / 2, st.t + h / 2 * k1.t, st.n + h / 2 * k1.n,
                              st.b + h / 2 * k1.b, kf, tf);
  const Deriv k3 = frenet_rhs(s0 + h / 2, st.t + h / 2 * k2.t, st.n + h / 2 * k2.n,
                              st.b + h / 2 * k2.b, kf, tf);
  const Deriv k4 = frenet_rhs(s0 + h, st.t + h * k3.t, st.n + h * k3.n, st.b + h * k3.b, kf, tf);
  st.r += h / 6 * (k1.r + 2 * k2.r + 2 * k3.r + k4.r);
  st.t += h / 6 * (k1.t + 2 * k2.t + 2 * k3.t + k4.t);
  st.n += h / 6 * (k1.n + 2 * k2.n + 2 * k3.n + k4.n);
  st.t.normalize();
  st.n = (st.n - st.n.dot(st.t) * st.t).normalized();
  st.b = st.t.cross(st.n);
}

}  // namespace

Curve Curve::helix(double radius, double pitch_param) {
  if (!(radius >= 0.0) || !std::isfinite(pitch_param) || !std::isfinite(radius))
    throw GeometryError("helix: radius must be finite and non-negative");
  if (radius == 0.0 && pitch_param == 0.0)
    throw GeometryError("helix: radius and pitch both zero");
  Curve c;
  c.kind_ = Kind::Helix;
  c.radius_ = radius;
  c.pitch_ = pitch_param;
  return c;
}

Curve Curve::tabulated(std::vector<double> s, std::vector<double> kappa,
                       std::vector<double> tau, const TabulatedOptions& opt) {
  if (s.size() != kappa.size() || s.size() != tau.size())
    throw GeometryError("tabulated curve: s, kappa, tau sizes differ");
  if (s.size() < 4) throw GeometryError("tabulated curve: need at least 4 samples");
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!std::isfinite(s[i]) || !std::isfinite(kappa[i]) || !std::isfinite(tau[i]))
      throw GeometryError("tabulated curve: non-finite sample at index " + std::to_string(i));
    if (kappa[i] < 0.0)
      throw GeometryError("tabulated curve: negative curvature at index " + std::to_string(i));
    if (i > 0 && !(s[i] > s[i - 1]))
      throw GeometryError("tabulated curve: s not strictly increasing at index " +
                          std::to_string(i));
  }
  if (!(opt.step > 0.0)) throw GeometryError("tabulated curve: step must be positive");

  const double a = s.front(), b = s.back();
  std::vector<double> s2 = s;
  Table::Pchip kp(std::move(s), std::move(kappa));
  Table::Pchip tp(std::move(s2), std::move(tau));
  auto table = std::make_shared<Table>(std::move(kp), std::move(tp), a, b, opt.step);

  State st{opt.origin, opt.initial_frame.t, opt.initial_frame.n, opt.initial_frame.b};
  st.t.normalize();
  st.n = (st.n - st.n.dot(st.t) * st.t).normalized();
  st.b = st.t.cross(st.n);

  auto kf = [&](double x) { return table->kappa(std::clamp(x, a, b)); };
  auto tf = [&](double x) { return table->tau(std::clamp(x, a, b)); };

  const auto nsteps = static_cast<std::size_t>(std::ceil((b - a) / opt.step));
  table->nodes.reserve(nsteps + 1);
  table->nodes.push_back(st);
  for (std::size_t k = 0; k < nsteps; ++k) {
    const double s0 = a + static_cast<double>(k) * opt.step;
    rk4_step(st, s0, opt.step, kf, tf);
    table->nodes.push_back(st);
  }

  Curve c;
  c.kind_ = Kind::Tabulated;
  c.table_ = std::move(table);
  return c;
}

double Curve::s_min() const noexcept {
  return kind_ == Kind::Helix ? -std::numeric_limits<double>::infinity() : table_->s_front;
}

double Curve::s_max() const noexcept {
  return kind_ == Kind::Helix ? std::numeric_limits<double>::infinity() : table_->s_back;
}

void Curve::check_range(double s) const {
  if (!std::isfinite(s)) throw GeometryError("curve: non-finite arc length");
  if (kind_ == Kind::Tabulated && (s < table_->s_front || s > table_->s_back))
    throw GeometryError("curve: s = " + std::to_string(s) + " outside tabulated range");
}

double Curve::curvature(double s) const {
  check_range(s);
  if (kind_ == Kind::Helix) return radius_ / (radius_ * radius_ + pitch_ * pitch_);
  return table_->kappa(s);
}

double Curve::curvature_d1(double s) const {
  check_range(s);
  if (kind_ == Kind::Helix) return 0.0;
  return table_->kappa.prime(s);
}

double Curve::torsion(double s) const {
  check_range(s);
  if (kind_ == Kind::Helix) return pitch_ / (radius_ * radius_ + pitch_ * pitch_);
  return table_->tau(s);
}

double Curve::torsion_d1(double s) const {
  check_range(s);
  if (kind_ == Kind::Helix) return 0.0;
  return table_->tau.prime(s);
}

Curve::State Curve::state_at(double s) const {
  check_range(s);
  if (kind_ == Kind::Helix) {
    const double c = std::hypot(radius_, pitch_);
    const double u = s / c, cu = std::cos(u), su = std::sin(u);
    State st;
    st.r = Vec3(radius_ * cu, radius_ * su, pitch_ * u);
    st.t = Vec3(-radius_ / c * su, radius_ / c * cu, pitch_ / c);
    st.n = Vec3(-cu, -su, 0.0);
    st.b = Vec3(pitch_ / c * su, -pitch_ / c * cu, radius_ / c);
    return st;
  }
  const Table& tb = *table_;
  auto k = static_cast<std::size_t>(std::floor((s - tb.s_front) / tb.step));
  k = std::min(k, tb.nodes.size() - 1);
  State st = tb.nodes[k];
  const double s0 = tb.s_front + static_cast<double>(k) * tb.step;
  const double h = s - s0;
  if (h <= 0.0) return st;
  auto kf = [&](double x) { return tb.kappa(std::clamp(x, tb.s_front, tb.s_back)); };
  auto tf = [&](double x) { return tb.tau(std::clamp(x, tb.s_front, tb.s_back)); };
  rk4_step(st, s0, h, kf, tf);
  return st;
}

Frame Curve::frame(double s) const {
  if (curvature(s) <= kKappaMin)
    throw GeometryError("Frenet frame undefined: curvature vanishes at s = " +
                        std::to_string(s));
  const State st = state_at(s);
  return {st.t, st.n, st.b};
}

Vec3 Curve::position(double s) const { return state_at(s).r; }

Frame frenet_frame(const Curve& curve, double s) { return curve.frame(s); }

std::string to_string(TransformKind k) {
  switch (k) {
    case TransformKind::Rotation: return "rotation";
    case TransformKind::Scaling: return "scaling";
    case TransformKind::Shearing: return "shearing";
    case TransformKind::Combined: return "combined";
  }
  return "unknown";
}

// ---- TransformProfile

TransformProfile TransformProfile::identity() { return {}; }

TransformProfile TransformProfile::rotation(SmoothFunction theta) {
  TransformProfile p;
  p.kind = TransformKind::Rotation;
  p.theta = std::move(theta);
  return p;
}

TransformProfile TransformProfile::scaling(double delta, SmoothFunction f1, SmoothFunction f2) {
  TransformProfile p;
  p.kind = TransformKind::Scaling;
  p.delta = delta;
  p.w11 = std::move(f1);
  p.w22 = std::move(f2);
  return p;
}

TransformProfile TransformProfile::squeezing(double delta, SmoothFunction f) {
  SmoothFunction g = -f;
  return scaling(delta, std::move(f), std::move(g));
}

TransformProfile TransformProfile::shearing(double delta, SmoothFunction f) {
  TransformProfile p;
  p.kind = TransformKind::Shearing;
  p.delta = delta;
  p.w12 = std::move(f);
  return p;
}

TransformProfile TransformProfile::combined(double delta, SmoothFunction theta,
                                            SmoothFunction f) {
  TransformProfile p = squeezing(delta, std::move(f));
  p.kind = TransformKind::Combined;
  p.theta = std::move(theta);
  return p;
}

Mat2 TransformProfile::deformation(double s) const {
  return (Mat2() << w11(s), w12(s), w21(s), w22(s)).finished();
}

Mat2 TransformProfile::deformation_d1(double s) const {
  return (Mat2() << w11.d1(s), w12.d1(s), w21.d1(s), w22.d1(s)).finished();
}

Mat2 TransformProfile::deformation_d2(double s) const {
  return (Mat2() << w11.d2(s), w12.d2(s), w21.d2(s), w22.d2(s)).finished();
}

Mat2 TransformProfile::matrix(double s) const {
  return rot(theta(s)) * (Mat2::Identity() + delta * deformation(s));
}

Mat2 TransformProfile::matrix_d1(double s) const {
  const Mat2 r = rot(theta(s));
  return theta.d1(s) * kJ * r * (Mat2::Identity() + delta * deformation(s)) +
         delta * r * deformation_d1(s);
}

double TransformProfile::det(double s) const {
  const Mat2 m = Mat2::Identity() + delta * deformation(s);
  return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

double TransformProfile::det_d1(double s) const {
  const Mat2 m = Mat2::Identity() + delta * deformation(s);
  const Mat2 d = delta * deformation_d1(s);
  return d(0, 0) * m(1, 1) + m(0, 0) * d(1, 1) - d(0, 1) * m(1, 0) - m(0, 1) * d(1, 0);
}

double TransformProfile::det_d2(double s) const {
  const Mat2 m = Mat2::Identity() + delta * deformation(s);
  const Mat2 d = delta * deformation_d1(s);
  const Mat2 dd = delta * deformation_d2(s);
  return dd(0, 0) * m(1, 1) + 2 * d(0, 0) * d(1, 1) + m(0, 0) * dd(1, 1) -
         (dd(0, 1) * m(1, 0) + 2 * d(0, 1) * d(1, 0) + m(0, 1) * dd(1, 0));
}

Mat2 transform_matrix(const TransformProfile& profile, double s) { return profile.matrix(s); }

double slow_variation_ratio(const TransformProfile& profile, double s_begin, double s_end,
                            double q_max, int samples) {
  if (samples < 2) samples = 2;
  double worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double s = s_begin + (s_end - s_begin) * i / (samples - 1);
    worst = std::max(worst, profile.matrix_d1(s).cwiseAbs().maxCoeff());
  }
  return worst * profile.delta * q_max;
}

// ---- embedding and metric

Vec3 embed_point(const Curve& curve, const TransformProfile& profile, const Vec2& qp, double s) {
  const Vec2 q = profile.matrix(s) * qp;
  const double gamma = 1.0 - curve.curvature(s) * q(0);
  if (gamma <= 0.0)
    throw GeometryError("coordinate breakdown: point beyond the local radius of curvature (gamma = " +
                        std::to_string(gamma) + ")");
  if (q.squaredNorm() == 0.0) return curve.position(s);
  const Frame fr = curve.frame(s);
  return curve.position(s) + q(0) * fr.n + q(1) * fr.b;
}

MetricEvaluation metric_tensor(const Curve& curve, const TransformProfile& profile, double s,
                               const Vec2& qp) {
  const Mat2 T = profile.matrix(s);
  const Mat2 Tp = profile.matrix_d1(s);
  const double detT = T.determinant();
  if (std::abs(detT) < 1e-14) throw GeometryError("singular transformation: |T| = 0");
  const double kappa = curve.curvature(s), tau = curve.torsion(s);

  const Vec2 q = T * qp;
  MetricEvaluation m;
  m.detT = detT;
  m.gamma = 1.0 - kappa * q(0);
  if (m.gamma <= 0.0)
    throw GeometryError("coordinate breakdown: gamma = " + std::to_string(m.gamma) + " <= 0");

  const Vec2 xi = (Tp + tau * kJ * T) * qp;
  m.zeta = xi(0);
  m.eta = xi(1);

  const Mat2 TtT = T.transpose() * T;
  const Vec2 Txi = T.transpose() * xi;
  m.G.setZero();
  m.G.topLeftCorner<2, 2>() = TtT;
  m.G(0, 2) = m.G(2, 0) = Txi(0);
  m.G(1, 2) = m.G(2, 1) = Txi(1);
  m.G(2, 2) = m.gamma * m.gamma + xi.squaredNorm();
  m.detG = m.gamma * m.gamma * detT * detT;

  m.gauge = -adjugate(T) * xi;
  const Mat2 Tinv = adjugate(T) / detT;
  const Vec2 v = Tinv * xi;
  const double g2 = m.gamma * m.gamma;
  m.Ginv.topLeftCorner<2, 2>() = v * v.transpose() / g2 + Tinv * Tinv.transpose();
  m.Ginv(0, 2) = m.Ginv(2, 0) = m.gauge(0) / (g2 * detT);
  m.Ginv(1, 2) = m.Ginv(2, 1) = m.gauge(1) / (g2 * detT);
  m.Ginv(2, 2) = 1.0 / g2;
  return m;
}

double gauge_divergence(const Curve&, const TransformProfile& profile, double s) {
  return -profile.det_d1(s);
}

Mat3 metric_finite_difference(const Curve& curve, const TransformProfile& profile, double s,
                              const Vec2& qp, double h) {
  auto R = [&](double a, double b, double c) -> Vec3 { return embed_point(curve, profile, Vec2(a, b), c); };
  auto d4 = [&](auto&& f) -> Vec3 {
    return ((f(-2.0) - f(2.0)) + 8.0 * (f(1.0) - f(-1.0))) / (12.0 * h);
  };
  Vec3 dR[3];
  dR[0] = d4([&](double k) { return R(qp(0) + k * h, qp(1), s); });
  dR[1] = d4([&](double k) { return R(qp(0), qp(1) + k * h, s); });
  dR[2] = d4([&](double k) { return R(qp(0), qp(1), s + k * h); });
  Mat3 G;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) G(i, j) = dR[i].dot(dR[j]);
  return G;
}

MetricCheck check_metric(const Curve& curve, const TransformProfile& profile, double s,
                         const Vec2& qp, double h) {
  const MetricEvaluation m = metric_tensor(curve, profile, s, qp);
  const Mat3 fd = metric_finite_difference(curve, profile, s, qp, h);
  MetricCheck c;
  c.metric_rel_error = (m.G - fd).cwiseAbs().maxCoeff() / m.G.cwiseAbs().maxCoeff();
  c.det_abs_error = std::abs(m.detG - m.G.determinant());
  c.inverse_residual = (m.G * m.Ginv - Mat3::Identity()).cwiseAbs().maxCoeff();
  return c;
}

}  // namespace tubeq
