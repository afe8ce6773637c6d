#include "tubeq/qgt.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss.hpp>
#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "tubeq/error.hpp"
#include "tubeq/transverse.hpp"

namespace tubeq {

double QgtModel::L() const { return angular_expectation(n1, n2); }

double QgtModel::delta_e() const {
  const double de = box_energy(n2, d) - box_energy(n1, d);
  return delta_coupling ? delta * de : de;
}

MixingAngle mixing_angle(double f, double alpha_p, double delta_e) {
  const double x = 2.0 * f * delta_e;
  MixingAngle m;
  m.lambda = std::hypot(x, alpha_p);
  // Lambda - alpha p without cancellation
  const double gap = alpha_p > 0.0 ? x * x / (m.lambda + alpha_p) : m.lambda - alpha_p;
  if (!(m.lambda * gap >= 1e-10))
    throw DegeneracyError("mixing_angle: degenerate point (Lambda (Lambda - alpha p) = " +
                          std::to_string(m.lambda * gap) + ")");
  if (alpha_p > 0.0) {
    m.cos_phi = std::copysign(std::sqrt((m.lambda + alpha_p) / (2.0 * m.lambda)), x);
    m.sin_phi = std::abs(x) / std::sqrt(2.0 * m.lambda * (m.lambda + alpha_p));
  } else {
    const double nrm = std::sqrt(2.0 * m.lambda * gap);
    m.cos_phi = x / nrm;
    m.sin_phi = gap / nrm;
  }
  m.phi = std::atan2(m.sin_phi, m.cos_phi);
  m.cos2 = alpha_p / m.lambda;
  m.sin2 = x / m.lambda;
  return m;
}

QgtPoint qgt_analytic(double omega, double f, double p, double phi_dot, const QgtModel& model) {
  const double de = model.delta_e();
  const MixingAngle m = mixing_angle(f, model.alpha(omega) * p, de);
  QgtPoint q;
  q.omega = omega;
  q.f = f;
  q.p = p;
  q.phi = m.phi;
  q.phi_dot = phi_dot;
  q.lambda = m.lambda;
  q.B = model.B();
  const double l2 = m.lambda * m.lambda;
  const double c2 = m.cos2 * m.cos2, s2 = m.sin2 * m.sin2;
  const double sin4 = 2.0 * m.sin2 * m.cos2;
  const double B = q.B;
  q.g(0, 0) = B * B * (p * p * s2 + phi_dot * phi_dot * c2) / l2;
  q.g(0, 1) = -0.5 * B * p * de * sin4 / l2;
  q.g(1, 0) = q.g(0, 1);
  q.g(1, 1) = de * de * c2 / l2;
  const double f12 = -2.0 * de * B * phi_dot * c2 / l2;
  q.F(0, 1) = f12;
  q.F(1, 0) = -f12;
  return q;
}

namespace {

Eigen::Vector2d upper_eigenvector(double omega, double f, double p, const QgtModel& model,
                                  const Eigen::Vector2d& ref) {
  const double b = model.alpha(omega) * p;
  const double x = 2.0 * f * model.delta_e();
  Eigen::Matrix2d m;
  m << b, x, x, -b;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m);
  if (es.eigenvalues()(1) - es.eigenvalues()(0) < 1e-8)
    throw DegeneracyError("qgt_fd_oracle: degeneracy inside the stencil");
  Eigen::Vector2d u = es.eigenvectors().col(1);
  if (u.dot(ref) < 0.0) u = -u;
  return u;
}

}  // namespace

Eigen::Matrix2d qgt_fd_oracle(double omega, double f, double p, const QgtModel& model, double h) {
  const double hw = h * std::max(1.0, std::abs(omega));
  const double hf = h * std::max(1.0, std::abs(f));
  Eigen::Matrix2d m0;
  {
    const double b = model.alpha(omega) * p, x = 2.0 * f * model.delta_e();
    m0 << b, x, x, -b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(m0);
  Eigen::Vector2d u = es.eigenvectors().col(1);
  u = upper_eigenvector(omega, f, p, model, u);
  Eigen::Vector2d du[2];
  du[0] = (upper_eigenvector(omega + hw, f, p, model, u) -
           upper_eigenvector(omega - hw, f, p, model, u)) / (2.0 * hw);
  du[1] = (upper_eigenvector(omega, f + hf, p, model, u) -
           upper_eigenvector(omega, f - hf, p, model, u)) / (2.0 * hf);
  const Eigen::Matrix2d proj = Eigen::Matrix2d::Identity() - u * u.transpose();
  Eigen::Matrix2d g;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b) g(a, b) = du[a].dot(proj * du[b]);
  return g;
}

double phi_dot(double omega, double f, double p, double omega_rate, double f_rate,
               const QgtModel& model, double h) {
  const double de = model.delta_e();
  auto phi = [&](double w, double ff) { return mixing_angle(ff, model.alpha(w) * p, de).phi; };
  double out = 0.0;
  if (omega_rate != 0.0) {
    const double hw = h * std::max(1.0, std::abs(omega));
    out += omega_rate * (phi(omega + hw, f) - phi(omega - hw, f)) / (2.0 * hw);
  }
  if (f_rate != 0.0) {
    const double hf = h * std::max(1.0, std::abs(f));
    out += f_rate * (phi(omega, f + hf) - phi(omega, f - hf)) / (2.0 * hf);
  }
  return out;
}

double phi_dot_along(const std::function<double(double)>& omega,
                     const std::function<double(double)>& f, double s, double p,
                     const QgtModel& model, double h) {
  const double de = model.delta_e();
  auto phi = [&](double ss) { return mixing_angle(f(ss), model.alpha(omega(ss)) * p, de).phi; };
  return (phi(s + h) - phi(s - h)) / (2.0 * h);
}

namespace {

using Vec2 = Eigen::Vector2d;

struct Rule {
  std::vector<double> x, w;  // on [0, 1]
};

const Rule& gauss_rule() {
  static const Rule rule = [] {
    using G = boost::math::quadrature::gauss<double, 20>;
    Rule r;
    const auto& a = G::abscissa();
    const auto& w = G::weights();
    for (size_t i = 0; i < a.size(); ++i) {
      r.x.push_back(0.5 * (1.0 + a[i]));
      r.w.push_back(0.5 * w[i]);
      if (a[i] != 0.0) {
        r.x.push_back(0.5 * (1.0 - a[i]));
        r.w.push_back(0.5 * w[i]);
      }
    }
    return r;
  }();
  return rule;
}

// composite Gauss on [0, 1] with `cells` panels
template <class Fn>
double integrate01(Fn&& fn, int cells) {
  const Rule& r = gauss_rule();
  double acc = 0.0;
  for (int c = 0; c < cells; ++c)
    for (size_t i = 0; i < r.x.size(); ++i) acc += r.w[i] * fn((c + r.x[i]) / cells);
  return acc / cells;
}

double cross(const Vec2& a, const Vec2& b) { return a(0) * b(1) - a(1) * b(0); }

double signed_area(const std::vector<Vec2>& poly) {
  double a = 0.0;
  for (size_t i = 0; i < poly.size(); ++i) a += cross(poly[i], poly[(i + 1) % poly.size()]);
  return 0.5 * a;
}

bool inside_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
  return cross(b - a, p - a) >= 0.0 && cross(c - b, p - b) >= 0.0 && cross(a - c, p - c) >= 0.0;
}

// ear clipping of a counterclockwise simple polygon
std::vector<std::array<Vec2, 3>> triangulate(std::vector<Vec2> poly) {
  std::vector<std::array<Vec2, 3>> tris;
  while (poly.size() > 3) {
    const size_t n = poly.size();
    bool clipped = false;
    for (size_t i = 0; i < n && !clipped; ++i) {
      const Vec2& a = poly[(i + n - 1) % n];
      const Vec2& b = poly[i];
      const Vec2& c = poly[(i + 1) % n];
      const double turn = cross(b - a, c - b);
      if (turn == 0.0) {
        poly.erase(poly.begin() + static_cast<long>(i));
        clipped = true;
        break;
      }
      if (turn < 0.0) continue;
      bool ear = true;
      for (size_t j = 0; j < n && ear; ++j) {
        if (j == i || j == (i + 1) % n || j == (i + n - 1) % n) continue;
        if (inside_triangle(poly[j], a, b, c)) ear = false;
      }
      if (!ear) continue;
      tris.push_back({a, b, c});
      poly.erase(poly.begin() + static_cast<long>(i));
      clipped = true;
    }
    if (!clipped) throw ModelError("berry_loop: loop is not a simple polygon");
  }
  if (cross(poly[1] - poly[0], poly[2] - poly[1]) > 0.0) tris.push_back({poly[0], poly[1], poly[2]});
  return tris;
}

}  // namespace

BerryLoopResult berry_loop(const std::vector<Vec2>& loop, double p, const PhiDotField& phi_dot_field,
                           const QgtModel& model, int resolution) {
  if (loop.size() < 3) throw ModelError("berry_loop: need at least three vertices");
  if (resolution < 1) throw ModelError("berry_loop: resolution must be >= 1");
  auto f12 = [&](double w, double f) {
    try {
      return qgt_analytic(w, f, p, phi_dot_field(w, f), model).F(0, 1);
    } catch (const DegeneracyError&) {
      throw DegeneracyError("berry_loop: loop crosses a degeneracy near (omega, f) = (" +
                            std::to_string(w) + ", " + std::to_string(f) + ")");
    }
  };

  // the degenerate locus is the half-line f = 0, alpha(omega) p >= 0
  for (size_t i = 0; i < loop.size(); ++i) {
    const Vec2 a = loop[i], b = loop[(i + 1) % loop.size()];
    if ((a(1) > 0.0 && b(1) > 0.0) || (a(1) < 0.0 && b(1) < 0.0)) continue;
    std::vector<double> hits;
    if (a(1) == b(1)) {
      hits = {a(0), b(0)};
    } else {
      hits = {a(0) + (b(0) - a(0)) * a(1) / (a(1) - b(1))};
    }
    for (double w : hits)
      if (model.alpha(w) * p >= 0.0)
        throw DegeneracyError("berry_loop: loop crosses the degenerate line f = 0 at omega = " +
                              std::to_string(w));
  }

  BerryLoopResult out;
  out.enclosed_area = signed_area(loop);
  const double orient = out.enclosed_area >= 0.0 ? 1.0 : -1.0;
  std::vector<Vec2> ccw = loop;
  if (orient < 0.0) std::reverse(ccw.begin(), ccw.end());

  // area route: triangles mapped from the unit square (collapsed at one vertex)
  double area = 0.0;
  for (const auto& t : triangulate(ccw)) {
    const Vec2 e1 = t[1] - t[0], e2 = t[2] - t[1];
    const double jac = std::abs(cross(e1, e2));
    area += jac * integrate01(
                      [&](double u) {
                        return integrate01(
                            [&](double v) {
                              const Vec2 x = t[0] + u * e1 + u * v * e2;
                              return u * f12(x(0), x(1));
                            },
                            resolution);
                      },
                      resolution);
  }
  out.area_integral = orient * area;

  // line route: A_f(omega, f) = integral of F12 from omega_ref
  double omega_ref = loop[0](0);
  for (const auto& v : loop) omega_ref = std::min(omega_ref, v(0));
  auto connection = [&](double w, double f) {
    if (w == omega_ref) return 0.0;
    return (w - omega_ref) * integrate01([&](double t) { return f12(omega_ref + t * (w - omega_ref), f); },
                                         resolution);
  };
  double line = 0.0;
  for (size_t i = 0; i < loop.size(); ++i) {
    const Vec2 a = loop[i], b = loop[(i + 1) % loop.size()];
    const double df = b(1) - a(1);
    if (df == 0.0) continue;
    line += df * integrate01(
                     [&](double t) {
                       const Vec2 x = a + t * (b - a);
                       return connection(x(0), x(1));
                     },
                     resolution);
  }
  out.line_integral = line;
  return out;
}

}  // namespace tubeq
