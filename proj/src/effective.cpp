#include "tubeq/effective.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "tubeq/error.hpp"

namespace tubeq {

namespace {

SmoothFunction derivative_of(const SmoothFunction& f, const std::string& label) {
  if (f.is_identically_zero()) return {};
  // third derivative is not carried; estimate it from d2
  return SmoothFunction::custom([f](double s) { return f.d1(s); },
                                [f](double s) { return f.d2(s); },
                                [f](double s) {
                                  const double h = 1e-5 * std::max(1.0, std::abs(s));
                                  return (f.d2(s + h) - f.d2(s - h)) / (2 * h);
                                },
                                label);
}

void require_pair(int n1, int n2, const char* who) {
  if (n1 < 1 || n2 < 1)
    throw ModelError(std::string(who) + ": quantum numbers must be >= 1");
  if (n1 == n2)
    throw ModelError(std::string(who) +
                     ": n1 == n2 spans a one-dimensional subspace, no |+-> basis");
}

EffectiveHamiltonian square_base(const SmoothFunction& gauge, int n1, int n2, double d) {
  const TransverseMode m = square_mode(d, n1, n2);
  EffectiveHamiltonian h;
  h.dim = 2;
  h.alpha = m.L_exp * gauge;
  h.meta.cross = m.cross;
  h.meta.n1 = n1;
  h.meta.n2 = n2;
  h.meta.delta_e = m.e2 - m.e1;
  h.meta.L_exp = m.L_exp;
  return h;
}

}  // namespace

AxisData AxisData::from(const Curve& curve, const TransformProfile& profile) {
  AxisData ax;
  ax.omega = derivative_of(profile.theta, "omega");
  if (curve.kind() == Curve::Kind::Helix) {
    ax.tau = SmoothFunction::constant(curve.torsion(0.0));
    const double k = curve.curvature(0.0);
    ax.kappa = [k](double) { return k; };
  } else {
    ax.tau = SmoothFunction::custom([curve](double s) { return curve.torsion(s); },
                                    [curve](double s) { return curve.torsion_d1(s); },
                                    [curve](double s) {
                                      const double h = 1e-5;
                                      const double a = std::max(curve.s_min(), s - h);
                                      const double b = std::min(curve.s_max(), s + h);
                                      return (curve.torsion_d1(b) - curve.torsion_d1(a)) / (b - a);
                                    },
                                    "tau(tabulated)");
    ax.kappa = [curve](double s) { return curve.curvature(s); };
  }
  return ax;
}

AxisData AxisData::uniform(double omega, double tau, double kappa) {
  AxisData ax;
  ax.omega = SmoothFunction::constant(omega);
  ax.tau = SmoothFunction::constant(tau);
  ax.kappa = [kappa](double) { return kappa; };
  return ax;
}

Eigen::Matrix2cd EffectiveHamiltonian::vmat(double s) const {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  const double a = v0(s);
  m(0, 0) = a;
  m(1, 1) = a;
  if (dim == 2) {
    const double x = vx(s);
    m(0, 1) = x;
    m(1, 0) = x;
  }
  return m;
}

Eigen::Matrix2cd EffectiveHamiltonian::potential(double s) const {
  return vmat(s) + vg(s) * Eigen::Matrix2cd::Identity();
}

double geometric_potential(double kappa) {
  if (kappa < 0.0) throw GeometryError("geometric_potential: curvature must be >= 0");
  return -kappa * kappa / 8.0;
}

EffectiveHamiltonian assemble_rotation_circular(const AxisData& ax, int l) {
  EffectiveHamiltonian h;
  h.dim = 1;
  h.alpha = static_cast<double>(l) * (ax.omega + ax.tau);
  h.vg = [k = ax.kappa](double s) { return geometric_potential(k(s)); };
  h.meta.cross.kind = CrossSection::Kind::Circular;
  h.meta.kind = TransformKind::Rotation;
  h.meta.l = l;
  h.meta.L_exp = l;
  h.meta.label = "rotation/circular";
  return h;
}

EffectiveHamiltonian assemble_rotation_square(const AxisData& ax, int n1, int n2, double d) {
  require_pair(n1, n2, "assemble_rotation_square");
  EffectiveHamiltonian h = square_base(ax.omega + ax.tau, n1, n2, d);
  h.vg = [k = ax.kappa](double s) { return geometric_potential(k(s)); };
  h.meta.kind = TransformKind::Rotation;
  h.meta.label = "rotation/square";
  return h;
}

EffectiveHamiltonian assemble_scaling_circular(const AxisData& ax, const SmoothFunction& f1,
                                               const SmoothFunction& f2, double delta,
                                               const TransverseMode& mode) {
  if (mode.cross.kind != CrossSection::Kind::Circular)
    throw ModelError("assemble_scaling_circular: circular mode required");
  EffectiveHamiltonian h;
  h.dim = 1;
  h.alpha = static_cast<double>(mode.l) * ax.tau;
  h.vg = [k = ax.kappa](double s) { return geometric_potential(k(s)); };
  h.v0 = (delta * mode.energy) * (f1 + f2);
  h.meta.cross = mode.cross;
  h.meta.kind = TransformKind::Scaling;
  h.meta.n = mode.n;
  h.meta.l = mode.l;
  h.meta.L_exp = mode.l;
  h.meta.delta = delta;
  h.meta.label = "scaling/circular";
  return h;
}

EffectiveHamiltonian assemble_scaling_square(const AxisData& ax, const SmoothFunction& f1,
                                             const SmoothFunction& f2, double delta, int n1,
                                             int n2, double d) {
  require_pair(n1, n2, "assemble_scaling_square");
  EffectiveHamiltonian h = square_base(ax.tau, n1, n2, d);
  const double e1 = box_energy(n1, d), e2 = box_energy(n2, d);
  h.vg = [k = ax.kappa](double s) { return geometric_potential(k(s)); };
  h.v0 = (delta * (e1 + e2)) * (f1 + f2);
  h.vx = (delta * (e2 - e1)) * (f1 + -f2);
  h.meta.kind = TransformKind::Scaling;
  h.meta.delta = delta;
  h.meta.label = "scaling/square";
  return h;
}

double shear_coefficient(int n1, int n2, double d) {
  require_pair(n1, n2, "shear_coefficient");
  if ((n1 + n2) % 2 == 0) return 0.0;
  const double a = n1 * n1, b = n2 * n2;
  const double e = box_energy(n1, d) + box_energy(n2, d);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  return -(32.0 / pi2) * a * b * e / ((a - b) * (a - b) * (a + b));
}

EffectiveHamiltonian assemble_shearing(const AxisData& ax, const SmoothFunction& f,
                                       const CrossSection& cross, const TransverseMode& mode) {
  if (cross.kind == CrossSection::Kind::Circular) {
    EffectiveHamiltonian h;
    h.dim = 1;
    h.alpha = static_cast<double>(mode.l) * ax.tau;
    h.vg = [k = ax.kappa](double s) { return geometric_potential(k(s)); };
    h.meta.cross = cross;
    h.meta.kind = TransformKind::Shearing;
    h.meta.n = mode.n;
    h.meta.l = mode.l;
    h.meta.L_exp = mode.l;
    h.meta.label = "shearing/circular";
    return h;
  }
  require_pair(mode.n1, mode.n2, "assemble_shearing");
  EffectiveHamiltonian h = square_base(ax.tau, mode.n1, mode.n2, cross.size);
  h.vg = [k = ax.kappa](double s) { return geometric_potential(k(s)); };
  h.vx = shear_coefficient(mode.n1, mode.n2, cross.size) * f;
  h.meta.kind = TransformKind::Shearing;
  h.meta.minus_phase = {0.0, 1.0};
  h.meta.label = "shearing/square";
  return h;
}

EffectiveHamiltonian assemble_combined(const AxisData& ax, const SmoothFunction& f, double delta,
                                       int n1, int n2, double d, bool delta_coupling) {
  require_pair(n1, n2, "assemble_combined");
  EffectiveHamiltonian h = square_base(ax.omega + ax.tau, n1, n2, d);
  h.vg = [k = ax.kappa](double s) { return geometric_potential(k(s)); };
  const double scale = 2.0 * (delta_coupling ? delta : 1.0) * h.meta.delta_e;
  h.vx = scale * f;
  h.meta.kind = TransformKind::Combined;
  h.meta.delta = delta;
  h.meta.delta_coupling = delta_coupling;
  h.meta.label = "combined/square";
  return h;
}

EffectiveHamiltonian assemble(const Curve& curve, const TransformProfile& profile,
                              const TransverseMode& mode, bool delta_coupling) {
  const AxisData ax = AxisData::from(curve, profile);
  const bool circ = mode.cross.kind == CrossSection::Kind::Circular;
  const double d = mode.cross.size;
  switch (profile.kind) {
    case TransformKind::Rotation:
      return circ ? assemble_rotation_circular(ax, mode.l)
                  : assemble_rotation_square(ax, mode.n1, mode.n2, d);
    case TransformKind::Scaling:
      return circ ? assemble_scaling_circular(ax, profile.w11, profile.w22, profile.delta, mode)
                  : assemble_scaling_square(ax, profile.w11, profile.w22, profile.delta, mode.n1,
                                            mode.n2, d);
    case TransformKind::Shearing:
      return assemble_shearing(ax, profile.w12, mode.cross, mode);
    case TransformKind::Combined: {
      if (!circ)
        return assemble_combined(ax, profile.w11, profile.delta, mode.n1, mode.n2, d, delta_coupling);
      // squeezing leaves the circular levels untouched; only the gauge term survives
      EffectiveHamiltonian h =
          assemble_scaling_circular(ax, profile.w11, profile.w22, profile.delta, mode);
      h.alpha = static_cast<double>(mode.l) * (ax.omega + ax.tau);
      h.meta.kind = TransformKind::Combined;
      h.meta.label = "combined/circular";
      return h;
    }
  }
  throw ModelError("assemble: unknown transformation kind");
}

double transverse_potential(const Curve& curve, const TransformProfile& profile, double s,
                            const Vec2& qp) {
  const Mat2 J = (Mat2() << 0.0, -1.0, 1.0, 0.0).finished();
  const Mat2 T = profile.matrix(s);
  const Mat2 Tp = profile.matrix_d1(s);
  const double detT = profile.det(s), detT1 = profile.det_d1(s), detT2 = profile.det_d2(s);
  const double D = -detT1;
  const double kappa = curve.curvature(s), dkappa = curve.curvature_d1(s);
  const double tau = curve.torsion(s);
  const Vec2 q = T * qp;
  const double gamma = 1.0 - kappa * q(0);
  if (gamma <= 0.0) throw GeometryError("transverse_potential: gamma <= 0");
  const Mat2 adj = (Mat2() << T(1, 1), -T(0, 1), -T(1, 0), T(0, 0)).finished();
  const Vec2 A = -adj * (Tp + tau * J * T) * qp;
  const double T2 = detT * detT;

  const double t1 = A.dot(Vec2(T(0, 0), T(0, 1))) * kappa * D / (gamma * gamma) /
                    (2.0 * gamma * T2);
  const double t2 = D * D / (4.0 * gamma * gamma * T2);
  const double dTD = -(detT1 * detT1 + detT * detT2);
  const double dq1 = dkappa * q(0) + kappa * (Tp * qp)(0);
  const double t3 = (dTD / gamma + detT * D * dq1 / (gamma * gamma)) / (2.0 * gamma * T2);
  return t1 + t2 + t3;
}

ExpansionReport vt_diagnostic(const Curve& curve, const TransformProfile& profile,
                              const CrossSection& cross, const VtGrid& grid) {
  ExpansionReport r;
  r.delta_used = profile.delta;
  const double sd = std::sqrt(profile.delta);
  const double half = cross.kind == CrossSection::Kind::Square ? cross.size / 2 : cross.size;
  const int ns = std::max(grid.s_samples, 2), nq = std::max(grid.q_samples, 2);
  double worst = 0.0;
  for (int i = 0; i < ns; ++i) {
    const double s = grid.s_begin + (grid.s_end - grid.s_begin) * i / (ns - 1);
    for (int a = 0; a < nq; ++a) {
      for (int b = 0; b < nq; ++b) {
        Vec2 qh(-half + 2 * half * a / (nq - 1), -half + 2 * half * b / (nq - 1));
        if (cross.kind == CrossSection::Kind::Circular && qh.norm() > half) continue;
        const double v = transverse_potential(curve, profile, s, sd * qh);
        worst = std::max(worst, std::abs(v));
      }
    }
  }
  r.vt_estimate = 0.5 * worst;
  const double qmax = cross.kind == CrossSection::Kind::Square ? half * std::numbers::sqrt2 : half;
  r.slow_var_ratio = slow_variation_ratio(profile, grid.s_begin, grid.s_end, qmax, ns);
  return r;
}

}  // namespace tubeq
