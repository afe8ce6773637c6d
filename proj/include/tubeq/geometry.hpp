#pragma once

#include <Eigen/Dense>
#include <memory>
#include <string>
#include <vector>

#include "tubeq/smooth_function.hpp"

namespace tubeq {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat2 = Eigen::Matrix2d;
using Mat3 = Eigen::Matrix3d;

struct Frame {
  Vec3 t = Vec3::UnitX();
  Vec3 n = Vec3::UnitY();
  Vec3 b = Vec3::UnitZ();
};

/// Axis curve of the tube, parameterized by arc length.
class Curve {
 public:
  enum class Kind { Helix, Tabulated };

  struct TabulatedOptions {
    double step = 1e-2;  // fixed RK4 step for the Frenet-Serret integration
    Frame initial_frame{};
    Vec3 origin = Vec3::Zero();
  };

  /// r(s) = (R cos(s/c), R sin(s/c), b s/c), c = sqrt(R^2 + b^2); pitch is 2*pi*b.
  static Curve helix(double radius, double pitch_param);
  static Curve tabulated(std::vector<double> s, std::vector<double> kappa,
                         std::vector<double> tau, const TabulatedOptions& opt);
  static Curve tabulated(std::vector<double> s, std::vector<double> kappa,
                         std::vector<double> tau) {
    return tabulated(std::move(s), std::move(kappa), std::move(tau), TabulatedOptions{});
  }

  [[nodiscard]] Kind kind() const noexcept { return kind_; }
  [[nodiscard]] double curvature(double s) const;
  [[nodiscard]] double curvature_d1(double s) const;
  [[nodiscard]] double torsion(double s) const;
  [[nodiscard]] double torsion_d1(double s) const;

  /// Valid arc-length range. Helices are unbounded.
  [[nodiscard]] double s_min() const noexcept;
  [[nodiscard]] double s_max() const noexcept;

  [[nodiscard]] Frame frame(double s) const;
  [[nodiscard]] Vec3 position(double s) const;

  [[nodiscard]] double helix_radius() const noexcept { return radius_; }
  [[nodiscard]] double helix_pitch_param() const noexcept { return pitch_; }

 private:
  struct Table;
  struct State {
    Vec3 r, t, n, b;
  };
  State state_at(double s) const;
  void check_range(double s) const;

  Kind kind_ = Kind::Helix;
  double radius_ = 0.0, pitch_ = 0.0;
  std::shared_ptr<const Table> table_;
};

Frame frenet_frame(const Curve& curve, double s);

enum class TransformKind { Rotation, Scaling, Shearing, Combined };

std::string to_string(TransformKind k);

/// T(s) = R_theta(s) (1 + delta W(s)).
struct TransformProfile {
  TransformKind kind = TransformKind::Rotation;
  double delta = 0.0;
  SmoothFunction theta, w11, w12, w21, w22;

  static TransformProfile identity();
  static TransformProfile rotation(SmoothFunction theta);
  static TransformProfile scaling(double delta, SmoothFunction f1, SmoothFunction f2);
  /// scaling with f1 = f, f2 = -f
  static TransformProfile squeezing(double delta, SmoothFunction f);
  /// W = [[0, f], [0, 0]]
  static TransformProfile shearing(double delta, SmoothFunction f);
  /// rotation plus squeezing
  static TransformProfile combined(double delta, SmoothFunction theta, SmoothFunction f);

  [[nodiscard]] double omega(double s) const { return theta.d1(s); }
  [[nodiscard]] Mat2 deformation(double s) const;
  [[nodiscard]] Mat2 deformation_d1(double s) const;
  [[nodiscard]] Mat2 deformation_d2(double s) const;

  [[nodiscard]] Mat2 matrix(double s) const;
  [[nodiscard]] Mat2 matrix_d1(double s) const;
  [[nodiscard]] double det(double s) const;
  [[nodiscard]] double det_d1(double s) const;
  [[nodiscard]] double det_d2(double s) const;
};

Mat2 transform_matrix(const TransformProfile& profile, double s);

/// max over samples in [s_begin, s_end] of |dT_ab/ds| * delta * q_max.
double slow_variation_ratio(const TransformProfile& profile, double s_begin, double s_end,
                            double q_max, int samples = 257);

Vec3 embed_point(const Curve& curve, const TransformProfile& profile, const Vec2& qp, double s);

struct MetricEvaluation {
  Mat3 G;  // ordering (q1', q2', s)
  double detG = 0.0;
  Mat3 Ginv;
  Vec2 gauge;  // A^1, A^2
  double gamma = 0.0;
  double zeta = 0.0, eta = 0.0;
  double detT = 0.0;
};

MetricEvaluation metric_tensor(const Curve& curve, const TransformProfile& profile, double s,
                               const Vec2& qp);

/// d_a A^a; A is linear in q' so this depends on s only.
double gauge_divergence(const Curve& curve, const TransformProfile& profile, double s);

/// G from 4th-order central differences of embed_point.
Mat3 metric_finite_difference(const Curve& curve, const TransformProfile& profile, double s,
                              const Vec2& qp, double h = 1e-3);

struct MetricCheck {
  double metric_rel_error = 0.0;    // max |G_closed - G_fd| / max|G|
  double det_abs_error = 0.0;       // |detG closed - det(G)|
  double inverse_residual = 0.0;    // max |G Ginv - I|
};

MetricCheck check_metric(const Curve& curve, const TransformProfile& profile, double s,
                         const Vec2& qp, double h = 1e-3);

}  // namespace tubeq
