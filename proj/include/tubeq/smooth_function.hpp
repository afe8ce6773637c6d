#pragma once

#include <functional>
#include <string>

namespace tubeq {

/// Scalar function of arc length carrying analytic first and second
/// derivatives. Profiles (θ, 𝕎 entries) and gauge couplings are built from these.
class SmoothFunction {
 public:
  using Fn = std::function<double(double)>;

  SmoothFunction();

  static SmoothFunction constant(double value);
  static SmoothFunction linear(double intercept, double slope);
  /// amplitude·sin(2π s/period + phase) + offset
  static SmoothFunction sine(double amplitude, double period, double phase = 0.0,
                             double offset = 0.0);
  static SmoothFunction custom(Fn value, Fn d1, Fn d2, std::string label = "custom");

  [[nodiscard]] double operator()(double s) const { return value_(s); }
  [[nodiscard]] double d1(double s) const { return d1_(s); }
  [[nodiscard]] double d2(double s) const { return d2_(s); }

  /// True only for a constant zero; no sampling involved.
  [[nodiscard]] bool is_identically_zero() const noexcept { return zero_; }
  [[nodiscard]] const std::string& label() const noexcept { return label_; }

  [[nodiscard]] SmoothFunction operator-() const;
  friend SmoothFunction operator+(const SmoothFunction& a, const SmoothFunction& b);
  friend SmoothFunction operator*(double c, const SmoothFunction& a);

 private:
  Fn value_, d1_, d2_;
  bool zero_ = false;
  std::string label_;
};

}  // namespace tubeq
