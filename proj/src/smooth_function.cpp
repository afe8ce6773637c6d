#include "tubeq/smooth_function.hpp"

#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

namespace tubeq {

SmoothFunction::SmoothFunction()
    : value_([](double) { return 0.0; }),
      d1_([](double) { return 0.0; }),
      d2_([](double) { return 0.0; }),
      zero_(true),
      label_("constant(0)") {}

SmoothFunction SmoothFunction::constant(double value) {
  SmoothFunction f = custom([value](double) { return value; }, [](double) { return 0.0; },
                            [](double) { return 0.0; });
  f.zero_ = (value == 0.0);
  std::ostringstream os;
  os << "constant(" << value << ")";
  f.label_ = os.str();
  return f;
}

SmoothFunction SmoothFunction::linear(double intercept, double slope) {
  if (slope == 0.0) return constant(intercept);
  SmoothFunction f = custom([=](double s) { return intercept + slope * s; },
                            [=](double) { return slope; }, [](double) { return 0.0; });
  std::ostringstream os;
  os << "linear(" << intercept << " + " << slope << " s)";
  f.label_ = os.str();
  return f;
}

SmoothFunction SmoothFunction::sine(double amplitude, double period, double phase,
                                    double offset) {
  if (amplitude == 0.0) return constant(offset);
  const double k = 2.0 * std::numbers::pi / period;
  SmoothFunction f = custom(
      [=](double s) { return amplitude * std::sin(k * s + phase) + offset; },
      [=](double s) { return amplitude * k * std::cos(k * s + phase); },
      [=](double s) { return -amplitude * k * k * std::sin(k * s + phase); });
  std::ostringstream os;
  os << "sine(" << amplitude << ", period " << period << ")";
  f.label_ = os.str();
  return f;
}

SmoothFunction SmoothFunction::custom(Fn value, Fn d1, Fn d2, std::string label) {
  SmoothFunction f;
  f.value_ = std::move(value);
  f.d1_ = std::move(d1);
  f.d2_ = std::move(d2);
  f.zero_ = false;
  f.label_ = std::move(label);
  return f;
}

SmoothFunction SmoothFunction::operator-() const {
  if (zero_) return *this;
  SmoothFunction f = custom([v = value_](double s) { return -v(s); },
                            [v = d1_](double s) { return -v(s); },
                            [v = d2_](double s) { return -v(s); }, "-" + label_);
  return f;
}

SmoothFunction operator+(const SmoothFunction& a, const SmoothFunction& b) {
  if (a.zero_) return b;
  if (b.zero_) return a;
  return SmoothFunction::custom(
      [f = a.value_, g = b.value_](double s) { return f(s) + g(s); },
      [f = a.d1_, g = b.d1_](double s) { return f(s) + g(s); },
      [f = a.d2_, g = b.d2_](double s) { return f(s) + g(s); }, a.label_ + " + " + b.label_);
}

SmoothFunction operator*(double c, const SmoothFunction& a) {
  if (c == 0.0 || a.zero_) return SmoothFunction{};
  std::ostringstream os;
  os << c << "*(" << a.label_ << ")";
  return SmoothFunction::custom([c, f = a.value_](double s) { return c * f(s); },
                                [c, f = a.d1_](double s) { return c * f(s); },
                                [c, f = a.d2_](double s) { return c * f(s); }, os.str());
}

}  // namespace tubeq
