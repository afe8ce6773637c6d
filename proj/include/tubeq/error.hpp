#pragma once

#include <stdexcept>
#include <string>

namespace tubeq {

/// Failure categories. The CLI maps each to its own exit code.
enum class ErrorKind {
  Config = 2,
  Geometry = 3,
  Model = 4,
  Resolution = 5,
  Integration = 6,
  TurningPoint = 7,
  Degeneracy = 8,
  Io = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }
  [[nodiscard]] int exit_code() const noexcept { return static_cast<int>(kind_); }

 private:
  ErrorKind kind_;
};

/// Frenet frame undefined, point outside the tube, singular transformation.
struct GeometryError : Error {
  explicit GeometryError(const std::string& w) : Error(ErrorKind::Geometry, w) {}
};

/// Invalid quantum numbers or an unsupported mode/section combination.
struct ModelError : Error {
  explicit ModelError(const std::string& w) : Error(ErrorKind::Model, w) {}
};

struct ResolutionError : Error {
  explicit ResolutionError(const std::string& w) : Error(ErrorKind::Resolution, w) {}
};

struct IntegrationError : Error {
  IntegrationError(const std::string& w, double location)
      : Error(ErrorKind::Integration, w), location_(location) {}
  [[nodiscard]] double location() const noexcept { return location_; }

 private:
  double location_;
};

struct TurningPointError : Error {
  explicit TurningPointError(const std::string& w) : Error(ErrorKind::TurningPoint, w) {}
};

/// Degenerate two-level point: mixing angle, spinor or metric undefined.
struct DegeneracyError : Error {
  explicit DegeneracyError(const std::string& w) : Error(ErrorKind::Degeneracy, w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ErrorKind::Config, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(ErrorKind::Io, w) {}
};

}  // namespace tubeq
