#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tubeq/dynamics.hpp"
#include "tubeq/effective.hpp"
#include "tubeq/geometry.hpp"
#include "tubeq/transverse.hpp"

namespace tubeq::cli {

enum class Format { Csv, Json };

struct QgtSettings {
  double omega_min = -0.1, omega_max = 0.1;
  double f_min = -1.0, f_max = 1.0;
  int omega_points = 50, f_points = 50;
  double omega_rate = 0.0;
  std::optional<double> f_rate;  // default 2 pi / s0
  std::optional<double> p;       // default sqrt(2 E)
};

struct BerrySettings {
  std::vector<Eigen::Vector2d> vertices;
  std::optional<double> phi_dot;  // constant field; default: chain rule with the qgt rates
  int resolution = 4;
};

struct PropagateSettings {
  Eigen::Vector2cd phi0 = Eigen::Vector2cd(1.0, 0.0);
  std::optional<Eigen::Vector2cd> dphi0;  // default i sqrt(2E) phi0
  int samples = 257;
};

struct RunConfig {
  Curve curve = Curve::helix(0.0, 1.0);
  TransformProfile profile = TransformProfile::identity();
  CrossSection cross = CrossSection::square(1.0);
  TransverseMode mode;
  Grid1D grid;
  int field_grid = 65;
  int field_samples = 16;
  int eigen_count = 20;
  std::optional<double> energy;  // empty = auto
  std::string out_dir = "out";
  Format format = Format::Csv;
  bool delta_coupling = true;
  QgtSettings qgt;
  BerrySettings berry;
  PropagateSettings propagate;
  std::vector<std::string> warnings;
};

/// Strict parse: unknown keys and constraint violations raise ConfigError naming the key.
RunConfig parse_config_text(const std::string& text);
RunConfig parse_config(const std::string& path);

}  // namespace tubeq::cli
