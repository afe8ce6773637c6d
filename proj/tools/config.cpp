#include "config.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"
#include "tubeq/error.hpp"

namespace tubeq::cli {

using nlohmann::json;

namespace {

// Object view that rejects keys outside the allowed set.
class Node {
 public:
  Node(const json& j, std::string path, std::set<std::string> allowed)
      : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_, "must be an object");
    for (const auto& item : j_.items())
      if (!allowed.count(item.key())) fail(key(item.key()), "unknown key");
  }

  [[noreturn]] static void fail(const std::string& where, const std::string& what) {
    throw ConfigError("config: " + where + ": " + what);
  }

  std::string key(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
  bool has(const std::string& k) const { return j_.contains(k); }
  const json& raw(const std::string& k) const { return j_.at(k); }

  double number(const std::string& k) const {
    if (!has(k)) fail(key(k), "missing");
    const json& v = j_.at(k);
    if (!v.is_number()) fail(key(k), "must be a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) fail(key(k), "must be finite");
    return x;
  }
  double number(const std::string& k, double def) const { return has(k) ? number(k) : def; }
  double positive(const std::string& k) const {
    double x = number(k);
    if (!(x > 0.0)) fail(key(k), "must be > 0");
    return x;
  }
  double positive(const std::string& k, double def) const { return has(k) ? positive(k) : def; }

  int integer(const std::string& k, int def, int min) const {
    if (!has(k)) return def;
    const json& v = j_.at(k);
    if (!v.is_number_integer()) fail(key(k), "must be an integer");
    int x = v.get<int>();
    if (x < min) fail(key(k), "must be >= " + std::to_string(min));
    return x;
  }
  std::string text(const std::string& k, const std::string& def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_string()) fail(key(k), "must be a string");
    return j_.at(k).get<std::string>();
  }
  bool flag(const std::string& k, bool def) const {
    if (!has(k)) return def;
    if (!j_.at(k).is_boolean()) fail(key(k), "must be true or false");
    return j_.at(k).get<bool>();
  }

 private:
  const json& j_;
  std::string path_;
};

SmoothFunction parse_function(const json& j, const std::string& path) {
  if (j.is_number()) return SmoothFunction::constant(j.get<double>());
  const std::string type = j.is_object() && j.contains("type") && j["type"].is_string()
                               ? j["type"].get<std::string>()
                               : "";
  if (type == "constant") {
    Node n(j, path, {"type", "value"});
    return SmoothFunction::constant(n.number("value"));
  }
  if (type == "linear") {
    Node n(j, path, {"type", "intercept", "slope"});
    return SmoothFunction::linear(n.number("intercept", 0.0), n.number("slope"));
  }
  if (type == "sine") {
    Node n(j, path, {"type", "amplitude", "period", "phase", "offset"});
    return SmoothFunction::sine(n.number("amplitude"), n.positive("period"), n.number("phase", 0.0),
                                n.number("offset", 0.0));
  }
  Node::fail(path, "function must be a number or an object with type constant|linear|sine");
}

std::vector<double> number_array(const json& j, const std::string& path) {
  if (!j.is_array()) Node::fail(path, "must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) Node::fail(path, "must be an array of numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Curve parse_curve(const json& j) {
  const std::string type = j.is_object() && j.contains("type") && j["type"].is_string()
                               ? j["type"].get<std::string>()
                               : "";
  if (type == "helix") {
    Node n(j, "curve", {"type", "radius", "pitch", "curvature", "torsion"});
    const bool geometric = n.has("radius") || n.has("pitch");
    const bool intrinsic = n.has("curvature") || n.has("torsion");
    if (geometric == intrinsic)
      Node::fail("curve", "give either radius + pitch or curvature + torsion");
    if (geometric) {
      double r = n.number("radius"), b = n.number("pitch");
      if (r < 0.0) Node::fail("curve.radius", "must be >= 0");
      if (r == 0.0 && b == 0.0) Node::fail("curve", "radius and pitch cannot both vanish");
      return Curve::helix(r, b);
    }
    double k = n.number("curvature"), t = n.number("torsion");
    if (k < 0.0) Node::fail("curve.curvature", "must be >= 0");
    double den = k * k + t * t;
    if (den == 0.0) Node::fail("curve", "curvature and torsion cannot both vanish");
    return Curve::helix(k / den, t / den);
  }
  if (type == "tabulated") {
    Node n(j, "curve", {"type", "s", "kappa", "tau", "step"});
    Curve::TabulatedOptions opt;
    opt.step = n.positive("step", opt.step);
    try {
      return Curve::tabulated(number_array(n.raw("s"), "curve.s"),
                              number_array(n.raw("kappa"), "curve.kappa"),
                              number_array(n.raw("tau"), "curve.tau"), opt);
    } catch (const GeometryError& e) {
      Node::fail("curve", e.what());
    } catch (const json::exception&) {
      Node::fail("curve", "tabulated curves need s, kappa and tau arrays");
    }
  }
  Node::fail("curve.type", "must be helix or tabulated");
}

TransformProfile parse_profile(const json& j, std::vector<std::string>& warnings) {
  Node n(j, "profile", {"kind", "delta", "theta", "f", "f1", "f2"});
  const std::string kind = n.text("kind", "");
  auto fn = [&](const char* k) -> SmoothFunction {
    if (!n.has(k)) return SmoothFunction();
    return parse_function(n.raw(k), n.key(k));
  };
  auto need = [&](const char* k) {
    if (!n.has(k)) Node::fail(n.key(k), "missing (required for kind " + kind + ")");
  };
  auto delta = [&]() {
    double d = n.number("delta");
    if (!(d > 0.0) || d > 0.2) Node::fail("profile.delta", "must lie in (0, 0.2]");
    if (d > 0.1) warnings.push_back("profile.delta = " + std::to_string(d) + " exceeds 0.1");
    return d;
  };
  if (kind == "identity") return TransformProfile::identity();
  if (kind == "rotation") {
    need("theta");
    if (n.has("delta")) delta();
    return TransformProfile::rotation(fn("theta"));
  }
  if (kind == "scaling") return TransformProfile::scaling(delta(), fn("f1"), fn("f2"));
  if (kind == "squeezing") {
    need("f");
    return TransformProfile::squeezing(delta(), fn("f"));
  }
  if (kind == "shearing") {
    need("f");
    return TransformProfile::shearing(delta(), fn("f"));
  }
  if (kind == "combined") {
    need("theta");
    need("f");
    return TransformProfile::combined(delta(), fn("theta"), fn("f"));
  }
  Node::fail("profile.kind", "must be identity|rotation|scaling|squeezing|shearing|combined");
}

Eigen::Vector2cd complex_pair(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 2) Node::fail(path, "must be [[re, im], [re, im]]");
  Eigen::Vector2cd v;
  for (int c = 0; c < 2; ++c) {
    const json& e = j[c];
    if (e.is_number()) {
      v(c) = e.get<double>();
    } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
      v(c) = std::complex<double>(e[0].get<double>(), e[1].get<double>());
    } else {
      Node::fail(path, "must be [[re, im], [re, im]]");
    }
  }
  return v;
}

std::pair<double, double> range(const Node& n, const std::string& k, double lo, double hi) {
  if (!n.has(k)) return {lo, hi};
  auto v = number_array(n.raw(k), n.key(k));
  if (v.size() != 2 || !(v[1] > v[0])) Node::fail(n.key(k), "must be [min, max] with max > min");
  return {v[0], v[1]};
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: not valid JSON: ") + e.what());
  }
  Node top(root, "", {"curve", "profile", "cross", "modes", "grid", "energy", "outputs",
                      "conventions", "qgt", "berry_loop", "propagate"});
  RunConfig cfg;
  if (!top.has("curve")) Node::fail("curve", "missing");
  if (!top.has("profile")) Node::fail("profile", "missing");
  cfg.curve = parse_curve(root["curve"]);
  cfg.profile = parse_profile(root["profile"], cfg.warnings);

  if (top.has("cross")) {
    Node c(root["cross"], "cross", {"shape", "size"});
    const std::string shape = c.text("shape", "square");
    const double size = c.positive("size", 1.0);
    if (shape == "square") {
      cfg.cross = CrossSection::square(size);
    } else if (shape == "circular") {
      cfg.cross = CrossSection::circular(size);
    } else {
      Node::fail("cross.shape", "must be square or circular");
    }
  }

  {
    const json empty = json::object();
    const bool square = cfg.cross.kind == CrossSection::Kind::Square;
    Node m(top.has("modes") ? root["modes"] : empty, "modes",
           square ? std::set<std::string>{"n1", "n2"} : std::set<std::string>{"n", "l"});
    try {
      if (square) {
        const int n1 = m.integer("n1", 1, 1), n2 = m.integer("n2", 2, 1);
        if (n1 == n2) Node::fail("modes", "n1 and n2 must differ");
        cfg.mode = square_mode(cfg.cross.size, n1, n2);
      } else {
        cfg.mode = circular_mode(cfg.cross.size, m.integer("n", 1, 1), m.integer("l", 1, -1000));
      }
    } catch (const ModelError& e) {
      Node::fail("modes", e.what());
    }
  }

  {
    const json empty = json::object();
    Node g(top.has("grid") ? root["grid"] : empty, "grid",
           {"length", "points", "bc", "field_grid", "field_samples", "eigen_count"});
    cfg.grid.length = g.positive("length", 10.0);
    cfg.grid.points = g.integer("points", 2048, 64);
    const std::string bc = g.text("bc", "periodic");
    if (bc == "periodic") {
      cfg.grid.bc = Boundary::Periodic;
    } else if (bc == "dirichlet") {
      cfg.grid.bc = Boundary::Dirichlet;
    } else {
      Node::fail("grid.bc", "must be periodic or dirichlet");
    }
    cfg.field_grid = g.integer("field_grid", 65, 8);
    cfg.field_samples = g.integer("field_samples", 16, 2);
    cfg.eigen_count = g.integer("eigen_count", 20, 1);
  }

  if (top.has("energy")) {
    const json& e = root["energy"];
    if (e.is_string() && e.get<std::string>() == "auto") {
      cfg.energy.reset();
    } else if (e.is_number()) {
      cfg.energy = e.get<double>();
    } else {
      Node::fail("energy", "must be a number or \"auto\"");
    }
  }

  if (top.has("outputs")) {
    Node o(root["outputs"], "outputs", {"dir", "format"});
    cfg.out_dir = o.text("dir", cfg.out_dir);
    if (cfg.out_dir.empty()) Node::fail("outputs.dir", "must not be empty");
    const std::string f = o.text("format", "csv");
    if (f == "csv") {
      cfg.format = Format::Csv;
    } else if (f == "json") {
      cfg.format = Format::Json;
    } else {
      Node::fail("outputs.format", "must be csv or json");
    }
  }

  if (top.has("conventions")) {
    Node c(root["conventions"], "conventions", {"delta_coupling"});
    cfg.delta_coupling = c.flag("delta_coupling", true);
  }

  if (top.has("qgt")) {
    Node q(root["qgt"], "qgt", {"omega_range", "f_range", "omega_points", "f_points", "omega_rate",
                                "f_rate", "p"});
    std::tie(cfg.qgt.omega_min, cfg.qgt.omega_max) = range(q, "omega_range", -0.1, 0.1);
    std::tie(cfg.qgt.f_min, cfg.qgt.f_max) = range(q, "f_range", -1.0, 1.0);
    cfg.qgt.omega_points = q.integer("omega_points", 50, 2);
    cfg.qgt.f_points = q.integer("f_points", 50, 2);
    cfg.qgt.omega_rate = q.number("omega_rate", 0.0);
    if (q.has("f_rate")) cfg.qgt.f_rate = q.number("f_rate");
    if (q.has("p")) cfg.qgt.p = q.positive("p");
  }

  if (top.has("berry_loop")) {
    Node b(root["berry_loop"], "berry_loop", {"vertices", "phi_dot", "resolution"});
    if (!b.has("vertices")) Node::fail("berry_loop.vertices", "missing");
    const json& vs = b.raw("vertices");
    if (!vs.is_array() || vs.size() < 3) Node::fail("berry_loop.vertices", "need at least 3 [omega, f] pairs");
    for (const auto& v : vs) {
      auto p = number_array(v, "berry_loop.vertices");
      if (p.size() != 2) Node::fail("berry_loop.vertices", "each vertex is [omega, f]");
      cfg.berry.vertices.emplace_back(p[0], p[1]);
    }
    if (b.has("phi_dot")) cfg.berry.phi_dot = b.number("phi_dot");
    cfg.berry.resolution = b.integer("resolution", 4, 1);
  }

  if (top.has("propagate")) {
    Node p(root["propagate"], "propagate", {"phi0", "dphi0", "samples"});
    if (p.has("phi0")) cfg.propagate.phi0 = complex_pair(p.raw("phi0"), "propagate.phi0");
    if (p.has("dphi0")) cfg.propagate.dphi0 = complex_pair(p.raw("dphi0"), "propagate.dphi0");
    cfg.propagate.samples = p.integer("samples", 257, 2);
  }
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

}  // namespace tubeq::cli
