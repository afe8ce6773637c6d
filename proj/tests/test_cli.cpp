#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "commands.hpp"
#include "config.hpp"
#include "doctest.h"
#include "json.hpp"
#include "table.hpp"
#include "tubeq/error.hpp"

using namespace tubeq;
using namespace tubeq::cli;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

// the two-level tube: straight axis with torsion 0.02, twist rate 0.02, f = sin(2 pi s / s0)
json twisted_tube(int points = 512) {
  json j = json::parse(R"({
    "curve": {"type": "helix", "curvature": 0.0, "torsion": 0.02},
    "profile": {"kind": "combined", "delta": 0.02,
                "theta": {"type": "linear", "slope": 0.02},
                "f": {"type": "sine", "amplitude": 1.0, "period": 10.0}},
    "cross": {"shape": "square", "size": 1.0},
    "modes": {"n1": 1, "n2": 2},
    "grid": {"length": 10.0, "bc": "periodic", "field_grid": 33},
    "qgt": {"omega_points": 12, "f_points": 12}
  })");
  j["grid"]["points"] = points;
  return j;
}

std::string config_error(const json& j) {
  try {
    (void)parse_config_text(j.dump());
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path scratch(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("tubeq_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json summary_of(const fs::path& dir) { return json::parse(slurp(dir / "summary.json")); }

RunConfig config_in(const fs::path& dir, int points = 512) {
  RunConfig cfg = parse_config_text(twisted_tube(points).dump());
  cfg.out_dir = dir.string();
  return cfg;
}

int invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "tubeq");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return main_entry(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("minimal config parses with documented defaults") {
  const json j = json::parse(R"({
    "curve": {"type": "helix", "radius": 1.0, "pitch": 0.5},
    "profile": {"kind": "combined", "delta": 0.02, "theta": 0.0, "f": 1.0}
  })");
  const RunConfig c = parse_config_text(j.dump());
  CHECK(c.curve.helix_radius() == 1.0);
  CHECK(c.curve.helix_pitch_param() == 0.5);
  CHECK(c.profile.kind == TransformKind::Combined);
  CHECK(c.profile.delta == 0.02);
  CHECK(c.cross.kind == CrossSection::Kind::Square);
  CHECK(c.cross.size == 1.0);
  CHECK(c.mode.n1 == 1);
  CHECK(c.mode.n2 == 2);
  CHECK(c.grid.length == 10.0);
  CHECK(c.grid.points == 2048);
  CHECK(c.grid.bc == Boundary::Periodic);
  CHECK(c.field_grid == 65);
  CHECK(c.field_samples == 16);
  CHECK(c.eigen_count == 20);
  CHECK(!c.energy.has_value());
  CHECK(c.out_dir == "out");
  CHECK(c.format == Format::Csv);
  CHECK(c.delta_coupling);
  CHECK(c.qgt.omega_points == 50);
  CHECK(c.qgt.f_points == 50);
  CHECK(c.berry.vertices.empty());
  CHECK(c.propagate.samples == 257);
  CHECK(c.warnings.empty());
}

TEST_CASE("curvature and torsion map onto helix parameters") {
  json j = twisted_tube();
  j["curve"] = {{"type", "helix"}, {"curvature", 0.3}, {"torsion", 0.4}};
  const RunConfig c = parse_config_text(j.dump());
  CHECK(c.curve.curvature(1.0) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(c.curve.torsion(1.0) == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("validation errors name the offending key") {
  json j = twisted_tube();
  j["profile"]["delta"] = 0.5;
  CHECK(config_error(j).find("profile.delta") != std::string::npos);

  j = twisted_tube();
  j["twist"] = 1.0;
  CHECK(config_error(j) == "config: twist: unknown key");

  j = twisted_tube();
  j["grid"]["twist"] = 1.0;
  CHECK(config_error(j) == "config: grid.twist: unknown key");

  j = twisted_tube();
  j["grid"]["length"] = -1.0;
  CHECK(config_error(j).find("grid.length") != std::string::npos);

  j = twisted_tube();
  j["grid"]["points"] = 32;
  CHECK(config_error(j).find("grid.points") != std::string::npos);

  j = twisted_tube();
  j["cross"]["size"] = 0.0;
  CHECK(config_error(j).find("cross.size") != std::string::npos);

  j = twisted_tube();
  j["modes"]["n2"] = 1;
  CHECK(config_error(j).find("modes") != std::string::npos);

  j = twisted_tube();
  j["profile"]["f"] = {{"type", "cosine"}};
  CHECK(config_error(j).find("profile.f") != std::string::npos);

  j = twisted_tube();
  j["energy"] = "high";
  CHECK(config_error(j).find("energy") != std::string::npos);

  CHECK(config_error(json::array()).find("must be an object") != std::string::npos);
  CHECK_THROWS_AS((void)parse_config_text("{not json"), ConfigError);
  CHECK_THROWS_AS((void)parse_config("/nonexistent/tubeq.json"), IoError);
}

TEST_CASE("delta above 0.1 is accepted with a warning") {
  json j = twisted_tube();
  j["profile"]["delta"] = 0.15;
  const RunConfig c = parse_config_text(j.dump());
  REQUIRE(c.warnings.size() == 1);
  CHECK(c.warnings[0].find("profile.delta") != std::string::npos);
}

TEST_CASE("overrides") {
  RunConfig c = parse_config_text(twisted_tube().dump());
  Overrides o;
  o.grid = 1024;
  o.energy = "42.5";
  o.format = Format::Json;
  o.out_dir = "elsewhere";
  apply_overrides(c, o);
  CHECK(c.grid.points == 1024);
  CHECK(*c.energy == 42.5);
  CHECK(c.format == Format::Json);
  CHECK(c.out_dir == "elsewhere");
  o = Overrides{};
  o.energy = "auto";
  apply_overrides(c, o);
  CHECK(!c.energy);
  o.energy = "12abc";
  CHECK_THROWS_AS(apply_overrides(c, o), ConfigError);
  o = Overrides{};
  o.grid = 10;
  CHECK_THROWS_AS(apply_overrides(c, o), ConfigError);
}

TEST_CASE("number formatting round-trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, kPi, 1e-320}) {
    const std::string s = format_number(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
  CHECK(format_number(std::nan("")) == "nan");
}

TEST_CASE("CSV layout: header, units row, LF endings") {
  ResultTable t;
  t.columns = {"a", "b"};
  t.units = {"m", "s"};
  t.add({1.0, 0.1});
  const std::string csv = render(t, Format::Csv);
  CHECK(csv == "a,b\nm,s\n1,0.10000000000000001\n");
  CHECK(csv.find('\r') == std::string::npos);

  ResultTable l;
  l.label_column = "name";
  l.columns = {"x"};
  l.units = {"m"};
  l.add("first", {2.0});
  CHECK(render(l, Format::Csv) == "name,x\n-,m\nfirst,2\n");
  CHECK_THROWS_AS(l.add({1.0}), IoError);
  CHECK_THROWS_AS(t.add({1.0}), IoError);
}

TEST_CASE("JSON tables round-trip through a parser") {
  ResultTable t;
  t.label_column = "row";
  t.columns = {"x", "y"};
  t.units = {"m", "-"};
  t.add("p", {1.0 / 3.0, -1e-17});
  t.add("q\"uote", {kPi, 12345.678901234567});
  const json j = json::parse(render(t, Format::Json));
  CHECK(j["columns"] == json({"x", "y"}));
  CHECK(j["units"] == json({"m", "-"}));
  CHECK(j["labels"] == json({"p", "q\"uote"}));
  for (size_t r = 0; r < t.rows.size(); ++r)
    for (size_t c = 0; c < 2; ++c) CHECK(j["rows"][r][c].get<double>() == t.rows[r][c]);

  Summary s;
  s.set("x", 0.1);
  s.set("n", 3LL);
  s.set("ok", true);
  s.set("name", std::string("a\\b"));
  s.set("x", 0.2);
  const json js = json::parse(s.render());
  CHECK(js["x"].get<double>() == 0.2);
  CHECK(js["n"].get<long long>() == 3);
  CHECK(js["ok"].get<bool>());
  CHECK(js["name"] == "a\\b");
}

TEST_CASE("end to end: modes") {
  const fs::path dir = scratch("modes");
  const RunResult r = run("modes", config_in(dir));
  CHECK(r.files.size() == 2);
  CHECK(fs::exists(dir / "modes.csv"));
  const json s = summary_of(dir);
  CHECK(s["L_exp"].get<double>() == doctest::Approx(256.0 / (-27.0 * kPi * kPi)).epsilon(1e-12));
  CHECK(s["mode_energy"].get<double>() == doctest::Approx(2.5 * kPi * kPi).epsilon(1e-12));
  CHECK(r.summary_line.rfind("modes:", 0) == 0);
}

TEST_CASE("end to end: geometry-check") {
  const fs::path dir = scratch("geometry");
  RunConfig cfg = config_in(dir);
  run("geometry-check", cfg);
  CHECK(summary_of(dir)["all_pass"].get<bool>());
  CHECK(summary_of(dir)["fd_samples"].get<long long>() == 0);

  json j = twisted_tube();
  j["curve"] = {{"type", "helix"}, {"radius", 1.0}, {"pitch", 0.5}};
  cfg = parse_config_text(j.dump());
  cfg.out_dir = dir.string();
  run("geometry-check", cfg);
  const json s = summary_of(dir);
  CHECK(s["all_pass"].get<bool>());
  CHECK(s["fd_samples"].get<long long>() == 200);
  CHECK(s["metric_rel_error"].get<double>() < 1e-6);
  const std::string csv = slurp(dir / "geometry_check.csv");
  CHECK(csv.rfind("invariant,max_error,tolerance,samples,pass\n", 0) == 0);
  CHECK(csv.find("metric_vs_finite_difference") != std::string::npos);
}

TEST_CASE("end to end: effective") {
  const fs::path dir = scratch("effective");
  run("effective", config_in(dir));
  const json s = summary_of(dir);
  CHECK(s["dim"].get<long long>() == 2);
  CHECK(s["alpha_0"].get<double>() == doctest::Approx(0.04 * 256.0 / (-27.0 * kPi * kPi)).epsilon(1e-12));
}

TEST_CASE("end to end: spectrum reports the counter-propagating splitting") {
  const fs::path dir = scratch("spectrum");
  run("spectrum", config_in(dir));
  const json s = summary_of(dir);
  CHECK(s["eigenvalues"].get<long long>() == 20);
  CHECK(std::abs(s["splitting_rel_diff"].get<double>()) < 0.05);
  CHECK(s["p_plus"].get<double>() > 0.0);
  CHECK(s["p_minus"].get<double>() < 0.0);
  const std::string csv = slurp(dir / "spectrum.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 22);
}

TEST_CASE("end to end: propagate conserves flux") {
  const fs::path dir = scratch("propagate");
  run("propagate", config_in(dir));
  const json s = summary_of(dir);
  CHECK(s["flux_spread"].get<double>() < 1e-6 * std::abs(s["flux_start"].get<double>()));
}

TEST_CASE("end to end: wkb") {
  const fs::path dir = scratch("wkb");
  run("wkb", config_in(dir));
  const json s = summary_of(dir);
  CHECK(s["regime_ok"].get<bool>());
  CHECK(s["C_plus"].get<double>() > 0.0);
  CHECK(s["splitting_wkb"].get<double>() > 0.0);
}

TEST_CASE("end to end: field-scan") {
  const fs::path dir = scratch("fields");
  const RunResult r = run("field-scan", config_in(dir));
  for (int k = 0; k < 16; ++k) CHECK(fs::exists(dir / ("field_s" + std::to_string(k) + ".csv")));
  CHECK(r.files.size() == 18);
  const json s = summary_of(dir);
  CHECK(std::abs(std::abs(s["mid_jump"].get<double>()) - kPi) < 0.2);
  CHECK(s["quarter_turn_correlation"].get<double>() > 0.99);
  const std::string f0 = slurp(dir / "field_s0.csv");
  CHECK(std::count(f0.begin(), f0.end(), '\n') == 2 + 33 * 33);
}

TEST_CASE("end to end: qgt") {
  const fs::path dir = scratch("qgt");
  run("qgt", config_in(dir));
  const json s = summary_of(dir);
  CHECK(s["points"].get<long long>() == 144);
  CHECK(s["max_norm_error"].get<double>() < 1e-12);
  CHECK(fs::exists(dir / "qgt_grid.csv"));
}

TEST_CASE("end to end: berry-loop") {
  const fs::path dir = scratch("berry");
  run("berry-loop", config_in(dir));
  const json s = summary_of(dir);
  CHECK(s["stokes_rel_diff"].get<double>() < 1e-4);
  CHECK(s["enclosed_area"].get<double>() == doctest::Approx(0.03));
}

TEST_CASE("identical configs give byte-identical outputs") {
  for (const std::string sub : {"spectrum", "field-scan", "qgt", "berry-loop"}) {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const RunResult ra = run(sub, config_in(a, 256));
    const RunResult rb = run(sub, config_in(b, 256));
    REQUIRE(ra.files.size() == rb.files.size());
    for (const auto& f : ra.files) {
      const fs::path name = fs::path(f).filename();
      CHECK(slurp(a / name) == slurp(b / name));
    }
  }
}

TEST_CASE("exit codes") {
  const fs::path dir = scratch("exit");
  fs::create_directories(dir);
  const std::string cfg = (dir / "c.json").string();
  std::ofstream(cfg) << twisted_tube(256).dump();
  CHECK(invoke({"modes", "--config", cfg, "--out", (dir / "o").string()}) == 0);
  CHECK(invoke({"nope", "--config", cfg}) == kUsageExit);
  CHECK(invoke({"modes"}) == kUsageExit);
  CHECK(invoke({"modes", "--config", (dir / "missing.json").string()}) == int(ErrorKind::Io));

  json bad = twisted_tube();
  bad["profile"]["delta"] = 0.5;
  std::ofstream(dir / "bad.json") << bad.dump();
  CHECK(invoke({"modes", "--config", (dir / "bad.json").string()}) == int(ErrorKind::Config));

  // energy below the barrier: no classically allowed motion
  CHECK(invoke({"wkb", "--config", cfg, "--energy", "0.1", "--out", (dir / "o").string()}) ==
        int(ErrorKind::TurningPoint));
}
