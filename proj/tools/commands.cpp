#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <random>

#include "CLI11.hpp"
#include "table.hpp"
#include "tubeq/dynamics.hpp"
#include "tubeq/error.hpp"
#include "tubeq/qgt.hpp"

namespace tubeq::cli {

namespace {

constexpr double kPi = std::numbers::pi;

struct Context {
  const RunConfig& cfg;
  Summary summary;
  std::vector<std::string> files;

  std::string path(const std::string& name) const { return cfg.out_dir + "/" + name; }
  void emit(const ResultTable& t, const std::string& name) {
    files.push_back(emit_table(t, path(name), cfg.format));
  }
};

ResultTable table(std::vector<std::string> columns, std::vector<std::string> units) {
  ResultTable t;
  t.columns = std::move(columns);
  t.units = std::move(units);
  return t;
}

EffectiveHamiltonian hamiltonian(const RunConfig& cfg) {
  return assemble(cfg.curve, cfg.profile, cfg.mode, cfg.delta_coupling);
}

double resolve_energy(const RunConfig& cfg, const EffectiveHamiltonian& h) {
  return cfg.energy ? *cfg.energy : auto_energy(h, cfg.grid.length);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void require_two_level(const EffectiveHamiltonian& h, const char* what) {
  if (h.dim != 2) throw ModelError(std::string(what) + " needs a two-level (square cross-section) model");
}

std::string cmd_modes(Context& c) {
  const RunConfig& cfg = c.cfg;
  if (cfg.cross.kind == CrossSection::Kind::Square) {
    ResultTable t = table({"n1", "n2", "energy", "delta_e", "L_exp", "L_quadrature"},
                          {"-", "-", "hbar^2/(m d^2)", "hbar^2/(m d^2)", "hbar", "hbar"});
    for (int n1 = 1; n1 <= 5; ++n1)
      for (int n2 = n1 + 1; n2 <= 5; ++n2) {
        const TransverseMode m = square_mode(cfg.cross.size, n1, n2);
        t.add({double(n1), double(n2), m.energy, m.e2 - m.e1, m.L_exp,
               angular_expectation_quadrature(n1, n2, 128)});
      }
    c.emit(t, "modes");
  } else {
    ResultTable t = table({"n", "l", "energy", "L_exp"}, {"-", "-", "hbar^2/(m R^2)", "hbar"});
    for (int n = 1; n <= 3; ++n)
      for (int l = -3; l <= 3; ++l) {
        const TransverseMode m = circular_mode(cfg.cross.size, n, l);
        t.add({double(n), double(l), m.energy, m.L_exp});
      }
    c.emit(t, "modes");
  }
  c.summary.set("mode_energy", cfg.mode.energy);
  c.summary.set("L_exp", cfg.mode.L_exp);
  return "energy " + fmt(cfg.mode.energy) + ", <L> " + fmt(cfg.mode.L_exp);
}

std::string cmd_geometry_check(Context& c) {
  const RunConfig& cfg = c.cfg;
  const double s0 = cfg.grid.length;
  const double qmax = cfg.cross.kind == CrossSection::Kind::Square ? 0.5 * cfg.cross.size : cfg.cross.size;
  std::mt19937 rng(12345);
  std::uniform_real_distribution<double> us(0.0, s0), uq(-qmax, qmax);

  double metric = 0.0, det = 0.0, inv = 0.0;
  int fd_samples = 0;
  const int samples = 200;
  for (int i = 0; i < samples; ++i) {
    const double s = us(rng);
    Vec2 q(uq(rng), uq(rng));
    if (cfg.cross.kind == CrossSection::Kind::Circular && q.norm() > qmax) q *= 0.5 * qmax / q.norm();
    const MetricEvaluation m = metric_tensor(cfg.curve, cfg.profile, s, q);
    det = std::max(det, std::abs(m.detG - m.G.determinant()));
    inv = std::max(inv, (m.G * m.Ginv - Mat3::Identity()).cwiseAbs().maxCoeff());
    // embed_point needs the Frenet frame, undefined on straight pieces
    if (cfg.curve.curvature(s) > 1e-12) {
      metric = std::max(metric, check_metric(cfg.curve, cfg.profile, s, q).metric_rel_error);
      ++fd_samples;
    }
  }

  ResultTable t = table({"max_error", "tolerance", "samples", "pass"}, {"-", "-", "-", "-"});
  t.label_column = "invariant";
  bool all = true;
  auto row = [&](const char* name, double err, double tol, int n) {
    const bool ok = err <= tol;
    all = all && ok;
    t.add(name, {err, tol, double(n), ok ? 1.0 : 0.0});
  };
  if (fd_samples > 0) row("metric_vs_finite_difference", metric, 1e-6, fd_samples);
  row("det_closed_form", det, 1e-10, samples);
  row("inverse_residual", inv, 1e-8, samples);
  c.emit(t, "geometry_check");

  VtGrid vg;
  vg.s_end = s0;
  const ExpansionReport rep = vt_diagnostic(cfg.curve, cfg.profile, cfg.cross, vg);
  c.summary.set("all_pass", all);
  c.summary.set("samples", static_cast<long long>(samples));
  c.summary.set("fd_samples", static_cast<long long>(fd_samples));
  c.summary.set("metric_rel_error", metric);
  c.summary.set("det_abs_error", det);
  c.summary.set("inverse_residual", inv);
  c.summary.set("slow_variation_ratio", rep.slow_var_ratio);
  c.summary.set("vt_estimate", rep.vt_estimate);
  std::string line = std::string(all ? "all invariants pass" : "INVARIANT FAILURE") +
                     " (metric " + fmt(metric) + ", det " + fmt(det) + ", inverse " + fmt(inv) + ")";
  if (fd_samples == 0) line += "; finite-difference metric skipped, curvature vanishes";
  return line;
}

std::string cmd_effective(Context& c) {
  const RunConfig& cfg = c.cfg;
  const EffectiveHamiltonian h = hamiltonian(cfg);
  ResultTable t = table({"s", "alpha", "vg", "v0", "vx"}, {"length", "1/length", "energy", "energy", "energy"});
  for (int j = 0; j < cfg.grid.points; ++j) {
    const double s = cfg.grid.node(j);
    t.add({s, h.alpha(s), h.vg(s), h.v0(s), h.dim == 2 ? h.vx(s) : 0.0});
  }
  c.emit(t, "effective");
  c.summary.set("label", h.meta.label);
  c.summary.set("dim", static_cast<long long>(h.dim));
  c.summary.set("delta_e", h.meta.delta_e);
  c.summary.set("L_exp", h.meta.L_exp);
  c.summary.set("alpha_0", h.alpha(0.0));
  return h.meta.label + ", dim " + std::to_string(h.dim) + ", alpha(0) " + fmt(h.alpha(0.0));
}

std::string cmd_spectrum(Context& c) {
  const RunConfig& cfg = c.cfg;
  const EffectiveHamiltonian h = hamiltonian(cfg);
  const DiscreteOperator op = discretize(h, cfg.grid);
  const std::vector<double> vals = all_eigenvalues(op);
  const int k = std::min<int>(cfg.eigen_count, static_cast<int>(vals.size()));
  ResultTable t = table({"index", "energy"}, {"-", "energy"});
  for (int i = 0; i < k; ++i) t.add({double(i), vals[i]});
  c.emit(t, "spectrum");
  c.summary.set("eigenvalues", static_cast<long long>(k));
  c.summary.set("lowest", vals.front());
  std::string line = std::to_string(k) + " eigenvalues, lowest " + fmt(vals.front());

  bool coupled = false;
  for (int j = 0; j < cfg.grid.points && h.dim == 2; ++j) coupled = coupled || h.vx(cfg.grid.node(j)) != 0.0;
  if (cfg.grid.bc == Boundary::Periodic && coupled) {
    const double e = resolve_energy(cfg, h);
    const SplittingPrediction pred = wkb_splitting(h, cfg.grid.length, e);
    const double gap = doublet_gap(vals, 0.5 * (pred.e_forward + pred.e_backward));
    const WkbMomenta mom = wkb_momenta(e - h.vg(0.0) - h.v0(0.0), h.alpha(0.0), h.vx(0.0));
    const double rel = (gap - pred.splitting) / pred.splitting;
    c.summary.set("energy", e);
    c.summary.set("p_plus", mom.p_plus);
    c.summary.set("p_minus", mom.p_minus);
    c.summary.set("mode_index", static_cast<long long>(pred.m));
    c.summary.set("e_forward", pred.e_forward);
    c.summary.set("e_backward", pred.e_backward);
    c.summary.set("splitting_wkb", pred.splitting);
    c.summary.set("splitting_solver", gap);
    c.summary.set("splitting_rel_diff", rel);
    line += "; splitting wkb " + fmt(pred.splitting) + " vs solver " + fmt(gap) + " (" + fmt(100 * rel) + "%)";
  }
  return line;
}

std::string cmd_propagate(Context& c) {
  const RunConfig& cfg = c.cfg;
  const EffectiveHamiltonian h = hamiltonian(cfg);
  const double e = resolve_energy(cfg, h);
  const Eigen::Vector2cd phi0 = cfg.propagate.phi0;
  const Eigen::Vector2cd dphi0 =
      cfg.propagate.dphi0 ? *cfg.propagate.dphi0
                          : Eigen::Vector2cd(std::complex<double>(0.0, std::sqrt(2.0 * e)) * phi0);
  const TwoLevelField fld = propagate(h, e, phi0, dphi0, SRange{0.0, cfg.grid.length, cfg.propagate.samples});
  ResultTable t = table({"s", "re_phi1", "im_phi1", "re_phi2", "im_phi2", "density", "flux"},
                        {"length", "-", "-", "-", "-", "1/length", "1/length"});
  double fmin = fld.flux.front(), fmax = fld.flux.front();
  for (size_t i = 0; i < fld.s.size(); ++i) {
    const auto& v = fld.values[i];
    t.add({fld.s[i], v(0).real(), v(0).imag(), v(1).real(), v(1).imag(), v.squaredNorm(), fld.flux[i]});
    fmin = std::min(fmin, fld.flux[i]);
    fmax = std::max(fmax, fld.flux[i]);
  }
  c.emit(t, "propagate");
  c.summary.set("energy", e);
  c.summary.set("flux_start", fld.flux.front());
  c.summary.set("flux_spread", fmax - fmin);
  c.summary.set("norm", fld.norm);
  return "E " + fmt(e) + ", flux " + fmt(fld.flux.front()) + ", flux spread " + fmt(fmax - fmin);
}

std::string cmd_wkb(Context& c) {
  const RunConfig& cfg = c.cfg;
  const EffectiveHamiltonian h = hamiltonian(cfg);
  require_two_level(h, "wkb");
  const double e = resolve_energy(cfg, h);
  const SRange range{0.0, cfg.grid.length, cfg.propagate.samples};
  const WkbBranch bp = wkb_branch(h, e, +1, range);
  const WkbBranch bm = wkb_branch(h, e, -1, range);
  ResultTable t = table({"s", "p_plus", "p_minus", "phase_plus", "phase_minus", "u1_plus", "u2_plus",
                         "u1_minus", "u2_minus", "amp_plus", "amp_minus"},
                        {"length", "1/length", "1/length", "-", "-", "-", "-", "-", "-", "1/sqrt(length)",
                         "1/sqrt(length)"});
  bool regime = true;
  for (size_t i = 0; i < bp.samples.size(); ++i) {
    const WkbSample& a = bp.samples[i];
    const WkbSample& b = bm.samples[i];
    t.add({a.s, a.p, b.p, bp.phase[i], bm.phase[i], a.u(0), a.u(1), b.u(0), b.u(1), bp.C * a.prefactor,
           bm.C * b.prefactor});
    regime = regime && wkb_momenta(e - h.vg(a.s) - h.v0(a.s), h.alpha(a.s), h.vx(a.s)).regime_ok;
  }
  c.emit(t, "wkb");
  c.summary.set("energy", e);
  c.summary.set("C_plus", bp.C);
  c.summary.set("C_minus", bm.C);
  c.summary.set("regime_ok", regime);
  c.summary.set("max_mixing_rate", std::max(bp.max_mixing_rate, bm.max_mixing_rate));
  std::string line = "E " + fmt(e) + ", C+ " + fmt(bp.C) + ", C- " + fmt(bm.C) +
                     (regime ? ", regime ok" : ", OUTSIDE the semiclassical regime");
  if (cfg.grid.bc == Boundary::Periodic) {
    const SplittingPrediction pred = wkb_splitting(h, cfg.grid.length, e);
    c.summary.set("splitting_wkb", pred.splitting);
    line += ", splitting " + fmt(pred.splitting);
  }
  return line;
}

std::string cmd_field_scan(Context& c) {
  const RunConfig& cfg = c.cfg;
  const EffectiveHamiltonian h = hamiltonian(cfg);
  require_two_level(h, "field-scan");
  const double e = resolve_energy(cfg, h);
  const int n = cfg.field_samples;
  std::vector<double> ss;
  for (int k = 0; k < n; ++k) ss.push_back(k * cfg.grid.length / n);
  const PhaseScan scan = phase_evolution_scan(h, e, +1, ss, cfg.field_grid);

  for (int k = 0; k < n; ++k) {
    const CrossSectionField& f = scan.fields[k];
    ResultTable t = table({"q1", "q2", "amplitude", "phase"}, {"d", "d", "1/d", "rad"});
    for (int i1 = 0; i1 < f.grid; ++i1)
      for (int i2 = 0; i2 < f.grid; ++i2) {
        const int idx = i1 * f.grid + i2;
        t.add({f.q[i1], f.q[i2], f.amplitude[idx], f.phase[idx]});
      }
    c.emit(t, "field_s" + std::to_string(k));
  }
  ResultTable jt = table({"k", "s_from", "s_to", "jump"}, {"-", "length", "length", "rad"});
  for (size_t k = 0; k < scan.jumps.size(); ++k) jt.add({double(k), ss[k], ss[k + 1], scan.jumps[k]});
  c.emit(jt, "field_scan");

  c.summary.set("energy", e);
  c.summary.set("snapshots", static_cast<long long>(n));
  std::string line = std::to_string(n) + " snapshots at E " + fmt(e);
  const int mid = n / 2;
  if (n % 2 == 0 && mid >= 1 && mid < static_cast<int>(scan.jumps.size())) {
    const double jump = std::abs(scan.jumps[mid - 1]) > std::abs(scan.jumps[mid]) ? scan.jumps[mid - 1]
                                                                                  : scan.jumps[mid];
    c.summary.set("mid_jump", jump);
    line += ", jump near s0/2 " + fmt(jump);
  }
  if (n % 4 == 0) {
    const double corr = pattern_correlation(rotate90(scan.fields[n / 4].amplitude, cfg.field_grid),
                                            scan.fields[3 * n / 4].amplitude);
    c.summary.set("quarter_turn_correlation", corr);
    line += ", rot90 correlation " + fmt(corr);
  }
  return line;
}

QgtModel qgt_model(const RunConfig& cfg) {
  if (cfg.cross.kind != CrossSection::Kind::Square)
    throw ModelError("qgt needs a square cross-section");
  QgtModel m;
  m.tau = cfg.curve.torsion(0.0);
  m.delta = cfg.profile.delta;
  m.n1 = cfg.mode.n1;
  m.n2 = cfg.mode.n2;
  m.d = cfg.cross.size;
  m.delta_coupling = cfg.delta_coupling;
  return m;
}

struct QgtSetup {
  QgtModel model;
  double energy, p, f_rate;
};

QgtSetup qgt_setup(const RunConfig& cfg) {
  QgtSetup q{qgt_model(cfg), 0.0, 0.0, 0.0};
  q.energy = resolve_energy(cfg, hamiltonian(cfg));
  q.p = cfg.qgt.p ? *cfg.qgt.p : std::sqrt(2.0 * q.energy);
  q.f_rate = cfg.qgt.f_rate ? *cfg.qgt.f_rate : 2.0 * kPi / cfg.grid.length;
  return q;
}

std::string cmd_qgt(Context& c) {
  const RunConfig& cfg = c.cfg;
  const QgtSetup q = qgt_setup(cfg);
  const QgtSettings& g = cfg.qgt;
  ResultTable t = table({"omega", "f", "phi", "phi_dot", "lambda", "g11", "g12", "g22", "F12", "valid"},
                        {"1/length", "-", "rad", "rad/length", "energy", "-", "-", "-", "-", "-"});
  int invalid = 0;
  double norm_err = 0.0;
  for (int i = 0; i < g.omega_points; ++i) {
    const double w = g.omega_min + (g.omega_max - g.omega_min) * i / (g.omega_points - 1);
    for (int j = 0; j < g.f_points; ++j) {
      const double f = g.f_min + (g.f_max - g.f_min) * j / (g.f_points - 1);
      try {
        const MixingAngle m = mixing_angle(f, q.model.alpha(w) * q.p, q.model.delta_e());
        norm_err = std::max(norm_err, std::abs(m.cos_phi * m.cos_phi + m.sin_phi * m.sin_phi - 1.0));
        const double pd = phi_dot(w, f, q.p, g.omega_rate, q.f_rate, q.model);
        const QgtPoint pt = qgt_analytic(w, f, q.p, pd, q.model);
        t.add({w, f, pt.phi, pd, pt.lambda, pt.g(0, 0), pt.g(0, 1), pt.g(1, 1), pt.F(0, 1), 1.0});
      } catch (const DegeneracyError&) {
        ++invalid;
        t.add({w, f, 0, 0, 0, 0, 0, 0, 0, 0.0});
      }
    }
  }
  c.emit(t, "qgt_grid");
  c.summary.set("energy", q.energy);
  c.summary.set("p", q.p);
  c.summary.set("points", static_cast<long long>(t.rows.size()));
  c.summary.set("degenerate_points", static_cast<long long>(invalid));
  c.summary.set("max_norm_error", norm_err);
  return std::to_string(t.rows.size()) + " points, " + std::to_string(invalid) +
         " degenerate, max |cos^2+sin^2-1| " + fmt(norm_err);
}

std::string cmd_berry_loop(Context& c) {
  const RunConfig& cfg = c.cfg;
  const QgtSetup q = qgt_setup(cfg);
  std::vector<Eigen::Vector2d> loop = cfg.berry.vertices;
  if (loop.empty()) loop = {{0.0, 0.2}, {0.05, 0.2}, {0.05, 0.8}, {0.0, 0.8}};
  PhiDotField field;
  if (cfg.berry.phi_dot) {
    field = [v = *cfg.berry.phi_dot](double, double) { return v; };
  } else {
    field = [&](double w, double f) { return phi_dot(w, f, q.p, cfg.qgt.omega_rate, q.f_rate, q.model); };
  }
  const BerryLoopResult r = berry_loop(loop, q.p, field, q.model, cfg.berry.resolution);
  const double rel = std::abs(r.area_integral - r.line_integral) /
                     std::max(std::abs(r.area_integral), 1e-300);
  ResultTable vt = table({"omega", "f"}, {"1/length", "-"});
  for (const auto& v : loop) vt.add({v(0), v(1)});
  c.emit(vt, "berry_loop_vertices");
  ResultTable t = table({"area_integral", "line_integral", "enclosed_area", "stokes_rel_diff"},
                        {"rad", "rad", "-", "-"});
  t.add({r.area_integral, r.line_integral, r.enclosed_area, rel});
  c.emit(t, "berry_loop");
  c.summary.set("area_integral", r.area_integral);
  c.summary.set("line_integral", r.line_integral);
  c.summary.set("enclosed_area", r.enclosed_area);
  c.summary.set("stokes_rel_diff", rel);
  return "curvature flux " + fmt(r.area_integral) + " (line " + fmt(r.line_integral) + ", rel diff " +
         fmt(rel) + ")";
}

using Handler = std::string (*)(Context&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> h = {
      {"modes", cmd_modes},         {"geometry-check", cmd_geometry_check},
      {"effective", cmd_effective}, {"spectrum", cmd_spectrum},
      {"propagate", cmd_propagate}, {"wkb", cmd_wkb},
      {"field-scan", cmd_field_scan}, {"qgt", cmd_qgt},
      {"berry-loop", cmd_berry_loop}};
  return h;
}

}  // namespace

void apply_overrides(RunConfig& cfg, const Overrides& o) {
  if (o.out_dir) {
    if (o.out_dir->empty()) throw ConfigError("--out: must not be empty");
    cfg.out_dir = *o.out_dir;
  }
  if (o.format) cfg.format = *o.format;
  if (o.grid) {
    if (*o.grid < 64) throw ConfigError("--grid: must be >= 64");
    cfg.grid.points = *o.grid;
  }
  if (o.energy) {
    if (*o.energy == "auto") {
      cfg.energy.reset();
    } else {
      try {
        size_t used = 0;
        const double e = std::stod(*o.energy, &used);
        if (used != o.energy->size() || !std::isfinite(e)) throw std::invalid_argument("");
        cfg.energy = e;
      } catch (const std::logic_error&) {
        throw ConfigError("--energy: must be a number or auto");
      }
    }
  }
}

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& h : handlers()) v.push_back(h.first);
    return v;
  }();
  return names;
}

RunResult run(const std::string& subcommand, const RunConfig& cfg) {
  auto it = std::find_if(handlers().begin(), handlers().end(),
                         [&](const auto& h) { return h.first == subcommand; });
  if (it == handlers().end()) throw ConfigError("unknown subcommand: " + subcommand);
  cfg.grid.validate();
  Context c{cfg, {}, {}};
  c.summary.set("subcommand", subcommand);
  const std::string line = it->second(c);
  const std::string sp = c.path("summary.json");
  write_text(sp, c.summary.render());
  c.files.push_back(sp);
  return {subcommand + ": " + line, c.files};
}

int main_entry(int argc, char** argv) {
  CLI::App app{"tubeq: quantum transport in twisted, deformed tubes"};
  app.require_subcommand(1);
  std::string config_path;
  Overrides o;
  std::string out, format, energy;
  int grid = 0;
  for (const auto& name : subcommands()) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON config file")->required();
    sub->add_option("--out", out, "output directory");
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--grid", grid, "grid points N");
    sub->add_option("--energy", energy, "energy or auto");
  }
  if (argc > 1 && argv[1][0] != '-' &&
      std::find(subcommands().begin(), subcommands().end(), argv[1]) == subcommands().end()) {
    std::string all;
    for (const auto& n : subcommands()) all += (all.empty() ? "" : ", ") + n;
    std::cerr << "error: unknown subcommand '" << argv[1] << "' (expected one of " << all << ")\n";
    return kUsageExit;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kUsageExit;
  }

  try {
    RunConfig cfg = parse_config(config_path);
    if (!out.empty()) o.out_dir = out;
    if (!format.empty()) o.format = format == "json" ? Format::Json : Format::Csv;
    if (grid != 0) o.grid = grid;
    if (!energy.empty()) o.energy = energy;
    apply_overrides(cfg, o);
    for (const auto& w : cfg.warnings) std::cerr << "warning: " << w << "\n";
    const RunResult r = run(app.get_subcommands().front()->get_name(), cfg);
    std::cout << r.summary_line << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.exit_code();
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace tubeq::cli
