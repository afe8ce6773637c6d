#include "tubeq/dynamics.hpp"

#include <algorithm>
#include <array>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "tubeq/error.hpp"
#include "tubeq/transverse.hpp"

namespace tubeq {

using cd = std::complex<double>;
using std::numbers::pi;

double Grid1D::spacing() const {
  return bc == Boundary::Periodic ? length / points : length / (points + 1);
}

double Grid1D::node(int j) const {
  const double h = spacing();
  return bc == Boundary::Periodic ? j * h : (j + 1) * h;
}

void Grid1D::validate() const {
  if (!(length > 0.0) || !std::isfinite(length)) throw ModelError("grid: length must be > 0");
  if (points < 64) throw ModelError("grid: need at least 64 points, got " + std::to_string(points));
}

namespace {

// sigma_z eigenvalue of component c (dim 1 has a single +1 component)
double zsign(int dim, int c) { return (dim == 2 && c == 1) ? -1.0 : 1.0; }

}  // namespace

DiscreteOperator discretize(const EffectiveHamiltonian& h, const Grid1D& grid) {
  grid.validate();
  if (h.dim != 1 && h.dim != 2) throw ModelError("discretize: dim must be 1 or 2");
  const int n = grid.points, dim = h.dim;
  const double dx = grid.spacing();
  std::vector<double> alpha(n);
  std::vector<Eigen::Matrix2cd> pot(n);
  double amax = 0.0, vmax = 0.0;
  for (int j = 0; j < n; ++j) {
    double s = grid.node(j);
    alpha[j] = h.alpha(s);
    pot[j] = h.potential(s);
    amax = std::max(amax, std::abs(alpha[j]));
    vmax = std::max(vmax, pot[j].cwiseAbs().maxCoeff());
  }
  if (amax * dx > 0.5)
    throw ResolutionError("discretize: |alpha| h = " + std::to_string(amax * dx) +
                          " exceeds 0.5; increase the grid");
  if (vmax > 0.0) {
    double worst = 0.0;
    const bool per = grid.bc == Boundary::Periodic;
    for (int j = 0; j < n; ++j) {
      int jm = j - 1, jp = j + 1;
      if (per) {
        jm = (jm + n) % n;
        jp %= n;
      } else if (jm < 0 || jp >= n) {
        continue;
      }
      worst = std::max(worst, (pot[jp] - 2.0 * pot[j] + pot[jm]).cwiseAbs().maxCoeff());
    }
    if (worst > 0.5 * vmax)
      throw ResolutionError("discretize: potential oscillates on the grid scale; increase the grid");
  }

  DiscreteOperator op;
  op.dim = dim;
  op.grid = grid;
  op.diag.assign(n, Eigen::Matrix2cd::Zero());
  const int links = grid.bc == Boundary::Periodic ? n : n - 1;
  op.upper.assign(links, Eigen::Matrix2cd::Zero());
  op.lower.assign(links, Eigen::Matrix2cd::Zero());
  const double kin = 1.0 / (dx * dx);
  for (int j = 0; j < n; ++j) {
    Eigen::Matrix2cd& D = op.diag[j];
    for (int a = 0; a < dim; ++a)
      for (int b = 0; b < dim; ++b) D(a, b) = pot[j](a, b);
    if (dim == 1) D(0, 0) = pot[j](0, 0);
    for (int c = 0; c < dim; ++c) {
      double A = zsign(dim, c) * alpha[j];
      D(c, c) += kin + 0.5 * A * A;
    }
  }
  for (int j = 0; j < links; ++j) {
    int jp = (j + 1) % n;
    for (int c = 0; c < dim; ++c) {
      double sum = zsign(dim, c) * (alpha[j] + alpha[jp]);
      op.upper[j](c, c) = cd(-0.5 * kin, sum / (4.0 * dx));
      op.lower[j](c, c) = cd(-0.5 * kin, -sum / (4.0 * dx));
    }
  }
  return op;
}

Eigen::MatrixXcd DiscreteOperator::dense() const {
  const int n = grid.points;
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(size(), size());
  for (int j = 0; j < n; ++j) m.block(j * dim, j * dim, dim, dim) += diag[j].topLeftCorner(dim, dim);
  for (size_t j = 0; j < upper.size(); ++j) {
    int a = static_cast<int>(j), b = (a + 1) % n;
    m.block(a * dim, b * dim, dim, dim) += upper[j].topLeftCorner(dim, dim);
    m.block(b * dim, a * dim, dim, dim) += lower[j].topLeftCorner(dim, dim);
  }
  return m;
}

Eigen::VectorXcd DiscreteOperator::apply(const Eigen::VectorXcd& x) const {
  const int n = grid.points;
  Eigen::VectorXcd y = Eigen::VectorXcd::Zero(size());
  for (int j = 0; j < n; ++j)
    y.segment(j * dim, dim) += diag[j].topLeftCorner(dim, dim) * x.segment(j * dim, dim);
  for (size_t j = 0; j < upper.size(); ++j) {
    int a = static_cast<int>(j), b = (a + 1) % n;
    y.segment(a * dim, dim) += upper[j].topLeftCorner(dim, dim) * x.segment(b * dim, dim);
    y.segment(b * dim, dim) += lower[j].topLeftCorner(dim, dim) * x.segment(a * dim, dim);
  }
  return y;
}

double DiscreteOperator::hermiticity_residual() const {
  double r = 0.0;
  for (const auto& D : diag) {
    Eigen::MatrixXcd b = D.topLeftCorner(dim, dim);
    r = std::max(r, (b - b.adjoint()).cwiseAbs().maxCoeff());
  }
  for (size_t j = 0; j < upper.size(); ++j) {
    Eigen::MatrixXcd u = upper[j].topLeftCorner(dim, dim), l = lower[j].topLeftCorner(dim, dim);
    r = std::max(r, (u - l.adjoint()).cwiseAbs().maxCoeff());
  }
  return r;
}

HermitianBand DiscreteOperator::band(std::vector<int>* perm_out) const {
  const int n = grid.points;
  std::vector<int> pos(n);
  if (grid.bc == Boundary::Periodic) {
    for (int j = 0; j < n; ++j) pos[j] = (j <= (n - 1) / 2) ? 2 * j : 2 * (n - 1 - j) + 1;
  } else {
    std::iota(pos.begin(), pos.end(), 0);
  }
  std::vector<int> perm(size());
  for (int j = 0; j < n; ++j)
    for (int c = 0; c < dim; ++c) perm[j * dim + c] = pos[j] * dim + c;

  int bw = dim - 1;
  for (size_t j = 0; j < upper.size(); ++j) {
    int a = static_cast<int>(j), b = (a + 1) % n;
    bw = std::max(bw, std::abs(pos[a] - pos[b]) * dim + dim - 1);
  }
  HermitianBand out(size(), bw);
  for (int j = 0; j < n; ++j)
    for (int a = 0; a < dim; ++a)
      for (int b = a; b < dim; ++b) out.set(perm[j * dim + a], perm[j * dim + b], diag[j](a, b));
  for (size_t j = 0; j < upper.size(); ++j) {
    int a = static_cast<int>(j), b = (a + 1) % n;
    for (int c = 0; c < dim; ++c)
      for (int e = 0; e < dim; ++e) {
        cd v = upper[j](c, e);
        if (v != cd(0.0)) out.set(perm[a * dim + c], perm[b * dim + e], v);
      }
  }
  if (perm_out) *perm_out = std::move(perm);
  return out;
}

EigenPairs eigensolve(const Eigen::MatrixXcd& m, int k) { return eigensolve_dense(m, k); }

EigenPairs eigensolve(const DiscreteOperator& op, int k) {
  if (op.hermiticity_residual() > 1e-10) throw ModelError("eigensolve: operator is not Hermitian");
  if (op.size() <= 512) return eigensolve_dense(op.dense(), k);
  std::vector<int> perm;
  HermitianBand band = op.band(&perm);
  EigenPairs bp = eigensolve_band(band, k);
  EigenPairs out;
  out.values = bp.values;
  out.vectors.resize(op.size(), bp.vectors.cols());
  for (int i = 0; i < op.size(); ++i) out.vectors.row(i) = bp.vectors.row(perm[i]);
  return out;
}

std::vector<double> all_eigenvalues(const DiscreteOperator& op) {
  if (op.hermiticity_residual() > 1e-10) throw ModelError("eigensolve: operator is not Hermitian");
  return band_eigenvalues(op.band());
}

double lattice_dispersion(double k, double a, double h) {
  return (1.0 - std::cos(k * h)) / (h * h) - a * std::sin(k * h) / h + 0.5 * a * a;
}

TwoLevelField eigenstate_field(const DiscreteOperator& op, const EigenPairs& pairs, int j) {
  if (j < 0 || j >= pairs.vectors.cols()) throw ModelError("eigenstate_field: index out of range");
  const int n = op.grid.points;
  const double h = op.grid.spacing();
  TwoLevelField f;
  f.s.resize(n);
  f.values.assign(n, Eigen::Vector2cd::Zero());
  f.flux.assign(n, 0.0);
  const double scale = 1.0 / std::sqrt(h);
  double norm = 0.0;
  for (int i = 0; i < n; ++i) {
    f.s[i] = op.grid.node(i);
    for (int c = 0; c < op.dim; ++c) f.values[i](c) = scale * pairs.vectors(i * op.dim + c, j);
    norm += f.values[i].squaredNorm() * h;
  }
  f.norm = norm;
  return f;
}

namespace {

using State = std::array<double, 8>;  // Re/Im of phi(0), phi(1), psi(0), psi(1)

struct TwoLevelRhs {
  const EffectiveHamiltonian* h;
  double energy;
  void operator()(const State& x, State& dx, double s) const {
    const double a = h->alpha(s);
    const Eigen::Matrix2cd V = h->potential(s);
    cd phi[2] = {cd(x[0], x[1]), cd(x[2], x[3])};
    cd psi[2] = {cd(x[4], x[5]), cd(x[6], x[7])};
    for (int c = 0; c < 2; ++c) {
      double A = zsign(h->dim, c) * a;
      cd dphi = psi[c] + cd(0.0, A) * phi[c];
      cd vphi = 0.0;
      if (h->dim == 2) {
        vphi = V(c, 0) * phi[0] + V(c, 1) * phi[1];
      } else {
        vphi = V(0, 0) * phi[c];
      }
      cd dpsi = cd(0.0, A) * psi[c] + 2.0 * (vphi - energy * phi[c]);
      dx[2 * c] = dphi.real();
      dx[2 * c + 1] = dphi.imag();
      dx[4 + 2 * c] = dpsi.real();
      dx[4 + 2 * c + 1] = dpsi.imag();
    }
  }
};

void record(TwoLevelField& f, const State& x, double s) {
  Eigen::Vector2cd phi(cd(x[0], x[1]), cd(x[2], x[3]));
  Eigen::Vector2cd psi(cd(x[4], x[5]), cd(x[6], x[7]));
  f.s.push_back(s);
  f.values.push_back(phi);
  f.flux.push_back(phi.dot(psi).imag());
}

}  // namespace

TwoLevelField propagate(const EffectiveHamiltonian& h, double energy, const Eigen::Vector2cd& phi0,
                        const Eigen::Vector2cd& dphi0, const SRange& range, double tol) {
  namespace ode = boost::numeric::odeint;
  if (!std::isfinite(energy)) throw ModelError("propagate: energy must be finite");
  if (!phi0.allFinite() || !dphi0.allFinite())
    throw ModelError("propagate: initial conditions must be finite");
  if (range.samples < 2 || !(range.end > range.begin))
    throw ModelError("propagate: need end > begin and at least 2 samples");

  const double a0 = h.alpha(range.begin);
  Eigen::Vector2cd p0 = phi0, ps0;
  if (h.dim == 1) p0(1) = 0.0;
  for (int c = 0; c < 2; ++c) ps0(c) = dphi0(c) - cd(0.0, zsign(h.dim, c) * a0) * p0(c);
  if (h.dim == 1) ps0(1) = 0.0;

  State x = {p0(0).real(), p0(0).imag(), p0(1).real(), p0(1).imag(),
             ps0(0).real(), ps0(0).imag(), ps0(1).real(), ps0(1).imag()};
  TwoLevelRhs rhs{&h, energy};
  auto stepper = ode::make_controlled(tol, tol, ode::runge_kutta_dopri5<State>());

  TwoLevelField f;
  const double span = range.end - range.begin;
  double s = range.begin;
  double dt = span / (range.samples - 1) / 8.0;
  record(f, x, s);
  for (int k = 1; k < range.samples; ++k) {
    const double target = (k == range.samples - 1) ? range.end
                                                   : range.begin + span * k / (range.samples - 1);
    while (s < target) {
      const bool clipped = dt >= target - s;
      double step = clipped ? target - s : dt;
      double s_try = s;
      if (stepper.try_step(rhs, x, s_try, step) == ode::success) {
        s = clipped ? target : s_try;
        if (!clipped) dt = step;
      } else {
        dt = step;
        if (dt < 1e-13 * (1.0 + std::abs(s)))
          throw IntegrationError("propagate: step size underflow at s = " + std::to_string(s), s);
      }
    }
    record(f, x, s);
  }
  double norm = 0.0;
  for (size_t i = 1; i < f.s.size(); ++i)
    norm += 0.5 * (f.s[i] - f.s[i - 1]) * (f.values[i].squaredNorm() + f.values[i - 1].squaredNorm());
  f.norm = norm;
  if (!std::isfinite(norm)) throw IntegrationError("propagate: solution blew up", s);
  return f;
}

WkbMomenta wkb_momenta(double energy, double alpha, double offdiag) {
  const double rp = 2.0 * (energy - offdiag) - alpha * alpha;
  const double rm = 2.0 * (energy + offdiag) - alpha * alpha;
  if (!(rp > 0.0) || !(rm > 0.0))
    throw TurningPointError("wkb_momenta: classically forbidden (E = " + std::to_string(energy) +
                            ", X = " + std::to_string(offdiag) + ")");
  WkbMomenta m;
  m.p_plus = alpha + std::sqrt(rp);
  m.p_minus = -alpha - std::sqrt(rm);
  m.regime_ok = energy >= 10.0 * std::max(std::abs(offdiag), 0.5 * alpha * alpha);
  return m;
}

namespace {

double sgn(double x) { return x < 0.0 ? -1.0 : 1.0; }

// eigenvectors of b sigma_z + X sigma_x; sign +1 -> eigenvalue +lambda
Eigen::Vector2d two_level_spinor(int sign, double b, double x, double x_slope, double& lambda) {
  lambda = std::hypot(x, b);
  if (lambda < 1e-14) throw DegeneracyError("wkb_spinor: Lambda = 0 (f = 0 and alpha p = 0)");
  double first, second;  // (X, Lambda - b) / norm
  if (b > 0.0) {
    double sx = x != 0.0 ? sgn(x) : sgn(x_slope);
    first = sx * std::sqrt((lambda + b) / (2.0 * lambda));
    second = std::abs(x) / std::sqrt(2.0 * lambda * (lambda + b));
  } else {
    double lmb = lambda - b;
    double nrm = std::sqrt(2.0 * lambda * lmb);
    first = x / nrm;
    second = lmb / nrm;
  }
  return sign > 0 ? Eigen::Vector2d(first, second) : Eigen::Vector2d(-second, first);
}

}  // namespace

WkbSample wkb_spinor(double s, int sign, const EffectiveHamiltonian& h, double energy) {
  if (h.dim != 2) throw ModelError("wkb_spinor: needs a two-level Hamiltonian");
  if (sign != 1 && sign != -1) throw ModelError("wkb_spinor: sign must be +1 or -1");
  const double a = h.alpha(s);
  const double x = h.vx(s);
  const double e = energy - h.vg(s) - h.v0(s);
  WkbMomenta m = wkb_momenta(e, a, x);
  WkbSample out;
  out.s = s;
  out.p = sign > 0 ? m.p_plus : m.p_minus;
  const double b = -a * out.p;
  out.u = two_level_spinor(sign, b, x, h.vx.d1(s), out.lambda);
  const double denom = std::abs(out.p - sign * a);
  out.prefactor = 1.0 / std::sqrt(denom);
  return out;
}

WkbBranch wkb_branch(const EffectiveHamiltonian& h, double energy, int sign, const SRange& range) {
  if (range.samples < 3 || !(range.end > range.begin))
    throw ModelError("wkb_branch: need end > begin and at least 3 samples");
  WkbBranch br;
  br.sign = sign;
  const int n = range.samples;
  const double ds = (range.end - range.begin) / (n - 1);
  br.samples.reserve(n);
  for (int i = 0; i < n; ++i)
    br.samples.push_back(wkb_spinor(range.begin + i * ds, sign, h, energy));
  br.phase.assign(n, 0.0);
  double weight = 0.0;
  for (int i = 1; i < n; ++i) {
    const auto& a = br.samples[i - 1];
    const auto& b = br.samples[i];
    br.phase[i] = br.phase[i - 1] + 0.5 * ds * (a.p + b.p);
    weight += 0.5 * ds * (a.prefactor * a.prefactor + b.prefactor * b.prefactor);
    // rotation rate of the spinor, blind to the sign convention flip at X = 0
    Eigen::Vector2d ub = a.u.dot(b.u) < 0.0 ? Eigen::Vector2d(-b.u) : b.u;
    Eigen::Vector2d du = (ub - a.u) / ds;
    Eigen::Vector2d mid = 0.5 * (a.u + ub);
    Eigen::Vector2d perp(-mid(1), mid(0));
    br.max_mixing_rate = std::max(br.max_mixing_rate, std::abs(perp.dot(du)) / mid.squaredNorm());
  }
  br.C = 1.0 / std::sqrt(weight);
  return br;
}

double auto_energy(const EffectiveHamiltonian& h, double length, int samples) {
  double x = 0.0, a2 = 0.0;
  for (int i = 0; i < samples; ++i) {
    double s = length * i / (samples - 1);
    if (h.dim == 2) x = std::max(x, std::abs(h.vx(s)));
    a2 = std::max(a2, 0.5 * h.alpha(s) * h.alpha(s));
  }
  double e = 100.0 * std::max(x, a2);
  if (!(e > 0.0)) throw ModelError("auto_energy: no energy scale (X = 0 and alpha = 0)");
  return e;
}

CrossSectionField reconstruct_field(const Eigen::Vector2cd& u, int n1, int n2, double d, int grid,
                                    cd minus_phase) {
  if (n1 == n2) throw ModelError("reconstruct_field: requires n1 != n2");
  if (grid < 2) throw ModelError("reconstruct_field: grid must be >= 2");
  CrossSectionField f;
  f.grid = grid;
  f.d = d;
  f.q.resize(grid);
  for (int i = 0; i < grid; ++i) f.q[i] = -0.5 * d + (i + 0.5) * d / grid;
  const size_t total = static_cast<size_t>(grid) * grid;
  f.value.resize(total);
  f.amplitude.resize(total);
  f.phase.resize(total);
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j) {
      const double q1 = f.q[i], q2 = f.q[j];
      cd psi = u(0) * degenerate_state(+1, n1, n2, d, q1, q2) +
               u(1) * minus_phase * degenerate_state(-1, n1, n2, d, q1, q2);
      const size_t k = static_cast<size_t>(i) * grid + j;
      f.value[k] = psi;
      f.amplitude[k] = std::abs(psi);
      double ph = std::arg(psi);
      if (ph <= -pi) ph = pi;
      f.phase[k] = ph;
    }
  return f;
}

double field_norm(const CrossSectionField& f) {
  double acc = 0.0;
  for (double a : f.amplitude) acc += a * a;
  const double cell = f.d / f.grid;
  return acc * cell * cell;
}

double phase_jump(const CrossSectionField& a, const CrossSectionField& b) {
  if (a.grid != b.grid) throw ModelError("phase_jump: grids differ");
  const double amax = *std::max_element(a.amplitude.begin(), a.amplitude.end());
  const double bmax = *std::max_element(b.amplitude.begin(), b.amplitude.end());
  std::vector<double> diff;
  diff.reserve(a.value.size());
  cd mean = 0.0;
  for (size_t k = 0; k < a.value.size(); ++k) {
    if (a.amplitude[k] <= 1e-3 * amax || b.amplitude[k] <= 1e-3 * bmax) continue;
    double dphi = std::arg(b.value[k] * std::conj(a.value[k]));
    diff.push_back(dphi);
    mean += std::polar(1.0, dphi);
  }
  if (diff.empty()) return 0.0;
  const double c = std::arg(mean);
  for (double& v : diff) v = c + std::arg(std::polar(1.0, v - c));
  auto mid = diff.begin() + static_cast<long>(diff.size() / 2);
  std::nth_element(diff.begin(), mid, diff.end());
  double med = *mid;
  if (diff.size() % 2 == 0) {
    double lower = *std::max_element(diff.begin(), mid);
    med = 0.5 * (med + lower);
  }
  double out = std::arg(std::polar(1.0, med));
  if (out <= -pi) out = pi;
  return out;
}

std::vector<double> rotate90(const std::vector<double>& a, int grid) {
  // (q1, q2) -> (-q2, q1): out(i, j) = a(j, grid-1-i)
  std::vector<double> out(a.size());
  for (int i = 0; i < grid; ++i)
    for (int j = 0; j < grid; ++j)
      out[static_cast<size_t>(i) * grid + j] = a[static_cast<size_t>(j) * grid + (grid - 1 - i)];
  return out;
}

double pattern_correlation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty()) throw ModelError("pattern_correlation: size mismatch");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return saa == sbb ? 1.0 : 0.0;
  return sab / std::sqrt(saa * sbb);
}

PhaseScan phase_evolution_scan(const EffectiveHamiltonian& h, double energy, int sign,
                               const std::vector<double>& s_samples, int grid) {
  if (h.dim != 2) throw ModelError("phase_evolution_scan: needs a two-level Hamiltonian");
  PhaseScan scan;
  scan.fields.reserve(s_samples.size());
  for (double s : s_samples) {
    WkbSample w = wkb_spinor(s, sign, h, energy);
    CrossSectionField f = reconstruct_field(w.u.cast<cd>(), h.meta.n1, h.meta.n2,
                                            h.meta.cross.size, grid, h.meta.minus_phase);
    f.s = s;
    scan.fields.push_back(std::move(f));
  }
  for (size_t k = 0; k + 1 < scan.fields.size(); ++k)
    scan.jumps.push_back(phase_jump(scan.fields[k], scan.fields[k + 1]));
  return scan;
}

namespace {

// loop integral of (alpha + dir * sqrt(2(E - V0 - X) - alpha^2)) over one period
double action(const EffectiveHamiltonian& h, double length, double e, int dir, int n) {
  const double ds = length / n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    const double s = i * ds;
    const double a = h.alpha(s);
    const double x = h.dim == 2 ? h.vx(s) : 0.0;
    const double r = 2.0 * (e - h.vg(s) - h.v0(s) - x) - a * a;
    if (r <= 0.0) throw TurningPointError("wkb_splitting: classically forbidden energy");
    acc += a + dir * std::sqrt(r);
  }
  return acc * ds;
}

}  // namespace

SplittingPrediction wkb_splitting(const EffectiveHamiltonian& h, double length, double energy,
                                  int quadrature) {
  double floor = -1e300;
  for (int i = 0; i < quadrature; ++i) {
    const double s = length * i / quadrature;
    const double a = h.alpha(s);
    const double x = h.dim == 2 ? h.vx(s) : 0.0;
    floor = std::max(floor, h.vg(s) + h.v0(s) + x + 0.5 * a * a);
  }
  if (energy <= floor) throw TurningPointError("wkb_splitting: reference energy below barrier");
  SplittingPrediction out;
  const double kinetic = std::sqrt(2.0 * (energy - floor));
  const double lo = floor + 1e-12 * (1.0 + std::abs(floor));
  // both movers need a level above the barrier top
  double start = 0.0;
  for (int dir : {1, -1}) start = std::max(start, dir * action(h, length, lo, dir, quadrature));
  out.m = std::max({1, static_cast<int>(std::lround(kinetic * length / (2.0 * pi))),
                    static_cast<int>(std::floor(start / (2.0 * pi))) + 1});
  out.k = 2.0 * pi * out.m / length;

  auto solve = [&](int dir) {
    auto g = [&](double e) { return dir * action(h, length, e, dir, quadrature) - 2.0 * pi * out.m; };
    double hi = floor + 1.0;
    while (g(hi) < 0.0) hi = floor + 2.0 * (hi - floor);
    boost::math::tools::eps_tolerance<double> tol(50);
    boost::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(g, lo, hi, tol, it);
    return 0.5 * (r.first + r.second);
  };
  out.e_forward = solve(+1);
  out.e_backward = solve(-1);
  out.splitting = std::abs(out.e_backward - out.e_forward);
  return out;
}

double doublet_gap(const std::vector<double>& eigenvalues, double centre) {
  if (eigenvalues.size() < 4) throw ModelError("doublet_gap: need at least four eigenvalues");
  std::vector<double> v = eigenvalues;
  std::partial_sort(v.begin(), v.begin() + 4, v.end(), [&](double a, double b) {
    return std::abs(a - centre) < std::abs(b - centre);
  });
  std::sort(v.begin(), v.begin() + 4);
  return 0.5 * (v[2] + v[3]) - 0.5 * (v[0] + v[1]);
}

}  // namespace tubeq
