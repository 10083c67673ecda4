#include "decolab/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

namespace decolab {

PotentialSpec PotentialSpec::harmonic(double w) {
  PotentialSpec p;
  p.kind = Kind::Harmonic;
  p.omega = w;
  return p;
}

PotentialSpec PotentialSpec::inverted(double lambda) {
  PotentialSpec p;
  p.kind = Kind::Inverted;
  p.lyapunov = lambda;
  return p;
}

PotentialSpec PotentialSpec::sampled(std::vector<double> v, const Grid1D& on) {
  PotentialSpec p;
  p.kind = Kind::Sampled;
  p.values = std::move(v);
  p.sample_x0 = on.x0;
  p.sample_dx = on.dx;
  p.validate();
  return p;
}

double PotentialSpec::value(double x, double mass) const {
  switch (kind) {
    case Kind::Free:
      return 0.0;
    case Kind::Harmonic:
      return 0.5 * mass * omega * omega * x * x;
    case Kind::Inverted:
      return -0.5 * mass * lyapunov * lyapunov * x * x;
    case Kind::Sampled: {
      if (values.empty()) return 0.0;
      double s = (x - sample_x0) / sample_dx;
      if (s <= 0.0) return values.front();
      const double last = static_cast<double>(values.size() - 1);
      if (s >= last) return values.back();
      auto i = static_cast<std::size_t>(std::floor(s));
      double f = s - static_cast<double>(i);
      return (1.0 - f) * values[i] + f * values[i + 1];
    }
  }
  return 0.0;
}

void PotentialSpec::validate() const {
  if (kind == Kind::Sampled) {
    if (values.empty()) throw Error("sampled potential has no values");
    for (double v : values)
      if (!std::isfinite(v)) throw Error("sampled potential values must be finite");
    if (!(sample_dx > 0.0)) throw Error("sampled potential spacing must be positive");
  }
  if (!std::isfinite(omega) || !std::isfinite(lyapunov)) throw Error("potential parameters must be finite");
}

std::string PotentialSpec::name() const {
  switch (kind) {
    case Kind::Free: return "free";
    case Kind::Harmonic: return "harmonic";
    case Kind::Inverted: return "inverted";
    case Kind::Sampled: return "sampled";
  }
  return "unknown";
}

void LocalizationParams::validate() const {
  if (!(mass > 0.0) || !std::isfinite(mass)) throw Error("mass must be positive");
  if (!(lambda_loc >= 0.0) || !std::isfinite(lambda_loc)) throw Error("lambda_loc must be >= 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("dt must be positive");
  potential.validate();
}

double LocalizationParams::t_loc() const {
  if (lambda_loc <= 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(mass / (hbar * lambda_loc));
}

// ---------------------------------------------------------------------------

WaveFunction::WaveFunction(Grid1D grid, ComplexVector amplitudes, double p_offset)
    : grid_(grid), psi_(std::move(amplitudes)), p_offset_(p_offset) {
  if (static_cast<std::size_t>(psi_.size()) != grid_.n_points)
    throw Error("WaveFunction: amplitude count differs from grid size");
}

WaveFunction WaveFunction::gaussian(const Grid1D& grid, double center, double sigma_x, double p0) {
  if (!(sigma_x > 0.0)) throw Error("gaussian: width must be positive");
  ComplexVector a(static_cast<Eigen::Index>(grid.n_points));
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    double d = grid.x(j) - center;
    a[static_cast<Eigen::Index>(j)] =
        std::exp(-d * d / (4.0 * sigma_x * sigma_x)) * std::exp(kI * p0 * grid.x(j));
  }
  WaveFunction w(grid, a);
  w.normalize();
  return w;
}

void WaveFunction::normalize() {
  double n = psi_.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw Error("WaveFunction: cannot normalize a zero or non-finite state");
  psi_ /= n;
}

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments position_moments(const ComplexVector& psi, const Grid1D& g) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (Eigen::Index j = 0; j < psi.size(); ++j) {
    double w = std::norm(psi[j]);
    double x = g.x(static_cast<std::size_t>(j));
    s0 += w;
    s1 += w * x;
    s2 += w * x * x;
  }
  Moments m;
  m.mean = s1 / s0;
  m.var = std::max(0.0, s2 / s0 - m.mean * m.mean);
  return m;
}

Moments kspace_moments(const ComplexVector& phi, const RealVector& k, double p_offset) {
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (Eigen::Index j = 0; j < phi.size(); ++j) {
    double w = std::norm(phi[j]);
    double p = k[j] + p_offset;
    s0 += w;
    s1 += w * p;
    s2 += w * p * p;
  }
  Moments m;
  m.mean = s1 / s0;
  m.var = std::max(0.0, s2 / s0 - m.mean * m.mean);
  return m;
}

Moments momentum_moments(const ComplexVector& psi, const Grid1D& g, double p_offset) {
  ComplexVector phi = psi;
  fft(phi);
  return kspace_moments(phi, g.wavenumbers(), p_offset);
}

bool all_finite(const ComplexVector& v) {
  for (Eigen::Index j = 0; j < v.size(); ++j)
    if (!std::isfinite(v[j].real()) || !std::isfinite(v[j].imag())) return false;
  return true;
}

}  // namespace

double WaveFunction::mean_x() const { return position_moments(psi_, grid_).mean; }
double WaveFunction::var_x() const { return position_moments(psi_, grid_).var; }
double WaveFunction::mean_p() const { return momentum_moments(psi_, grid_, p_offset_).mean; }
double WaveFunction::var_p() const { return momentum_moments(psi_, grid_, p_offset_).var; }

ComplexVector WaveFunction::physical_amplitudes() const {
  if (p_offset_ == 0.0) return psi_;
  ComplexVector out = psi_;
  for (Eigen::Index j = 0; j < out.size(); ++j)
    out[j] *= std::exp(kI * p_offset_ * grid_.x(static_cast<std::size_t>(j)));
  return out;
}

cplx WaveFunction::overlap(const WaveFunction& other) const {
  if (other.grid_.n_points != grid_.n_points || std::abs(other.grid_.x0 - grid_.x0) > 1e-12 * grid_.length() ||
      std::abs(other.grid_.dx - grid_.dx) > 1e-15)
    throw Error("overlap: wavefunctions live on different grids");
  return physical_amplitudes().dot(other.physical_amplitudes());
}

void WaveFunction::shift_cells(long cells) {
  if (cells == 0) return;
  const auto n = static_cast<long>(grid_.n_points);
  ComplexVector out(psi_.size());
  for (long j = 0; j < n; ++j) {
    long src = ((j + cells) % n + n) % n;
    out[j] = psi_[src];
  }
  psi_ = std::move(out);
  grid_.x0 += static_cast<double>(cells) * grid_.dx;
}

void WaveFunction::boost_steps(long dk_steps) {
  if (dk_steps == 0) return;
  const double kappa = static_cast<double>(dk_steps) * 2.0 * kPi / grid_.length();
  for (Eigen::Index j = 0; j < psi_.size(); ++j)
    psi_[j] *= std::exp(-kI * kappa * grid_.x(static_cast<std::size_t>(j)));
  p_offset_ += kappa;
}

// ---------------------------------------------------------------------------

std::vector<double> TrajectoryRecord::jump_times() const {
  std::vector<double> out;
  for (std::size_t i = 0; i < t.size(); ++i)
    if (jumped[i]) out.push_back(t[i]);
  return out;
}

std::size_t TrajectoryRecord::jump_count() const {
  return static_cast<std::size_t>(std::count(jumped.begin(), jumped.end(), std::uint8_t{1}));
}

void TrajectoryRecord::push(double time, double mx, double mp, double vx, double vp, bool jump) {
  t.push_back(time);
  mean_x.push_back(mx);
  mean_p.push_back(mp);
  var_x.push_back(vx);
  var_p.push_back(vp);
  jumped.push_back(jump ? 1 : 0);
}

void TrajectoryRecord::push(double time, const WaveFunction& psi, bool jump) {
  push(time, psi.mean_x(), psi.mean_p(), psi.var_x(), psi.var_p(), jump);
}

// ---------------------------------------------------------------------------

double jump_rate(const WaveFunction& psi, const LocalizationParams& params) {
  return 2.0 * params.lambda_loc * psi.var_x();
}

// Strang splitter with tables cached against grid position and momentum offset.
class SplitStepper {
 public:
  explicit SplitStepper(const LocalizationParams& p, bool potential_about_mean = false)
      : p_(p), about_mean_(potential_about_mean) {}

  // Advances w in place. mx, vx are the frozen position moments at step start.
  // Returns momentum moments of the result.
  Moments step(WaveFunction& w, double mx, double vx, std::size_t index) {
    refresh(w);
    ComplexVector& psi = w.psi_;
    fft(psi);
    psi.array() *= kin_half_.array();
    ifft(psi);
    const double dt = p_.dt;
    const double lam = p_.lambda_loc;
    const double shift = about_mean_ ? mx : 0.0;
    for (Eigen::Index j = 0; j < psi.size(); ++j) {
      double x = x_[j];
      double d = x - mx;
      double v = p_.potential.value(x - shift, p_.mass);
      psi[j] *= std::exp(cplx(-dt * lam * (d * d - vx), -dt * v));
    }
    fft(psi);
    psi.array() *= kin_half_.array();
    Moments pm = kspace_moments(psi, k_, w.p_offset_);
    ifft(psi);
    double n = psi.norm();
    if (!std::isfinite(n) || !(n > 0.0) || !all_finite(psi)) {
      std::ostringstream os;
      os << "heff_step: non-finite amplitudes at step " << index;
      throw Error(os.str());
    }
    psi /= n;
    return pm;
  }

 private:
  void refresh(const WaveFunction& w) {
    const Grid1D& g = w.grid_;
    if (g.n_points == n_ && g.x0 == x0_ && g.dx == dx_ && w.p_offset_ == poff_) return;
    n_ = g.n_points;
    x0_ = g.x0;
    dx_ = g.dx;
    poff_ = w.p_offset_;
    x_ = g.positions();
    k_ = g.wavenumbers();
    kin_half_.resize(k_.size());
    for (Eigen::Index j = 0; j < k_.size(); ++j) {
      double p = k_[j] + poff_;
      kin_half_[j] = std::exp(-kI * (0.5 * p_.dt) * p * p / (2.0 * p_.mass));
    }
  }

  LocalizationParams p_;
  bool about_mean_;
  std::size_t n_ = 0;
  double x0_ = std::numeric_limits<double>::quiet_NaN();
  double dx_ = 0.0;
  double poff_ = 0.0;
  RealVector x_, k_;
  ComplexVector kin_half_;
};

namespace {

void check_stability(double r, double dt, std::size_t index) {
  if (r * dt > 0.1) {
    std::ostringstream os;
    os << "stability bound violated: r*dt = " << r * dt << " > 0.1 at step " << index;
    throw Error(os.str());
  }
}

void check_normalized(const WaveFunction& psi, const char* what) {
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw Error(std::string(what) + ": input state is not normalized");
}

}  // namespace

WaveFunction heff_step(const WaveFunction& psi, const LocalizationParams& params, std::size_t step_index) {
  params.validate();
  check_normalized(psi, "heff_step");
  Moments xm = position_moments(psi.amplitudes(), psi.grid());
  check_stability(2.0 * params.lambda_loc * xm.var, params.dt, step_index);
  WaveFunction out = psi;
  SplitStepper stepper(params);
  stepper.step(out, xm.mean, xm.var, step_index);
  return out;
}

WaveFunction apply_jump(const WaveFunction& psi) {
  Moments xm = position_moments(psi.amplitudes(), psi.grid());
  double spread = std::sqrt(xm.var);
  if (spread < 1e-14) throw Error("apply_jump: state already point-localized");
  WaveFunction out = psi;
  ComplexVector& a = out.amplitudes();
  for (Eigen::Index j = 0; j < a.size(); ++j) a[j] *= (psi.grid().x(static_cast<std::size_t>(j)) - xm.mean);
  // (x - <x>) psi is orthogonal to psi; remove roundoff along psi before normalising.
  a -= psi.amplitudes() * psi.amplitudes().dot(a) / psi.amplitudes().squaredNorm();
  out.normalize();
  return out;
}

namespace {

void recenter(WaveFunction& psi, double mx, double mp) {
  const Grid1D& g = psi.grid();
  const double quarter = 0.25 * static_cast<double>(g.n_points);
  double off_cells = (mx - g.center()) / g.dx;
  if (std::abs(off_cells) > quarter) psi.shift_cells(std::lround(off_cells));
  const double dk = 2.0 * kPi / g.length();
  double off_k = (mp - psi.p_offset()) / dk;
  if (std::abs(off_k) > quarter) psi.boost_steps(std::lround(off_k));
}

}  // namespace

TrajectoryResult evolve_trajectory(const WaveFunction& psi0, const LocalizationParams& params, double t_final,
                                   RngStream& rng, const EvolveOptions& opts) {
  params.validate();
  if (!(t_final > 0.0)) throw Error("evolve_trajectory: t_final must be positive");
  check_normalized(psi0, "evolve_trajectory");
  const std::size_t every = std::max<std::size_t>(1, opts.record_every);
  TrajectoryResult res;
  res.record.seed = rng.seed();
  res.record.stream = rng.stream_id();
  WaveFunction psi = psi0;
  SplitStepper stepper(params);
  const auto steps = static_cast<std::size_t>(std::llround(t_final / params.dt));

  Moments xm = position_moments(psi.amplitudes(), psi.grid());
  Moments pm = momentum_moments(psi.amplitudes(), psi.grid(), psi.p_offset());
  res.record.push(0.0, xm.mean, pm.mean, xm.var, pm.var, false);
  bool pending_jump = false;
  constexpr int kMaxHalvings = 20;
  std::vector<std::unique_ptr<SplitStepper>> halved(kMaxHalvings + 1);
  auto stepper_for = [&](int k) -> SplitStepper& {
    if (k == 0) return stepper;
    if (!halved[k]) {
      LocalizationParams ph = params;
      ph.dt = params.dt / std::ldexp(1.0, k);
      halved[k] = std::make_unique<SplitStepper>(ph);
    }
    return *halved[k];
  };
  // One Bernoulli trial over h = dt / 2^k.
  auto substep = [&](int k, std::size_t n) {
    const double h = std::ldexp(params.dt, -k);
    const double r = 2.0 * params.lambda_loc * xm.var;
    check_stability(r, h, n);
    const bool jump = opts.allow_jumps && rng.uniform() < r * h;
    if (jump) {
      psi = apply_jump(psi);
      pm = momentum_moments(psi.amplitudes(), psi.grid(), psi.p_offset());
    } else {
      pm = stepper_for(k).step(psi, xm.mean, xm.var, n);
    }
    xm = position_moments(psi.amplitudes(), psi.grid());
    pending_jump = pending_jump || jump;
  };
  for (std::size_t n = 1; n <= steps; ++n) {
    const double t = static_cast<double>(n) * params.dt;
    try {
      if (!opts.adaptive) {
        substep(0, n);
      } else {
        // Progress within the step counted in units of dt / 2^kMaxHalvings.
        std::uint64_t left = std::uint64_t{1} << kMaxHalvings;
        while (left > 0) {
          const double r = 2.0 * params.lambda_loc * xm.var;
          int k = 0;
          while (k < kMaxHalvings && r * std::ldexp(params.dt, -k) > 0.1) ++k;
          while (left % (std::uint64_t{1} << (kMaxHalvings - k)) != 0) ++k;
          substep(k, n);
          left -= std::uint64_t{1} << (kMaxHalvings - k);
        }
      }
      if (n % every == 0 || n == steps) {
        res.record.push(t, xm.mean, pm.mean, xm.var, pm.var, pending_jump);
        pending_jump = false;
      }
      if (opts.recenter) {
        recenter(psi, xm.mean, pm.mean);
        xm = position_moments(psi.amplitudes(), psi.grid());
      }
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " (trajectory time t=" << t << ")";
      throw Error(os.str());
    }
  }
  res.final_state = std::move(psi);
  return res;
}

cplx attractor_omega(const LocalizationParams& params) {
  if (params.lambda_loc <= 0.0) throw Error("attractor requires lambda_loc > 0");
  cplx w2 = cplx(0.0, -2.0 * params.hbar * params.lambda_loc / params.mass);
  switch (params.potential.kind) {
    case PotentialSpec::Kind::Free: break;
    case PotentialSpec::Kind::Harmonic: w2 += params.potential.omega * params.potential.omega; break;
    case PotentialSpec::Kind::Inverted: w2 -= params.potential.lyapunov * params.potential.lyapunov; break;
    case PotentialSpec::Kind::Sampled: throw Error("attractor_omega: no closed form for a sampled potential");
  }
  cplx w = std::sqrt(w2);
  if (w.real() < 0.0) w = -w;
  return w;
}

double attractor_var_x(const LocalizationParams& params) {
  cplx w = attractor_omega(params);
  return params.hbar / (2.0 * params.mass * w.real());
}

double attractor_var_p(const LocalizationParams& params) {
  cplx w = attractor_omega(params);
  return params.hbar * params.mass * std::norm(w) / (2.0 * w.real());
}

WaveFunction pointer_state(const LocalizationParams& params, const Grid1D& grid, double center, double p0) {
  if (!(params.lambda_loc > 0.0)) throw Error("pointer_state: lambda_loc = 0 has no attractor");
  LocalizationParams bare = params;
  bare.potential = PotentialSpec::free();
  const cplx a = params.mass * attractor_omega(bare) / params.hbar;
  ComplexVector amp(static_cast<Eigen::Index>(grid.n_points));
  for (std::size_t j = 0; j < grid.n_points; ++j) {
    double d = grid.x(j) - center;
    amp[static_cast<Eigen::Index>(j)] = std::exp(-0.5 * a * d * d + kI * p0 * grid.x(j));
  }
  WaveFunction w(grid, amp);
  w.normalize();
  return w;
}

ChaosProbeResult chaos_probe(const LocalizationParams& params, const Grid1D& grid, double threshold_factor) {
  params.validate();
  if (params.potential.kind != PotentialSpec::Kind::Inverted)
    throw Error("chaos_probe: potential must be the inverted oscillator");
  ChaosProbeResult res;
  WaveFunction psi = pointer_state(params, grid, grid.center());
  res.reference_spread = std::sqrt(psi.var_x());
  res.threshold = threshold_factor * res.reference_spread;
  res.analytic_spread = std::sqrt(attractor_var_x(params));
  // The inverted oscillator is a local model about the packet, so it is taken about the
  // frozen centroid; the unstable centroid motion itself is not part of the probe.
  SplitStepper stepper(params, true);
  const auto steps = static_cast<std::size_t>(std::ceil(10.0 * params.t_loc() / params.dt));
  try {
    Moments xm = position_moments(psi.amplitudes(), psi.grid());
    for (std::size_t n = 1; n <= steps; ++n) {
      check_stability(2.0 * params.lambda_loc * xm.var, params.dt, n);
      Moments pm = stepper.step(psi, xm.mean, xm.var, n);
      xm = position_moments(psi.amplitudes(), psi.grid());
      recenter(psi, xm.mean, pm.mean);
      xm = position_moments(psi.amplitudes(), psi.grid());
      if (std::sqrt(xm.var) > 0.25 * grid.length()) {
        std::ostringstream os;
        os << "packet spread exceeds a quarter of the grid at step " << n;
        throw Error(os.str());
      }
    }
    res.terminal_spread = std::sqrt(xm.var);
    res.localized = std::isfinite(res.terminal_spread) && res.terminal_spread < res.threshold;
    std::ostringstream os;
    os << "terminal spread " << res.terminal_spread << " vs threshold " << res.threshold;
    res.diagnostic = os.str();
  } catch (const Error& e) {
    res.terminal_spread = std::numeric_limits<double>::infinity();
    res.localized = false;
    res.diagnostic = std::string("divergence: ") + e.what();
  }
  return res;
}

}  // namespace decolab
