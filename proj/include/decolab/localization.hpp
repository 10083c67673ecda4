#pragma once

#include "decolab/numerics.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace decolab {

struct PotentialSpec {
  enum class Kind { Free, Harmonic, Inverted, Sampled };
  Kind kind = Kind::Free;
  double omega = 0.0;     // harmonic frequency
  double lyapunov = 0.0;  // inverted-oscillator rate
  // sampled: values at sample_x0 + j*sample_dx, linearly interpolated, clamped outside
  std::vector<double> values;
  double sample_x0 = 0.0;
  double sample_dx = 1.0;

  static PotentialSpec free() { return {}; }
  static PotentialSpec harmonic(double w);
  static PotentialSpec inverted(double lambda);
  static PotentialSpec sampled(std::vector<double> v, const Grid1D& on);

  double value(double x, double mass) const;
  void validate() const;
  std::string name() const;
};

struct LocalizationParams {
  double mass = 1.0;
  double lambda_loc = 0.0;
  double dt = 1e-3;
  PotentialSpec potential;
  static constexpr double hbar = 1.0;

  void validate() const;
  // sqrt(M / Lambda); infinite when Lambda = 0
  double t_loc() const;
};

// Amplitudes satisfy sum |psi_j|^2 = 1. The physical state is exp(i p_offset x) * psi(x);
// p_offset is a multiple of the grid's wavenumber spacing and lets long runs follow the
// packet in momentum as recentering follows it in position.
class WaveFunction {
 public:
  WaveFunction() = default;
  WaveFunction(Grid1D grid, ComplexVector amplitudes, double p_offset = 0.0);

  static WaveFunction gaussian(const Grid1D& grid, double center, double sigma_x, double p0 = 0.0);

  const Grid1D& grid() const { return grid_; }
  const ComplexVector& amplitudes() const { return psi_; }
  ComplexVector& amplitudes() { return psi_; }
  double p_offset() const { return p_offset_; }

  double norm() const { return psi_.norm(); }
  void normalize();

  double mean_x() const;
  double var_x() const;
  double mean_p() const;
  double var_p() const;
  // Physical amplitudes including the momentum offset phase.
  ComplexVector physical_amplitudes() const;
  cplx overlap(const WaveFunction& other) const;

  // Move the grid so the packet sits near its centre: circular shift by `cells`.
  void shift_cells(long cells);
  // Absorb a momentum boost of `dk_steps` grid wavenumbers into p_offset.
  void boost_steps(long dk_steps);

 private:
  friend class SplitStepper;
  Grid1D grid_;
  ComplexVector psi_;
  double p_offset_ = 0.0;
};

struct TrajectoryRecord {
  std::vector<double> t;
  std::vector<double> mean_x;
  std::vector<double> mean_p;
  std::vector<double> var_x;
  std::vector<double> var_p;
  std::vector<std::uint8_t> jumped;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::size_t size() const { return t.size(); }
  std::vector<double> jump_times() const;
  std::size_t jump_count() const;
  void push(double time, const WaveFunction& psi, bool jump);
  void push(double time, double mx, double mp, double vx, double vp, bool jump);
};

double jump_rate(const WaveFunction& psi, const LocalizationParams& params);

WaveFunction heff_step(const WaveFunction& psi, const LocalizationParams& params,
                       std::size_t step_index = 0);
WaveFunction apply_jump(const WaveFunction& psi);

struct EvolveOptions {
  bool allow_jumps = true;
  bool recenter = true;
  std::size_t record_every = 1;
  // Halve the step (repeatedly) wherever r*dt would exceed 0.1 instead of failing.
  bool adaptive = false;
};

struct TrajectoryResult {
  WaveFunction final_state;
  TrajectoryRecord record;
};

TrajectoryResult evolve_trajectory(const WaveFunction& psi0, const LocalizationParams& params,
                                   double t_final, RngStream& rng, const EvolveOptions& opts = {});

// Complex attractor frequency sqrt(omega_h^2 - lambda^2 + 2 Lambda/(i M)), Re > 0.
cplx attractor_omega(const LocalizationParams& params);
// Gaussian attractor of the Lambda term alone (potential ignored), centred at `center`.
WaveFunction pointer_state(const LocalizationParams& params, const Grid1D& grid,
                           double center = 0.0, double p0 = 0.0);
// Closed-form variances of the attractor Gaussian for the given params (potential included).
double attractor_var_x(const LocalizationParams& params);
double attractor_var_p(const LocalizationParams& params);

struct ChaosProbeResult {
  double terminal_spread = 0.0;   // final Delta x
  double reference_spread = 0.0;  // Delta x of the Lambda-only pointer state
  double threshold = 0.0;
  double analytic_spread = 0.0;   // attractor Delta x including the inverted potential
  bool localized = false;
  std::string diagnostic;
};

ChaosProbeResult chaos_probe(const LocalizationParams& params, const Grid1D& grid,
                             double threshold_factor = 10.0);

}  // namespace decolab
