#pragma once

#include "decolab/localization.hpp"

#include <optional>
#include <string>
#include <vector>

namespace decolab {

// Physical-unit inputs: inertia is a mass (kg) or a moment of inertia (kg m^2).
struct ScaleInput {
  double inertia = 0.0;
  double lambda_loc = 0.0;
  double hbar = 1.0546e-34;
  void validate() const;
};

struct PointerScales {
  double dx = 0.0;
  double dp = 0.0;
  double t_loc = 0.0;
};

PointerScales pointer_scales(const ScaleInput& s);

struct ChaosMargin {
  double ratio = 0.0;
  bool localizes = true;
};

ChaosMargin chaos_margin(const ScaleInput& s, double lyapunov);

struct ScaleRow {
  std::string name;
  ScaleInput input;
  std::optional<double> lyapunov;
  // Order-of-magnitude reference values, when known.
  std::optional<double> ref_dx, ref_dp, ref_t_loc, ref_ratio;
};

// Dust grain rows for air, room-temperature photons and the CMB, plus Hyperion's rotation.
std::vector<ScaleRow> reference_scale_rows();

// Number of decades between two positive values.
double decades_apart(double a, double b);

struct LangevinFit {
  double sigma_p = 0.0;
  double r_squared = 0.0;
  std::vector<double> t;
  std::vector<double> variance;  // ensemble variance of <p>(t)
};

// Fits Var[<p>](t) = sigma_p^2 t through the origin. Records must share a time grid.
LangevinFit langevin_fit(const std::vector<TrajectoryRecord>& ensemble, std::size_t min_trajectories = 500);

struct LocalizationFit {
  double t_loc_measured = 0.0;
  double r_squared = 0.0;
  std::size_t samples = 0;
};

// Exponential fit of the combined distance from the pointer variances,
// sqrt((dVx/Vx)^2 + (dVp/Vp)^2), over the window before the first jump.
LocalizationFit localization_fit(const TrajectoryRecord& record, const LocalizationParams& params);

// Least squares y = a + b x; returns {a, b, r_squared}.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r_squared = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace decolab
