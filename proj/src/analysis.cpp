#include "decolab/analysis.hpp"

#include <cmath>
#include <sstream>

namespace decolab {

void ScaleInput::validate() const {
  if (!(inertia > 0.0) || !(lambda_loc > 0.0) || !(hbar > 0.0) || !std::isfinite(inertia) ||
      !std::isfinite(lambda_loc) || !std::isfinite(hbar))
    throw Error("scale input: inertia, lambda and hbar must be positive and finite");
}

PointerScales pointer_scales(const ScaleInput& s) {
  s.validate();
  PointerScales out;
  out.dx = std::pow(s.hbar / (s.inertia * s.lambda_loc), 0.25);
  out.dp = std::pow(s.hbar, 0.75) * std::pow(s.inertia * s.lambda_loc, 0.25);
  out.t_loc = std::sqrt(s.inertia / (s.hbar * s.lambda_loc));
  return out;
}

ChaosMargin chaos_margin(const ScaleInput& s, double lyapunov) {
  if (!(lyapunov >= 0.0) || !std::isfinite(lyapunov)) throw Error("chaos_margin: Lyapunov rate must be non-negative");
  ChaosMargin m;
  m.ratio = lyapunov * pointer_scales(s).t_loc;
  m.localizes = m.ratio < 1.0;
  return m;
}

std::vector<ScaleRow> reference_scale_rows() {
  const double grain = 1e-3;
  std::vector<ScaleRow> rows;
  rows.push_back({"air", {grain, 1e41}, std::nullopt, 1e-18, 1e-16, 1e-5, std::nullopt});
  rows.push_back({"photons", {grain, 1e28}, std::nullopt, 1e-15, 1e-19, 1e2, std::nullopt});
  rows.push_back({"cmb", {grain, 1e10}, std::nullopt, 1e-10, 1e-24, 1e10, std::nullopt});
  const double mass = 5e18, radius = 135e3, day = 86400.0;
  rows.push_back({"hyperion", {mass * radius * radius, 1e51}, 1.0 / (100.0 * day), 1e-29, 1e-6, 10.0 * day, 0.1});
  return rows;
}

double decades_apart(double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw Error("decades_apart: values must be positive");
  return std::abs(std::log10(a / b));
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error("fit_line: need at least two paired samples");
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0.0) throw Error("fit_line: abscissae are all equal");
  LineFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

LangevinFit langevin_fit(const std::vector<TrajectoryRecord>& ensemble, std::size_t min_trajectories) {
  if (ensemble.size() < min_trajectories || ensemble.size() < 2) {
    std::ostringstream os;
    os << "langevin_fit: need at least " << min_trajectories << " trajectories, got " << ensemble.size();
    throw Error(os.str());
  }
  const auto& t = ensemble.front().t;
  for (const auto& r : ensemble)
    if (r.t != t) throw Error("langevin_fit: trajectories do not share a time grid");
  if (t.size() < 2) throw Error("langevin_fit: need at least two time samples");
  LangevinFit fit;
  fit.t = t;
  fit.variance.assign(t.size(), 0.0);
  const double n = static_cast<double>(ensemble.size());
  for (std::size_t k = 0; k < t.size(); ++k) {
    double mean = 0.0;
    for (const auto& r : ensemble) mean += r.mean_p[k];
    mean /= n;
    double var = 0.0;
    for (const auto& r : ensemble) var += (r.mean_p[k] - mean) * (r.mean_p[k] - mean);
    fit.variance[k] = var / (n - 1.0);
  }
  const double t0 = t.front();
  double stt = 0.0, stv = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    stt += (t[k] - t0) * (t[k] - t0);
    stv += (t[k] - t0) * fit.variance[k];
  }
  const double slope = stt > 0.0 ? stv / stt : 0.0;
  fit.sigma_p = std::sqrt(std::max(slope, 0.0));
  double mv = 0.0;
  for (double v : fit.variance) mv += v;
  mv /= static_cast<double>(t.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const double e = fit.variance[k] - slope * (t[k] - t0);
    ss_res += e * e;
    ss_tot += (fit.variance[k] - mv) * (fit.variance[k] - mv);
  }
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  return fit;
}

LocalizationFit localization_fit(const TrajectoryRecord& record, const LocalizationParams& params) {
  params.validate();
  if (!(params.lambda_loc > 0.0)) throw Error("localization_fit: needs a positive localization rate");
  const double vx = attractor_var_x(params);
  const double vp = attractor_var_p(params);
  std::vector<double> t, logr;
  for (std::size_t k = 0; k < record.size(); ++k) {
    if (k > 0 && record.jumped[k]) break;
    const double dx = (record.var_x[k] - vx) / vx;
    const double dp = (record.var_p[k] - vp) / vp;
    const double r = std::sqrt(dx * dx + dp * dp);
    // Stop at the numerical floor; the residual there is roundoff, not relaxation.
    if (r < 1e-9) break;
    t.push_back(record.t[k]);
    logr.push_back(std::log(r));
  }
  if (t.size() < 3) throw Error("localization_fit: jump-free window has fewer than three usable samples");
  LineFit f = fit_line(t, logr);
  if (!(f.slope < 0.0)) throw Error("localization_fit: residual does not decay over the jump-free window");
  LocalizationFit out;
  out.t_loc_measured = -1.0 / f.slope;
  out.r_squared = f.r_squared;
  out.samples = t.size();
  return out;
}

}  // namespace decolab
