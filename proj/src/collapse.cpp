#include "decolab/collapse.hpp"

#include "decolab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace decolab {

void WeightState::validate() const {
  if (w.size() < 2) throw Error("weight state needs at least two packets");
  if (w.size() != x.size()) throw Error("weight state: weights and positions differ in length");
  double sum = 0.0;
  for (double v : w) {
    if (!(v >= 0.0) || v > 1.0) throw Error("weight state: weights must lie in [0, 1]");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw Error("weight state: weights must sum to 1");
  if (!(lambda_loc >= 0.0)) throw Error("weight state: lambda_loc must be >= 0");
}

double WeightState::mean_x() const {
  double m = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) m += w[i] * x[i];
  return m;
}

double WeightState::var_x() const {
  const double m = mean_x();
  double v = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) v += w[i] * (x[i] - m) * (x[i] - m);
  return v;
}

double WeightState::drift_scale() const {
  if (w.size() != 2) throw Error("drift is only defined for two packets");
  const double l = x[0] - x[1];
  return 2.0 * lambda_loc * l * l;
}

WeightState WeightState::two_packets(double w1, double separation, double lambda_loc) {
  WeightState s;
  s.w = {w1, 1.0 - w1};
  s.x = {-0.5 * separation, 0.5 * separation};
  s.lambda_loc = lambda_loc;
  s.validate();
  return s;
}

WeightState weight_drift_step(const WeightState& s, double dt) {
  s.validate();
  const double k = s.drift_scale();
  auto f = [k](double w) { return k * w * (1.0 - w) * (2.0 * w - 1.0); };
  const double w = s.w[0];
  const double k1 = f(w);
  const double k2 = f(w + 0.5 * dt * k1);
  const double k3 = f(w + 0.5 * dt * k2);
  const double k4 = f(w + dt * k3);
  WeightState out = s;
  out.w[0] = std::clamp(w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4), 0.0, 1.0);
  out.w[1] = 1.0 - out.w[0];
  return out;
}

double analytic_weights(double w0, double delta_t, double lam_l2) {
  if (!(w0 >= 0.0 && w0 <= 1.0)) throw Error("analytic_weights: w0 must lie in [0, 1]");
  if (w0 == 0.0 || w0 == 1.0) return w0;
  const double d = 1.0 - 2.0 * w0;
  const double y = d * d / (w0 * (1.0 - w0)) * std::exp(2.0 * lam_l2 * delta_t);
  const double sign = (2.0 * w0 - 1.0) > 0.0 ? 1.0 : ((2.0 * w0 - 1.0) < 0.0 ? -1.0 : 0.0);
  if (std::isinf(y)) return 0.5 * (1.0 + sign);
  return 0.5 * (1.0 + sign * std::sqrt(y / (4.0 + y)));
}

WeightState collapse_jump(const WeightState& s) {
  s.validate();
  const double m = s.mean_x();
  double denom = 0.0;
  for (std::size_t i = 0; i < s.w.size(); ++i) denom += s.w[i] * (s.x[i] - m) * (s.x[i] - m);
  if (!(denom > 0.0)) throw Error("collapse_jump: packets coincide with the mean; no jump possible");
  WeightState out = s;
  double sum = 0.0;
  for (std::size_t i = 0; i < s.w.size(); ++i) {
    out.w[i] = s.w[i] * (s.x[i] - m) * (s.x[i] - m) / denom;
    sum += out.w[i];
  }
  for (double& v : out.w) v /= sum;
  if (out.w.size() == 2) out.w[1] = 1.0 - out.w[0];
  return out;
}

double mean_jump_count_formula(double w0) {
  const double d = std::abs(2.0 * w0 - 1.0);
  if (!(d > 0.0)) throw Error("mean jump count diverges at w0 = 1/2");
  return 0.5 * std::log(1.0 / d);
}

double mean_jump_count_quadrature(double w0, double threshold) {
  // Along the drift path r dt = 2 Lambda L^2 w(1-w) dt; in the rescaled time s = 2 Lambda L^2 t
  // integrate w(1-w) ds using the closed-form path, Simpson on a fine grid.
  if (w0 <= 0.0 || w0 >= 1.0 || w0 == 0.5) throw Error("quadrature needs w0 in (0,1), w0 != 1/2");
  double s_end = 1.0;
  auto done = [&](double s) {
    double w = analytic_weights(w0, s, 0.5);
    return std::max(w, 1.0 - w) > threshold;
  };
  while (!done(s_end)) s_end *= 2.0;
  double lo = 0.0, hi = s_end;
  for (int i = 0; i < 200; ++i) {
    double mid = 0.5 * (lo + hi);
    (done(mid) ? hi : lo) = mid;
  }
  const int n = 200000;
  const double h = hi / n;
  double acc = 0.0;
  for (int i = 0; i <= n; ++i) {
    double w = analytic_weights(w0, i * h, 0.5);
    double v = w * (1.0 - w);
    acc += v * ((i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0));
  }
  return acc * h / 3.0;
}

CollapseRun simulate_collapse(const WeightState& s0, RngStream& rng, const CollapseOptions& opts,
                              std::vector<double>* checkpoint_w1) {
  s0.validate();
  if (s0.w.size() != 2) throw Error("simulate_collapse: two packets required");
  const double scale = s0.drift_scale();
  if (!(scale > 0.0)) throw Error("simulate_collapse: need Lambda > 0 and distinct packet positions");
  // r peaks at scale / 4, so this keeps r dt <= 0.0125 throughout.
  const double dt = 0.05 / scale;
  const double gap = std::abs(s0.w[0] - s0.w[1]);
  if (gap == 0.0) throw Error("simulate_collapse: equal weights are a fixed point of the two-packet dynamics");
  // Escape from near-equal weights takes about 2 log(1/gap) / scale.
  const double guard = (50.0 + 4.0 * std::log(1.0 / gap)) / scale;
  CollapseRun run;
  WeightState s = s0;
  double t = 0.0;
  std::size_t next_cp = 0;
  auto sample = [&](double now) {
    if (!checkpoint_w1) return;
    while (next_cp < opts.checkpoints.size() && opts.checkpoints[next_cp] <= now + 1e-12) {
      (*checkpoint_w1)[next_cp] = s.w[0];
      ++next_cp;
    }
  };
  if (checkpoint_w1) checkpoint_w1->assign(opts.checkpoints.size(), 0.0);
  sample(0.0);
  if (opts.record_path) {
    run.path.t.push_back(0.0);
    run.path.w1.push_back(s.w[0]);
    run.path.jumped.push_back(0);
  }
  while (std::max(s.w[0], s.w[1]) <= opts.threshold) {
    if (t > guard) {
      std::ostringstream os;
      os << "simulate_collapse: no winner by t = " << guard;
      throw Error(os.str());
    }
    const double r = s.jump_rate();
    const double u = rng.uniform();
    s = weight_drift_step(s, dt);
    const bool jump = u < r * dt;
    if (jump) {
      s = collapse_jump(s);
      ++run.n_jumps;
    }
    t += dt;
    sample(t);
    if (opts.record_path) {
      run.path.t.push_back(t);
      run.path.w1.push_back(s.w[0]);
      run.path.jumped.push_back(jump ? 1 : 0);
    }
  }
  if (checkpoint_w1)
    for (; next_cp < opts.checkpoints.size(); ++next_cp) (*checkpoint_w1)[next_cp] = s.w[0];
  run.winner = s.w[0] > s.w[1] ? 0 : 1;
  run.t_final = t;
  return run;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2) throw Error("pearson: need two equal-length samples");
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  // A sample with no spread is uncorrelated with anything.
  if (saa <= 1e-24 * std::max(1.0, ma * ma) * n || sbb <= 1e-24 * std::max(1.0, mb * mb) * n) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

CollapseEnsemble collapse_ensemble(const WeightState& s0, std::size_t n_runs, std::uint64_t seed,
                                   const std::vector<double>& checkpoints, std::size_t threads) {
  if (n_runs < 2) throw Error("collapse_ensemble: need at least two runs");
  CollapseOptions opts;
  opts.checkpoints = checkpoints;
  std::vector<CollapseRun> runs(n_runs);
  std::vector<std::vector<double>> cps(n_runs);
  parallel_for(
      n_runs,
      [&](std::size_t i) {
        RngStream rng(seed, i);
        runs[i] = simulate_collapse(s0, rng, opts, &cps[i]);
      },
      threads);
  CollapseEnsemble e;
  e.n_runs = n_runs;
  e.winner_counts.assign(s0.w.size(), 0);
  e.checkpoints = checkpoints;
  e.mean_w1.assign(checkpoints.size(), 0.0);
  e.sem_w1.assign(checkpoints.size(), 0.0);
  std::vector<double> jumps_d(n_runs);
  double total = 0.0;
  for (std::size_t i = 0; i < n_runs; ++i) {
    ++e.winner_counts[runs[i].winner];
    e.jumps.push_back(runs[i].n_jumps);
    e.t_final.push_back(runs[i].t_final);
    jumps_d[i] = static_cast<double>(runs[i].n_jumps);
    total += jumps_d[i];
    for (std::size_t c = 0; c < checkpoints.size(); ++c) e.mean_w1[c] += cps[i][c];
  }
  const double n = static_cast<double>(n_runs);
  e.mean_jumps = total / n;
  for (std::size_t c = 0; c < checkpoints.size(); ++c) {
    e.mean_w1[c] /= n;
    double ss = 0.0;
    for (std::size_t i = 0; i < n_runs; ++i) ss += (cps[i][c] - e.mean_w1[c]) * (cps[i][c] - e.mean_w1[c]);
    e.sem_w1[c] = std::sqrt(ss / (n - 1.0) / n);
  }
  const double mt = std::accumulate(e.t_final.begin(), e.t_final.end(), 0.0) / n;
  double vt = 0.0;
  for (double v : e.t_final) vt += (v - mt) * (v - mt);
  e.t_final_variance = vt / (n - 1.0);
  e.jump_time_correlation = pearson(jumps_d, e.t_final);
  return e;
}

}  // namespace decolab
