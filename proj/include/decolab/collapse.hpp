#pragma once

#include "decolab/numerics.hpp"

#include <cstdint>
#include <vector>

namespace decolab {

// Superposition of well-separated pointer packets: weights w_i at centres x_i.
struct WeightState {
  std::vector<double> w;
  std::vector<double> x;
  double lambda_loc = 1.0;

  void validate() const;
  double mean_x() const;
  double var_x() const;
  // 2 Lambda L^2 for two packets.
  double drift_scale() const;
  double jump_rate() const { return 2.0 * lambda_loc * var_x(); }

  static WeightState two_packets(double w1, double separation, double lambda_loc);
};

// dw1/dt = 2 Lambda L^2 w1 (1 - w1)(2 w1 - 1), one RK4 step; w2 = 1 - w1.
WeightState weight_drift_step(const WeightState& s, double dt);
// Closed-form solution of the same equation after delta_t; lam_l2 = Lambda L^2.
double analytic_weights(double w0, double delta_t, double lam_l2);
// w_i -> w_i (x_i - <x>)^2 / sum_j w_j (x_j - <x>)^2
WeightState collapse_jump(const WeightState& s);

// Mean number of jumps before one packet wins, 1/2 log(1/|2 w0 - 1|).
double mean_jump_count_formula(double w0);
// The same quantity by integrating r dt along the jump-free drift path.
double mean_jump_count_quadrature(double w0, double threshold = 1.0 - 1e-6);

struct CollapsePath {
  std::vector<double> t;
  std::vector<double> w1;
  std::vector<std::uint8_t> jumped;
};

struct CollapseRun {
  std::size_t winner = 0;  // 0-based packet index
  std::size_t n_jumps = 0;
  double t_final = 0.0;
  CollapsePath path;
};

struct CollapseOptions {
  double threshold = 1.0 - 1e-6;
  bool record_path = false;
  std::vector<double> checkpoints;  // times at which w1 is sampled (absorbing after the stop)
};

CollapseRun simulate_collapse(const WeightState& s0, RngStream& rng, const CollapseOptions& opts,
                              std::vector<double>* checkpoint_w1 = nullptr);

struct CollapseEnsemble {
  std::size_t n_runs = 0;
  std::vector<std::size_t> winner_counts;
  double mean_jumps = 0.0;
  double jump_time_correlation = 0.0;
  double t_final_variance = 0.0;
  std::vector<double> checkpoints;
  std::vector<double> mean_w1;
  std::vector<double> sem_w1;  // standard error of the ensemble mean
  std::vector<std::size_t> jumps;
  std::vector<double> t_final;
};

CollapseEnsemble collapse_ensemble(const WeightState& s0, std::size_t n_runs, std::uint64_t seed,
                                   const std::vector<double>& checkpoints, std::size_t threads = 0);

double pearson(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace decolab
