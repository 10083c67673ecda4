#include "decolab/analysis.hpp"

#include <cmath>

#include "doctest.h"

using namespace decolab;

namespace {

LocalizationParams desk(double lambda) {
  LocalizationParams p;
  p.mass = 1.0;
  p.lambda_loc = lambda;
  p.dt = 0.01;
  return p;
}

}  // namespace

TEST_CASE("line fit") {
  LineFit f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.r_squared == doctest::Approx(1.0));
  CHECK_THROWS_AS(fit_line({1}, {1}), Error);
  CHECK_THROWS_AS(fit_line({2, 2}, {1, 3}), Error);
}

TEST_CASE("pointer scales follow the dimensional formulas") {
  ScaleInput s{2.0, 3.0, 0.5};
  PointerScales p = pointer_scales(s);
  CHECK(p.dx == doctest::Approx(std::pow(0.5 / 6.0, 0.25)));
  CHECK(p.dp == doctest::Approx(std::pow(0.125 * 6.0, 0.25)));
  CHECK(p.t_loc == doctest::Approx(std::sqrt(2.0 / 1.5)));
  CHECK(p.dx * p.dp == doctest::Approx(0.5));
  CHECK_THROWS_AS(pointer_scales(ScaleInput{0.0, 1.0}), Error);
  CHECK_THROWS_AS(pointer_scales(ScaleInput{1.0, -1.0}), Error);
}

TEST_CASE("dust grain and Hyperion rows") {
  PointerScales air = pointer_scales({1e-3, 1e41});
  CHECK(decades_apart(air.dx, 1e-18) <= 1.0);
  CHECK(decades_apart(air.dp, 1e-16) <= 1.0);
  CHECK(decades_apart(air.t_loc, 1e-5) <= 1.0);
  PointerScales cmb = pointer_scales({1e-3, 1e10});
  CHECK(decades_apart(cmb.dx, 1e-10) <= 1.0);
  CHECK(decades_apart(cmb.dp, 1e-24) <= 1.0);
  CHECK(decades_apart(cmb.t_loc, 1e10) <= 1.0);
  PointerScales hyp = pointer_scales({1e29, 1e51});
  CHECK(decades_apart(hyp.dx, 1e-29) <= 1.0);
  CHECK(decades_apart(hyp.dp, 1e-6) <= 1.0);
  CHECK(decades_apart(hyp.t_loc, 1e6) <= 1.0);
  for (const ScaleRow& row : reference_scale_rows()) {
    PointerScales s = pointer_scales(row.input);
    if (row.ref_dx) CHECK(decades_apart(s.dx, *row.ref_dx) <= 1.0);
    if (row.ref_dp) CHECK(decades_apart(s.dp, *row.ref_dp) <= 1.0);
    if (row.ref_t_loc) CHECK(decades_apart(s.t_loc, *row.ref_t_loc) <= 1.0);
    if (row.lyapunov && row.ref_ratio) CHECK(decades_apart(chaos_margin(row.input, *row.lyapunov).ratio, *row.ref_ratio) <= 1.0);
  }
  CHECK(reference_scale_rows().size() == 4);
  CHECK(decades_apart(1.0, 100.0) == doctest::Approx(2.0));
}

TEST_CASE("chaos margin") {
  ScaleInput s{1.0, 4.0, 1.0};
  const double t_loc = pointer_scales(s).t_loc;
  CHECK(chaos_margin(s, 0.0).ratio == 0.0);
  CHECK(chaos_margin(s, 0.0).localizes);
  CHECK_FALSE(chaos_margin(s, 10.0 / t_loc).localizes);
  CHECK(chaos_margin(s, 0.5 / t_loc).ratio == doctest::Approx(0.5));
  CHECK_THROWS_AS(chaos_margin(s, -1.0), Error);
}

TEST_CASE("localization fit recovers a synthetic time constant") {
  const LocalizationParams p = desk(10.0);
  const double vx = attractor_var_x(p), vp = attractor_var_p(p);
  TrajectoryRecord r;
  for (int k = 0; k <= 60; ++k) {
    const double t = 0.1 * k, e = 0.8 * std::exp(-t / 2.0);
    r.push(t, 0.0, 0.0, vx * (1.0 + 0.6 * e), vp * (1.0 - 0.8 * e), false);
  }
  LocalizationFit f = localization_fit(r, p);
  CHECK(f.t_loc_measured == doctest::Approx(2.0).epsilon(0.01));
  CHECK(f.r_squared > 0.999);
}

TEST_CASE("localization fit stops at the first jump") {
  const LocalizationParams p = desk(10.0);
  const double vx = attractor_var_x(p), vp = attractor_var_p(p);
  TrajectoryRecord r;
  for (int k = 0; k <= 40; ++k) {
    const double t = 0.1 * k;
    const double tau = k <= 10 ? 0.5 : 5.0;
    r.push(t, 0.0, 0.0, vx * (1.0 + std::exp(-t / tau)), vp, k == 11);
  }
  LocalizationFit f = localization_fit(r, p);
  CHECK(f.samples == 11);
  CHECK(f.t_loc_measured == doctest::Approx(0.5).epsilon(0.01));
  TrajectoryRecord early;
  early.push(0.0, 0.0, 0.0, 2.0 * vx, vp, false);
  early.push(0.1, 0.0, 0.0, 1.5 * vx, vp, true);
  CHECK_THROWS_AS(localization_fit(early, p), Error);
  TrajectoryRecord flat;
  for (int k = 0; k < 5; ++k) flat.push(0.1 * k, 0.0, 0.0, vx * (1.0 + 0.1 * k), vp, false);
  CHECK_THROWS_AS(localization_fit(flat, p), Error);
}

TEST_CASE("Langevin fit of a synthetic random walk") {
  const double sigma = 1.7, dt = 0.05;
  std::vector<TrajectoryRecord> ens(2000);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    RngStream rng(31, i);
    double p = 0.0;
    for (int k = 0; k <= 40; ++k) {
      ens[i].push(k * dt, 0.0, p, 1.0, 1.0, false);
      p += sigma * std::sqrt(dt) * rng.gaussian();
    }
  }
  LangevinFit f = langevin_fit(ens);
  CHECK(f.sigma_p == doctest::Approx(sigma).epsilon(0.1));
  CHECK(f.r_squared > 0.9);
  CHECK(f.t.size() == 41);
}

TEST_CASE("Langevin fit without kicks") {
  std::vector<TrajectoryRecord> ens(500);
  for (auto& r : ens)
    for (int k = 0; k < 10; ++k) r.push(0.1 * k, 0.0, 0.3, 1.0, 1.0, false);
  LangevinFit f = langevin_fit(ens);
  CHECK(f.sigma_p < 1e-12);
  CHECK_THROWS_AS(langevin_fit(std::vector<TrajectoryRecord>(ens.begin(), ens.begin() + 10)), Error);
  ens[3].t[2] += 0.01;
  CHECK_THROWS_AS(langevin_fit(ens), Error);
}
