#include "decolab/localization.hpp"

#include <cmath>

#include "doctest.h"

using namespace decolab;

namespace {

// Stationary Gaussian exp(-a x^2 / 2) of p^2/2M + c x^2 with complex c: a^2 = 2 M c.
double gaussian_var_x(cplx a) { return 1.0 / (2.0 * a.real()); }
double gaussian_var_p(cplx a) { return 1.0 / (2.0 * (1.0 / a).real()); }
cplx eigen_width(double mass, cplx c) {
  cplx a = std::sqrt(2.0 * mass * c);
  return a.real() > 0.0 ? a : -a;
}

LocalizationParams make(double mass, double lambda, double dt) {
  LocalizationParams p;
  p.mass = mass;
  p.lambda_loc = lambda;
  p.dt = dt;
  return p;
}

}  // namespace

TEST_CASE("gaussian moments") {
  const Grid1D g = Grid1D::centered(512, 0.05);
  WaveFunction w = WaveFunction::gaussian(g, 1.5, 0.8, -2.0);
  CHECK(w.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(w.mean_x() == doctest::Approx(1.5).epsilon(1e-10));
  CHECK(w.var_x() == doctest::Approx(0.64).epsilon(1e-10));
  CHECK(w.mean_p() == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(w.var_p() == doctest::Approx(1.0 / (4.0 * 0.64)).epsilon(1e-8));
}

TEST_CASE("free spreading without localization follows the Gaussian law") {
  const Grid1D g = Grid1D::centered(1024, 0.05);
  const double sigma = 0.7, p0 = 1.0, t = 2.0;
  LocalizationParams p = make(2.0, 0.0, 1e-3);
  WaveFunction w = WaveFunction::gaussian(g, -3.0, sigma, p0);
  RngStream rng(1, 0);
  EvolveOptions eo;
  eo.recenter = false;
  TrajectoryResult r = evolve_trajectory(w, p, t, rng, eo);
  const double vp = 1.0 / (4.0 * sigma * sigma);
  CHECK(r.final_state.mean_x() == doctest::Approx(-3.0 + p0 * t / p.mass).epsilon(1e-8));
  CHECK(r.final_state.var_x() == doctest::Approx(sigma * sigma + vp * t * t / (p.mass * p.mass)).epsilon(1e-8));
  CHECK(r.final_state.var_p() == doctest::Approx(vp).epsilon(1e-8));
  CHECK(r.record.jump_count() == 0);
}

TEST_CASE("harmonic oscillation of a displaced ground state") {
  const Grid1D g = Grid1D::centered(256, 0.05);
  LocalizationParams p = make(1.0, 0.0, 1e-3);
  p.potential = PotentialSpec::harmonic(1.5);
  const double sigma = std::sqrt(1.0 / (2.0 * p.mass * 1.5));
  WaveFunction w = WaveFunction::gaussian(g, 1.0, sigma);
  RngStream rng(1, 0);
  EvolveOptions eo;
  eo.recenter = false;
  TrajectoryResult r = evolve_trajectory(w, p, 1.0, rng, eo);
  CHECK(r.final_state.mean_x() == doctest::Approx(std::cos(1.5)).epsilon(1e-5));
  CHECK(r.final_state.mean_p() == doctest::Approx(-1.5 * std::sin(1.5)).epsilon(1e-5));
  CHECK(r.final_state.var_x() == doctest::Approx(sigma * sigma).epsilon(1e-5));
}

TEST_CASE("sampled potential reproduces the harmonic one") {
  const Grid1D g = Grid1D::centered(256, 0.05);
  std::vector<double> v(g.n_points);
  for (std::size_t j = 0; j < g.n_points; ++j) v[j] = 0.5 * 4.0 * g.x(j) * g.x(j);
  LocalizationParams a = make(1.0, 0.0, 1e-3), b = a;
  a.potential = PotentialSpec::harmonic(2.0);
  b.potential = PotentialSpec::sampled(v, g);
  WaveFunction w = WaveFunction::gaussian(g, 0.5, 0.4);
  RngStream r1(1, 0), r2(1, 0);
  EvolveOptions eo;
  eo.recenter = false;
  auto ra = evolve_trajectory(w, a, 0.5, r1, eo);
  auto rb = evolve_trajectory(w, b, 0.5, r2, eo);
  CHECK(std::abs(ra.final_state.overlap(rb.final_state)) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("jump rate and the jump map on a Gaussian") {
  const Grid1D g = Grid1D::centered(512, 0.02);
  LocalizationParams p = make(1.0, 3.0, 1e-3);
  WaveFunction w = WaveFunction::gaussian(g, 0.4, 0.5);
  CHECK(jump_rate(w, p) == doctest::Approx(2.0 * 3.0 * 0.25).epsilon(1e-10));
  WaveFunction j = apply_jump(w);
  CHECK(j.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(j.mean_x() == doctest::Approx(0.4).epsilon(1e-10));
  // <(x-c)^4> / <(x-c)^2> = 3 sigma^2 for a Gaussian.
  CHECK(j.var_x() == doctest::Approx(3.0 * 0.25).epsilon(1e-9));
}

TEST_CASE("jump on a point-localized state is an error") {
  const Grid1D g = Grid1D::centered(64, 0.1);
  ComplexVector a = ComplexVector::Zero(64);
  a[10] = 1.0;
  CHECK_THROWS_AS(apply_jump(WaveFunction(g, a)), Error);
}

TEST_CASE("effective evolution approaches the closed-form attractor") {
  const Grid1D g = Grid1D::centered(512, 0.025);
  LocalizationParams p = make(1.0, 10.0, 2e-4);
  const cplx a = eigen_width(p.mass, cplx(0.0, -p.lambda_loc));
  WaveFunction w = WaveFunction::gaussian(g, 0.0, 0.6);
  RngStream rng(2, 0);
  EvolveOptions eo;
  eo.allow_jumps = false;
  TrajectoryResult r = evolve_trajectory(w, p, 12.0 * p.t_loc(), rng, eo);
  CHECK(r.final_state.var_x() == doctest::Approx(gaussian_var_x(a)).epsilon(1e-4));
  CHECK(r.final_state.var_p() == doctest::Approx(gaussian_var_p(a)).epsilon(1e-4));
  CHECK(attractor_var_x(p) == doctest::Approx(gaussian_var_x(a)).epsilon(1e-12));
  CHECK(attractor_var_p(p) == doctest::Approx(gaussian_var_p(a)).epsilon(1e-12));
  CHECK(gaussian_var_x(a) == doctest::Approx(0.5 / std::sqrt(10.0)).epsilon(1e-12));
  WaveFunction ps = pointer_state(p, g);
  CHECK(std::abs(ps.overlap(r.final_state)) == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("attractor with a potential") {
  LocalizationParams p = make(2.0, 3.0, 1e-3);
  p.potential = PotentialSpec::harmonic(1.5);
  cplx a = eigen_width(p.mass, cplx(0.5 * p.mass * 1.5 * 1.5, -p.lambda_loc));
  CHECK(attractor_var_x(p) == doctest::Approx(gaussian_var_x(a)).epsilon(1e-12));
  p.potential = PotentialSpec::inverted(0.7);
  a = eigen_width(p.mass, cplx(-0.5 * p.mass * 0.7 * 0.7, -p.lambda_loc));
  CHECK(attractor_var_x(p) == doctest::Approx(gaussian_var_x(a)).epsilon(1e-12));
  CHECK(attractor_var_p(p) == doctest::Approx(gaussian_var_p(a)).epsilon(1e-12));
}

TEST_CASE("trajectories are reproducible from the stream") {
  const Grid1D g = Grid1D::centered(256, 0.05);
  LocalizationParams p = make(1.0, 10.0, 5e-4);
  WaveFunction w = WaveFunction::gaussian(g, 0.0, 0.5);
  RngStream a(11, 3), b(11, 3), c(11, 4);
  auto ra = evolve_trajectory(w, p, 2.0, a);
  auto rb = evolve_trajectory(w, p, 2.0, b);
  auto rc = evolve_trajectory(w, p, 2.0, c);
  CHECK(ra.record.mean_x == rb.record.mean_x);
  CHECK(ra.record.jumped == rb.record.jumped);
  CHECK(ra.record.jumped != rc.record.jumped);
  CHECK(ra.record.jump_count() > 0);
  CHECK(ra.final_state.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ra.record.t.front() == 0.0);
  CHECK(ra.record.t.back() == doctest::Approx(2.0));
}

TEST_CASE("recentering follows a moving packet without changing its physics") {
  const Grid1D g = Grid1D::centered(512, 0.05);  // length 25.6
  LocalizationParams p = make(1.0, 0.0, 1e-3);
  WaveFunction w = WaveFunction::gaussian(g, 0.0, 1.5, 4.0);
  RngStream rng(1, 0);
  TrajectoryResult r = evolve_trajectory(w, p, 5.0, rng);
  CHECK(r.final_state.mean_x() == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(r.final_state.mean_p() == doctest::Approx(4.0).epsilon(1e-8));
  CHECK(r.record.mean_x.back() == doctest::Approx(20.0).epsilon(1e-6));
  CHECK(r.final_state.var_x() == doctest::Approx(2.25 + 25.0 / 9.0).epsilon(1e-6));
  CHECK(r.final_state.grid().x0 > g.x0 + 10.0);
}

TEST_CASE("stability bound and parameter validation") {
  const Grid1D g = Grid1D::centered(256, 0.05);
  LocalizationParams p = make(1.0, 100.0, 0.01);
  WaveFunction w = WaveFunction::gaussian(g, 0.0, 1.0);
  RngStream rng(1, 0);
  CHECK_THROWS_AS(evolve_trajectory(w, p, 1.0, rng), Error);
  LocalizationParams bad = make(-1.0, 1.0, 1e-3);
  CHECK_THROWS_AS(bad.validate(), Error);
  LocalizationParams zero_dt = make(1.0, 1.0, 0.0);
  CHECK_THROWS_AS(zero_dt.validate(), Error);
}

TEST_CASE("adaptive halving") {
  const Grid1D g = Grid1D::centered(256, 0.05);
  EvolveOptions adaptive;
  adaptive.adaptive = true;
  // Below the bound nothing is halved: same draws, same path.
  LocalizationParams calm = make(1.0, 1.0, 1e-3);
  WaveFunction w = WaveFunction::gaussian(g, 0.0, 0.7);
  RngStream a(5, 0), b(5, 0);
  auto plain = evolve_trajectory(w, calm, 1.0, a);
  auto halved = evolve_trajectory(w, calm, 1.0, b, adaptive);
  CHECK(plain.record.var_x == halved.record.var_x);
  CHECK(plain.record.jumped == halved.record.jumped);
  // Far above the bound the run completes and still relaxes to the attractor.
  LocalizationParams stiff = make(1.0, 100.0, 0.01);
  WaveFunction wide = WaveFunction::gaussian(g, 0.0, 1.0);
  adaptive.allow_jumps = false;
  RngStream c(5, 1);
  auto r = evolve_trajectory(wide, stiff, 2.0, c, adaptive);
  CHECK(r.record.t.back() == doctest::Approx(2.0));
  CHECK(r.final_state.var_x() == doctest::Approx(attractor_var_x(stiff)).epsilon(1e-3));
  adaptive.allow_jumps = true;
  RngStream d(5, 2);
  CHECK_NOTHROW(evolve_trajectory(wide, stiff, 0.5, d, adaptive));
}

TEST_CASE("chaos probe settles near the inverted-oscillator attractor") {
  const Grid1D g = Grid1D::centered(256, 0.05);
  LocalizationParams p = make(1.0, 1.0, 0.005);
  p.potential = PotentialSpec::inverted(std::sqrt(0.1 * 2.0));
  ChaosProbeResult r = chaos_probe(p, g);
  const cplx a = eigen_width(p.mass, cplx(-0.5 * 0.2, -1.0));
  CHECK(r.terminal_spread == doctest::Approx(std::sqrt(gaussian_var_x(a))).epsilon(0.02));
  CHECK(r.localized);
  LocalizationParams harm = p;
  harm.potential = PotentialSpec::harmonic(1.0);
  CHECK_THROWS_AS(chaos_probe(harm, g), Error);
}
