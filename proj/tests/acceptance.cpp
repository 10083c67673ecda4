// Acceptance suite: one PASS/FAIL line per criterion. `acceptance N` runs criterion N only.
#include "decolab/analysis.hpp"
#include "decolab/collapse.hpp"
#include "decolab/commands.hpp"
#include "decolab/frames.hpp"
#include "decolab/master.hpp"
#include "decolab/scenarios.hpp"
#include "decolab/unravel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace decolab;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[failed: " << what << "] ";
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double lookup(const std::map<std::vector<int>, double>& t, const std::vector<int>& key) {
  auto it = t.find(key);
  return it == t.end() ? 0.0 : it->second;
}

// ---------------------------------------------------------------- collapse

// Initial weight of packet 2 is w0; returns the fraction of runs packet 2 wins.
double winner2_frequency(double w0, std::size_t runs, std::uint64_t seed) {
  CollapseEnsemble e = collapse_ensemble(WeightState::two_packets(1.0 - w0, 1.0, 1.0), runs, seed, {});
  return double(e.winner_counts[1]) / double(runs);
}

void born_rule(Verdict& v) {
  const auto t0 = Clock::now();
  const std::size_t n = 10000;
  const double f = winner2_frequency(0.7, n, 101);
  v.detail << "w0=0.7 f=" << f << " ";
  v.require(std::abs(f - 0.7) <= 0.015, "w0=0.7 outside 0.7 +/- 0.015");
  // Equal weights are a fixed point of the drift; the run starts just off it.
  for (double w0 : {0.1, 0.3, 0.5 + 1e-6, 0.9}) {
    const double fw = winner2_frequency(w0, n, 102 + std::uint64_t(w0 * 1000));
    const double sigma = std::sqrt(w0 * (1.0 - w0) / double(n));
    v.detail << "w0=" << w0 << " f=" << fw << " ";
    v.require(std::abs(fw - w0) <= 3.0 * sigma, "w0=" + std::to_string(w0) + " beyond 3 sigma");
  }
  const double secs = seconds_since(t0);
  v.detail << "runtime " << secs << "s";
  v.require(secs <= 60.0, "runtime above 1 min");
}

void mean_jump_count(Verdict& v) {
  const double formula = mean_jump_count_formula(0.75);
  const double quadrature = mean_jump_count_quadrature(0.75);
  CollapseEnsemble e = collapse_ensemble(WeightState::two_packets(0.75, 1.0, 1.0), 10000, 201, {});
  v.detail << "formula " << formula << " quadrature " << quadrature << " ensemble " << e.mean_jumps;
  v.require(std::abs(formula - 0.5 * std::log(2.0)) < 1e-12, "formula");
  v.require(std::abs(quadrature - formula) < 1e-4, "quadrature disagrees with formula");
  v.require(std::abs(e.mean_jumps - formula) <= 0.02, "ensemble mean outside +/- 0.02");
}

void martingale(Verdict& v) {
  const WeightState s0 = WeightState::two_packets(0.7, 1.0, 1.0);
  std::vector<double> cps;
  for (int c = 0; c < 10; ++c) cps.push_back(5.0 / s0.drift_scale() * c / 9.0);
  CollapseEnsemble e = collapse_ensemble(s0, 10000, 301, cps);
  double worst = 0.0;
  for (std::size_t c = 0; c < cps.size(); ++c) {
    const double z = e.sem_w1[c] > 1e-9 ? std::abs(e.mean_w1[c] - 0.7) / e.sem_w1[c] : 0.0;
    worst = std::max(worst, z);
    v.require(std::abs(e.mean_w1[c] - 0.7) <= 3.0 * e.sem_w1[c] + 1e-12, "checkpoint " + std::to_string(c));
  }
  v.detail << "10 checkpoints, largest deviation " << worst << " sigma";
}

// ---------------------------------------------------------------- unravelling

void unravel_master(Verdict& v) {
  const std::size_t n = 5000;
  const double bound = 5.0 / std::sqrt(double(n));
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto t0 = Clock::now();
    RngStream rng(seed, 0);
    LindbladModel m = LindbladModel::random(3, rng);
    ComplexVector psi = random_state(3, rng);
    UnravelEnsemble e = unravel_ensemble(m, psi, 1.0, 2e-3, n, 1000 + seed);
    ComplexMatrix rho = integrate_lindblad(m, psi * psi.adjoint(), 1.0, 1e-3);
    const double td = trace_distance(e.mean_rho, rho);
    const double secs = seconds_since(t0);
    v.detail << "seed " << seed << " D=" << td << " (" << secs << "s) ";
    v.require(td <= bound, "seed " + std::to_string(seed) + " trace distance");
    v.require(secs <= 120.0, "seed " + std::to_string(seed) + " runtime");
  }
  v.detail << "bound " << bound;
}

void defect_order(Verdict& v) {
  double worst = 1e300;
  for (std::uint64_t k = 0; k < 10; ++k) {
    RngStream rng(400 + k, 0);
    const std::size_t dim = 2 + k % 4;
    LindbladModel m = LindbladModel::random(dim, rng);
    ComplexVector psi = random_state(dim, rng);
    const double ratio = verify_unravelling(m, psi, 1e-3) / verify_unravelling(m, psi, 5e-4);
    worst = std::min(worst, ratio);
    v.require(ratio >= 3.5, "model " + std::to_string(k));
  }
  v.detail << "10 models, smallest ratio " << worst;
}

void jump_invariants(Verdict& v) {
  double worst = 0.0;
  for (std::uint64_t k = 0; k < 100; ++k) {
    RngStream rng(500 + k, 0);
    const std::size_t dim = 2 + k % 7;
    LindbladModel m = LindbladModel::random(dim, rng);
    ComplexVector psi = random_state(dim, rng);
    JumpDecomposition d = adapt_and_decompose(m, psi);
    for (std::size_t i = 0; i < d.jump_ops.size(); ++i) {
      worst = std::max(worst, std::abs(psi.dot(d.jump_ops[i] * psi)));
      for (std::size_t j = 0; j < d.jump_ops.size(); ++j) {
        const cplx g = (d.jump_ops[i] * psi).dot(d.jump_ops[j] * psi);
        worst = std::max(worst, std::abs(g - cplx(i == j ? d.rates[i] : 0.0)));
      }
    }
  }
  v.detail << "100 pairs, dims 2-8, largest violation " << worst;
  v.require(worst <= 1e-9, "violation above 1e-9");
}

// ---------------------------------------------------------------- localization

LocalizationParams desk(double lambda, double dt) {
  LocalizationParams p;
  p.mass = 1.0;
  p.lambda_loc = lambda;
  p.dt = dt;
  return p;
}

void attractor(Verdict& v) {
  const auto t0 = Clock::now();
  const Grid1D g = Grid1D::centered(512, 0.025);
  const double tl = desk(10.0, 1.0).t_loc();

  // Jump-free approach from a wide packet.
  const LocalizationParams pc = desk(10.0, 1e-3);
  RngStream r0(701, 0);
  EvolveOptions quiet;
  quiet.allow_jumps = false;
  WaveFunction w = evolve_trajectory(WaveFunction::gaussian(g, 0.0, 1.0), pc, 10.0 * tl, r0, quiet).final_state;
  const double vx = attractor_var_x(pc);
  const double conv = std::abs(w.var_x() - vx) / vx;
  v.detail << "var_x at 10 T_loc off by " << conv * 100.0 << "% ";
  v.require(conv <= 0.05, "no convergence within 5%");

  // Fitted time constant over the first jump-free window of a run with jumps.
  const LocalizationParams pf = desk(10.0, 3e-4);
  RngStream r1(7, 0);
  EvolveOptions rec;
  rec.record_every = 20;
  TrajectoryResult run = evolve_trajectory(WaveFunction::gaussian(g, 0.0, 0.5), pf, 5.0, r1, rec);
  LocalizationFit fit = localization_fit(run.record, pf);
  const double ratio = fit.t_loc_measured / tl;
  v.detail << "fitted T/T_loc " << ratio << " ";
  v.require(ratio >= 0.5 && ratio <= 2.0, "fitted time constant beyond factor 2");

  // Long jump-free gaps: variances back at the pointer values before the next jump.
  // Jumps roughly triple var_x and the rate follows var_x, so bursts need a small step and a wide grid.
  const LocalizationParams pg = desk(10.0, 5e-4);
  RngStream r2(703, 0);
  TrajectoryResult lng = evolve_trajectory(pointer_state(pg, g), pg, 150.0, r2, EvolveOptions{});
  const TrajectoryRecord& tr = lng.record;
  const double vp = attractor_var_p(pg);
  std::size_t gaps = 0, returned = 0;
  std::size_t start = 0;
  for (std::size_t k = 1; k <= tr.size(); ++k) {
    const bool end = k == tr.size() || tr.jumped[k];
    if (!end) continue;
    const std::size_t last = k - 1;
    if (tr.t[last] - tr.t[start] >= 3.0 * tl) {
      ++gaps;
      const double ex = std::abs(tr.var_x[last] - vx) / vx, ep = std::abs(tr.var_p[last] - vp) / vp;
      if (ex <= 0.05 && ep <= 0.05) ++returned;
    }
    start = k;
  }
  const double frac = gaps ? double(returned) / double(gaps) : 0.0;
  v.detail << "long gaps " << returned << "/" << gaps << " returned, " << tr.jump_count() << " jumps ";
  v.require(gaps >= 5, "too few long gaps to judge");
  v.require(frac >= 0.8, "fewer than 80% of long gaps return");
  const double secs = seconds_since(t0);
  v.detail << "runtime " << secs << "s";
  v.require(secs <= 60.0, "runtime above 1 min");
}

void decoherence_rate(Verdict& v) {
  const Grid1D g = Grid1D::centered(32, 0.25);
  LocalizationParams p = desk(0.7, 0.05);
  p.mass = 1e9;
  DensityMatrix rho = DensityMatrix::pure(WaveFunction::gaussian(g, 0.0, 1.5));
  const DensityMatrix rho0 = rho;
  const Eigen::Index i = 16;
  const std::vector<Eigen::Index> partners = {18, 20, 24};
  std::vector<double> ts;
  std::vector<std::vector<double>> logs(partners.size());
  for (int k = 0; k <= 10; ++k) {
    if (k > 0) rho = integrate_position(rho, p, 0.2);
    ts.push_back(0.2 * k);
    for (std::size_t s = 0; s < partners.size(); ++s)
      logs[s].push_back(std::log(std::abs(rho.m(i, partners[s]) / rho0.m(i, partners[s]))));
  }
  for (std::size_t s = 0; s < partners.size(); ++s) {
    const double d = g.x(std::size_t(partners[s])) - g.x(std::size_t(i));
    const double expected = p.lambda_loc * d * d;
    const double fitted = -fit_line(ts, logs[s]).slope;
    const double err = std::abs(fitted - expected) / expected;
    v.detail << "sep " << d << " rel err " << err << " ";
    v.require(err <= 0.02, "separation " + std::to_string(d));
  }
}

std::vector<TrajectoryRecord> free_ensemble(double lambda, std::size_t n, std::uint64_t seed) {
  const Grid1D g = Grid1D::centered(256, 0.05);
  const LocalizationParams p = desk(lambda, 5e-4);
  const WaveFunction start = pointer_state(p, g);
  std::vector<TrajectoryRecord> out(n);
  EvolveOptions o;
  o.record_every = 100;
  o.adaptive = true;
  for (std::size_t k = 0; k < n; ++k) {
    RngStream rng(seed, k);
    out[k] = evolve_trajectory(start, p, 2.0, rng, o).record;
  }
  return out;
}

void langevin(Verdict& v) {
  const auto t0 = Clock::now();
  LangevinFit a = langevin_fit(free_ensemble(10.0, 500, 901));
  LangevinFit b = langevin_fit(free_ensemble(20.0, 500, 902));
  const double ref = std::sqrt(10.0);
  const double doubling = (b.sigma_p * b.sigma_p) / (a.sigma_p * a.sigma_p);
  v.detail << "sigma_p " << a.sigma_p << " (hbar sqrt(Lambda) " << ref << ") R^2 " << a.r_squared
           << ", sigma_p^2 ratio on doubling " << doubling << " ";
  v.require(a.r_squared >= 0.9 && b.r_squared >= 0.9, "variance not linear in t");
  v.require(a.sigma_p >= ref / 3.0 && a.sigma_p <= 3.0 * ref, "sigma_p beyond factor 3");
  v.require(std::abs(doubling / 2.0 - 1.0) <= 0.3, "doubling beyond 30%");
  const double secs = seconds_since(t0);
  v.detail << "runtime " << secs << "s";
  v.require(secs <= 300.0, "runtime above 5 min");
}

void chaos(Verdict& v) {
  const Grid1D g = Grid1D::centered(256, 0.05);
  LocalizationParams p = desk(1.0, 0.005);
  const double scale = 2.0 * p.hbar * p.lambda_loc / p.mass;
  for (double f : {0.1, 0.5, 2.0, 10.0}) {
    p.potential = PotentialSpec::inverted(std::sqrt(f * scale));
    ChaosProbeResult r = chaos_probe(p, g);
    const bool expect = f < 1.0;
    v.detail << "x" << f << ": spread/ref " << r.terminal_spread / r.reference_spread << " "
             << (r.localized ? "localized" : "spreading") << "; ";
    if (r.localized == expect) continue;
    const bool boundary = f == 0.5 || f == 2.0;
    const double th = r.threshold;
    const bool near = r.terminal_spread >= th / 2.0 && r.terminal_spread <= 2.0 * th;
    v.require(boundary && near, "verdict at " + std::to_string(f) + "x");
  }
}

void scale_table(Verdict& v) {
  for (const ScaleRow& row : reference_scale_rows()) {
    PointerScales s = pointer_scales(row.input);
    auto within = [&](const char* what, const std::optional<double>& ref, double val) {
      if (!ref) return;
      const double dec = decades_apart(val, *ref);
      v.require(dec <= 1.0, row.name + " " + what);
    };
    within("dx", row.ref_dx, s.dx);
    within("dp", row.ref_dp, s.dp);
    within("t_loc", row.ref_t_loc, s.t_loc);
    v.detail << row.name << " dx " << s.dx << " dp " << s.dp << " T " << s.t_loc;
    if (row.lyapunov) {
      const double ratio = chaos_margin(row.input, *row.lyapunov).ratio;
      within("lambda T_loc", row.ref_ratio, ratio);
      v.require(decades_apart(ratio, 0.1) <= 1.0 && chaos_margin(row.input, *row.lyapunov).localizes,
                "Hyperion lambda T_loc");
      v.detail << " lambda*T " << ratio;
    }
    v.detail << "; ";
  }
}

// ---------------------------------------------------------------- frames

void epr(Verdict& v) {
  ScenarioReport r = run_epr();
  auto joint = pointer_table(r.frame("M+N").tree, {{"M", 2}, {"N", 2}});
  const double a = lookup(joint, {1, -1}), b = lookup(joint, {-1, 1});
  v.detail << "p(+,-)=" << a << " p(-,+)=" << b;
  v.require(std::abs(a - 0.5) <= 1e-9 && std::abs(b - 0.5) <= 1e-9, "joint probabilities");
  for (const auto& f : r.frames) v.require(f.decoherence.decoherent, "frame " + f.name + " decoherent");
  v.require(r.consistency.at("M,N").consistent, "joint consistency");
  v.require(r.passed(), "scenario assertions");
}

void wigner(Verdict& v) {
  for (double phi : {0.3, kPi / 4.0}) {
    ScenarioReport r = run_wigner(phi);
    const double c = std::cos(phi), s = std::sin(phi), a = 0.5 * (c + s), b = 0.5 * (c - s);
    auto tf = pointer_table(r.frame("F").tree, {{"F", 1}});
    auto tw = pointer_table(r.frame("W").tree, {{"W", 2}});
    v.require(std::abs(lookup(tf, {1}) - c * c) <= 1e-9 && std::abs(lookup(tf, {-1}) - s * s) <= 1e-9,
              "F-frame probabilities");
    v.require(std::abs(lookup(tw, {1}) - 2.0 * a * a) <= 1e-9 && std::abs(lookup(tw, {-1}) - 2.0 * b * b) <= 1e-9,
              "W-frame probabilities");
    v.require(!r.frame("F+W").decoherence.decoherent, "joint frame recoherent");
    v.require(!r.consistency.at("F,W").consistent, "joint consistency false");
    v.detail << "phi " << phi << ": W probs " << lookup(tw, {1}) << ", " << lookup(tw, {-1}) << "; ";
    if (phi == kPi / 4.0) v.require(std::abs(lookup(tw, {1}) - 1.0) <= 1e-9 && lookup(tw, {-1}) <= 1e-9, "pi/4 (1,0)");
  }
}

void chsh(Verdict& v) {
  ScenarioReport r = run_chsh(kPi / 8.0);
  const double value = r.values.at("chsh value"), surrogate = r.values.at("classical surrogate");
  v.detail << "value " << value << " surrogate " << surrogate;
  v.require(std::abs(value - 2.0 * std::sqrt(2.0)) <= 1e-9, "2 sqrt 2");
  v.require(std::abs(surrogate) <= 2.0, "surrogate bound");
}

void frauchiger_renner(Verdict& v) {
  ScenarioReport r = run_frauchiger_renner();
  auto ff = pointer_table(r.frame("F1+F2").tree, {{"F1", 1}, {"F2", 1}});
  auto fw = pointer_table(r.frame("F1+W2").tree, {{"F1", 1}, {"W2", 2}});
  auto wf = pointer_table(r.frame("W1+F2").tree, {{"W1", 2}, {"F2", 1}});
  auto ww = pointer_table(r.frame("W1+W2").tree, {{"W1", 2}, {"W2", 2}});
  const double p_ww = lookup(ww, {-1, -1});
  v.detail << "p(F1=-1,F2=+1)=" << lookup(ff, {-1, 1}) << " p(W1=-1,W2=-1)=" << p_ww;
  v.require(lookup(ff, {-1, 1}) <= 1e-10, "p(F1=-1,F2=+1)");
  v.require(std::abs(p_ww - 1.0 / 12.0) <= 1e-10, "1/12");
  v.require(lookup(fw, {1, -1}) <= 1e-10 && lookup(fw, {-1, -1}) > 0.0, "W2=-1 implies F1=-1");
  v.require(lookup(wf, {-1, -1}) <= 1e-10 && lookup(wf, {-1, 1}) > 0.0, "W1=-1 implies F2=+1");
  const auto& joint = r.frame("F1+F2+W1+W2");
  auto level1 = joint.tree.level(1);
  v.require(level1.size() == 3, "three branches at t1");
  for (const auto* n : level1) v.require(std::abs(n->prob - 1.0 / 3.0) <= 1e-10, "t1 branch 1/3");
  v.require(decoherence_check(joint.tree, 1).decoherent, "decoherent at t1");
  v.require(!joint.decoherence.decoherent, "joint frame recoherent");
}

void history_checks(Verdict& v, const EventScript& s, const BranchTree& t, double& diag, double& krauss) {
  for (const BranchNode* leaf : t.leaves())
    diag = std::max(diag, std::abs(decoherence_functional(s, t, leaf->label, leaf->label) - leaf->prob));
  for (std::size_t step = 1; step <= t.depth; ++step)
    for (const BranchNode* parent : t.level(step - 1)) {
      if (parent->children.empty()) continue;
      krauss = std::max(krauss, krauss_completeness_defect(krauss_operators(s, t, step, parent->label)));
    }
  (void)v;
}

void appendix_checks(Verdict& v) {
  double diag = 0.0, krauss = 0.0, general = 0.0;
  std::size_t trees = 0, decoherent = 0;
  RngStream orng(1601, 0);
  for (const ScenarioReport& r : {run_epr(), run_wigner(kPi / 4.0), run_chsh(kPi / 8.0), run_frauchiger_renner()})
    for (const auto& f : r.frames) {
      ++trees;
      history_checks(v, r.script, f.tree, diag, krauss);
      if (!f.decoherence.decoherent) continue;
      ++decoherent;
      const auto d = static_cast<std::size_t>(f.tree.leaves().front()->state_s.size());
      for (int k = 0; k < 5; ++k) {
        ComplexMatrix o = random_hermitian(d, orng) + kI * random_hermitian(d, orng);
        for (const BranchNode* a : f.tree.leaves())
          for (const BranchNode* b : f.tree.leaves()) {
            const cplx g = generalized_functional(r.script, f.tree, o, a->label, b->label);
            const cplx expect = a == b ? a->prob * a->state_s.dot(o * a->state_s) : cplx(0.0);
            general = std::max(general, std::abs(g - expect));
          }
      }
    }
  RngStream rng(1602, 0);
  for (int k = 0; k < 20; ++k) {
    const std::size_t n = 3 + k % 2;
    std::vector<Subsystem> parts;
    std::vector<ComplexVector> factors;
    for (std::size_t q = 0; q < n; ++q) {
      parts.push_back({"q" + std::to_string(q), 2});
      factors.push_back(random_state(2, rng));
    }
    EventScript s;
    s.initial = TensorState::product(SubsystemLayout(parts), factors);
    for (int e = 0; e < 3; ++e) {
      const std::size_t a = std::size_t(rng.uniform() * double(n)) % n;
      const std::size_t b = (a + 1 + std::size_t(rng.uniform() * double(n - 1)) % (n - 1)) % n;
      s.events.push_back({"e", random_unitary(4, rng), {parts[a].name, parts[b].name}, {}});
    }
    BranchTree t = build_branch_tree(s, {parts[std::size_t(k) % n].name});
    ++trees;
    history_checks(v, s, t, diag, krauss);
  }
  v.detail << trees << " trees: functional diagonal " << diag << ", Krauss " << krauss << "; " << decoherent
           << " decoherent trees, generalized " << general;
  v.require(diag <= 1e-9, "functional diagonal");
  v.require(krauss <= 1e-9, "Krauss completeness");
  v.require(decoherent > 0 && general <= 1e-8, "generalized condition");
}

// ---------------------------------------------------------------- determinism

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::map<std::string, std::string> tree_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

void determinism(Verdict& v) {
  const std::map<std::string, std::string> commands = {
      {"fig1", "localize"}, {"fig3-4", "localize"}, {"fig2", "collapse"}, {"unravel", "unravel"},
      {"epr", "frames"},    {"wigner", "frames"},   {"chsh", "frames"},   {"fr", "frames"},
      {"scales-table", "scales"}};
  const fs::path base = fs::temp_directory_path() / "decolab_acceptance_determinism";
  std::size_t checked = 0;
  for (const auto& entry : fs::directory_iterator(DECOLAB_CONFIG_DIR)) {
    if (entry.path().extension() != ".json") continue;
    const std::string stem = entry.path().stem().string();
    auto it = commands.find(stem);
    if (it == commands.end()) {
      v.require(false, "no command known for config " + stem);
      continue;
    }
    const Json cfg = read_json_file(entry.path());
    std::map<std::string, std::string> runs[2];
    for (int k = 0; k < 2; ++k) {
      CommandOptions o;
      o.out_dir = base / (stem + "_" + std::to_string(k));
      fs::remove_all(o.out_dir);
      run_command(it->second, cfg, o);
      runs[k] = tree_contents(o.out_dir);
    }
    v.require(!runs[0].empty() && runs[0] == runs[1], stem + " outputs differ");
    v.detail << stem << " (" << runs[0].size() << " files) ";
    ++checked;
  }
  v.require(checked == commands.size(), "missing bundled configs");
  fs::remove_all(base);
}

struct Criterion {
  const char* name;
  std::function<void(Verdict&)> run;
};

const std::vector<Criterion>& criteria() {
  static const std::vector<Criterion> list = {
      {"Born rule", born_rule},
      {"mean jump count", mean_jump_count},
      {"martingale", martingale},
      {"unravelling matches master equation", unravel_master},
      {"unravelling defect order", defect_order},
      {"jump operator invariants", jump_invariants},
      {"localization attractor", attractor},
      {"decoherence-rate law", decoherence_rate},
      {"Langevin scaling", langevin},
      {"chaos criterion", chaos},
      {"scale tables", scale_table},
      {"EPR", epr},
      {"Wigner's friend", wigner},
      {"CHSH", chsh},
      {"Frauchiger-Renner", frauchiger_renner},
      {"decoherence functional and Krauss operators", appendix_checks},
      {"determinism", determinism},
  };
  return list;
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<std::size_t> which;
  if (argc > 1) {
    for (int a = 1; a < argc; ++a) {
      const long k = std::strtol(argv[a], nullptr, 10);
      if (k < 1 || k > long(criteria().size())) {
        std::fprintf(stderr, "criterion must be 1..%zu\n", criteria().size());
        return 2;
      }
      which.push_back(std::size_t(k));
    }
  } else {
    for (std::size_t k = 1; k <= criteria().size(); ++k) which.push_back(k);
  }
  int failed = 0;
  for (std::size_t k : which) {
    const Criterion& c = criteria()[k - 1];
    Verdict v;
    try {
      c.run(v);
    } catch (const std::exception& e) {
      v.pass = false;
      v.detail << "[error: " << e.what() << "]";
    }
    std::printf("%s %02zu %s: %s\n", v.pass ? "PASS" : "FAIL", k, c.name, v.detail.str().c_str());
    std::fflush(stdout);
    if (!v.pass) ++failed;
  }
  return failed ? 1 : 0;
}
