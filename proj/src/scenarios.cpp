#include "decolab/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace decolab {

ComplexMatrix cyclic_shift(std::size_t dim, std::size_t by) {
  const auto d = static_cast<Eigen::Index>(dim);
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  for (Eigen::Index j = 0; j < d; ++j) s((j + static_cast<Eigen::Index>(by)) % d, j) = 1.0;
  return s;
}

ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

ComplexMatrix measurement_unitary(const ComplexVector& plus, const ComplexVector& minus, bool record) {
  if (plus.size() != minus.size()) throw Error("measurement_unitary: outcome states differ in dimension");
  if (std::abs(plus.norm() - 1.0) > 1e-12 || std::abs(minus.norm() - 1.0) > 1e-12 || std::abs(plus.dot(minus)) > 1e-12)
    throw Error("measurement_unitary: outcome states must be orthonormal");
  const auto d = plus.size();
  ComplexMatrix pp = plus * plus.adjoint();
  ComplexMatrix pm = minus * minus.adjoint();
  ComplexMatrix rest = ComplexMatrix::Identity(d, d) - pp - pm;
  ComplexMatrix id3 = ComplexMatrix::Identity(3, 3);
  if (!record) return kron(pp, cyclic_shift(3, 1)) + kron(pm, cyclic_shift(3, 2)) + kron(rest, id3);
  ComplexMatrix id2 = ComplexMatrix::Identity(2, 2);
  ComplexMatrix flip = cyclic_shift(2, 1);
  return kron(pp, kron(cyclic_shift(3, 1), id2)) + kron(pm, kron(cyclic_shift(3, 2), flip)) + kron(rest, kron(id3, id2));
}

int read_pointer(const BranchNode& node, const SubsystemLayout& layout, const std::string& device) {
  if (std::find(node.frame.begin(), node.frame.end(), device) == node.frame.end())
    throw Error("read_pointer: device '" + device + "' is not in the branch frame");
  ComplexMatrix rho = reduced_density(node.state_s, layout.sub(node.frame), {device});
  if (rho.rows() != 3) throw Error("read_pointer: '" + device + "' is not a qutrit device");
  static const int value[3] = {0, 1, -1};
  for (int k = 0; k < 3; ++k)
    if (rho(k, k).real() >= 1.0 - 1e-9) return value[k];
  throw Error("read_pointer: device '" + device + "' is not in a pointer state");
}

std::map<std::vector<int>, double> pointer_table(const BranchTree& tree,
                                                 const std::vector<std::pair<std::string, std::size_t>>& readings) {
  std::size_t depth = 0;
  for (const auto& r : readings) {
    if (r.second < 1 || r.second > tree.depth) throw Error("pointer_table: reading level out of range");
    depth = std::max(depth, r.second);
  }
  std::map<std::vector<int>, double> table;
  for (const BranchNode* node : tree.level(depth)) {
    std::vector<int> key;
    for (const auto& r : readings) {
      std::vector<std::size_t> prefix(node->label.begin(), node->label.begin() + static_cast<long>(r.second));
      key.push_back(read_pointer(tree.find(prefix), tree.layout, r.first));
    }
    table[key] += node->prob;
  }
  return table;
}

bool ScenarioReport::passed() const {
  return std::all_of(assertions.begin(), assertions.end(), [](const Assertion& a) { return a.pass; });
}

const FrameResult& ScenarioReport::frame(const std::string& name) const {
  for (const auto& f : frames)
    if (f.name == name) return f;
  throw Error("scenario report has no frame '" + name + "'");
}

void ScenarioReport::check(const std::string& name, double expected, double actual, double tol) {
  assertions.push_back({name, expected, actual, tol, std::abs(actual - expected) <= tol});
  values[name] = actual;
}

void ScenarioReport::check_true(const std::string& name, bool condition) {
  assertions.push_back({name, 1.0, condition ? 1.0 : 0.0, 0.0, condition});
}

namespace {

ComplexVector basis(std::size_t dim, std::size_t k) {
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(dim));
  v[static_cast<Eigen::Index>(k)] = 1.0;
  return v;
}

// Sum of weighted computational basis states given as per-subsystem digit lists.
ComplexVector superpose(const SubsystemLayout& layout, const std::vector<std::pair<cplx, std::vector<std::size_t>>>& terms) {
  ComplexVector v = ComplexVector::Zero(static_cast<Eigen::Index>(layout.total_dim()));
  for (const auto& t : terms) {
    std::size_t idx = 0;
    for (std::size_t k = 0; k < layout.size(); ++k) idx = idx * layout.parts()[k].dim + t.second[k];
    v[static_cast<Eigen::Index>(idx)] += t.first;
  }
  return v / v.norm();
}

ComplexMatrix friend_unitary() { return measurement_unitary(basis(2, 0), basis(2, 1), false); }

// Wigner's sigma_x measurement on (F (x) Q): F+ = |f+ z+>, F- = |f- z->.
ComplexMatrix wigner_unitary() {
  ComplexVector fp = basis(6, 1 * 2 + 0);
  ComplexVector fm = basis(6, 2 * 2 + 1);
  return measurement_unitary((fp + fm) / std::sqrt(2.0), (fp - fm) / std::sqrt(2.0), true);
}

SubsystemLayout doubled_layout() {
  return SubsystemLayout({{"F1", 3}, {"Q1", 2}, {"W1", 3}, {"E1", 2}, {"F2", 3}, {"Q2", 2}, {"W2", 3}, {"E2", 2}});
}

EventScript doubled_script(const std::vector<std::pair<cplx, std::pair<std::size_t, std::size_t>>>& qubit_terms) {
  SubsystemLayout layout = doubled_layout();
  std::vector<std::pair<cplx, std::vector<std::size_t>>> terms;
  for (const auto& t : qubit_terms) terms.push_back({t.first, {0, t.second.first, 0, 0, 0, t.second.second, 0, 0}});
  EventScript s;
  s.initial = TensorState{layout, superpose(layout, terms)};
  s.events.push_back({"friends measure", kron(friend_unitary(), friend_unitary()), {"Q1", "F1", "Q2", "F2"}, {"F1", "F2"}});
  s.events.push_back({"wigners measure", kron(wigner_unitary(), wigner_unitary()),
                      {"F1", "Q1", "W1", "E1", "F2", "Q2", "W2", "E2"}, {"W1", "W2"}});
  return s;
}

FrameResult frame_result(const EventScript& s, const std::string& name, const std::vector<std::string>& frame) {
  FrameResult f;
  f.name = name;
  f.tree = build_branch_tree(s, frame);
  f.decoherence = decoherence_check(f.tree);
  return f;
}

double lookup(const std::map<std::vector<int>, double>& t, const std::vector<int>& key) {
  auto it = t.find(key);
  return it == t.end() ? 0.0 : it->second;
}

double min_conditional(const BranchTree& tree, std::size_t level) {
  double m = 1.0;
  for (const auto* n : tree.level(level)) m = std::min(m, n->coeff * n->coeff);
  return m;
}

// <a (x) b> with a on (F1,Q1) and b on (F2,Q2).
double expectation(const ComplexMatrix& rho, const ComplexMatrix& a, const ComplexMatrix& b) {
  return (rho * kron(a, b)).trace().real();
}

}  // namespace

EventScript epr_script() {
  SubsystemLayout layout({{"M", 3}, {"Q1", 2}, {"Q2", 2}, {"N", 3}});
  EventScript s;
  s.initial = TensorState{layout, superpose(layout, {{1.0, {0, 0, 1, 0}}, {1.0, {0, 1, 0, 0}}})};
  s.events.push_back({"M measures Q1", friend_unitary(), {"Q1", "M"}, {"M"}});
  s.events.push_back({"N measures Q2", friend_unitary(), {"Q2", "N"}, {"N"}});
  return s;
}

EventScript wigner_script(double phi) {
  SubsystemLayout layout({{"F", 3}, {"Q", 2}, {"W", 3}, {"E", 2}});
  EventScript s;
  s.initial = TensorState{layout, superpose(layout, {{std::cos(phi), {0, 0, 0, 0}}, {std::sin(phi), {0, 1, 0, 0}}})};
  s.events.push_back({"F measures Q", friend_unitary(), {"Q", "F"}, {"F"}});
  s.events.push_back({"W measures F+Q", wigner_unitary(), {"F", "Q", "W", "E"}, {"W"}});
  return s;
}

EventScript chsh_script(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return doubled_script({{c, {0, 0}}, {s, {0, 1}}, {s, {1, 0}}, {-c, {1, 1}}});
}

EventScript frauchiger_renner_script() { return doubled_script({{1.0, {0, 0}}, {1.0, {0, 1}}, {1.0, {1, 1}}}); }

ScenarioReport run_epr() {
  ScenarioReport r;
  r.scenario = "epr";
  r.script = epr_script();
  r.frames.push_back(frame_result(r.script, "M", {"M"}));
  r.frames.push_back(frame_result(r.script, "N", {"N"}));
  r.frames.push_back(frame_result(r.script, "M+N", {"M", "N"}));
  const auto& m = r.frame("M");
  const auto& n = r.frame("N");
  const auto& mn = r.frame("M+N");
  auto tm = pointer_table(m.tree, {{"M", 1}});
  r.check("frame M step 1 p(M=+1)", 0.5, lookup(tm, {1}), 1e-9);
  r.check("frame M step 1 p(M=-1)", 0.5, lookup(tm, {-1}), 1e-9);
  r.check("frame M step 2 min transition", 1.0, min_conditional(m.tree, 2), 1e-9);
  r.check("frame N step 1 min transition", 1.0, min_conditional(n.tree, 1), 1e-9);
  auto joint = pointer_table(mn.tree, {{"M", 2}, {"N", 2}});
  r.check("p(M=+1,N=-1)", 0.5, lookup(joint, {1, -1}), 1e-9);
  r.check("p(M=-1,N=+1)", 0.5, lookup(joint, {-1, 1}), 1e-9);
  for (const auto& f : r.frames) {
    r.check("leaf probability sum " + f.name, 1.0, f.tree.leaf_probability_sum(), 1e-9);
    r.check_true("frame " + f.name + " decoherent", f.decoherence.decoherent);
  }
  r.consistency["M,N"] = joint_consistency(m.tree, n.tree, mn.tree);
  r.check_true("M and N consistent in M+N", r.consistency["M,N"].consistent);
  return r;
}

ScenarioReport run_wigner(double phi) {
  ScenarioReport r;
  r.scenario = "wigner";
  r.parameters["phi"] = phi;
  r.script = wigner_script(phi);
  r.frames.push_back(frame_result(r.script, "F", {"F"}));
  r.frames.push_back(frame_result(r.script, "W", {"W"}));
  r.frames.push_back(frame_result(r.script, "F+W", {"F", "W"}));
  const auto& f = r.frame("F");
  const auto& w = r.frame("W");
  const auto& fw = r.frame("F+W");
  const double c = std::cos(phi), s = std::sin(phi);
  const double a = 0.5 * (c + s), b = 0.5 * (c - s);
  auto tf = pointer_table(f.tree, {{"F", 1}});
  r.check("frame F p(F=+1)", c * c, lookup(tf, {1}), 1e-9);
  r.check("frame F p(F=-1)", s * s, lookup(tf, {-1}), 1e-9);
  double min_step2 = 1.0, max_step2 = 0.0;
  for (const auto* node : f.tree.level(2)) {
    min_step2 = std::min(min_step2, node->coeff * node->coeff);
    max_step2 = std::max(max_step2, node->coeff * node->coeff);
  }
  r.check("frame F step 2 min transition", 0.5, min_step2, 1e-9);
  r.check("frame F step 2 max transition", 0.5, max_step2, 1e-9);
  auto tw = pointer_table(w.tree, {{"W", 2}});
  r.check("frame W p(W=+1)", 2.0 * a * a, lookup(tw, {1}), 1e-9);
  r.check("frame W p(W=-1)", 2.0 * b * b, lookup(tw, {-1}), 1e-9);
  r.check_true("frame F decoherent", f.decoherence.decoherent);
  r.check_true("frame W decoherent", w.decoherence.decoherent);
  r.values["joint frame max overlap"] = fw.decoherence.max_violation;
  for (const auto& fr : r.frames) r.check("leaf probability sum " + fr.name, 1.0, fr.tree.leaf_probability_sum(), 1e-9);
  r.consistency["F,W"] = joint_consistency(f.tree, w.tree, fw.tree);
  // With a certain friend outcome there is nothing to recohere.
  if (f.tree.level(1).size() > 1) {
    r.check_true("joint frame F+W recoherent", !fw.decoherence.decoherent);
    r.check_true("F and W complementary", !r.consistency["F,W"].consistent);
  } else {
    r.check_true("joint frame F+W decoherent", fw.decoherence.decoherent);
    r.check_true("F and W consistent", r.consistency["F,W"].consistent);
  }
  return r;
}

double chsh_value(const ComplexVector& state, const SubsystemLayout& layout) {
  ComplexVector fp = ComplexVector::Zero(6), fm = ComplexVector::Zero(6);
  fp[1 * 2 + 0] = 1.0;
  fm[2 * 2 + 1] = 1.0;
  ComplexMatrix sz = fp * fp.adjoint() - fm * fm.adjoint();
  ComplexMatrix sx = fp * fm.adjoint() + fm * fp.adjoint();
  ComplexMatrix rho = reduced_density(state, layout, {"F1", "Q1", "F2", "Q2"});
  return expectation(rho, sz, sz) + expectation(rho, sz, sx) + expectation(rho, sx, sz) - expectation(rho, sx, sx);
}

ScenarioReport run_chsh(double theta) {
  ScenarioReport r;
  r.scenario = "chsh";
  r.parameters["theta"] = theta;
  r.script = chsh_script(theta);
  const SubsystemLayout& layout = r.script.initial.layout;
  TensorState t1 = apply_event(r.script.initial, r.script.events[0]);
  const double value = chsh_value(t1.amplitudes, layout);
  r.values["chsh value"] = value;
  r.values["violated"] = value > 2.0 ? 1.0 : 0.0;
  r.frames.push_back(frame_result(r.script, "F1+F2", {"F1", "F2"}));
  r.frames.push_back(frame_result(r.script, "W1", {"W1"}));
  r.frames.push_back(frame_result(r.script, "W2", {"W2"}));
  // Classical surrogate: joint friend outcomes times independent Wigner marginals.
  auto ff = pointer_table(r.frame("F1+F2").tree, {{"F1", 1}, {"F2", 1}});
  auto w1 = pointer_table(r.frame("W1").tree, {{"W1", 2}});
  auto w2 = pointer_table(r.frame("W2").tree, {{"W2", 2}});
  double e_f1f2 = 0.0, e_f1 = 0.0, e_f2 = 0.0;
  for (const auto& [k, p] : ff) {
    e_f1f2 += p * k[0] * k[1];
    e_f1 += p * k[0];
    e_f2 += p * k[1];
  }
  const double e_w1 = lookup(w1, {1}) - lookup(w1, {-1});
  const double e_w2 = lookup(w2, {1}) - lookup(w2, {-1});
  const double surrogate = e_f1f2 + e_f1 * e_w2 + e_w1 * e_f2 - e_w1 * e_w2;
  r.values["classical surrogate"] = surrogate;
  r.check_true("classical surrogate within bound", std::abs(surrogate) <= 2.0 + 1e-12);
  r.check("chsh value", 2.0 * std::cos(2.0 * theta) + 2.0 * std::sin(2.0 * theta), value, 1e-9);
  for (const auto& fr : r.frames) r.check("leaf probability sum " + fr.name, 1.0, fr.tree.leaf_probability_sum(), 1e-9);
  return r;
}

ScenarioReport run_frauchiger_renner() {
  ScenarioReport r;
  r.scenario = "frauchiger-renner";
  r.script = frauchiger_renner_script();
  r.frames.push_back(frame_result(r.script, "F1+F2", {"F1", "F2"}));
  r.frames.push_back(frame_result(r.script, "F1+W2", {"F1", "W2"}));
  r.frames.push_back(frame_result(r.script, "W1+F2", {"W1", "F2"}));
  r.frames.push_back(frame_result(r.script, "W1+W2", {"W1", "W2"}));
  r.frames.push_back(frame_result(r.script, "F1+F2+W1+W2", {"F1", "F2", "W1", "W2"}));
  auto ff = pointer_table(r.frame("F1+F2").tree, {{"F1", 1}, {"F2", 1}});
  r.check("p(F1=-1,F2=+1)", 0.0, lookup(ff, {-1, 1}), 1e-10);
  auto fw = pointer_table(r.frame("F1+W2").tree, {{"F1", 1}, {"W2", 2}});
  const double p_w2m = lookup(fw, {1, -1}) + lookup(fw, {-1, -1});
  r.check("p(F1=-1 | W2=-1)", 1.0, p_w2m > 0.0 ? lookup(fw, {-1, -1}) / p_w2m : 0.0, 1e-10);
  r.values["p(W2=-1)"] = p_w2m;
  auto wf = pointer_table(r.frame("W1+F2").tree, {{"W1", 2}, {"F2", 1}});
  const double p_w1m = lookup(wf, {-1, 1}) + lookup(wf, {-1, -1});
  r.check("p(F2=+1 | W1=-1)", 1.0, p_w1m > 0.0 ? lookup(wf, {-1, 1}) / p_w1m : 0.0, 1e-10);
  r.values["p(W1=-1)"] = p_w1m;
  auto ww = pointer_table(r.frame("W1+W2").tree, {{"W1", 2}, {"W2", 2}});
  r.check("p(W1=-1,W2=-1)", 1.0 / 12.0, lookup(ww, {-1, -1}), 1e-10);
  const auto& joint = r.frame("F1+F2+W1+W2");
  auto level1 = joint.tree.level(1);
  r.check("joint frame branches at t1", 3.0, static_cast<double>(level1.size()), 0.0);
  for (std::size_t i = 0; i < level1.size(); ++i)
    r.check("joint frame t1 branch " + std::to_string(i) + " probability", 1.0 / 3.0, level1[i]->prob, 1e-10);
  DecoherenceReport d1 = decoherence_check(joint.tree, 1);
  r.check_true("joint frame decoherent at t1", d1.decoherent);
  r.check_true("joint frame recoherent at t2", !joint.decoherence.decoherent);
  r.values["joint frame max overlap at t2"] = joint.decoherence.max_violation;
  for (const auto& fr : r.frames) r.check("leaf probability sum " + fr.name, 1.0, fr.tree.leaf_probability_sum(), 1e-9);
  return r;
}

}  // namespace decolab
