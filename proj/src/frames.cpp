#include "decolab/frames.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace decolab {

SubsystemLayout::SubsystemLayout(std::vector<Subsystem> parts) : parts_(std::move(parts)) {
  if (parts_.empty()) throw Error("layout needs at least one subsystem");
  std::set<std::string> seen;
  total_ = 1;
  for (const auto& p : parts_) {
    if (p.name.empty()) throw Error("layout: subsystem names must be nonempty");
    if (!seen.insert(p.name).second) throw Error("layout: duplicate subsystem name '" + p.name + "'");
    if (p.dim < 2) throw Error("layout: subsystem '" + p.name + "' must have dimension >= 2");
    total_ *= p.dim;
    if (total_ > 4096) throw Error("layout: total dimension exceeds 4096");
  }
}

std::size_t SubsystemLayout::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < parts_.size(); ++i)
    if (parts_[i].name == name) return i;
  throw Error("layout: unknown subsystem '" + name + "'");
}

bool SubsystemLayout::contains(const std::string& name) const {
  return std::any_of(parts_.begin(), parts_.end(), [&](const Subsystem& s) { return s.name == name; });
}

std::vector<std::string> SubsystemLayout::names() const {
  std::vector<std::string> out;
  for (const auto& p : parts_) out.push_back(p.name);
  return out;
}

std::vector<std::string> SubsystemLayout::ordered(const std::vector<std::string>& subset) const {
  std::vector<bool> pick(parts_.size(), false);
  for (const auto& n : subset) {
    std::size_t i = index_of(n);
    if (pick[i]) throw Error("layout: subsystem '" + n + "' listed twice");
    pick[i] = true;
  }
  std::vector<std::string> out;
  for (std::size_t i = 0; i < parts_.size(); ++i)
    if (pick[i]) out.push_back(parts_[i].name);
  return out;
}

std::vector<std::string> SubsystemLayout::complement(const std::vector<std::string>& subset) const {
  std::vector<std::string> in = ordered(subset);
  std::vector<std::string> out;
  for (const auto& p : parts_)
    if (std::find(in.begin(), in.end(), p.name) == in.end()) out.push_back(p.name);
  return out;
}

SubsystemLayout SubsystemLayout::sub(const std::vector<std::string>& subset) const {
  std::vector<Subsystem> out;
  for (const auto& n : ordered(subset)) out.push_back(parts_[index_of(n)]);
  return SubsystemLayout(out);
}

std::vector<std::size_t> SubsystemLayout::digits(std::size_t index) const {
  std::vector<std::size_t> d(parts_.size());
  for (std::size_t k = parts_.size(); k-- > 0;) {
    d[k] = index % parts_[k].dim;
    index /= parts_[k].dim;
  }
  return d;
}

void TensorState::validate() const {
  if (static_cast<std::size_t>(amplitudes.size()) != layout.total_dim())
    throw Error("tensor state: amplitude count differs from layout dimension");
  if (std::abs(amplitudes.norm() - 1.0) > 1e-10) throw Error("tensor state: amplitudes are not normalized");
}

TensorState TensorState::product(const SubsystemLayout& layout, const std::vector<ComplexVector>& factors) {
  if (factors.size() != layout.size()) throw Error("product state: one factor per subsystem required");
  ComplexVector v = ComplexVector::Ones(1);
  for (std::size_t k = 0; k < factors.size(); ++k) {
    if (static_cast<std::size_t>(factors[k].size()) != layout.parts()[k].dim)
      throw Error("product state: factor dimension differs from subsystem '" + layout.parts()[k].name + "'");
    ComplexVector next(v.size() * factors[k].size());
    for (Eigen::Index i = 0; i < v.size(); ++i)
      next.segment(i * factors[k].size(), factors[k].size()) = v[i] * factors[k];
    v = next;
  }
  TensorState s{layout, v / v.norm()};
  return s;
}

namespace {

// Combined index of the chosen subsystems (in the given order) for every full index.
std::vector<std::size_t> combined_index(const SubsystemLayout& layout, const std::vector<std::size_t>& which,
                                        std::size_t* dim_out) {
  const std::size_t total = layout.total_dim();
  std::vector<std::size_t> out(total);
  std::size_t dim = 1;
  for (std::size_t w : which) dim *= layout.parts()[w].dim;
  // Strides of each layout factor in the full index.
  std::vector<std::size_t> stride(layout.size());
  std::size_t s = 1;
  for (std::size_t k = layout.size(); k-- > 0;) {
    stride[k] = s;
    s *= layout.parts()[k].dim;
  }
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t c = 0;
    for (std::size_t w : which) c = c * layout.parts()[w].dim + (i / stride[w]) % layout.parts()[w].dim;
    out[i] = c;
  }
  if (dim_out) *dim_out = dim;
  return out;
}

std::vector<std::size_t> positions_of(const SubsystemLayout& layout, const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& n : names) out.push_back(layout.index_of(n));
  return out;
}

void check_vector(const ComplexVector& psi, const SubsystemLayout& layout) {
  if (static_cast<std::size_t>(psi.size()) != layout.total_dim())
    throw Error("state dimension differs from layout dimension");
}

}  // namespace

Bipartition bipartition(const SubsystemLayout& layout, const std::vector<std::string>& subset) {
  std::vector<std::string> a = layout.ordered(subset);
  std::vector<std::string> b = layout.complement(subset);
  Bipartition bp;
  bp.a = combined_index(layout, positions_of(layout, a), &bp.dim_a);
  bp.b = combined_index(layout, positions_of(layout, b), &bp.dim_b);
  return bp;
}

ComplexMatrix bipartition_matrix(const ComplexVector& psi, const Bipartition& bp) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(bp.dim_a), static_cast<Eigen::Index>(bp.dim_b));
  for (std::size_t i = 0; i < bp.a.size(); ++i)
    m(static_cast<Eigen::Index>(bp.a[i]), static_cast<Eigen::Index>(bp.b[i])) = psi[static_cast<Eigen::Index>(i)];
  return m;
}

ComplexVector join_bipartition(const ComplexVector& va, const ComplexVector& vb, const Bipartition& bp) {
  ComplexVector out(static_cast<Eigen::Index>(bp.a.size()));
  for (std::size_t i = 0; i < bp.a.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = va[static_cast<Eigen::Index>(bp.a[i])] * vb[static_cast<Eigen::Index>(bp.b[i])];
  return out;
}

ComplexMatrix reduced_density(const ComplexVector& psi, const SubsystemLayout& layout,
                              const std::vector<std::string>& keep) {
  check_vector(psi, layout);
  if (keep.empty()) throw Error("reduced_density: nothing to keep");
  if (layout.ordered(keep).size() == layout.size()) return psi * psi.adjoint();
  ComplexMatrix m = bipartition_matrix(psi, bipartition(layout, keep));
  return m * m.adjoint();
}

namespace {

ComplexVector apply_operator(const ComplexVector& psi, const SubsystemLayout& layout, const ComplexMatrix& op,
                             const std::vector<std::string>& targets) {
  check_vector(psi, layout);
  if (targets.empty()) throw Error("operator needs at least one target subsystem");
  std::vector<std::size_t> tpos = positions_of(layout, targets);
  if (std::set<std::size_t>(tpos.begin(), tpos.end()).size() != tpos.size())
    throw Error("operator targets must be distinct");
  std::size_t dt = 0, dr = 0;
  std::vector<std::size_t> t = combined_index(layout, tpos, &dt);
  std::vector<std::size_t> r = combined_index(layout, positions_of(layout, layout.complement(targets)), &dr);
  if (op.rows() != static_cast<Eigen::Index>(dt) || op.cols() != static_cast<Eigen::Index>(dt))
    throw Error("operator shape differs from the product of target dimensions");
  ComplexMatrix s = ComplexMatrix::Zero(static_cast<Eigen::Index>(dt), static_cast<Eigen::Index>(dr));
  for (std::size_t i = 0; i < t.size(); ++i)
    s(static_cast<Eigen::Index>(t[i]), static_cast<Eigen::Index>(r[i])) = psi[static_cast<Eigen::Index>(i)];
  ComplexMatrix out_m = op * s;
  ComplexVector out(psi.size());
  for (std::size_t i = 0; i < t.size(); ++i)
    out[static_cast<Eigen::Index>(i)] = out_m(static_cast<Eigen::Index>(t[i]), static_cast<Eigen::Index>(r[i]));
  return out;
}

void check_unitary(const ComplexMatrix& u, const std::string& what) {
  require_square(u, "event unitary");
  double d = 0.0;
  if (u.rows() <= 256) {
    d = (u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
  } else {
    // Large matrices: probe U^dagger U - I with fixed pseudo-random vectors.
    RngStream rng(0x5eed, 0);
    for (int k = 0; k < 4; ++k) {
      ComplexVector v = random_state(static_cast<std::size_t>(u.rows()), rng);
      d = std::max(d, (u.adjoint() * (u * v) - v).cwiseAbs().maxCoeff());
    }
  }
  if (d > 1e-10) {
    std::ostringstream os;
    os << what << ": matrix is not unitary (defect " << d << ")";
    throw Error(os.str());
  }
}

}  // namespace

ComplexMatrix embed_operator(const ComplexMatrix& op, const SubsystemLayout& layout,
                             const std::vector<std::string>& targets) {
  const auto n = static_cast<Eigen::Index>(layout.total_dim());
  ComplexMatrix out(n, n);
  ComplexVector e = ComplexVector::Zero(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    e.setZero();
    e[c] = 1.0;
    out.col(c) = apply_operator(e, layout, op, targets);
  }
  return out;
}

ComplexVector apply_unitary(const ComplexVector& psi, const SubsystemLayout& layout, const ComplexMatrix& u,
                            const std::vector<std::string>& targets) {
  check_unitary(u, "apply_unitary");
  return apply_operator(psi, layout, u, targets);
}

TensorState apply_event(const TensorState& state, const Event& event) {
  state.validate();
  check_unitary(event.unitary, "event '" + event.label + "'");
  TensorState out = state;
  out.amplitudes = apply_operator(state.amplitudes, state.layout, event.unitary, event.targets);
  return out;
}

void EventScript::validate() const {
  initial.validate();
  for (const auto& e : events) {
    check_unitary(e.unitary, "event '" + e.label + "'");
    std::size_t d = 1;
    for (const auto& t : e.targets) d *= initial.layout.parts()[initial.layout.index_of(t)].dim;
    if (static_cast<Eigen::Index>(d) != e.unitary.rows())
      throw Error("event '" + e.label + "': matrix size differs from target dimensions");
    if (!e.frame.empty()) initial.layout.ordered(e.frame);
  }
}

namespace {

constexpr double kPrune = 1e-10;
constexpr double kDegenerate = 1e-8;

void fix_phase(ComplexVector& f, ComplexVector& e) {
  const double big = e.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < e.size(); ++k) {
    if (std::abs(e[k]) >= big * (1.0 - 1e-9)) {
      const cplx ph = e[k] / std::abs(e[k]);
      e *= std::conj(ph);
      e[k] = cplx(e[k].real(), 0.0);
      f *= ph;
      return;
    }
  }
}

// Orthonormal basis of span(cols) chosen as close as possible to computational basis vectors.
ComplexMatrix align_to_computational(const ComplexMatrix& cols) {
  const auto d = cols.rows();
  const auto g = cols.cols();
  ComplexMatrix chosen(d, g);
  for (Eigen::Index c = 0; c < g; ++c) {
    Eigen::Index best = -1;
    double best_norm = -1.0;
    ComplexVector best_vec;
    for (Eigen::Index k = 0; k < d; ++k) {
      ComplexVector v = cols * cols.row(k).adjoint();  // projection of e_k onto the span
      for (Eigen::Index p = 0; p < c; ++p) v -= chosen.col(p) * chosen.col(p).dot(v);
      double nv = v.norm();
      if (nv > best_norm * (1.0 + 1e-9)) {
        best_norm = nv;
        best = k;
        best_vec = v;
      }
    }
    if (best < 0 || best_norm < 1e-12) throw Error("schmidt_split: degenerate block alignment failed");
    chosen.col(c) = best_vec / best_norm;
  }
  return chosen;
}

}  // namespace

std::vector<SchmidtBranch> schmidt_split(const ComplexVector& psi, const SubsystemLayout& layout,
                                         const std::vector<std::string>& frame) {
  check_vector(psi, layout);
  std::vector<std::string> f = layout.ordered(frame);
  if (f.empty() || f.size() == layout.size()) throw Error("schmidt_split: frame must be a nonempty proper subset");
  Bipartition bp = bipartition(layout, f);
  ComplexMatrix m = bipartition_matrix(psi, bp);
  Eigen::JacobiSVD<ComplexMatrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector s = svd.singularValues();
  const ComplexMatrix u = svd.matrixU();
  std::vector<SchmidtBranch> out;
  Eigen::Index i = 0;
  while (i < s.size() && s[i] >= kPrune) {
    Eigen::Index j = i + 1;
    while (j < s.size() && s[j] >= kPrune && std::abs(s[j] - s[i]) <= kDegenerate) ++j;
    ComplexMatrix block = u.middleCols(i, j - i);
    if (j - i > 1) block = align_to_computational(block);
    for (Eigen::Index c = 0; c < block.cols(); ++c) {
      SchmidtBranch br;
      br.state_s = block.col(c);
      ComplexVector e = m.transpose() * br.state_s.conjugate();
      br.coeff = e.norm();
      if (br.coeff < kPrune) continue;
      br.state_env = e / br.coeff;
      fix_phase(br.state_s, br.state_env);
      out.push_back(std::move(br));
    }
    i = j;
  }
  return out;
}

std::vector<const BranchNode*> BranchTree::leaves() const { return level(depth); }

std::vector<const BranchNode*> BranchTree::level(std::size_t n) const {
  std::vector<const BranchNode*> out;
  std::function<void(const BranchNode&)> walk = [&](const BranchNode& node) {
    if (node.label.size() == n) {
      out.push_back(&node);
      return;
    }
    for (const auto& c : node.children) walk(c);
  };
  walk(root);
  return out;
}

const BranchNode& BranchTree::find(const std::vector<std::size_t>& label) const {
  const BranchNode* node = &root;
  for (std::size_t a : label) {
    if (a >= node->children.size()) {
      std::ostringstream os;
      os << "unknown branch label (";
      for (std::size_t k = 0; k < label.size(); ++k) os << (k ? "," : "") << label[k];
      os << ")";
      throw Error(os.str());
    }
    node = &node->children[a];
  }
  return *node;
}

double BranchTree::leaf_probability_sum() const {
  double s = 0.0;
  for (const auto* l : leaves()) s += l->prob;
  return s;
}

BranchTree build_branch_tree(const EventScript& script, const std::vector<std::string>& frame) {
  script.validate();
  const SubsystemLayout& layout = script.initial.layout;
  BranchTree tree;
  tree.layout = layout;
  tree.frame = frame.empty() ? std::vector<std::string>{} : layout.ordered(frame);
  tree.depth = script.events.size();
  tree.root.total = script.initial.amplitudes;
  std::function<void(BranchNode&, std::size_t)> expand = [&](BranchNode& node, std::size_t n) {
    if (n == script.events.size()) return;
    const Event& ev = script.events[n];
    std::vector<std::string> fr = frame.empty() ? ev.frame : frame;
    if (fr.empty()) throw Error("event '" + ev.label + "' has no frame declaration and none was given");
    fr = layout.ordered(fr);
    Bipartition bp = bipartition(layout, fr);
    ComplexVector v = apply_operator(node.total, layout, ev.unitary, ev.targets);
    auto branches = schmidt_split(v, layout, fr);
    node.children.reserve(branches.size());
    for (std::size_t a = 0; a < branches.size(); ++a) {
      BranchNode child;
      child.label = node.label;
      child.label.push_back(a);
      child.coeff = branches[a].coeff;
      child.prob = node.prob * child.coeff * child.coeff;
      child.frame = fr;
      child.state_s = std::move(branches[a].state_s);
      child.state_env = std::move(branches[a].state_env);
      child.total = join_bipartition(child.state_s, child.state_env, bp);
      node.children.push_back(std::move(child));
    }
    for (auto& c : node.children) expand(c, n + 1);
  };
  expand(tree.root, 0);
  return tree;
}

DecoherenceReport decoherence_check(const BranchTree& tree, std::size_t depth) {
  DecoherenceReport r;
  auto leaves = tree.level(std::min(depth, tree.depth));
  for (std::size_t i = 0; i < leaves.size(); ++i)
    for (std::size_t j = i + 1; j < leaves.size(); ++j) {
      const auto& a = leaves[i]->state_env;
      const auto& b = leaves[j]->state_env;
      if (a.size() != b.size()) continue;
      r.max_violation = std::max(r.max_violation, std::abs(a.dot(b)));
    }
  r.decoherent = r.max_violation < 1e-8;
  return r;
}

namespace {

std::string label_text(const std::vector<std::size_t>& label) {
  std::ostringstream os;
  os << "(";
  for (std::size_t k = 0; k < label.size(); ++k) os << (k ? "," : "") << label[k];
  os << ")";
  return os.str();
}

// Map every joint leaf onto a leaf label of `part`, following the path step by step.
bool align_paths(const BranchTree& part, const BranchTree& joint,
                 std::map<std::vector<std::size_t>, std::vector<std::size_t>>& mapping, std::string& diagnostic) {
  const SubsystemLayout& layout = joint.layout;
  bool ok = true;
  std::function<void(const BranchNode&, const BranchNode&)> walk = [&](const BranchNode& jn, const BranchNode& pn) {
    if (!ok) return;
    if (jn.children.empty()) {
      mapping[jn.label] = pn.label;
      return;
    }
    for (const auto& jc : jn.children) {
      if (pn.children.empty()) {
        ok = false;
        diagnostic = "frame tree ends before joint branch " + label_text(jc.label);
        return;
      }
      const std::vector<std::string>& pf = pn.children.front().frame;
      for (const auto& name : pf)
        if (std::find(jc.frame.begin(), jc.frame.end(), name) == jc.frame.end()) {
          ok = false;
          diagnostic = "subsystem '" + name + "' is not part of the joint frame";
          return;
        }
      ComplexMatrix rho = reduced_density(jc.state_s, layout.sub(jc.frame), pf);
      const BranchNode* match = nullptr;
      for (const auto& pc : pn.children) {
        double fid = pc.state_s.dot(rho * pc.state_s).real();
        if (fid >= 1.0 - 1e-9) {
          match = &pc;
          break;
        }
      }
      if (!match) {
        ok = false;
        diagnostic = "joint branch " + label_text(jc.label) + " has no counterpart among the children of frame branch " +
                     label_text(pn.label);
        return;
      }
      walk(jc, *match);
      if (!ok) return;
    }
  };
  walk(joint.root, part.root);
  return ok;
}

double marginal_defect(const BranchTree& part, const BranchTree& joint,
                       const std::map<std::vector<std::size_t>, std::vector<std::size_t>>& mapping) {
  std::map<std::vector<std::size_t>, double> sums;
  for (const auto* l : part.leaves()) sums[l->label] = 0.0;
  for (const auto* l : joint.leaves()) sums[mapping.at(l->label)] += l->prob;
  double defect = 0.0;
  for (const auto* l : part.leaves()) defect = std::max(defect, std::abs(sums[l->label] - l->prob));
  return defect;
}

}  // namespace

ConsistencyReport joint_consistency(const BranchTree& a, const BranchTree& b, const BranchTree& joint) {
  ConsistencyReport r;
  if (a.depth != joint.depth || b.depth != joint.depth) throw Error("joint_consistency: trees differ in depth");
  DecoherenceReport d = decoherence_check(joint);
  r.joint_decoherent = d.decoherent;
  r.joint_violation = d.max_violation;
  std::map<std::vector<std::size_t>, std::vector<std::size_t>> ma, mb;
  std::string diag;
  bool ok_a = align_paths(a, joint, ma, diag);
  bool ok_b = ok_a && align_paths(b, joint, mb, diag);
  r.aligned = ok_a && ok_b;
  if (r.aligned) r.marginal_defect = std::max(marginal_defect(a, joint, ma), marginal_defect(b, joint, mb));
  r.consistent = r.joint_decoherent && r.aligned && r.marginal_defect <= 1e-9;
  std::ostringstream os;
  if (!r.joint_decoherent) os << "joint frame recoherent (max environment overlap " << r.joint_violation << ")";
  if (!r.aligned) os << (os.tellp() > 0 ? "; " : "") << "label alignment failed: " << diag;
  if (r.aligned && r.marginal_defect > 1e-9)
    os << (os.tellp() > 0 ? "; " : "") << "marginals differ by " << r.marginal_defect;
  r.diagnostic = os.str();
  return r;
}

ComplexVector chain_state(const EventScript& script, const BranchTree& tree, const std::vector<std::size_t>& label) {
  if (label.size() > script.events.size()) throw Error("chain_state: label longer than the script");
  tree.find(label);
  const SubsystemLayout& layout = script.initial.layout;
  ComplexVector v = script.initial.amplitudes;
  std::vector<std::size_t> prefix;
  for (std::size_t k = 0; k < label.size(); ++k) {
    v = apply_operator(v, layout, script.events[k].unitary, script.events[k].targets);
    prefix.push_back(label[k]);
    const ComplexVector& p = tree.find(prefix).total;
    v = p * p.dot(v);
  }
  return v;
}

ComplexMatrix chain_operator(const EventScript& script, const BranchTree& tree, const std::vector<std::size_t>& label) {
  if (label.empty()) throw Error("chain_operator: empty label");
  tree.find(label);
  const SubsystemLayout& layout = script.initial.layout;
  // Every projector is rank one, so the chain collapses to an outer product.
  std::vector<std::size_t> prefix{label[0]};
  ComplexVector first = tree.find(prefix).total;
  ComplexVector bra = apply_operator(first, layout, script.events[0].unitary.adjoint(), script.events[0].targets);
  cplx factor = 1.0;
  ComplexVector prev = first;
  for (std::size_t k = 1; k < label.size(); ++k) {
    prefix.push_back(label[k]);
    const ComplexVector& cur = tree.find(prefix).total;
    factor *= cur.dot(apply_operator(prev, layout, script.events[k].unitary, script.events[k].targets));
    prev = cur;
  }
  return factor * prev * bra.adjoint();
}

cplx decoherence_functional(const EventScript& script, const BranchTree& tree, const std::vector<std::size_t>& a,
                            const std::vector<std::size_t>& b) {
  return chain_state(script, tree, a).dot(chain_state(script, tree, b));
}

cplx generalized_functional(const EventScript& script, const BranchTree& tree, const ComplexMatrix& o_s,
                            const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  if (a.empty()) throw Error("generalized_functional: empty label");
  const BranchNode& node = tree.find(a);
  ComplexVector cb = chain_state(script, tree, b);
  ComplexVector ob = apply_operator(cb, script.initial.layout, o_s, node.frame);
  return chain_state(script, tree, a).dot(ob);
}

KraussSet krauss_operators(const EventScript& script, const BranchTree& tree, std::size_t step,
                           const std::vector<std::size_t>& parent) {
  if (step < 1 || step > script.events.size()) throw Error("krauss_operators: step out of range");
  if (parent.size() != step - 1) throw Error("krauss_operators: parent label must have length step-1");
  const SubsystemLayout& layout = script.initial.layout;
  const BranchNode& pnode = tree.find(parent);
  if (pnode.children.empty()) throw Error("krauss_operators: parent has no children");
  const std::vector<std::string>& fr = pnode.children.front().frame;
  Bipartition bp = bipartition(layout, fr);
  ComplexVector e_parent;
  if (step == 1) {
    auto split = schmidt_split(script.initial.amplitudes, layout, fr);
    if (split.size() != 1) throw Error("krauss_operators: initial state is entangled across the frame");
    e_parent = split[0].state_env;
  } else {
    if (pnode.frame != fr) throw Error("krauss_operators: frame changes between steps");
    e_parent = pnode.state_env;
  }
  const Event& ev = script.events[step - 1];
  const auto df = static_cast<Eigen::Index>(bp.dim_a);
  // W[s'] = U (|s'> (x) |e_parent>) as a frame x env matrix.
  std::vector<ComplexMatrix> w;
  for (Eigen::Index s = 0; s < df; ++s) {
    ComplexVector fs = ComplexVector::Zero(df);
    fs[s] = 1.0;
    ComplexVector v = apply_operator(join_bipartition(fs, e_parent, bp), layout, ev.unitary, ev.targets);
    w.push_back(bipartition_matrix(v, bp));
  }
  std::vector<ComplexVector> envs;
  for (const auto& c : pnode.children) envs.push_back(c.state_env);
  KraussSet out;
  out.n_children = envs.size();
  // Complete the environment set over everything the event can reach.
  for (const auto& m : w)
    for (Eigen::Index i = 0; i < df; ++i) {
      ComplexVector v = m.row(i).transpose();
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& e : envs) v -= e * e.dot(v);
      double nv = v.norm();
      if (nv > 1e-9) envs.push_back(v / nv);
    }
  for (const auto& e : envs) {
    ComplexMatrix k(df, df);
    for (Eigen::Index s = 0; s < df; ++s) k.col(s) = w[static_cast<std::size_t>(s)] * e.conjugate();
    out.ops.push_back(std::move(k));
  }
  return out;
}

double krauss_completeness_defect(const KraussSet& k) {
  if (k.ops.empty()) throw Error("krauss_completeness_defect: empty set");
  const auto d = k.ops.front().rows();
  ComplexMatrix s = ComplexMatrix::Zero(d, d);
  for (const auto& op : k.ops) s += op.adjoint() * op;
  return (s - ComplexMatrix::Identity(d, d)).cwiseAbs().maxCoeff();
}

}  // namespace decolab
