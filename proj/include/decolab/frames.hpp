#pragma once

#include "decolab/numerics.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace decolab {

struct Subsystem {
  std::string name;
  std::size_t dim = 2;
};

// Ordered tensor factors; the first factor is the most significant index.
class SubsystemLayout {
 public:
  SubsystemLayout() = default;
  explicit SubsystemLayout(std::vector<Subsystem> parts);

  const std::vector<Subsystem>& parts() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  std::size_t total_dim() const { return total_; }
  std::size_t index_of(const std::string& name) const;
  bool contains(const std::string& name) const;
  std::vector<std::string> names() const;
  // Names of `subset` sorted into layout order; validates membership and uniqueness.
  std::vector<std::string> ordered(const std::vector<std::string>& subset) const;
  std::vector<std::string> complement(const std::vector<std::string>& subset) const;
  SubsystemLayout sub(const std::vector<std::string>& subset) const;
  std::vector<std::size_t> digits(std::size_t index) const;

 private:
  std::vector<Subsystem> parts_;
  std::size_t total_ = 1;
};

struct TensorState {
  SubsystemLayout layout;
  ComplexVector amplitudes;

  void validate() const;
  static TensorState product(const SubsystemLayout& layout, const std::vector<ComplexVector>& factors);
};

// Position of each full basis index in a (subset, rest) bipartition, both in layout order.
struct Bipartition {
  std::size_t dim_a = 1;
  std::size_t dim_b = 1;
  std::vector<std::size_t> a;  // per full index
  std::vector<std::size_t> b;
};

Bipartition bipartition(const SubsystemLayout& layout, const std::vector<std::string>& subset);
// Psi as a dim_a x dim_b matrix.
ComplexMatrix bipartition_matrix(const ComplexVector& psi, const Bipartition& bp);
ComplexVector join_bipartition(const ComplexVector& va, const ComplexVector& vb, const Bipartition& bp);
ComplexMatrix reduced_density(const ComplexVector& psi, const SubsystemLayout& layout,
                              const std::vector<std::string>& keep);
// Operator on `targets` (given order) lifted to the full layout.
ComplexMatrix embed_operator(const ComplexMatrix& op, const SubsystemLayout& layout,
                             const std::vector<std::string>& targets);

struct Event {
  std::string label;
  ComplexMatrix unitary;
  std::vector<std::string> targets;  // unitary index order follows this list
  std::vector<std::string> frame;    // optional frame declaration for this step
};

struct EventScript {
  TensorState initial;
  std::vector<Event> events;

  void validate() const;
};

ComplexVector apply_unitary(const ComplexVector& psi, const SubsystemLayout& layout, const ComplexMatrix& u,
                            const std::vector<std::string>& targets);
TensorState apply_event(const TensorState& state, const Event& event);

struct SchmidtBranch {
  double coeff = 0.0;
  ComplexVector state_s;    // frame factor, layout order of frame subsystems
  ComplexVector state_env;  // complement, layout order
};

std::vector<SchmidtBranch> schmidt_split(const ComplexVector& psi, const SubsystemLayout& layout,
                                         const std::vector<std::string>& frame);
inline std::vector<SchmidtBranch> schmidt_split(const TensorState& s, const std::vector<std::string>& frame) {
  return schmidt_split(s.amplitudes, s.layout, frame);
}

struct BranchNode {
  std::vector<std::size_t> label;
  double coeff = 1.0;  // conditional amplitude at this step
  double prob = 1.0;   // product of |c|^2 along the path
  std::vector<std::string> frame;
  ComplexVector state_s;
  ComplexVector state_env;
  ComplexVector total;  // state_s (x) state_env in layout order
  std::vector<BranchNode> children;
};

struct BranchTree {
  SubsystemLayout layout;
  std::vector<std::string> frame;
  std::size_t depth = 0;
  BranchNode root;

  std::vector<const BranchNode*> leaves() const;
  std::vector<const BranchNode*> level(std::size_t n) const;
  const BranchNode& find(const std::vector<std::size_t>& label) const;
  double leaf_probability_sum() const;
};

// An empty `frame` uses each event's own declaration.
BranchTree build_branch_tree(const EventScript& script, const std::vector<std::string>& frame);

struct DecoherenceReport {
  bool decoherent = true;
  double max_violation = 0.0;
};

// Environment-state overlaps between distinct branches at `depth` (default: the leaves).
DecoherenceReport decoherence_check(const BranchTree& tree, std::size_t depth = SIZE_MAX);

struct ConsistencyReport {
  bool consistent = false;
  bool joint_decoherent = false;
  bool aligned = false;
  double marginal_defect = 0.0;
  double joint_violation = 0.0;
  std::string diagnostic;
};

ConsistencyReport joint_consistency(const BranchTree& a, const BranchTree& b, const BranchTree& joint);

// C_a = P_a(n) U_n ... P_a(1) U_1 with P the projector on the conditioned total state.
ComplexVector chain_state(const EventScript& script, const BranchTree& tree, const std::vector<std::size_t>& label);
ComplexMatrix chain_operator(const EventScript& script, const BranchTree& tree, const std::vector<std::size_t>& label);
cplx decoherence_functional(const EventScript& script, const BranchTree& tree, const std::vector<std::size_t>& a,
                            const std::vector<std::size_t>& b);
// <Psi|C_a^dag (O_S (x) 1) C_b|Psi>
cplx generalized_functional(const EventScript& script, const BranchTree& tree, const ComplexMatrix& o_s,
                            const std::vector<std::size_t>& a, const std::vector<std::size_t>& b);

struct KraussSet {
  std::vector<ComplexMatrix> ops;  // first the tree's children in label order, then completion
  std::size_t n_children = 0;
};

// Operators <a(n)|U_n|a(n-1)>_env on the frame factor for the children of `parent` (a node at step n-1).
KraussSet krauss_operators(const EventScript& script, const BranchTree& tree, std::size_t step,
                           const std::vector<std::size_t>& parent);
double krauss_completeness_defect(const KraussSet& k);

}  // namespace decolab
