#pragma once

#include "decolab/frames.hpp"

#include <map>
#include <string>
#include <vector>

namespace decolab {

// Device pointer convention: qutrit index 0 = ready, 1 = outcome +1, 2 = outcome -1.
// Qubit index 0 = z+, 1 = z-.
ComplexMatrix cyclic_shift(std::size_t dim, std::size_t by);
// Unitary on (system (x) device [(x) record qubit]) sending the device from ready to +/-
// when the system is in `plus`/`minus`; the record qubit flips on outcome -1.
ComplexMatrix measurement_unitary(const ComplexVector& plus, const ComplexVector& minus, bool record);
ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b);

// +1, -1, or 0 for the ready state; throws when the device is not in a pointer state.
int read_pointer(const BranchNode& node, const SubsystemLayout& layout, const std::string& device);

// Probability of each combination of pointer readings; readings are (device, tree level).
std::map<std::vector<int>, double> pointer_table(const BranchTree& tree,
                                                 const std::vector<std::pair<std::string, std::size_t>>& readings);

struct Assertion {
  std::string name;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  bool lower_bound = false;  // pass means actual >= expected
};

struct FrameResult {
  std::string name;
  BranchTree tree;
  DecoherenceReport decoherence;
};

struct ScenarioReport {
  std::string scenario;
  std::map<std::string, double> parameters;
  EventScript script;
  std::vector<FrameResult> frames;
  std::map<std::string, ConsistencyReport> consistency;
  std::map<std::string, double> values;
  std::vector<Assertion> assertions;

  bool passed() const;
  const FrameResult& frame(const std::string& name) const;
  void check(const std::string& name, double expected, double actual, double tol);
  void check_true(const std::string& name, bool condition);
};

EventScript epr_script();
EventScript wigner_script(double phi);
EventScript chsh_script(double theta);
EventScript frauchiger_renner_script();

ScenarioReport run_epr();
ScenarioReport run_wigner(double phi);
ScenarioReport run_chsh(double theta);
ScenarioReport run_frauchiger_renner();

// CHSH combination of the F (x) Q correlators in the state after the friends' measurements.
double chsh_value(const ComplexVector& state, const SubsystemLayout& layout);

}  // namespace decolab
