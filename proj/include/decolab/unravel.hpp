#pragma once

#include "decolab/localization.hpp"
#include "decolab/numerics.hpp"

#include <optional>
#include <vector>

namespace decolab {

// d rho/dt = -i[H, rho] + 1/2 sum r_{mu nu} (2 F_mu rho F_nu^dag - F_nu^dag F_mu rho - rho F_nu^dag F_mu)
struct LindbladModel {
  ComplexMatrix H;
  std::vector<ComplexMatrix> F;
  ComplexMatrix r;

  std::size_t dim() const { return static_cast<std::size_t>(H.rows()); }
  void validate() const;

  // Random Hermitian H, `n_ops` Hilbert-Schmidt orthonormal operators (0 means n^2) and a
  // random positive rate matrix with trace n * rate_scale.
  static LindbladModel random(std::size_t n, RngStream& rng, std::size_t n_ops = 0, double rate_scale = 1.0);
  // Position-grid model whose dissipator is Lambda [[x, rho], x]: one operator x/|x|_F.
  static LindbladModel position(const LocalizationParams& params, const Grid1D& grid);
};

struct JumpDecomposition {
  ComplexMatrix H_eff;
  std::vector<ComplexMatrix> jump_ops;
  std::vector<double> rates;
  ComplexMatrix adapter;  // unitary B with B psi = e_N

  double total_rate() const;
};

// Householder unitary mapping psi to the last basis vector.
ComplexMatrix adapted_basis(const ComplexVector& psi);

JumpDecomposition adapt_and_decompose(const LindbladModel& model, const ComplexVector& psi);

struct BranchStep {
  ComplexVector psi;
  int jumped = -1;  // channel index, -1 for the trunk
};

BranchStep branch_step(const LindbladModel& model, const ComplexVector& psi, double dt, RngStream& rng);

// Max-entry difference between the branch mixture after dt and one RK4 master step.
double verify_unravelling(const LindbladModel& model, const ComplexVector& psi, double dt);

ComplexMatrix lindblad_rhs(const LindbladModel& model, const ComplexMatrix& rho);
ComplexMatrix integrate_lindblad(const LindbladModel& model, const ComplexMatrix& rho0, double t_final,
                                 double dt);

struct UnravelEnsemble {
  ComplexMatrix mean_rho;
  std::size_t n_traj = 0;
  double mean_jumps = 0.0;
};

UnravelEnsemble unravel_ensemble(const LindbladModel& model, const ComplexVector& psi0, double t_final, double dt,
                                 std::size_t n_traj, std::uint64_t seed, std::size_t threads = 0);

}  // namespace decolab
