#pragma once

#include "decolab/localization.hpp"
#include "decolab/numerics.hpp"

#include <optional>

namespace decolab {

// Unconditioned state. `grid` is set when the basis is a position grid.
struct DensityMatrix {
  ComplexMatrix m;
  std::optional<Grid1D> grid;

  std::size_t dim() const { return static_cast<std::size_t>(m.rows()); }
  cplx trace() const { return m.trace(); }
  double purity() const;
  double min_eigenvalue() const;

  static DensityMatrix pure(const ComplexVector& psi);
  static DensityMatrix pure(const WaveFunction& psi);
};

struct DensityCheck {
  double hermiticity = 0.0;
  double trace_error = 0.0;
  double min_eigenvalue = 0.0;
};

// Throws when Hermiticity or trace drift beyond `tol` or an eigenvalue falls below -neg_tol.
DensityCheck check_density(const DensityMatrix& rho, double tol = 1e-9, double neg_tol = 1e-8);

// Right-hand side [H, rho]/i + Lambda [[x, rho], x] on the position grid.
ComplexMatrix position_rhs(const ComplexMatrix& rho, const LocalizationParams& params, const Grid1D& grid);

// One step of length params.dt; split into RK4 substeps small enough for accuracy.
DensityMatrix lindblad_position_step(const DensityMatrix& rho, const LocalizationParams& params);
DensityMatrix integrate_position(const DensityMatrix& rho, const LocalizationParams& params, double t_final);

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b);
inline double trace_distance(const DensityMatrix& a, const DensityMatrix& b) { return trace_distance(a.m, b.m); }

}  // namespace decolab
