#include "decolab/master.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace decolab {

double DensityMatrix::purity() const { return (m * m).trace().real(); }

double DensityMatrix::min_eigenvalue() const {
  RealVector ev = hermitian_eigenvalues(0.5 * (m + m.adjoint()), 1e300);
  return ev.size() ? ev[0] : 0.0;
}

DensityMatrix DensityMatrix::pure(const ComplexVector& psi) {
  DensityMatrix d;
  d.m = psi * psi.adjoint();
  return d;
}

DensityMatrix DensityMatrix::pure(const WaveFunction& psi) {
  DensityMatrix d = pure(psi.physical_amplitudes());
  d.grid = psi.grid();
  return d;
}

DensityCheck check_density(const DensityMatrix& rho, double tol, double neg_tol) {
  require_square(rho.m, "check_density");
  DensityCheck c;
  c.hermiticity = hermiticity_defect(rho.m);
  c.trace_error = std::abs(rho.m.trace() - cplx(1.0));
  if (c.hermiticity > tol) {
    std::ostringstream os;
    os << "density matrix lost Hermiticity (defect " << c.hermiticity << ")";
    throw Error(os.str());
  }
  if (c.trace_error > tol) {
    std::ostringstream os;
    os << "density matrix trace drifted by " << c.trace_error;
    throw Error(os.str());
  }
  const auto n = rho.m.rows();
  ComplexMatrix shifted = 0.5 * (rho.m + rho.m.adjoint()) + neg_tol * ComplexMatrix::Identity(n, n);
  Eigen::LLT<ComplexMatrix> llt(shifted);
  if (llt.info() == Eigen::Success) {
    c.min_eigenvalue = -neg_tol;  // lower bound only; exact value not needed on the fast path
    return c;
  }
  c.min_eigenvalue = rho.min_eigenvalue();
  if (c.min_eigenvalue < -neg_tol) {
    std::ostringstream os;
    os << "density matrix lost positivity (min eigenvalue " << c.min_eigenvalue << ")";
    throw Error(os.str());
  }
  return c;
}

namespace {

// H applied from the left: kinetic part spectrally per column, potential diagonally.
ComplexMatrix apply_hamiltonian(const ComplexMatrix& a, const RealVector& kin, const RealVector& pot) {
  ComplexMatrix out = a;
  const auto n = static_cast<std::size_t>(a.rows());
  for (Eigen::Index c = 0; c < a.cols(); ++c) fft_inplace(out.col(c).data(), n, false);
  out = kin.cast<cplx>().asDiagonal() * out;
  for (Eigen::Index c = 0; c < a.cols(); ++c) fft_inplace(out.col(c).data(), n, true);
  out.noalias() += pot.cast<cplx>().asDiagonal() * a;
  return out;
}

struct PositionTables {
  RealVector x, kin, pot;
  ComplexMatrix sep2;  // (x_i - x_j)^2
};

PositionTables tables(const LocalizationParams& params, const Grid1D& grid) {
  PositionTables t;
  t.x = grid.positions();
  RealVector k = grid.wavenumbers();
  t.kin = k.array().square() / (2.0 * params.mass);
  t.pot.resize(t.x.size());
  for (Eigen::Index j = 0; j < t.x.size(); ++j) t.pot[j] = params.potential.value(t.x[j], params.mass);
  t.sep2.resize(t.x.size(), t.x.size());
  for (Eigen::Index j = 0; j < t.x.size(); ++j)
    for (Eigen::Index i = 0; i < t.x.size(); ++i) t.sep2(i, j) = (t.x[i] - t.x[j]) * (t.x[i] - t.x[j]);
  return t;
}

// `hermitian` lets rho H be taken as (H rho)^dagger.
ComplexMatrix rhs_with(const ComplexMatrix& rho, const LocalizationParams& params, const PositionTables& t,
                       bool hermitian = false) {
  ComplexMatrix h_rho = apply_hamiltonian(rho, t.kin, t.pot);
  ComplexMatrix out = hermitian ? ComplexMatrix(-kI * (h_rho - h_rho.adjoint()))
                                : ComplexMatrix(-kI * (h_rho - apply_hamiltonian(rho.adjoint(), t.kin, t.pot).adjoint()));
  if (params.lambda_loc != 0.0) out -= params.lambda_loc * t.sep2.cwiseProduct(rho);
  return out;
}

const Grid1D& grid_of(const DensityMatrix& rho) {
  if (!rho.grid) throw Error("position master equation needs a position-grid density matrix");
  if (rho.grid->n_points != rho.dim()) throw Error("density matrix size differs from its grid");
  return *rho.grid;
}

}  // namespace

ComplexMatrix position_rhs(const ComplexMatrix& rho, const LocalizationParams& params, const Grid1D& grid) {
  require_square(rho, "position_rhs");
  if (static_cast<std::size_t>(rho.rows()) != grid.n_points) throw Error("position_rhs: size differs from grid");
  return rhs_with(rho, params, tables(params, grid));
}

namespace {

DensityMatrix advance(const DensityMatrix& rho, const LocalizationParams& params, double span) {
  params.validate();
  const Grid1D& grid = grid_of(rho);
  if (grid.n_points > 256) throw Error("master integrator is limited to grids of at most 256 points");
  PositionTables t = tables(params, grid);
  const double bound = t.kin.maxCoeff() + t.pot.cwiseAbs().maxCoeff() +
                       params.lambda_loc * grid.length() * grid.length();
  const auto sub = static_cast<long>(std::max(1.0, std::ceil(span * bound / 0.5)));
  const double h = span / static_cast<double>(sub);
  DensityMatrix out = rho;
  ComplexMatrix& y = out.m;
  for (long s = 0; s < sub; ++s) {
    ComplexMatrix k1 = rhs_with(y, params, t, true);
    ComplexMatrix k2 = rhs_with(y + 0.5 * h * k1, params, t, true);
    ComplexMatrix k3 = rhs_with(y + 0.5 * h * k2, params, t, true);
    ComplexMatrix k4 = rhs_with(y + h * k3, params, t, true);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return out;
}

}  // namespace

DensityMatrix lindblad_position_step(const DensityMatrix& rho, const LocalizationParams& params) {
  DensityMatrix out = advance(rho, params, params.dt);
  check_density(out);
  return out;
}

DensityMatrix integrate_position(const DensityMatrix& rho, const LocalizationParams& params, double t_final) {
  if (!(t_final >= 0.0)) throw Error("integrate_position: t_final must be >= 0");
  const auto steps = static_cast<long>(std::llround(t_final / params.dt));
  DensityMatrix out = rho;
  for (long n = 0; n < steps; ++n) {
    try {
      out = lindblad_position_step(out, params);
    } catch (const Error& e) {
      std::ostringstream os;
      os << e.what() << " (master step " << n + 1 << ")";
      throw Error(os.str());
    }
  }
  return out;
}

double trace_distance(const ComplexMatrix& a, const ComplexMatrix& b) {
  require_same_shape(a, b, "trace_distance");
  require_square(a, "trace_distance");
  ComplexMatrix d = a - b;
  RealVector ev = hermitian_eigenvalues(0.5 * (d + d.adjoint()), 1e300);
  return 0.5 * ev.cwiseAbs().sum();
}

}  // namespace decolab
