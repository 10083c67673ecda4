#include "decolab/numerics.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace decolab {

bool is_power_of_two(std::size_t n) { return n > 0 && (n & (n - 1)) == 0; }

Grid1D::Grid1D(std::size_t n, double spacing, double left) : n_points(n), dx(spacing), x0(left) {
  if (!is_power_of_two(n)) throw Error("Grid1D: n_points must be a power of two");
  if (!(spacing > 0.0) || !std::isfinite(spacing)) throw Error("Grid1D: dx must be positive");
  if (!std::isfinite(left)) throw Error("Grid1D: x0 must be finite");
}

Grid1D Grid1D::centered(std::size_t n, double spacing, double mid) {
  return Grid1D(n, spacing, mid - 0.5 * spacing * static_cast<double>(n));
}

RealVector Grid1D::positions() const {
  RealVector x(static_cast<Eigen::Index>(n_points));
  for (std::size_t j = 0; j < n_points; ++j) x[static_cast<Eigen::Index>(j)] = this->x(j);
  return x;
}

RealVector Grid1D::wavenumbers() const {
  RealVector k(static_cast<Eigen::Index>(n_points));
  const double dk = 2.0 * kPi / length();
  const auto n = static_cast<std::ptrdiff_t>(n_points);
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    std::ptrdiff_t m = (j < n / 2) ? j : j - n;
    k[j] = dk * static_cast<double>(m);
  }
  return k;
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream os;
    os << what << ": shape mismatch " << a.rows() << "x" << a.cols() << " vs " << b.rows() << "x"
       << b.cols();
    throw Error(os.str());
  }
}

void require_square(const ComplexMatrix& a, const char* what) {
  if (a.rows() != a.cols()) throw Error(std::string(what) + ": matrix is not square");
}

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.cols() != b.rows()) throw Error("matmul: inner dimensions differ");
  return a * b;
}

ComplexVector matvec(const ComplexMatrix& a, const ComplexVector& v) {
  if (a.cols() != v.size()) throw Error("matvec: dimension mismatch");
  return a * v;
}

ComplexVector spectral_derivative(const ComplexVector& v, const Grid1D& grid, int order) {
  if (static_cast<std::size_t>(v.size()) != grid.n_points)
    throw Error("spectral_derivative: vector length differs from grid size");
  if (order != 1 && order != 2) throw Error("spectral_derivative: order must be 1 or 2");
  ComplexVector w = v;
  fft(w);
  const RealVector k = grid.wavenumbers();
  const auto n = w.size();
  for (Eigen::Index j = 0; j < n; ++j) {
    if (order == 1) {
      // Nyquist mode has no odd-derivative partner on a real grid.
      w[j] *= (j == n / 2 && n > 1) ? cplx(0.0) : kI * k[j];
    } else {
      w[j] *= -k[j] * k[j];
    }
  }
  ifft(w);
  return w;
}

double hermiticity_defect(const ComplexMatrix& m) {
  require_square(m, "hermiticity_defect");
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

EigenDecomposition hermitian_eig(const ComplexMatrix& m, double tol) {
  require_square(m, "hermitian_eig");
  if (m.rows() == 0) return {};
  const double defect = hermiticity_defect(m);
  if (defect > tol) {
    std::ostringstream os;
    os << "hermitian_eig: matrix is not Hermitian (max |m - m^dagger| = " << defect << ")";
    throw Error(os.str());
  }
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h);
  if (solver.info() != Eigen::Success) throw Error("hermitian_eig: eigensolver failed");
  EigenDecomposition out{solver.eigenvalues(), solver.eigenvectors()};
  // Phase convention: largest-magnitude component real and positive.
  for (Eigen::Index c = 0; c < out.vectors.cols(); ++c) {
    auto col = out.vectors.col(c);
    const double big = col.cwiseAbs().maxCoeff();
    Eigen::Index pick = 0;
    for (Eigen::Index r = 0; r < col.size(); ++r) {
      if (std::abs(col[r]) >= big * (1.0 - 1e-9)) {
        pick = r;
        break;
      }
    }
    const cplx phase = std::conj(col[pick]) / std::abs(col[pick]);
    col *= phase;
    col[pick] = cplx(col[pick].real(), 0.0);
  }
  return out;
}

RealVector hermitian_eigenvalues(const ComplexMatrix& m, double tol) {
  require_square(m, "hermitian_eigenvalues");
  if (m.rows() == 0) return {};
  const double defect = hermiticity_defect(m);
  if (defect > tol) {
    std::ostringstream os;
    os << "hermitian_eigenvalues: matrix is not Hermitian (defect " << defect << ")";
    throw Error(os.str());
  }
  const ComplexMatrix h = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error("hermitian_eigenvalues: eigensolver failed");
  return solver.eigenvalues();
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_(stream_id) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream_id),
                    static_cast<std::uint32_t>(stream_id >> 32), 0x9e3779b9u};
  engine_.seed(seq);
}

double RngStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RngStream::gaussian() { return normal_(engine_); }

ComplexMatrix random_hermitian(std::size_t n, RngStream& rng) {
  const auto m = static_cast<Eigen::Index>(n);
  ComplexMatrix a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = cplx(rng.gaussian(), rng.gaussian());
  return 0.5 * (a + a.adjoint());
}

ComplexMatrix random_unitary(std::size_t n, RngStream& rng) {
  const auto m = static_cast<Eigen::Index>(n);
  ComplexMatrix a(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) a(i, j) = cplx(rng.gaussian(), rng.gaussian());
  Eigen::HouseholderQR<ComplexMatrix> qr(a);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < m; ++j) {
    const cplx d = r(j, j);
    if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
  }
  return q;
}

ComplexVector random_state(std::size_t n, RngStream& rng) {
  ComplexVector v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = cplx(rng.gaussian(), rng.gaussian());
  return v / v.norm();
}

}  // namespace decolab
