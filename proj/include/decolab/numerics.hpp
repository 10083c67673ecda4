#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace decolab {

using cplx = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr cplx kI{0.0, 1.0};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniform periodic grid. Coordinates are x0 + j*dx, j = 0..n-1.
struct Grid1D {
  std::size_t n_points = 0;
  double dx = 0.0;
  double x0 = 0.0;

  Grid1D() = default;
  Grid1D(std::size_t n, double spacing, double left);

  double x(std::size_t j) const { return x0 + dx * static_cast<double>(j); }
  double length() const { return dx * static_cast<double>(n_points); }
  double center() const { return x0 + 0.5 * dx * static_cast<double>(n_points); }
  RealVector positions() const;
  // Angular wavenumbers 2*pi*k/(n*dx) in FFT order.
  RealVector wavenumbers() const;

  // Symmetric grid of n points centred on `mid`.
  static Grid1D centered(std::size_t n, double spacing, double mid = 0.0);
};

bool is_power_of_two(std::size_t n);

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b, const char* what);
void require_square(const ComplexMatrix& a, const char* what);
ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexVector matvec(const ComplexMatrix& a, const ComplexVector& v);

// In-place radix-2 transforms. forward: X_k = sum_j x_j exp(-2 pi i jk/n).
// inverse includes the 1/n factor.
void fft_inplace(cplx* data, std::size_t n, bool inverse);
void fft(ComplexVector& v);
void ifft(ComplexVector& v);

ComplexVector spectral_derivative(const ComplexVector& v, const Grid1D& grid, int order);

struct EigenDecomposition {
  RealVector values;     // ascending
  ComplexMatrix vectors; // columns, unitary
};

double hermiticity_defect(const ComplexMatrix& m);
EigenDecomposition hermitian_eig(const ComplexMatrix& m, double tol = 1e-10);
RealVector hermitian_eigenvalues(const ComplexMatrix& m, double tol = 1e-10);

// Deterministic random stream keyed on (seed, stream_id).
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  double uniform();
  double gaussian();
  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_; }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

inline double rng_uniform(RngStream& s) { return s.uniform(); }
inline double rng_gaussian(RngStream& s) { return s.gaussian(); }

// Random test objects.
ComplexMatrix random_hermitian(std::size_t n, RngStream& rng);
ComplexMatrix random_unitary(std::size_t n, RngStream& rng);
ComplexVector random_state(std::size_t n, RngStream& rng);

}  // namespace decolab
