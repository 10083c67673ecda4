#include "decolab/numerics.hpp"
#include "decolab/parallel.hpp"

#include <cmath>

#include "doctest.h"

using namespace decolab;

namespace {

// Direct O(n^2) transform as the reference.
ComplexVector naive_dft(const ComplexVector& x) {
  const auto n = x.size();
  ComplexVector out = ComplexVector::Zero(n);
  for (Eigen::Index k = 0; k < n; ++k)
    for (Eigen::Index j = 0; j < n; ++j)
      out[k] += x[j] * std::polar(1.0, -2.0 * kPi * double(j * k) / double(n));
  return out;
}

}  // namespace

TEST_CASE("fft matches the direct transform and inverts") {
  RngStream rng(3, 0);
  for (std::size_t n : {1u, 2u, 8u, 64u, 256u}) {
    ComplexVector x = random_state(n, rng);
    ComplexVector y = x;
    fft(y);
    CHECK((y - naive_dft(x)).cwiseAbs().maxCoeff() < 1e-12);
    ifft(y);
    CHECK((y - x).cwiseAbs().maxCoeff() < 1e-14);
  }
}

TEST_CASE("fft rejects sizes that are not powers of two") {
  ComplexVector x = ComplexVector::Ones(12);
  CHECK_THROWS_AS(fft(x), Error);
  CHECK(is_power_of_two(1024));
  CHECK_FALSE(is_power_of_two(0));
  CHECK_FALSE(is_power_of_two(96));
}

TEST_CASE("spectral derivative of a periodic plane wave") {
  const Grid1D g = Grid1D::centered(128, 0.1);
  const double k = 2.0 * kPi * 5.0 / g.length();
  ComplexVector v(128);
  for (std::size_t j = 0; j < 128; ++j) v[static_cast<Eigen::Index>(j)] = std::polar(1.0, k * g.x(j));
  ComplexVector d1 = spectral_derivative(v, g, 1);
  ComplexVector d2 = spectral_derivative(v, g, 2);
  CHECK((d1 - kI * k * v).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((d2 + k * k * v).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("grid geometry") {
  const Grid1D g = Grid1D::centered(8, 0.5, 1.0);
  CHECK(g.length() == doctest::Approx(4.0));
  CHECK(g.center() == doctest::Approx(1.0));
  CHECK(g.x(1) - g.x(0) == doctest::Approx(0.5));
  RealVector k = g.wavenumbers();
  CHECK(k[0] == 0.0);
  CHECK(k[1] == doctest::Approx(2.0 * kPi / 4.0));
  CHECK(k[7] == doctest::Approx(-2.0 * kPi / 4.0));
}

TEST_CASE("hermitian eigensystem reconstructs the matrix") {
  RngStream rng(5, 1);
  ComplexMatrix h = random_hermitian(6, rng);
  EigenDecomposition e = hermitian_eig(h);
  ComplexMatrix back = e.vectors * e.values.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  CHECK((back - h).cwiseAbs().maxCoeff() < 1e-12);
  for (Eigen::Index i = 1; i < e.values.size(); ++i) CHECK(e.values[i - 1] <= e.values[i]);
  ComplexMatrix bad = h;
  bad(0, 1) += 1.0;
  CHECK_THROWS_AS(hermitian_eig(bad), Error);
}

TEST_CASE("random unitary and state are normalized") {
  RngStream rng(9, 2);
  ComplexMatrix u = random_unitary(5, rng);
  CHECK((u.adjoint() * u - ComplexMatrix::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(random_state(7, rng).norm() == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("rng streams are reproducible and distinct") {
  RngStream a(42, 0), b(42, 0), c(42, 1), d(43, 0);
  bool diff_c = false, diff_d = false;
  for (int i = 0; i < 16; ++i) {
    const double x = a.uniform();
    CHECK(x == b.uniform());
    diff_c = diff_c || x != c.uniform();
    diff_d = diff_d || x != d.uniform();
  }
  CHECK(diff_c);
  CHECK(diff_d);
}

TEST_CASE("uniform draws have the right moments") {
  RngStream rng(1, 0);
  double s = 0.0, s2 = 0.0;
  const int n = 200000;
  bool in_range = true;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    in_range = in_range && u >= 0.0 && u < 1.0;
    s += u;
    s2 += u * u;
  }
  CHECK(in_range);
  CHECK(s / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(s2 / n - (s / n) * (s / n) == doctest::Approx(1.0 / 12.0).epsilon(0.02));
}

TEST_CASE("parallel_for covers each index once and is thread-count independent") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += static_cast<int>(i % 7); }, 4);
  for (std::size_t i = 0; i < hits.size(); ++i) CHECK(hits[i] == static_cast<int>(i % 7));
  CHECK_THROWS_AS(parallel_for(10, [](std::size_t i) { if (i == 3) throw Error("boom"); }, 3), Error);
}
