#include "decolab/unravel.hpp"

#include "decolab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace decolab {

void LindbladModel::validate() const {
  require_square(H, "LindbladModel H");
  const auto n = H.rows();
  if (n < 1) throw Error("LindbladModel: dimension must be positive");
  if (hermiticity_defect(H) > 1e-10) throw Error("LindbladModel: H is not Hermitian");
  const auto k = static_cast<Eigen::Index>(F.size());
  if (r.rows() != k || r.cols() != k) throw Error("LindbladModel: rate matrix size must equal operator count");
  for (const auto& f : F)
    if (f.rows() != n || f.cols() != n) throw Error("LindbladModel: operator shape differs from H");
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) {
      cplx ip = (F[a].adjoint() * F[b]).trace();
      if (std::abs(ip - cplx(a == b ? 1.0 : 0.0)) > 1e-10)
        throw Error("LindbladModel: operators are not Hilbert-Schmidt orthonormal");
    }
  if (k > 0) {
    if (hermiticity_defect(r) > 1e-10) throw Error("LindbladModel: rate matrix is not Hermitian");
    RealVector ev = hermitian_eigenvalues(r);
    if (ev[0] < -1e-10) {
      std::ostringstream os;
      os << "LindbladModel: rate matrix is not positive semidefinite (eigenvalue " << ev[0] << ")";
      throw Error(os.str());
    }
  }
}

LindbladModel LindbladModel::random(std::size_t n, RngStream& rng, std::size_t n_ops, double rate_scale) {
  if (n < 2) throw Error("random model needs dimension >= 2");
  if (n_ops == 0) n_ops = n * n;
  if (n_ops > n * n) throw Error("random model: at most n^2 orthonormal operators exist");
  LindbladModel m;
  m.H = random_hermitian(n, rng);
  const auto d = static_cast<Eigen::Index>(n);
  for (std::size_t a = 0; a < n_ops; ++a) {
    ComplexMatrix f(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) f(i, j) = cplx(rng.gaussian(), rng.gaussian());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& g : m.F) f -= (g.adjoint() * f).trace() * g;
    f /= std::sqrt((f.adjoint() * f).trace().real());
    m.F.push_back(f);
  }
  const auto k = static_cast<Eigen::Index>(n_ops);
  ComplexMatrix g(k, k);
  for (Eigen::Index i = 0; i < k; ++i)
    for (Eigen::Index j = 0; j < k; ++j) g(i, j) = cplx(rng.gaussian(), rng.gaussian());
  ComplexMatrix r = g * g.adjoint();
  r *= static_cast<double>(n) * rate_scale / r.trace().real();
  m.r = 0.5 * (r + r.adjoint());
  return m;
}

LindbladModel LindbladModel::position(const LocalizationParams& params, const Grid1D& grid) {
  params.validate();
  const auto n = static_cast<Eigen::Index>(grid.n_points);
  LindbladModel m;
  RealVector k = grid.wavenumbers();
  m.H = ComplexMatrix::Zero(n, n);
  ComplexVector col(n);
  for (Eigen::Index c = 0; c < n; ++c) {
    col.setZero();
    col[c] = 1.0;
    fft(col);
    for (Eigen::Index j = 0; j < n; ++j) col[j] *= k[j] * k[j] / (2.0 * params.mass);
    ifft(col);
    m.H.col(c) = col;
    m.H(c, c) += params.potential.value(grid.x(static_cast<std::size_t>(c)), params.mass);
  }
  m.H = 0.5 * (m.H + m.H.adjoint());
  RealVector x = grid.positions();
  const double norm = x.norm();
  if (!(norm > 0.0)) throw Error("position model: grid coordinates are all zero");
  m.F.push_back((x / norm).cast<cplx>().asDiagonal().toDenseMatrix());
  m.r = ComplexMatrix::Constant(1, 1, cplx(2.0 * params.lambda_loc * norm * norm));
  return m;
}

double JumpDecomposition::total_rate() const {
  double s = 0.0;
  for (double v : rates) s += v;
  return s;
}

ComplexMatrix adapted_basis(const ComplexVector& psi) {
  const auto n = psi.size();
  if (n < 1) throw Error("adapted_basis: empty state");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw Error("adapted_basis: state is not normalized");
  const cplx last = psi[n - 1];
  const cplx phase = std::abs(last) > 0.0 ? last / std::abs(last) : cplx(1.0);
  // Reflection maps psi to -phase e_N; the scalar factor makes the image exactly e_N.
  ComplexVector u = psi;
  u[n - 1] += phase;
  ComplexMatrix b = ComplexMatrix::Identity(n, n) - (2.0 / u.squaredNorm()) * u * u.adjoint();
  return (-std::conj(phase)) * b;
}

namespace {

constexpr double kZeroRate = 1e-12;

// Pieces of the decomposition needed both for full matrices and for the trajectory fast path.
struct BranchData {
  ComplexMatrix adapter;
  std::vector<ComplexVector> chi;  // J_k psi, |chi_k|^2 = rate_k
  std::vector<double> rates;
  ComplexVector xi;                // sum r_{mu nu} (F_mu psi)_perp conj<F_nu>
  ComplexVector q_psi;             // Q psi, Q = sum r_{mu nu} F_nu^dag F_mu
  double r_nn = 0.0;               // sum r_{mu nu} <F_mu> conj<F_nu>
  double r_total = 0.0;
};

BranchData branch_data(const LindbladModel& model, const ComplexVector& psi) {
  const auto n = psi.size();
  const auto k = static_cast<Eigen::Index>(model.F.size());
  BranchData d;
  d.adapter = adapted_basis(psi);
  d.q_psi = ComplexVector::Zero(n);
  d.xi = ComplexVector::Zero(n);
  if (k == 0) return d;
  ComplexMatrix v(n, k);
  ComplexVector f(k);
  for (Eigen::Index a = 0; a < k; ++a) {
    v.col(a) = model.F[static_cast<std::size_t>(a)] * psi;
    f[a] = psi.dot(v.col(a));
  }
  ComplexMatrix w = v - psi * f.transpose();
  ComplexMatrix rv = v * model.r;  // column nu: sum_mu r_{mu nu} v_mu
  for (Eigen::Index b = 0; b < k; ++b) d.q_psi += model.F[static_cast<std::size_t>(b)].adjoint() * rv.col(b);
  d.xi = w * (model.r * f.conjugate());
  d.r_nn = (f.transpose() * model.r * f.conjugate())(0, 0).real();

  ComplexMatrix bw = (d.adapter * w).topRows(n - 1);
  ComplexMatrix block = bw * model.r * bw.adjoint();
  if (n == 1) return d;
  EigenDecomposition eig = hermitian_eig(0.5 * (block + block.adjoint()), 1e-8);
  const double scale = std::max(1.0, eig.values.cwiseAbs().maxCoeff());
  if (eig.values[0] < -1e-10 * scale) {
    std::ostringstream os;
    os << "rate matrix is not positive semidefinite on this state (eigenvalue " << eig.values[0] << ")";
    throw Error(os.str());
  }
  ComplexMatrix adj = d.adapter.adjoint();
  for (Eigen::Index c = 0; c < eig.values.size(); ++c) {
    const double lam = eig.values[c];
    if (lam < kZeroRate) continue;
    ComplexVector chi = std::sqrt(lam) * (adj.leftCols(n - 1) * eig.vectors.col(c));
    d.chi.push_back(std::move(chi));
    d.rates.push_back(lam);
    d.r_total += lam;
  }
  return d;
}

ComplexVector heff_apply(const LindbladModel& model, const BranchData& d, const ComplexVector& psi) {
  ComplexVector a = d.q_psi - 2.0 * d.xi - (d.r_nn + d.r_total) * psi;
  return model.H * psi - 0.5 * kI * a;
}

void check_state(const LindbladModel& model, const ComplexVector& psi, const char* what) {
  if (static_cast<std::size_t>(psi.size()) != model.dim())
    throw Error(std::string(what) + ": state dimension differs from model");
  if (std::abs(psi.norm() - 1.0) > 1e-10) throw Error(std::string(what) + ": state is not normalized");
}

}  // namespace

JumpDecomposition adapt_and_decompose(const LindbladModel& model, const ComplexVector& psi) {
  model.validate();
  check_state(model, psi, "adapt_and_decompose");
  BranchData d = branch_data(model, psi);
  const auto n = psi.size();
  JumpDecomposition out;
  out.adapter = d.adapter;
  out.rates = d.rates;
  for (const auto& chi : d.chi) out.jump_ops.push_back(chi * psi.adjoint());
  ComplexMatrix q = ComplexMatrix::Zero(n, n);
  for (std::size_t a = 0; a < model.F.size(); ++a)
    for (std::size_t b = 0; b < model.F.size(); ++b) {
      cplx rab = model.r(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b));
      if (rab != cplx(0.0)) q += rab * model.F[b].adjoint() * model.F[a];
    }
  ComplexMatrix a = q - 2.0 * d.xi * psi.adjoint() - (d.r_nn + d.r_total) * ComplexMatrix::Identity(n, n);
  out.H_eff = model.H - 0.5 * kI * a;
  return out;
}

BranchStep branch_step(const LindbladModel& model, const ComplexVector& psi, double dt, RngStream& rng) {
  check_state(model, psi, "branch_step");
  if (!(dt > 0.0)) throw Error("branch_step: dt must be positive");
  BranchData d = branch_data(model, psi);
  if (d.r_total * dt > 0.1) {
    std::ostringstream os;
    os << "branch_step: total jump probability " << d.r_total * dt << " exceeds 0.1";
    throw Error(os.str());
  }
  BranchStep out;
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t j = 0; j < d.rates.size(); ++j) {
    acc += d.rates[j] * dt;
    if (u < acc) {
      out.psi = d.chi[j] / d.chi[j].norm();
      out.jumped = static_cast<int>(j);
      return out;
    }
  }
  out.psi = psi - kI * dt * heff_apply(model, d, psi);
  out.psi /= out.psi.norm();
  return out;
}

namespace {

struct Channels {
  ComplexMatrix h;
  std::vector<ComplexMatrix> l;
  ComplexMatrix sum_ll;
};

Channels channels(const LindbladModel& model) {
  Channels c;
  c.h = model.H;
  const auto n = model.H.rows();
  c.sum_ll = ComplexMatrix::Zero(n, n);
  const auto k = static_cast<Eigen::Index>(model.F.size());
  if (k == 0) return c;
  EigenDecomposition eig = hermitian_eig(model.r, 1e-8);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double g = eig.values[i];
    if (g < kZeroRate) continue;
    ComplexMatrix l = ComplexMatrix::Zero(n, n);
    for (Eigen::Index a = 0; a < k; ++a) l += eig.vectors(a, i) * model.F[static_cast<std::size_t>(a)];
    l *= std::sqrt(g);
    c.sum_ll += l.adjoint() * l;
    c.l.push_back(std::move(l));
  }
  return c;
}

ComplexMatrix rhs(const Channels& c, const ComplexMatrix& rho) {
  ComplexMatrix out = -kI * (c.h * rho - rho * c.h) - 0.5 * (c.sum_ll * rho + rho * c.sum_ll);
  for (const auto& l : c.l) out += l * rho * l.adjoint();
  return out;
}

ComplexMatrix rk4(const Channels& c, ComplexMatrix y, double t_final, double dt) {
  const auto steps = static_cast<long>(std::max(1.0, std::ceil(t_final / dt - 1e-9)));
  const double h = t_final / static_cast<double>(steps);
  for (long s = 0; s < steps; ++s) {
    ComplexMatrix k1 = rhs(c, y);
    ComplexMatrix k2 = rhs(c, y + 0.5 * h * k1);
    ComplexMatrix k3 = rhs(c, y + 0.5 * h * k2);
    ComplexMatrix k4 = rhs(c, y + h * k3);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return y;
}

}  // namespace

ComplexMatrix lindblad_rhs(const LindbladModel& model, const ComplexMatrix& rho) {
  return rhs(channels(model), rho);
}

ComplexMatrix integrate_lindblad(const LindbladModel& model, const ComplexMatrix& rho0, double t_final, double dt) {
  model.validate();
  if (!(t_final >= 0.0) || !(dt > 0.0)) throw Error("integrate_lindblad: bad time arguments");
  if (t_final == 0.0) return rho0;
  return rk4(channels(model), rho0, t_final, dt);
}

double verify_unravelling(const LindbladModel& model, const ComplexVector& psi, double dt) {
  model.validate();
  check_state(model, psi, "verify_unravelling");
  BranchData d = branch_data(model, psi);
  ComplexVector trunk = psi - kI * dt * heff_apply(model, d, psi);
  trunk /= trunk.norm();
  ComplexMatrix mix = (1.0 - d.r_total * dt) * (trunk * trunk.adjoint());
  for (const auto& chi : d.chi) mix += dt * (chi * chi.adjoint());
  ComplexMatrix exact = rk4(channels(model), psi * psi.adjoint(), dt, dt);
  return (mix - exact).cwiseAbs().maxCoeff();
}

UnravelEnsemble unravel_ensemble(const LindbladModel& model, const ComplexVector& psi0, double t_final, double dt,
                                 std::size_t n_traj, std::uint64_t seed, std::size_t threads) {
  model.validate();
  check_state(model, psi0, "unravel_ensemble");
  if (n_traj == 0) throw Error("unravel_ensemble: need at least one trajectory");
  const auto steps = static_cast<long>(std::llround(t_final / dt));
  std::vector<ComplexVector> finals(n_traj);
  std::vector<std::size_t> jumps(n_traj, 0);
  parallel_for(
      n_traj,
      [&](std::size_t i) {
        RngStream rng(seed, i);
        ComplexVector psi = psi0;
        std::size_t count = 0;
        for (long s = 0; s < steps; ++s) {
          BranchStep b = branch_step(model, psi, dt, rng);
          psi = std::move(b.psi);
          if (b.jumped >= 0) ++count;
        }
        finals[i] = std::move(psi);
        jumps[i] = count;
      },
      threads);
  UnravelEnsemble out;
  out.n_traj = n_traj;
  const auto n = psi0.size();
  out.mean_rho = ComplexMatrix::Zero(n, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n_traj; ++i) {
    out.mean_rho += finals[i] * finals[i].adjoint();
    total += static_cast<double>(jumps[i]);
  }
  out.mean_rho /= static_cast<double>(n_traj);
  out.mean_jumps = total / static_cast<double>(n_traj);
  return out;
}

}  // namespace decolab
