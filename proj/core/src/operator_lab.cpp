#include "adiapump/operator_lab.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "adiapump/errors.hpp"
#include "adiapump/quadrature.hpp"

namespace adiapump {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

Eigen::MatrixXd neumann_laplacian(int n, double h) {
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(n, n);
  const double ih2 = 1.0 / (h * h);
  for (int i = 0; i < n; ++i) {
    H(i, i) = 2.0 * ih2;
    if (i + 1 < n) {
      H(i, i + 1) = -ih2;
      H(i + 1, i) = -ih2;
    }
  }
  H(0, 0) = ih2;  // ghost psi_0 = psi_1
  return H;
}
}  // namespace

HalfLineGrid::HalfLineGrid(int n_sites, double spacing) : n_(n_sites), h_(spacing) {
  if (n_ < 8 || h_ <= 0) throw Error("HalfLineGrid: need n >= 8 and positive spacing");
  H0_ = neumann_laplacian(n_, h_);
  P_ = Eigen::MatrixXcd::Zero(n_, n_);
  for (int i = 0; i + 1 < n_; ++i) {
    P_(i, i + 1) = cplx(0.0, -1.0 / (2.0 * h_));
    P_(i + 1, i) = cplx(0.0, 1.0 / (2.0 * h_));
  }
  Eigen::VectorXd xs(n_);
  for (int i = 0; i < n_; ++i) xs(i) = x(i);
  A0_ = 0.5 * (xs.asDiagonal() * P_ + P_ * xs.asDiagonal());
}

Eigen::MatrixXcd HalfLineGrid::A_exterior(const VProfile& v) const {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(n_, n_);
  for (int i = 0; i + 1 < n_; ++i) {
    const double vv = v(x(i)) + v(x(i + 1));
    A(i, i + 1) = cplx(0.0, -vv / (4.0 * h_));
    A(i + 1, i) = cplx(0.0, vv / (4.0 * h_));
  }
  return A;
}

void HalfLineGrid::ensure_h0_eig() const {
  if (h0_eig_) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H0_);
  h0_eig_ = std::make_shared<std::pair<Eigen::VectorXd, Eigen::MatrixXd>>(
      es.eigenvalues(), es.eigenvectors());
}

void HalfLineGrid::ensure_a0_eig() const {
  if (a0_eig_) return;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(A0_);
  a0_eig_ = std::make_shared<std::pair<Eigen::VectorXd, Eigen::MatrixXcd>>(
      es.eigenvalues(), es.eigenvectors());
}

double HalfLineGrid::h0_norm() const {
  ensure_h0_eig();
  return h0_eig_->first.cwiseAbs().maxCoeff();
}

Eigen::MatrixXd HalfLineGrid::g_of_H0(const std::function<double(double)>& g) const {
  ensure_h0_eig();
  const auto& [E, V] = *h0_eig_;
  Eigen::VectorXd gE(n_);
  for (int i = 0; i < n_; ++i) gE(i) = g(E(i));
  return V * gE.asDiagonal() * V.transpose();
}

Eigen::MatrixXcd HalfLineGrid::f_of_A0(
    const std::function<std::complex<double>(std::complex<double>)>& f,
    double complex_shift) const {
  ensure_a0_eig();
  const auto& [lam, U] = *a0_eig_;
  Eigen::VectorXcd fl(n_);
  for (int i = 0; i < n_; ++i) fl(i) = f(cplx(lam(i), -complex_shift));
  return U * fl.asDiagonal() * U.adjoint();
}

double HalfLineGrid::eigen_residual() const {
  ensure_h0_eig();
  ensure_a0_eig();
  double worst = 0.0;
  // spot-check a spread of eigenpairs
  for (int i = 0; i < n_; i += std::max(1, n_ / 16)) {
    worst = std::max(worst, (H0_ * h0_eig_->second.col(i) -
                             h0_eig_->first(i) * h0_eig_->second.col(i))
                                .norm());
    worst = std::max(worst, (A0_ * a0_eig_->second.col(i) -
                             a0_eig_->first(i) * a0_eig_->second.col(i))
                                .norm());
  }
  return worst;
}

Eigen::MatrixXcd HalfLineGrid::assembled_commutator(int pad) const {
  const HalfLineGrid ext(n_ + pad, h_);
  const Eigen::MatrixXcd C =
      cplx(0.0, 1.0) * (ext.H0() * ext.A0() - ext.A0() * ext.H0());
  return C.topLeftCorner(n_, n_);
}

// ---------------------------------------------------------------------------

namespace {

void check_low_energy(const HalfLineGrid& grid, const std::function<double(double)>& g,
                      double energy_cut) {
  // reject g with significant weight where the lattice dispersion is wrong
  const double cap = 0.25 * 4.0 / (grid.spacing() * grid.spacing());
  const double tail =
      gl_integrate([&](double E) { return std::abs(g(E)); }, std::min(cap, energy_cut),
                   energy_cut, 64);
  const double bulk =
      gl_integrate([&](double E) { return std::abs(g(E)); }, 1e-9, energy_cut, 256);
  if (bulk > 0 && tail / bulk > 1e-6) {
    std::ostringstream os;
    os << "g carries weight " << tail / bulk << " above the low-energy window E < " << cap;
    throw UnsupportedFunctionError(os.str());
  }
}

}  // namespace

IdentityCheck hs_norm_check(const HalfLineGrid& grid, const std::function<double(double)>& g,
                            const std::function<double(double)>& f, double energy_cut) {
  check_low_energy(grid, g, energy_cut);
  const Eigen::MatrixXd gH = grid.g_of_H0(g);
  const Eigen::MatrixXcd fA = grid.f_of_A0(
      [&](cplx z) { return cplx(f(z.real()), 0.0); });
  IdentityCheck out;
  out.lhs = (gH.cast<cplx>() * fA).norm();  // Frobenius
  const double g2 =
      gl_integrate([&](double E) { return g(E) * g(E) / (2.0 * E); }, 1e-12, energy_cut, 512);
  const double f2 = gl_integrate([&](double a) { return f(a) * f(a); }, -60.0, 60.0, 512);
  out.rhs = std::sqrt(g2 * f2 / kTwoPi);
  out.relative_error = std::abs(out.lhs - out.rhs) / std::abs(out.rhs);
  return out;
}

IdentityCheck trace_formula_check(const HalfLineGrid& grid,
                                  const std::function<double(double)>& g,
                                  const std::function<double(double)>& f,
                                  double energy_cut) {
  check_low_energy(grid, g, energy_cut);
  const Eigen::MatrixXd gH = grid.g_of_H0(g);
  const Eigen::MatrixXcd fA = grid.f_of_A0(
      [&](cplx z) { return cplx(f(z.real()), 0.0); });
  IdentityCheck out;
  out.lhs = (gH.cast<cplx>() * fA).trace().real();
  const double g1 =
      gl_integrate([&](double E) { return g(E) / (2.0 * E); }, 1e-12, energy_cut, 512);
  const double f1 = gl_integrate(f, -60.0, 60.0, 512);
  out.rhs = g1 * f1 / kTwoPi;
  const double scale = std::abs(out.rhs) > 1e-12 ? std::abs(out.rhs) : 1.0;
  out.relative_error = std::abs(out.lhs - out.rhs) / scale;
  return out;
}

PullThroughResult pull_through_check(
    const HalfLineGrid& grid,
    const std::function<std::complex<double>(std::complex<double>)>& f,
    double exclusion_fraction) {
  const int n = grid.size();
  const Eigen::MatrixXcd fA = grid.f_of_A0(f, 0.0);
  const Eigen::MatrixXcd fAs = grid.f_of_A0(f, 2.0);
  const Eigen::MatrixXcd H = grid.H0().cast<cplx>();
  const Eigen::MatrixXcd R = H * fA - fAs * H;
  const int lo = static_cast<int>(exclusion_fraction * n);
  const int hi = n - lo;
  PullThroughResult out;
  out.inner_residual = R.block(lo, lo, hi - lo, hi - lo).cwiseAbs().maxCoeff();
  out.relative = out.inner_residual / grid.h0_norm();
  return out;
}

MourreResult mourre_bound(const Eigen::MatrixXcd& H, const Eigen::MatrixXcd& C, double e_lo,
                          double e_hi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  std::vector<int> sel;
  for (int i = 0; i < H.rows(); ++i)
    if (es.eigenvalues()(i) >= e_lo && es.eigenvalues()(i) <= e_hi) sel.push_back(i);
  if (sel.empty()) {
    std::ostringstream os;
    os << "mourre_bound: no eigenvalues of H in [" << e_lo << ", " << e_hi << "]";
    throw EmptyWindowError(os.str());
  }
  Eigen::MatrixXcd W(H.rows(), sel.size());
  for (size_t i = 0; i < sel.size(); ++i) W.col(i) = es.eigenvectors().col(sel[i]);
  Eigen::MatrixXcd comp = W.adjoint() * C * W;
  comp = 0.5 * (comp + comp.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> ec(comp);
  return {ec.eigenvalues().minCoeff(), static_cast<int>(sel.size())};
}

MourreResult mourre_bound_pump(const DrivenPumpModel& model, double s, double e_lo,
                               double e_hi, int lead_length, int pad, const VProfile& v) {
  const int L = lead_length;
  const LatticeGeometry geo_ext = model.geometry.with_lead_length(L + pad);
  const Eigen::MatrixXcd Hext = Eigen::MatrixXcd(frozen_hamiltonian(model, s, true, L + pad));
  const Eigen::MatrixXcd Aext = Eigen::MatrixXcd(exterior_scaling_generator(geo_ext, v));
  const Eigen::MatrixXcd Cext = cplx(0.0, 1.0) * (Hext * Aext - Aext * Hext);

  const LatticeGeometry geo = model.geometry.with_lead_length(L);
  const int N = geo.total_sites();
  std::vector<int> keep(N);
  for (int p = 0; p < geo.pump_sites; ++p) keep[p] = p;
  for (int j = 0; j < geo.n_leads; ++j)
    for (int x = 1; x <= L; ++x)
      keep[geo.lead_index(j, x)] = geo_ext.lead_index(j, x);
  Eigen::MatrixXcd C(N, N);
  for (int r = 0; r < N; ++r)
    for (int c = 0; c < N; ++c) C(r, c) = Cext(keep[r], keep[c]);

  const Eigen::MatrixXcd H = Eigen::MatrixXcd(frozen_hamiltonian(model, s, true, L));
  return mourre_bound(H, C, e_lo, e_hi);
}

}  // namespace adiapump
