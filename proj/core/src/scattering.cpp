#include "adiapump/scattering.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "adiapump/errors.hpp"

namespace adiapump {

LeadMode lead_mode(double E, double band_guard) {
  if (!(E > band_guard && E < 4.0 - band_guard)) {
    std::ostringstream os;
    os << "lead_mode: E = " << E << " within " << band_guard << " of a band edge";
    throw BandEdgeError(os.str());
  }
  LeadMode m;
  m.energy = E;
  m.k = std::acos(1.0 - E / 2.0);
  m.velocity = 2.0 * std::sin(m.k);
  return m;
}

double ScatteringMatrix::unitarity_residual() const {
  const Eigen::MatrixXcd R =
      S.adjoint() * S - Eigen::MatrixXcd::Identity(S.rows(), S.cols());
  return R.cwiseAbs().maxCoeff();
}

ScatteringMatrix scattering_matrix(const DrivenPumpModel& model, double s, double E) {
  const LeadMode mode = lead_mode(E);
  const int m = model.geometry.pump_sites;
  const int n = model.geometry.n_leads;
  const Eigen::MatrixXcd h = model.pump_block(s);
  const Eigen::VectorXcd c = model.coupling_values(s);
  const cplx eik(std::cos(mode.k), std::sin(mode.k));
  const cplx emk = std::conj(eik);

  // Unknowns per incident lead i: pump amplitudes psi (m) and outgoing
  // amplitudes S_{.i} (n). Lead site 1 rows reduce, via the ansatz on sites
  // 1 and 2 and the dispersion relation, to
  //   conj(c_j) psi(a_j) + S_ji + delta_ji = 0,
  // and the pump rows carry the incident/outgoing amplitudes on lead site 1.
  const int dim = m + n;
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(dim, dim);
  M.topLeftCorner(m, m) = h - E * Eigen::MatrixXcd::Identity(m, m);
  for (int j = 0; j < n; ++j) {
    const int a = model.geometry.attach_map[j];
    M(a, m + j) += c(j) * eik;
    M(m + j, a) = std::conj(c(j));
    M(m + j, m + j) = 1.0;
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
  lu.setThreshold(1e-10);
  if (lu.rank() < dim) {
    std::ostringstream os;
    os << "scattering_matrix: rank-deficient matching system at s=" << s << ", E=" << E
       << " (bound state at the matching energy)";
    throw SingularMatchingError(os.str());
  }

  Eigen::MatrixXcd rhs = Eigen::MatrixXcd::Zero(dim, n);
  for (int i = 0; i < n; ++i) {
    rhs(model.geometry.attach_map[i], i) -= c(i) * emk;
    rhs(m + i, i) -= 1.0;
  }
  const Eigen::MatrixXcd sol = lu.solve(rhs);

  ScatteringMatrix out;
  out.s = s;
  out.E = E;
  out.mode = mode;
  out.S = sol.bottomRows(n);
  return out;
}

namespace {

// Retarded Green's function of the dressed pump block; shared by the GF route
// and the analytic derivative.
Eigen::MatrixXcd dressed_green(const DrivenPumpModel& model, const Eigen::MatrixXcd& h,
                               const Eigen::VectorXcd& c, const LeadMode& mode,
                               double s, double E) {
  const int m = model.geometry.pump_sites;
  const cplx eik(std::cos(mode.k), std::sin(mode.k));
  Eigen::MatrixXcd A = E * Eigen::MatrixXcd::Identity(m, m) - h;
  for (int j = 0; j < model.geometry.n_leads; ++j) {
    const int a = model.geometry.attach_map[j];
    A(a, a) += eik * std::norm(c(j));  // minus the self-energy -e^{ik}|c|^2
  }
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(A);
  lu.setThreshold(1e-10);
  if (lu.rank() < m) {
    std::ostringstream os;
    os << "scattering_matrix_gf: singular dressed resolvent at s=" << s << ", E=" << E;
    throw SingularMatchingError(os.str());
  }
  return lu.inverse();
}

}  // namespace

ScatteringMatrix scattering_matrix_gf(const DrivenPumpModel& model, double s, double E) {
  const LeadMode mode = lead_mode(E);
  const int n = model.geometry.n_leads;
  const Eigen::MatrixXcd h = model.pump_block(s);
  const Eigen::VectorXcd c = model.coupling_values(s);
  const Eigen::MatrixXcd G = dressed_green(model, h, c, mode, s, E);

  ScatteringMatrix out;
  out.s = s;
  out.E = E;
  out.mode = mode;
  out.S = -Eigen::MatrixXcd::Identity(n, n);
  const cplx iv(0.0, mode.velocity);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i)
      out.S(j, i) += iv * std::conj(c(j)) *
                     G(model.geometry.attach_map[j], model.geometry.attach_map[i]) * c(i);
  return out;
}

SmatrixDerivative smatrix_derivative(const DrivenPumpModel& model, double s, double E,
                                     double step) {
  auto central = [&](double hh) {
    return ((scattering_matrix(model, s + hh, E).S -
             scattering_matrix(model, s - hh, E).S) /
            (2.0 * hh))
        .eval();
  };
  // halve the step until the step vs step/2 stencils agree; stiff epochs
  // (sharp resonance sweeps) need a finer stencil before the gate is an
  // actual instability
  SmatrixDerivative out;
  for (double h = step; h >= step / 16.0 - 1e-300; h /= 2.0) {
    const Eigen::MatrixXcd d1 = central(h);
    const Eigen::MatrixXcd d2 = central(h / 2.0);
    out.dS = (4.0 * d2 - d1) / 3.0;  // Richardson
    out.error_estimate = (d2 - d1).cwiseAbs().maxCoeff();
    // gate relative to the derivative scale with a unit floor (S is O(1));
    // near frozen epochs the derivative is negligible and the stencils
    // disagree only at noise level
    const double scale = std::max(d2.cwiseAbs().maxCoeff(), 1.0);
    if (out.error_estimate / scale <= 1e-4) return out;
  }
  std::ostringstream os;
  os << "smatrix_derivative: stencil estimates still differ by " << out.error_estimate
     << " at the minimum step, s=" << s << ", E=" << E;
  throw DerivativeUnstableError(os.str());
}

Eigen::MatrixXcd smatrix_derivative_analytic(const DrivenPumpModel& model, double s,
                                             double E) {
  const LeadMode mode = lead_mode(E);
  const int n = model.geometry.n_leads;
  const Eigen::MatrixXcd h = model.pump_block(s);
  const Eigen::VectorXcd c = model.coupling_values(s);
  const Eigen::MatrixXcd dh = model.pump_block_derivative(s);
  const Eigen::VectorXcd dc = model.coupling_derivatives(s);
  const Eigen::MatrixXcd G = dressed_green(model, h, c, mode, s, E);
  const cplx eik(std::cos(mode.k), std::sin(mode.k));

  // S = -1 + i v B^dag G B with B[:,i] = c_i e_{a(i)};
  // dG = G (dh + dSigma) G, dSigma_aa = -e^{ik} d|c_j|^2/ds.
  Eigen::MatrixXcd dSigma = Eigen::MatrixXcd::Zero(h.rows(), h.cols());
  for (int j = 0; j < n; ++j) {
    const int a = model.geometry.attach_map[j];
    dSigma(a, a) += -eik * 2.0 * std::real(std::conj(c(j)) * dc(j));
  }
  const Eigen::MatrixXcd dG = G * (dh + dSigma) * G;

  Eigen::MatrixXcd dS = Eigen::MatrixXcd::Zero(n, n);
  const cplx iv(0.0, mode.velocity);
  for (int j = 0; j < n; ++j) {
    const int aj = model.geometry.attach_map[j];
    for (int i = 0; i < n; ++i) {
      const int ai = model.geometry.attach_map[i];
      dS(j, i) = iv * (std::conj(dc(j)) * G(aj, ai) * c(i) +
                       std::conj(c(j)) * dG(aj, ai) * c(i) +
                       std::conj(c(j)) * G(aj, ai) * dc(i));
    }
  }
  return dS;
}

}  // namespace adiapump
