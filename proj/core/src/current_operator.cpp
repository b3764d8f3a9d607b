#include "adiapump/current_operator.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <sstream>

#include "adiapump/ensemble.hpp"
#include "adiapump/errors.hpp"

namespace adiapump {

CurrentOperator CurrentOperator::position(const LatticeGeometry& geometry,
                                          const SparseCplx& H_template, int lead,
                                          double ammeter, SwitchFunction f,
                                          std::optional<SpectralFilter> filter) {
  const int L = geometry.lead_length;
  if (ammeter - f.width < 1.0 || ammeter + f.width > L - 1) {
    std::ostringstream os;
    os << "position current: ammeter " << ammeter << " +- width " << f.width
       << " does not fit inside lead of length " << L;
    throw AmmeterOutOfRangeError(os.str());
  }
  CurrentOperator op;
  op.kind_ = CurrentKind::Position;
  op.lead_ = lead;
  op.ammeter_ = ammeter;
  op.f_ = f;
  op.filter_ = std::move(filter);
  op.geo_ = geometry;
  op.H_ = H_template;
  op.lead_offset_ = geometry.lead_offset(lead);
  op.diag_ = Eigen::VectorXd::Zero(geometry.total_sites());
  for (int x = 1; x <= L; ++x)
    op.diag_(geometry.lead_index(lead, x)) = f.at(static_cast<double>(x) - ammeter);
  return op;
}

CurrentOperator CurrentOperator::dilation(const LatticeGeometry& geometry,
                                          const SparseCplx& H_template, int lead,
                                          double ammeter, CurrentKind kind, SwitchFunction f,
                                          const VProfile& v,
                                          std::optional<SpectralFilter> filter) {
  if (kind == CurrentKind::Position)
    throw Error("CurrentOperator::dilation called with Position kind");
  if (ammeter < f.width)
    throw AmmeterOutOfRangeError("dilation current: need a >= switch width");
  const int L = geometry.lead_length;
  CurrentOperator op;
  op.kind_ = kind;
  op.lead_ = lead;
  op.ammeter_ = ammeter;
  op.f_ = f;
  op.filter_ = std::move(filter);
  op.geo_ = geometry;
  op.H_ = H_template;
  op.lead_offset_ = geometry.lead_offset(lead);

  const Eigen::MatrixXcd Ablk = exterior_scaling_lead_block(L, v);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Ablk);
  op.a_eigenvalues_ = es.eigenvalues();
  op.a_eigenvectors_ = es.eigenvectors();
  const double lam_max = op.a_eigenvalues_.cwiseAbs().maxCoeff();
  if (ammeter + f.width > 0.95 * lam_max) {
    std::ostringstream os;
    os << "dilation current: box edge " << ammeter + f.width
       << " exceeds the usable A spectrum (" << lam_max << ") of a length-" << L << " lead";
    throw AmmeterOutOfRangeError(os.str());
  }
  Eigen::VectorXd fl = Eigen::VectorXd::Zero(L);
  for (int i = 0; i < L; ++i) {
    const double lam = op.a_eigenvalues_(i);
    if (kind == CurrentKind::DilationOut || kind == CurrentKind::DilationSum)
      fl(i) += f.at(lam - ammeter);
    if (kind == CurrentKind::DilationIn || kind == CurrentKind::DilationSum)
      fl(i) += f.at(-lam - ammeter);
  }
  op.Q_lead_ = op.a_eigenvectors_ * fl.asDiagonal() * op.a_eigenvectors_.adjoint();
  return op;
}

Eigen::MatrixXcd CurrentOperator::apply_box(const Eigen::MatrixXcd& block) const {
  if (kind_ == CurrentKind::Position) return diag_.asDiagonal() * block;
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(block.rows(), block.cols());
  const int L = geo_.lead_length;
  out.middleRows(lead_offset_, L) = Q_lead_ * block.middleRows(lead_offset_, L);
  return out;
}

double CurrentOperator::expectation(const Eigen::MatrixXcd& orbitals,
                                    const Eigen::VectorXd& weights,
                                    const SparseCplx* H_epoch) const {
  const SparseCplx& H = H_epoch ? *H_epoch : H_;
  Eigen::MatrixXcd psi = orbitals;
  if (filter_) psi = filter_->apply(H, psi);
  const Eigen::MatrixXcd Hpsi = H * psi;
  const Eigen::MatrixXcd Qpsi = apply_box(psi);
  double acc = 0.0;  // fixed summation order for reproducibility
  for (int m = 0; m < psi.cols(); ++m) {
    const cplx z = Qpsi.col(m).dot(Hpsi.col(m));  // (Q psi)^dag (H psi)
    acc += weights(m) * (2.0 * z.imag());
  }
  return acc;
}

double CurrentOperator::box_charge(const Eigen::MatrixXcd& orbitals,
                                   const Eigen::VectorXd& weights) const {
  const Eigen::MatrixXcd Qpsi = apply_box(orbitals);
  double acc = 0.0;
  for (int m = 0; m < orbitals.cols(); ++m)
    acc += weights(m) * orbitals.col(m).dot(Qpsi.col(m)).real();
  return acc;
}

SparseCplx CurrentOperator::materialize() const {
  const int N = geo_.total_sites();
  std::vector<Eigen::Triplet<cplx>> trip;
  if (kind_ == CurrentKind::Position) {
    // i[H, D]: entries i H_rc (d_c - d_r); exact support on the switch ramp.
    for (int k = 0; k < H_.outerSize(); ++k)
      for (SparseCplx::InnerIterator it(H_, k); it; ++it) {
        const double dd = diag_(it.col()) - diag_(it.row());
        if (dd != 0.0)
          trip.emplace_back(it.row(), it.col(), cplx(0.0, 1.0) * it.value() * dd);
      }
  } else {
    // i[H, Q] with Q on the lead block: support on (lead + attach) rows/cols.
    const int L = geo_.lead_length;
    Eigen::MatrixXcd Qfull = Eigen::MatrixXcd::Zero(N, N);
    Qfull.block(lead_offset_, lead_offset_, L, L) = Q_lead_;
    const Eigen::MatrixXcd HQ = H_ * Qfull;
    const Eigen::MatrixXcd I = cplx(0.0, 1.0) * (HQ - HQ.adjoint());
    for (int r = 0; r < N; ++r)
      for (int c = 0; c < N; ++c)
        if (std::abs(I(r, c)) > 1e-16) trip.emplace_back(r, c, I(r, c));
  }
  SparseCplx M(N, N);
  M.setFromTriplets(trip.begin(), trip.end());
  M.makeCompressed();
  return M;
}

double CurrentOperator::localization_max_beyond(double margin_widths) const {
  const double margin = margin_widths * f_.width;
  if (kind_ == CurrentKind::Position) {
    const SparseCplx I = materialize();
    double worst = 0.0;
    for (int k = 0; k < I.outerSize(); ++k)
      for (SparseCplx::InnerIterator it(I, k); it; ++it) {
        auto dist = [&](int idx) {
          if (idx < geo_.pump_sites || idx < lead_offset_ ||
              idx >= lead_offset_ + geo_.lead_length)
            return std::abs(ammeter_);  // off this lead: distance from the locus is ~a
          const double x = static_cast<double>(idx - lead_offset_ + 1);
          return std::abs(x - ammeter_);
        };
        if (dist(static_cast<int>(it.row())) > margin &&
            dist(static_cast<int>(it.col())) > margin)
          worst = std::max(worst, std::abs(it.value()));
      }
    return worst;
  }
  // Dilation kinds: entries of i[H, Q] in the A_j eigenbasis restricted to the
  // lead block are i Htilde_{mu nu} (D_nu - D_mu); same-side pairs beyond the
  // ramp see identical D and vanish identically.
  const int L = geo_.lead_length;
  Eigen::MatrixXcd Hlead = Eigen::MatrixXcd::Zero(L, L);
  for (int k = 0; k < H_.outerSize(); ++k)
    for (SparseCplx::InnerIterator it(H_, k); it; ++it) {
      const int r = static_cast<int>(it.row()) - lead_offset_;
      const int c = static_cast<int>(it.col()) - lead_offset_;
      if (r >= 0 && r < L && c >= 0 && c < L) Hlead(r, c) = it.value();
    }
  const Eigen::MatrixXcd Ht = a_eigenvectors_.adjoint() * Hlead * a_eigenvectors_;
  Eigen::VectorXd D(L);
  for (int i = 0; i < L; ++i) {
    const double lam = a_eigenvalues_(i);
    double d = 0.0;
    if (kind_ == CurrentKind::DilationOut || kind_ == CurrentKind::DilationSum)
      d += f_.at(lam - ammeter_);
    if (kind_ == CurrentKind::DilationIn || kind_ == CurrentKind::DilationSum)
      d += f_.at(-lam - ammeter_);
    D(i) = d;
  }
  auto spectral_dist = [&](double lam) {
    double d = std::numeric_limits<double>::max();
    if (kind_ == CurrentKind::DilationOut || kind_ == CurrentKind::DilationSum)
      d = std::min(d, std::abs(lam - ammeter_));
    if (kind_ == CurrentKind::DilationIn || kind_ == CurrentKind::DilationSum)
      d = std::min(d, std::abs(-lam - ammeter_));
    return d;
  };
  double worst = 0.0;
  for (int mu = 0; mu < L; ++mu)
    for (int nu = 0; nu < L; ++nu) {
      if (spectral_dist(a_eigenvalues_(mu)) <= margin) continue;
      if (spectral_dist(a_eigenvalues_(nu)) <= margin) continue;
      worst = std::max(worst, std::abs(Ht(mu, nu) * (D(nu) - D(mu))));
    }
  return worst;
}

double current_expectation(const OrbitalEnsemble& ensemble, const CurrentOperator& op,
                           const SparseCplx* H_epoch) {
  return op.expectation(ensemble.orbitals, ensemble.weights, H_epoch);
}

}  // namespace adiapump
