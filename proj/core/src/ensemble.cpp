#include "adiapump/ensemble.hpp"

#include <Eigen/Dense>

namespace adiapump {

double OrbitalEnsemble::gram_residual() const {
  const Eigen::MatrixXcd G = orbitals.adjoint() * orbitals;
  return (G - Eigen::MatrixXcd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff();
}

Eigen::VectorXd OrbitalEnsemble::norms() const {
  return orbitals.colwise().norm();
}

namespace {

bool sparse_is_real(const SparseCplx& H) {
  for (int k = 0; k < H.outerSize(); ++k)
    for (SparseCplx::InnerIterator it(H, k); it; ++it)
      if (it.value().imag() != 0.0) return false;
  return true;
}

}  // namespace

OrbitalEnsemble fermi_sea(const SparseCplx& H_minus,
                          const std::function<double(double)>& occupancy) {
  const int N = static_cast<int>(H_minus.rows());
  Eigen::VectorXd E;
  Eigen::MatrixXcd V;
  if (sparse_is_real(H_minus)) {
    Eigen::MatrixXd Hd = Eigen::MatrixXd::Zero(N, N);
    for (int k = 0; k < H_minus.outerSize(); ++k)
      for (SparseCplx::InnerIterator it(H_minus, k); it; ++it)
        Hd(it.row(), it.col()) = it.value().real();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Hd);
    E = es.eigenvalues();
    V = es.eigenvectors().cast<cplx>();
  } else {
    const Eigen::MatrixXcd Hd(H_minus);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Hd);
    E = es.eigenvalues();
    V = es.eigenvectors();
  }
  std::vector<int> keep;
  for (int m = 0; m < N; ++m)
    if (occupancy(E(m)) != 0.0) keep.push_back(m);
  OrbitalEnsemble ens;
  ens.orbitals.resize(N, keep.size());
  ens.weights.resize(keep.size());
  ens.energies.resize(keep.size());
  for (size_t i = 0; i < keep.size(); ++i) {
    ens.orbitals.col(i) = V.col(keep[i]);
    ens.energies(i) = E(keep[i]);
    ens.weights(i) = occupancy(E(keep[i]));
  }
  return ens;
}

OrbitalEnsemble fermi_sea(const SparseCplx& H_minus, const SpectralDensity& rho) {
  return fermi_sea(H_minus, [&](double lam) { return rho.occupancy(lam); });
}

}  // namespace adiapump
