#pragma once

#include <Eigen/Core>
#include <functional>

#include "adiapump/pump_model.hpp"
#include "adiapump/spectral_density.hpp"

namespace adiapump {

/// Weighted occupied orbitals representing rho(H_minus) on the truncated
/// lattice: orbitals are orthonormal columns, weights[m] = rho(E_m).
struct OrbitalEnsemble {
  Eigen::MatrixXcd orbitals;  // N x M, columns orthonormal
  Eigen::VectorXd weights;
  Eigen::VectorXd energies;

  int size() const { return static_cast<int>(orbitals.cols()); }
  double gram_residual() const;
  Eigen::VectorXd norms() const;
};

/// Diagonalizes the truncated H_minus and keeps orbitals with nonzero
/// occupation rho(E_m). Real Hamiltonians get real eigenvectors (stored as
/// complex), which makes the equilibrium-current identities exact.
OrbitalEnsemble fermi_sea(const SparseCplx& H_minus, const SpectralDensity& rho);

/// Same with a plain occupation function rho(lambda).
OrbitalEnsemble fermi_sea(const SparseCplx& H_minus,
                          const std::function<double(double)>& occupancy);

}  // namespace adiapump
