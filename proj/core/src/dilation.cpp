#include "adiapump/dilation.hpp"

namespace adiapump {

Eigen::MatrixXcd exterior_scaling_lead_block(int L, const VProfile& v) {
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(L, L);
  for (int x = 1; x < L; ++x) {
    // bond between sites x and x+1 (coordinates measured from the attachment)
    const double vv = v(static_cast<double>(x)) + v(static_cast<double>(x + 1));
    A(x - 1, x) = cplx(0.0, -vv / 4.0);
    A(x, x - 1) = cplx(0.0, vv / 4.0);
  }
  return A;
}

SparseCplx exterior_scaling_generator(const LatticeGeometry& geometry, const VProfile& v) {
  const int L = geometry.lead_length;
  const int N = geometry.total_sites();
  const Eigen::MatrixXcd Ablk = exterior_scaling_lead_block(L, v);
  std::vector<Eigen::Triplet<cplx>> trip;
  for (int j = 0; j < geometry.n_leads; ++j) {
    const int off = geometry.lead_offset(j);
    for (int x = 0; x + 1 < L; ++x) {
      if (Ablk(x, x + 1) != cplx(0.0, 0.0)) {
        trip.emplace_back(off + x, off + x + 1, Ablk(x, x + 1));
        trip.emplace_back(off + x + 1, off + x, Ablk(x + 1, x));
      }
    }
  }
  SparseCplx A(N, N);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  return A;
}

}  // namespace adiapump
