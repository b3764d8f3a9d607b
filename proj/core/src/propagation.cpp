#include "adiapump/propagation.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <sstream>

#include "adiapump/errors.hpp"

namespace adiapump {

int PropagationPlan::steps() const {
  return static_cast<int>(std::ceil(lab_duration() / dt_lab - 1e-12));
}

PropagationPlan PropagationPlan::make_auto(double eps, double ammeter_max,
                                           double switch_width, double cycle_end,
                                           int n_epochs, double tail_factor) {
  PropagationPlan p;
  p.eps = eps;
  p.ammeter = ammeter_max;
  p.switch_width = switch_width;
  p.s1 = cycle_end;
  // Frozen tail: transit of the emitted packets (band-center speed 2) past the
  // farthest ammeter plus dispersion allowance, in lab time.
  const double tail_lab = (ammeter_max + 8.0 * switch_width + 60.0) / 2.0 * tail_factor;
  p.s_end = cycle_end + eps * tail_lab;
  const double T = (p.s_end - p.s0) / eps;
  p.lead_length =
      static_cast<int>(std::ceil(ammeter_max + 8.0 * switch_width + 2.0 * T + p.margin));
  const int n = std::max(16, n_epochs);
  p.measurement_epochs.resize(n + 1);
  for (int i = 0; i <= n; ++i)
    p.measurement_epochs[i] = p.s0 + (p.s_end - p.s0) * i / n;
  return p;
}

void PropagationPlan::validate() const {
  if (eps <= 0 || dt_lab <= 0) throw PlanViolationError("plan: eps and dt must be positive");
  if (s_end < s1 || s1 <= s0) throw PlanViolationError("plan: need s0 < s1 <= s_end");
  const double required = ammeter + 2.0 * lab_duration() + std::max(margin, 50.0);
  if (lead_length < required) {
    std::ostringstream os;
    os << "plan: lead_length " << lead_length << " < " << required
       << " = ammeter + v_max*T + margin; far-wall reflections would reach the ammeter";
    throw PlanViolationError(os.str());
  }
}

void propagate(OrbitalEnsemble& ens, const DrivenPumpModel& model,
               const PropagationPlan& plan,
               const std::function<void(double, const OrbitalEnsemble&)>& observer) {
  plan.validate();
  const int N = model.geometry.with_lead_length(plan.lead_length).total_sites();
  if (ens.orbitals.rows() != N)
    throw PlanViolationError("propagate: ensemble dimension does not match the plan lattice");

  const int nsteps = plan.steps();
  const double dt = plan.lab_duration() / nsteps;
  const cplx ihalf(0.0, dt / 2.0);

  size_t next_epoch = 0;
  auto emit = [&](double s_now) {
    while (next_epoch < plan.measurement_epochs.size() &&
           plan.measurement_epochs[next_epoch] <= s_now + 1e-12) {
      if (observer) observer(plan.measurement_epochs[next_epoch], ens);
      ++next_epoch;
    }
  };
  emit(plan.s0);

  // Cayley matrix A(s) = 1 + i (dt/2) H(s), assembled with structural slots
  // for every pump entry and coupling so the sparsity pattern is epoch
  // independent; the symbolic factorization is then reused across steps.
  const LatticeGeometry geo = model.geometry.with_lead_length(plan.lead_length);
  const int m = geo.pump_sites;
  const int L = plan.lead_length;
  auto assemble_cayley = [&](double s) {
    const Eigen::MatrixXcd h = model.pump_block(s);
    const Eigen::VectorXcd c = model.coupling_values(s);
    std::vector<Eigen::Triplet<cplx>> trip;
    trip.reserve(static_cast<size_t>(N) * 3 + static_cast<size_t>(m) * m);
    for (int p = 0; p < m; ++p)
      for (int q = 0; q < m; ++q)
        trip.emplace_back(p, q, (p == q ? 1.0 : 0.0) + ihalf * h(p, q));
    for (int j = 0; j < geo.n_leads; ++j) {
      for (int x = 1; x <= L; ++x) {
        const int i = geo.lead_index(j, x);
        trip.emplace_back(i, i, 1.0 + ihalf * DrivenPumpModel::kLeadOnsite);
        if (x < L) {
          trip.emplace_back(i, i + 1, ihalf * -DrivenPumpModel::kLeadHopping);
          trip.emplace_back(i + 1, i, ihalf * -DrivenPumpModel::kLeadHopping);
        }
      }
      trip.emplace_back(geo.pump_index(geo.attach_map[j]), geo.lead_index(j, 1),
                        ihalf * c(j));
      trip.emplace_back(geo.lead_index(j, 1), geo.pump_index(geo.attach_map[j]),
                        ihalf * std::conj(c(j)));
    }
    SparseCplx A(N, N);
    A.setFromTriplets(trip.begin(), trip.end());
    A.makeCompressed();
    return A;
  };

  Eigen::SparseLU<SparseCplx> lu;
  bool analyzed = false;
  for (int step = 0; step < nsteps; ++step) {
    const double s_mid = plan.s0 + plan.eps * (step + 0.5) * dt;
    const SparseCplx A = assemble_cayley(s_mid);
    if (!analyzed) {
      lu.analyzePattern(A);
      analyzed = true;
    }
    lu.factorize(A);
    if (lu.info() != Eigen::Success)
      throw LinearSolveError("propagate: sparse LU factorization failed");
    // 1 - i(dt/2)H = 2 - A
    const Eigen::MatrixXcd B = 2.0 * ens.orbitals - A * ens.orbitals;
    ens.orbitals = lu.solve(B);
    if (lu.info() != Eigen::Success)
      throw LinearSolveError("propagate: sparse solve failed");
    emit(plan.s0 + plan.eps * (step + 1) * dt);
  }
}

std::vector<OrbitalEnsemble> propagate_snapshots(const OrbitalEnsemble& initial,
                                                 const DrivenPumpModel& model,
                                                 const PropagationPlan& plan) {
  std::vector<OrbitalEnsemble> out;
  OrbitalEnsemble ens = initial;
  propagate(ens, model, plan, [&](double, const OrbitalEnsemble& e) { out.push_back(e); });
  return out;
}

ChargeTrace measure_pumped_charge(const DrivenPumpModel& model, const SpectralDensity& rho,
                                  const PropagationPlan& plan,
                                  const std::vector<CurrentOperator>& ops) {
  plan.validate();
  rho.validate();
  const int nops = static_cast<int>(ops.size());
  const SparseCplx H0 = frozen_hamiltonian(model, plan.s0, true, plan.lead_length);
  OrbitalEnsemble ens = fermi_sea(H0, rho);

  ChargeTrace tr;
  tr.baseline.resize(nops);
  Eigen::VectorXd q_start(nops);
  for (int k = 0; k < nops; ++k) {
    // rho(H_-) commutes with the frozen H, so the equilibrium current is a
    // constant; one evaluation defines the baseline for the whole run.
    tr.baseline(k) = ops[k].expectation(ens.orbitals, ens.weights, &H0) / plan.eps;
    q_start(k) = ops[k].box_charge(ens.orbitals, ens.weights);
  }
  const Eigen::VectorXd norms0 = ens.norms();

  std::vector<double> s_rec;
  std::vector<Eigen::VectorXd> raw_rec;
  propagate(ens, model, plan, [&](double s, const OrbitalEnsemble& e) {
    const SparseCplx Hs = frozen_hamiltonian(model, s, true, plan.lead_length);
    Eigen::VectorXd row(nops);
    for (int k = 0; k < nops; ++k)
      row(k) = ops[k].expectation(e.orbitals, e.weights, &Hs) / plan.eps;
    s_rec.push_back(s);
    raw_rec.push_back(row);
  });

  tr.norm_drift = (ens.norms() - norms0).cwiseAbs().maxCoeff();
  tr.s = s_rec;
  tr.raw.resize(s_rec.size(), nops);
  tr.subtracted.resize(s_rec.size(), nops);
  for (size_t i = 0; i < s_rec.size(); ++i) {
    tr.raw.row(i) = raw_rec[i].transpose();
    tr.subtracted.row(i) = (raw_rec[i] - tr.baseline).transpose();
  }

  tr.cycle_total.resize(nops);
  tr.cycle_total_trace.resize(nops);
  const double T = plan.lab_duration();
  for (int k = 0; k < nops; ++k) {
    const double q_end = ops[k].box_charge(ens.orbitals, ens.weights);
    tr.cycle_total(k) = (q_end - q_start(k)) - T * plan.eps * tr.baseline(k);
    double acc = 0.0;
    for (size_t i = 0; i + 1 < s_rec.size(); ++i)
      acc += 0.5 * (s_rec[i + 1] - s_rec[i]) *
             (tr.subtracted(i, k) + tr.subtracted(i + 1, k));
    tr.cycle_total_trace(k) = acc;
  }
  return tr;
}

}  // namespace adiapump
