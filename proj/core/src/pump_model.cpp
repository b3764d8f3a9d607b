#include "adiapump/pump_model.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "adiapump/errors.hpp"

namespace adiapump {

using nlohmann::json;

void DrivenPumpModel::validate_structure() const {
  geometry.validate();
  const int m = geometry.pump_sites;
  if (static_cast<int>(onsite.size()) != m)
    throw ModelInvalidError("pump_block.onsite must have one entry per pump site");
  if (static_cast<int>(couplings.size()) != geometry.n_leads)
    throw ModelInvalidError("couplings must have one entry per lead");
  for (const auto& hop : hoppings) {
    if (hop.i < 0 || hop.i >= m || hop.j < 0 || hop.j >= m || hop.i == hop.j)
      throw ModelInvalidError("pump_block.hoppings: bad site pair");
  }
  const int p = path.dimension();
  auto check_dim = [&](const AffineScalar& a, const char* what) {
    if (a.coeff.size() != 0 && a.coeff.size() != p)
      throw ModelInvalidError(std::string(what) + ": theta coefficient size must match path dimension");
  };
  for (const auto& a : onsite) {
    check_dim(a, "onsite");
    if (std::abs(a.c0.imag()) > 0.0)
      throw ModelInvalidError("onsite energies must be real");
    for (int k = 0; k < a.coeff.size(); ++k)
      if (std::abs(a.coeff(k).imag()) > 0.0)
        throw ModelInvalidError("onsite energies must be real");
  }
  for (const auto& h : hoppings) check_dim(h.amplitude, "hopping");
  for (const auto& c : couplings) check_dim(c, "coupling");
}

Eigen::MatrixXcd DrivenPumpModel::pump_block(double s) const {
  const Eigen::VectorXd th = path.evaluate(s);
  const int m = geometry.pump_sites;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m, m);
  for (int p = 0; p < m; ++p) h(p, p) = onsite[p].value(th).real();
  for (const auto& hop : hoppings) {
    const cplx a = hop.amplitude.value(th);
    h(hop.i, hop.j) += a;
    h(hop.j, hop.i) += std::conj(a);
  }
  return h;
}

Eigen::MatrixXcd DrivenPumpModel::pump_block_derivative(double s) const {
  const Eigen::VectorXd dth = path.derivative(s);
  const int m = geometry.pump_sites;
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m, m);
  for (int p = 0; p < m; ++p) h(p, p) = onsite[p].deriv(dth).real();
  for (const auto& hop : hoppings) {
    const cplx a = hop.amplitude.deriv(dth);
    h(hop.i, hop.j) += a;
    h(hop.j, hop.i) += std::conj(a);
  }
  return h;
}

Eigen::VectorXcd DrivenPumpModel::coupling_values(double s) const {
  const Eigen::VectorXd th = path.evaluate(s);
  Eigen::VectorXcd c(geometry.n_leads);
  for (int j = 0; j < geometry.n_leads; ++j) c(j) = couplings[j].value(th);
  return c;
}

Eigen::VectorXcd DrivenPumpModel::coupling_derivatives(double s) const {
  const Eigen::VectorXd dth = path.derivative(s);
  Eigen::VectorXcd c(geometry.n_leads);
  for (int j = 0; j < geometry.n_leads; ++j) c(j) = couplings[j].deriv(dth);
  return c;
}

bool DrivenPumpModel::is_real() const {
  auto real_affine = [](const AffineScalar& a) {
    if (std::abs(a.c0.imag()) > 0.0) return false;
    for (int k = 0; k < a.coeff.size(); ++k)
      if (std::abs(a.coeff(k).imag()) > 0.0) return false;
    return true;
  };
  for (const auto& h : hoppings)
    if (!real_affine(h.amplitude)) return false;
  for (const auto& c : couplings)
    if (!real_affine(c)) return false;
  return true;
}

SparseCplx frozen_hamiltonian(const DrivenPumpModel& model, double s, bool truncated,
                              int lead_length_override) {
  const int L = lead_length_override > 0 ? lead_length_override : model.geometry.lead_length;
  if (truncated && L < 1)
    throw ModelInvalidError("frozen_hamiltonian: truncated run needs lead_length >= 1");
  const LatticeGeometry geo = model.geometry.with_lead_length(L);
  const int m = geo.pump_sites;
  const int n = geo.n_leads;
  const int N = geo.total_sites();

  const Eigen::MatrixXcd h = model.pump_block(s);
  const Eigen::VectorXcd c = model.coupling_values(s);

  std::vector<Eigen::Triplet<cplx>> trip;
  trip.reserve(static_cast<size_t>(N) * 3 + static_cast<size_t>(m) * m);
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      if (h(p, q) != cplx(0.0, 0.0)) trip.emplace_back(p, q, h(p, q));
  for (int j = 0; j < n; ++j) {
    for (int x = 1; x <= L; ++x) {
      const int i = geo.lead_index(j, x);
      trip.emplace_back(i, i, cplx(DrivenPumpModel::kLeadOnsite, 0.0));
      if (x < L) {
        trip.emplace_back(i, i + 1, cplx(-DrivenPumpModel::kLeadHopping, 0.0));
        trip.emplace_back(i + 1, i, cplx(-DrivenPumpModel::kLeadHopping, 0.0));
      }
    }
    if (c(j) != cplx(0.0, 0.0)) {
      trip.emplace_back(geo.pump_index(geo.attach_map[j]), geo.lead_index(j, 1), c(j));
      trip.emplace_back(geo.lead_index(j, 1), geo.pump_index(geo.attach_map[j]), std::conj(c(j)));
    }
  }
  SparseCplx H(N, N);
  H.setFromTriplets(trip.begin(), trip.end());
  H.makeCompressed();
  return H;
}

SparseCplx hamiltonian_derivative(const DrivenPumpModel& model, double s,
                                  int lead_length_override) {
  const int L = lead_length_override > 0 ? lead_length_override : model.geometry.lead_length;
  const LatticeGeometry geo = model.geometry.with_lead_length(L);
  const int m = geo.pump_sites;
  const int N = geo.total_sites();

  const Eigen::MatrixXcd dh = model.pump_block_derivative(s);
  const Eigen::VectorXcd dc = model.coupling_derivatives(s);

  std::vector<Eigen::Triplet<cplx>> trip;
  for (int p = 0; p < m; ++p)
    for (int q = 0; q < m; ++q)
      if (dh(p, q) != cplx(0.0, 0.0)) trip.emplace_back(p, q, dh(p, q));
  for (int j = 0; j < geo.n_leads; ++j) {
    if (dc(j) != cplx(0.0, 0.0)) {
      trip.emplace_back(geo.pump_index(geo.attach_map[j]), geo.lead_index(j, 1), dc(j));
      trip.emplace_back(geo.lead_index(j, 1), geo.pump_index(geo.attach_map[j]), std::conj(dc(j)));
    }
  }
  SparseCplx dH(N, N);
  dH.setFromTriplets(trip.begin(), trip.end());
  dH.makeCompressed();
  return dH;
}

// ---------------------------------------------------------------------------
// assumption report

bool AssumptionReport::all_structural_pass() const {
  for (const auto& c : checks)
    if (c.checked && !c.pass) return false;
  return true;
}

namespace {

double sparse_max_abs(const SparseCplx& A) {
  double m = 0.0;
  for (int k = 0; k < A.outerSize(); ++k)
    for (SparseCplx::InnerIterator it(A, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

// Entries of H(s)-H(s') outside the pump block and pump-lead coupling slots.
double off_support_max(const DrivenPumpModel& model, const SparseCplx& D,
                       std::string* where) {
  const LatticeGeometry& geo = model.geometry;
  const int m = geo.pump_sites;
  double worst = 0.0;
  for (int k = 0; k < D.outerSize(); ++k)
    for (SparseCplx::InnerIterator it(D, k); it; ++it) {
      const int r = static_cast<int>(it.row());
      const int c = static_cast<int>(it.col());
      bool allowed = (r < m && c < m);
      for (int j = 0; j < geo.n_leads && !allowed; ++j) {
        const int a = geo.pump_index(geo.attach_map[j]);
        const int l1 = geo.lead_index(j, 1);
        allowed = (r == a && c == l1) || (r == l1 && c == a);
      }
      if (!allowed && std::abs(it.value()) > worst) {
        worst = std::abs(it.value());
        if (where) {
          std::ostringstream os;
          os << "entry (" << r << "," << c << ")";
          *where = os.str();
        }
      }
    }
  return worst;
}

}  // namespace

AssumptionReport validate_assumptions(const DrivenPumpModel& model) {
  AssumptionReport rep;
  const int Lcheck = std::max(8, std::min(model.geometry.lead_length, 32));
  const std::vector<double> ss = {-2.5, -0.3, 0.0, 0.13, 0.37, 0.5, 0.71, 0.94};

  // A5: flat before zero.
  {
    AssumptionCheck c{.name = "A5 pump at rest for s<=0"};
    bool ok = model.path.flat_before_zero();
    const auto H0 = frozen_hamiltonian(model, 0.0, true, Lcheck);
    for (double s : {-4.2, -1.0, -1e-9}) {
      const SparseCplx D = frozen_hamiltonian(model, s, true, Lcheck) - H0;
      if (sparse_max_abs(D) != 0.0) ok = false;
    }
    c.pass = ok;
    c.detail = ok ? "theta(s)=theta(0) for s<=0, H(s) bitwise equal to H(0)"
                  : "path varies for s<=0";
    rep.checks.push_back(c);
  }

  // A1: smooth family; path derivative vs central difference and a discrete
  // Lipschitz bound on sampled epochs.
  {
    AssumptionCheck c{.name = "A1 bounded smooth family"};
    double worst_fd = 0.0;
    const double d = 1e-5;
    for (double s : ss) {
      const Eigen::VectorXd fd =
          (model.path.evaluate(s + d) - model.path.evaluate(s - d)) / (2.0 * d);
      worst_fd = std::max(worst_fd, (fd - model.path.derivative(s)).cwiseAbs().maxCoeff());
    }
    double sup_dH = 0.0;
    for (double s : ss)
      sup_dH = std::max(sup_dH, sparse_max_abs(hamiltonian_derivative(model, s, Lcheck)));
    double worst_ratio = 0.0;
    for (size_t i = 0; i + 1 < ss.size(); ++i) {
      const SparseCplx D = frozen_hamiltonian(model, ss[i + 1], true, Lcheck) -
                           frozen_hamiltonian(model, ss[i], true, Lcheck);
      const double ds = ss[i + 1] - ss[i];
      if (ds > 0) worst_ratio = std::max(worst_ratio, sparse_max_abs(D) / ds);
    }
    const bool ok = worst_fd <= 1e-4 && worst_ratio <= 2.0 * sup_dH + 1e-12;
    c.pass = ok;
    std::ostringstream os;
    os << "max |fd - derivative| = " << worst_fd << ", Lipschitz ratio " << worst_ratio
       << " vs sup|dH/ds| " << sup_dH;
    c.detail = os.str();
    rep.checks.push_back(c);
  }

  // A2: automatic on a finite pump block.
  rep.checks.push_back(AssumptionCheck{
      .name = "A2 trace-class pump resolvent", .pass = true,
      .detail = "pump block is finite-dimensional"});

  // A3 + confinement: lead rows fixed, differences supported on pump-adjacent
  // entries only.
  {
    AssumptionCheck c{.name = "A3/confinement changes confined to pump"};
    bool ok = true;
    std::string where;
    for (size_t i = 0; i + 1 < ss.size() && ok; ++i) {
      const SparseCplx D = frozen_hamiltonian(model, ss[i], true, Lcheck) -
                           frozen_hamiltonian(model, ss[i + 1], true, Lcheck);
      if (off_support_max(model, D, &where) != 0.0) ok = false;
    }
    // lead interior template
    const auto H = frozen_hamiltonian(model, 0.42, true, Lcheck);
    const LatticeGeometry geo = model.geometry.with_lead_length(Lcheck);
    for (int j = 0; j < geo.n_leads && ok; ++j)
      for (int x = 2; x < Lcheck && ok; ++x) {
        const int i = geo.lead_index(j, x);
        if (H.coeff(i, i) != cplx(2.0, 0.0) || H.coeff(i, i + 1) != cplx(-1.0, 0.0) ||
            H.coeff(i, i - 1) != cplx(-1.0, 0.0)) {
          ok = false;
          where = "lead interior row " + std::to_string(i);
        }
      }
    c.pass = ok;
    c.detail = ok ? "all differences on pump-adjacent entries, lead template intact"
                  : ("violation at " + where);
    rep.checks.push_back(c);
  }

  // A4 heuristic: scan for in-band pump levels that decouple from every lead.
  // The dressed condition is E = eig(h(s) + Re Sigma(E)) with
  // Re Sigma(E) = -cos k(E) |c_j|^2 on the attachment sites; a root with
  // vanishing level width Gamma(E) signals a bound-state-in-band candidate.
  {
    AssumptionCheck c{.name = "A4 no positive embedded eigenvalues", .checked = false};
    int candidates = 0;
    const int m = model.geometry.pump_sites;
    Eigen::VectorXd prev_gap;
    Eigen::MatrixXcd prev_vecs;
    for (double s : ss) {
      if (s < 0) continue;
      const Eigen::MatrixXcd h = model.pump_block(s);
      const Eigen::VectorXcd cc = model.coupling_values(s);
      const int nE = 200;
      Eigen::VectorXd gap_prev;
      for (int ie = 1; ie < nE; ++ie) {
        const double E = 4.0 * ie / nE;
        if (E <= 1e-3 || E >= 4.0 - 1e-3) continue;
        const double k = std::acos(1.0 - E / 2.0);
        Eigen::MatrixXcd M = h;
        for (int j = 0; j < model.geometry.n_leads; ++j)
          M(model.geometry.attach_map[j], model.geometry.attach_map[j]) +=
              -std::cos(k) * std::norm(cc(j));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
        Eigen::VectorXd gap = es.eigenvalues().array() - E;
        if (gap_prev.size() == m) {
          for (int q = 0; q < m; ++q) {
            if (gap_prev(q) * gap(q) < 0.0) {  // dressed level crosses E
              double width = 0.0;
              for (int j = 0; j < model.geometry.n_leads; ++j)
                width += 2.0 * std::sin(k) *
                         std::norm(cc(j) * es.eigenvectors()(model.geometry.attach_map[j], q));
              if (width < 1e-8) ++candidates;
            }
          }
        }
        gap_prev = gap;
      }
    }
    c.pass = candidates == 0;
    std::ostringstream os;
    os << candidates << " in-band bound-state candidate(s); assumption not certified";
    c.detail = os.str();
    rep.checks.push_back(c);
  }

  return rep;
}

// ---------------------------------------------------------------------------
// JSON input/output

namespace {

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ModelInvalidError("unknown key '" + it.key() + "' in " + where);
  }
}

cplx parse_cplx(const json& j, const std::string& where) {
  if (j.is_number()) return cplx(j.get<double>(), 0.0);
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
    return cplx(j[0].get<double>(), j[1].get<double>());
  throw ModelInvalidError(where + ": expected number or [re, im]");
}

AffineScalar parse_affine(const json& j, int dim, const std::string& where) {
  require_keys(j, {"const", "theta"}, where);
  AffineScalar a;
  if (j.contains("const")) a.c0 = parse_cplx(j["const"], where + ".const");
  if (j.contains("theta")) {
    const auto& arr = j["theta"];
    if (!arr.is_array() || static_cast<int>(arr.size()) != dim)
      throw ModelInvalidError(where + ".theta: expected array of path dimension");
    a.coeff.resize(dim);
    for (int k = 0; k < dim; ++k) a.coeff(k) = parse_cplx(arr[k], where + ".theta");
  }
  return a;
}

json affine_to_json(const AffineScalar& a) {
  json j;
  auto dump_c = [](cplx v) -> json {
    if (v.imag() == 0.0) return v.real();
    return json::array({v.real(), v.imag()});
  };
  j["const"] = dump_c(a.c0);
  if (a.coeff.size() > 0) {
    json arr = json::array();
    for (int k = 0; k < a.coeff.size(); ++k) arr.push_back(dump_c(a.coeff(k)));
    j["theta"] = arr;
  }
  return j;
}

PathTerm parse_term(const json& j, const std::string& where) {
  if (!j.contains("type")) throw ModelInvalidError(where + ": path term needs 'type'");
  const std::string type = j["type"].get<std::string>();
  PathTerm t;
  if (type == "const") {
    require_keys(j, {"type", "value"}, where);
    t.type = PathTerm::Type::Const;
    t.value = j.at("value").get<double>();
  } else if (type == "trig") {
    require_keys(j, {"type", "harmonic", "amplitude", "phase"}, where);
    t.type = PathTerm::Type::Trig;
    t.harmonic = j.value("harmonic", 1);
    t.amplitude = j.at("amplitude").get<double>();
    t.phase = j.value("phase", 0.0);
  } else if (type == "pulse") {
    require_keys(j, {"type", "amplitude", "on", "off", "rise"}, where);
    t.type = PathTerm::Type::Pulse;
    t.amplitude = j.at("amplitude").get<double>();
    t.t_on = j.at("on").get<double>();
    t.t_off = j.at("off").get<double>();
    t.rise = j.value("rise", 0.1);
    if (t.rise <= 0) throw ModelInvalidError(where + ": pulse rise must be positive");
  } else {
    throw ModelInvalidError(where + ": unknown path term type '" + type + "'");
  }
  return t;
}

json term_to_json(const PathTerm& t) {
  json j;
  switch (t.type) {
    case PathTerm::Type::Const:
      j["type"] = "const";
      j["value"] = t.value;
      break;
    case PathTerm::Type::Trig:
      j["type"] = "trig";
      j["harmonic"] = t.harmonic;
      j["amplitude"] = t.amplitude;
      j["phase"] = t.phase;
      break;
    case PathTerm::Type::Pulse:
      j["type"] = "pulse";
      j["amplitude"] = t.amplitude;
      j["on"] = t.t_on;
      j["off"] = t.t_off;
      j["rise"] = t.rise;
      break;
  }
  return j;
}

ParameterPath parse_path(const json& j) {
  if (!j.contains("kind")) throw ModelInvalidError("path: missing 'kind'");
  const std::string kind = j["kind"].get<std::string>();
  if (kind == "static") {
    require_keys(j, {"kind", "theta0"}, "path");
    const auto& arr = j.at("theta0");
    Eigen::VectorXd th0(arr.size());
    for (size_t k = 0; k < arr.size(); ++k) th0(static_cast<int>(k)) = arr[k].get<double>();
    return ParameterPath::make_static(th0);
  }
  std::vector<std::vector<PathTerm>> comps;
  const auto& carr = j.at("components");
  if (!carr.is_array() || carr.empty())
    throw ModelInvalidError("path.components: expected non-empty array of term lists");
  for (size_t i = 0; i < carr.size(); ++i) {
    std::vector<PathTerm> terms;
    for (size_t t = 0; t < carr[i].size(); ++t)
      terms.push_back(parse_term(carr[i][t], "path.components[" + std::to_string(i) + "]"));
    comps.push_back(std::move(terms));
  }
  const double period = j.value("period", 1.0);
  if (kind == "cycle") {
    require_keys(j, {"kind", "period", "edge", "turns", "components"}, "path");
    std::optional<int> turns;
    if (j.contains("turns") && !j["turns"].is_null()) turns = j["turns"].get<int>();
    return ParameterPath::make_cycle(std::move(comps), period, j.value("edge", 0.2), turns);
  }
  if (kind == "rawtrig") {
    require_keys(j, {"kind", "period", "components"}, "path");
    return ParameterPath::make_raw_trig(std::move(comps), period);
  }
  throw ModelInvalidError("path: unknown kind '" + kind + "'");
}

json path_to_json(const ParameterPath& p) {
  json j;
  switch (p.kind()) {
    case ParameterPath::Kind::Static: {
      j["kind"] = "static";
      json arr = json::array();
      const Eigen::VectorXd th0 = p.evaluate(0.0);
      for (int k = 0; k < th0.size(); ++k) arr.push_back(th0(k));
      j["theta0"] = arr;
      return j;
    }
    case ParameterPath::Kind::Cycle:
      j["kind"] = "cycle";
      j["period"] = *p.period();
      j["edge"] = p.edge();
      if (p.turns()) j["turns"] = *p.turns();
      break;
    case ParameterPath::Kind::RawTrig:
      j["kind"] = "rawtrig";
      j["period"] = *p.period();
      break;
  }
  json comps = json::array();
  for (const auto& comp : p.components()) {
    json terms = json::array();
    for (const auto& t : comp) terms.push_back(term_to_json(t));
    comps.push_back(terms);
  }
  j["components"] = comps;
  return j;
}

}  // namespace

DrivenPumpModel DrivenPumpModel::from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ModelInvalidError(std::string("model JSON parse failure: ") + e.what());
  }
  require_keys(j, {"n_leads", "pump_sites", "lead_length", "attach_map", "path",
                   "pump_block", "couplings"},
               "model");
  DrivenPumpModel m;
  try {
    m.geometry.n_leads = j.at("n_leads").get<int>();
    m.geometry.pump_sites = j.at("pump_sites").get<int>();
    m.geometry.lead_length = j.value("lead_length", 0);
    for (const auto& a : j.at("attach_map")) m.geometry.attach_map.push_back(a.get<int>());
    m.path = parse_path(j.at("path"));
    const int dim = m.path.dimension();
    const auto& pb = j.at("pump_block");
    require_keys(pb, {"onsite", "hoppings"}, "pump_block");
    for (const auto& o : pb.at("onsite"))
      m.onsite.push_back(parse_affine(o, dim, "pump_block.onsite"));
    if (pb.contains("hoppings"))
      for (const auto& h : pb["hoppings"]) {
        require_keys(h, {"i", "j", "const", "theta"}, "pump_block.hoppings");
        PumpHopping hop;
        hop.i = h.at("i").get<int>();
        hop.j = h.at("j").get<int>();
        json amp = h;
        amp.erase("i");
        amp.erase("j");
        hop.amplitude = parse_affine(amp, dim, "pump_block.hoppings");
        m.hoppings.push_back(hop);
      }
    for (const auto& c : j.at("couplings"))
      m.couplings.push_back(parse_affine(c, dim, "couplings"));
  } catch (const json::exception& e) {
    throw ModelInvalidError(std::string("model JSON: ") + e.what());
  }
  m.validate_structure();
  return m;
}

DrivenPumpModel DrivenPumpModel::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ModelInvalidError("cannot open model file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string DrivenPumpModel::to_json_text() const {
  json j;
  j["n_leads"] = geometry.n_leads;
  j["pump_sites"] = geometry.pump_sites;
  j["lead_length"] = geometry.lead_length;
  j["attach_map"] = geometry.attach_map;
  j["path"] = path_to_json(path);
  json pb;
  json ons = json::array();
  for (const auto& o : onsite) ons.push_back(affine_to_json(o));
  pb["onsite"] = ons;
  json hops = json::array();
  for (const auto& h : hoppings) {
    json hj = affine_to_json(h.amplitude);
    hj["i"] = h.i;
    hj["j"] = h.j;
    hops.push_back(hj);
  }
  pb["hoppings"] = hops;
  j["pump_block"] = pb;
  json cps = json::array();
  for (const auto& c : couplings) cps.push_back(affine_to_json(c));
  j["couplings"] = cps;
  return j.dump(2);
}

}  // namespace adiapump
