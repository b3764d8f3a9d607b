#include "adiapump/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <json.hpp>
#include <sstream>
#include <thread>

#include "adiapump/bpt.hpp"
#include "adiapump/errors.hpp"
#include "adiapump/io_util.hpp"
#include "adiapump/operator_lab.hpp"
#include "adiapump/propagation.hpp"
#include "adiapump/smoothstep.hpp"
#include "adiapump/version.hpp"

namespace adiapump {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

void require_keys(const json& j, std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed)
      if (it.key() == k) ok = true;
    if (!ok) throw ConfigInvalidError("unknown key '" + it.key() + "' in " + where);
  }
}

std::string model_hash_of(const DrivenPumpModel& m) { return hash_hex(m.to_json_text()); }

struct Stamp {
  std::string config_hash;
  std::string model_hash;
  std::string csv_header() const {
    return "# adiapump " + std::string(kVersion) + " config " + config_hash + " model " +
           model_hash + "\n";
  }
  void apply(json& j) const {
    j["version"] = kVersion;
    j["config_hash"] = config_hash;
    j["model_hash"] = model_hash;
  }
};

class Budget {
 public:
  explicit Budget(double seconds) : limit_(seconds), t0_(std::chrono::steady_clock::now()) {}
  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
  }
  void check(const std::string& what) const {
    if (limit_ > 0 && elapsed() > limit_) {
      std::ostringstream os;
      os << "wall-time budget " << limit_ << " s exceeded before " << what;
      throw TimeBudgetError(os.str());
    }
  }

 private:
  double limit_;
  std::chrono::steady_clock::time_point t0_;
};

// Dispatches tasks to a small pool; each task writes only its own slot, so
// the observable output order stays fixed.
void run_pool(std::vector<std::function<void()>>& tasks, int workers, const Budget& budget) {
  std::atomic<size_t> next{0};
  std::vector<std::thread> threads;
  std::vector<std::exception_ptr> errors(tasks.size());
  const int nw = std::max(1, std::min<int>(workers, static_cast<int>(tasks.size())));
  for (int w = 0; w < nw; ++w)
    threads.emplace_back([&] {
      for (;;) {
        const size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        try {
          budget.check("sweep point " + std::to_string(i));
          tasks[i]();
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    });
  for (auto& t : threads) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

SpectralDensity rho_from_params(const json& p, double* mu_out) {
  SpectralDensity rho;
  if (p.contains("mu")) {
    rho = SpectralDensity::fermi_sea(p["mu"].get<double>());
  } else if (p.contains("rho")) {
    const json& r = p["rho"];
    require_keys(r, {"jumps", "box_bump"}, "params.rho");
    if (r.contains("jumps"))
      for (const auto& jw : r["jumps"]) rho.jumps.push_back({jw.at(0).get<double>(), jw.at(1).get<double>()});
    if (r.contains("box_bump")) {
      const json& b = r["box_bump"];
      require_keys(b, {"lo", "hi", "amplitude"}, "params.rho.box_bump");
      const double lo = b.at("lo").get<double>(), hi = b.at("hi").get<double>();
      const double amp = b.at("amplitude").get<double>();
      SpectralDensity::SmoothPart sp;
      sp.support_lo = lo;
      sp.support_hi = hi;
      sp.density = [lo, hi, amp](double E) {
        const double t = (E - lo) / (hi - lo);
        return amp * quintic01(2.0 * t) * quintic01(2.0 * (1.0 - t));
      };
      rho.smooth = sp;
    }
  } else {
    rho = SpectralDensity::fermi_sea(2.0);
  }
  if (mu_out) *mu_out = rho.jumps.empty() ? 2.0 : rho.jumps.front().energy;
  return rho;
}

std::vector<CurrentOperator> build_ops(const DrivenPumpModel& model, const SparseCplx& H0,
                                       const PropagationPlan& plan, const std::string& kind,
                                       double a, double width, double mu, bool filter_on) {
  const LatticeGeometry geo = model.geometry.with_lead_length(plan.lead_length);
  std::optional<SpectralFilter> filt;
  if (filter_on) {
    SpectralFilter f(mu, 0.5, 1.3);
    const auto [lo, hi] = gershgorin_bounds(H0);
    if (lo < 0.0 || hi > 4.0) f.refit(std::min(lo, 0.0), std::max(hi, 4.0));
    filt = std::move(f);
  }
  std::vector<CurrentOperator> ops;
  const double k_mu = std::acos(1.0 - mu / 2.0);
  for (int j = 0; j < geo.n_leads; ++j) {
    if (kind == "position") {
      ops.push_back(CurrentOperator::position(geo, H0, j, a, SwitchFunction{width}, filt));
    } else if (kind == "dilation") {
      // dilation box matched to the position locus at the Fermi wavenumber:
      // A ~ k x, so a_dil = k_mu * a and the ramp width scales the same way
      ops.push_back(CurrentOperator::dilation(geo, H0, j, k_mu * a,
                                              CurrentKind::DilationSum,
                                              SwitchFunction{k_mu * width}, VProfile{}, filt));
    } else {
      throw ConfigInvalidError("unknown current kind '" + kind + "'");
    }
  }
  return ops;
}

struct EvolveArtifacts {
  ChargeTrace trace;
  PropagationPlan plan;
  int occupied = 0;
  double mu = 2.0;
  std::string kind;
  double ammeter = 0.0;
};

EvolveArtifacts evolve_run(const DrivenPumpModel& model, const json& p) {
  require_keys(p, {"eps", "ammeter", "kind", "filter", "mu", "rho", "width", "lead_length",
                  "dt", "epochs", "tail_factor", "cycle_end"},
               "params(evolve)");
  EvolveArtifacts out;
  const double eps = p.at("eps").get<double>();
  out.ammeter = p.value("ammeter", 30.0);
  out.kind = p.value("kind", std::string("position"));
  const double width = p.value("width", 5.0);
  const bool filter_on = p.value("filter", false);
  SpectralDensity rho = rho_from_params(p, &out.mu);

  PropagationPlan plan = PropagationPlan::make_auto(
      eps, out.ammeter, width, p.value("cycle_end", 1.0), p.value("epochs", 800),
      p.value("tail_factor", 1.6));
  plan.dt_lab = p.value("dt", 0.05);
  if (p.contains("lead_length")) plan.lead_length = p["lead_length"].get<int>();
  plan.validate();

  const SparseCplx H0 = frozen_hamiltonian(model, 0.0, true, plan.lead_length);
  const auto ops = build_ops(model, H0, plan, out.kind, out.ammeter, width, out.mu, filter_on);
  out.trace = measure_pumped_charge(model, rho, plan, ops);
  out.plan = plan;
  out.occupied = fermi_sea(H0, rho).size();  // small duplicate diagonalization cost
  return out;
}

std::string trace_csv(const ChargeTrace& tr, const Stamp& stamp, int n_leads) {
  std::ostringstream os;
  os << stamp.csv_header();
  os << "s";
  for (int j = 0; j < n_leads; ++j) os << ",raw_" << (j + 1);
  for (int j = 0; j < n_leads; ++j) os << ",baseline_" << (j + 1);
  for (int j = 0; j < n_leads; ++j) os << ",subtracted_" << (j + 1);
  os << "\n";
  for (size_t i = 0; i < tr.s.size(); ++i) {
    os << format_double(tr.s[i]);
    for (int j = 0; j < n_leads; ++j) os << "," << format_double(tr.raw(i, j));
    for (int j = 0; j < n_leads; ++j) os << "," << format_double(tr.baseline(j));
    for (int j = 0; j < n_leads; ++j) os << "," << format_double(tr.subtracted(i, j));
    os << "\n";
  }
  return os.str();
}

json evolve_summary_json(const EvolveArtifacts& ev, const Stamp& stamp) {
  json s;
  stamp.apply(s);
  s["eps"] = ev.plan.eps;
  s["kind"] = ev.kind;
  s["ammeter"] = ev.ammeter;
  s["mu"] = ev.mu;
  s["occupied_orbitals"] = ev.occupied;
  s["norm_drift"] = ev.trace.norm_drift;
  json q = json::array(), qt = json::array(), base = json::array();
  for (int j = 0; j < ev.trace.cycle_total.size(); ++j) {
    q.push_back(ev.trace.cycle_total(j));
    qt.push_back(ev.trace.cycle_total_trace(j));
    base.push_back(ev.trace.baseline(j));
  }
  s["cycle_total"] = q;
  s["cycle_total_trace"] = qt;
  s["baseline"] = base;
  s["plan"] = {{"dt_lab", ev.plan.dt_lab},
               {"s0", ev.plan.s0},
               {"s1", ev.plan.s1},
               {"s_end", ev.plan.s_end},
               {"lead_length", ev.plan.lead_length},
               {"steps", ev.plan.steps()}};
  return s;
}

}  // namespace

int worker_cap() {
  if (const char* env = std::getenv("ADIAPUMP_THREADS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? static_cast<int>(hc) : 1;
}

RunConfig RunConfig::from_json_text(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigInvalidError(std::string("config JSON parse failure: ") + e.what());
  }
  require_keys(j, {"kind", "model", "params", "out", "tolerances", "budget_seconds"},
               "config");
  RunConfig c;
  if (!j.contains("kind")) throw ConfigInvalidError("config: missing 'kind'");
  c.kind = j["kind"].get<std::string>();
  const std::vector<std::string> kinds = {"smatrix", "bpt",  "evolve", "sweep-eps",
                                          "sweep-ammeter", "lab", "compare"};
  if (std::find(kinds.begin(), kinds.end(), c.kind) == kinds.end())
    throw ConfigInvalidError("config: unknown kind '" + c.kind + "'");
  if (c.kind != "lab" && c.kind != "compare") {
    if (!j.contains("model")) throw ConfigInvalidError("config: missing 'model'");
    if (j["model"].is_string()) {
      c.model_path = j["model"].get<std::string>();
      fs::path p = c.model_path;
      if (p.is_relative() && !base_dir.empty()) p = fs::path(base_dir) / p;
      c.model_json = read_text_file(p.string());
    } else {
      c.model_json = j["model"].dump();
    }
    // canonicalize through the parser (also validates early)
    c.model_json = DrivenPumpModel::from_json_text(c.model_json).to_json_text();
  }
  c.params_json = j.value("params", json::object()).dump();
  c.tolerances_json = j.value("tolerances", json::object()).dump();
  c.out_dir = j.value("out", std::string("out"));
  c.budget_seconds = j.value("budget_seconds", 900.0);
  return c;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  return from_json_text(read_text_file(path), fs::path(path).parent_path().string());
}

std::string RunConfig::canonical_text() const {
  // out dir and budget identify the run environment, not the computation
  json j;
  j["kind"] = kind;
  j["model"] = model_json.empty() ? json() : json::parse(model_json);
  j["params"] = json::parse(params_json);
  j["tolerances"] = json::parse(tolerances_json);
  return j.dump();
}

std::string RunConfig::config_hash() const { return hash_hex(canonical_text()); }

namespace {

RunOutcome run_smatrix(const RunConfig& cfg, const DrivenPumpModel& model, const json& p,
                       const Stamp& stamp) {
  require_keys(p, {"s_values", "s_grid", "energies", "route"}, "params(smatrix)");
  std::vector<double> ss;
  if (p.contains("s_values"))
    for (const auto& v : p["s_values"]) ss.push_back(v.get<double>());
  if (p.contains("s_grid")) {
    const json& g = p["s_grid"];
    require_keys(g, {"from", "to", "n"}, "params.s_grid");
    const int n = g.at("n").get<int>();
    for (int i = 0; i <= n; ++i)
      ss.push_back(g.at("from").get<double>() +
                   (g.at("to").get<double>() - g.at("from").get<double>()) * i / n);
  }
  if (ss.empty()) ss = {0.0};
  std::vector<double> Es;
  for (const auto& v : p.at("energies")) Es.push_back(v.get<double>());
  const std::string route = p.value("route", std::string("matching"));

  std::ostringstream csv;
  csv << stamp.csv_header();
  const int n = model.geometry.n_leads;
  csv << "s,E,k,unitarity";
  for (int r = 0; r < n; ++r)
    for (int c = 0; c < n; ++c) csv << ",ReS_" << r << c << ",ImS_" << r << c;
  csv << "\n";
  for (double s : ss)
    for (double E : Es) {
      const ScatteringMatrix S = route == "gf" ? scattering_matrix_gf(model, s, E)
                                               : scattering_matrix(model, s, E);
      csv << format_double(s) << "," << format_double(E) << "," << format_double(S.mode.k)
          << "," << format_double(S.unitarity_residual());
      for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c)
          csv << "," << format_double(S.S(r, c).real()) << ","
              << format_double(S.S(r, c).imag());
      csv << "\n";
    }
  const std::string path = (fs::path(cfg.out_dir) / "smatrix.csv").string();
  write_text_file(path, csv.str());
  RunOutcome out;
  out.artifacts = {path};
  out.summary = "smatrix: " + std::to_string(ss.size() * Es.size()) + " fibers -> " + path;
  return out;
}

RunOutcome run_bpt(const RunConfig& cfg, const DrivenPumpModel& model, const json& p,
                   const Stamp& stamp) {
  require_keys(p, {"mu", "rho", "s0", "s1", "n"}, "params(bpt)");
  double mu = 2.0;
  const SpectralDensity rho = rho_from_params(p, &mu);
  const double s0 = p.value("s0", 0.0), s1 = p.value("s1", 1.0);
  const int n = p.value("n", 400);
  const auto grid = uniform_grid(s0, s1, n);

  std::ostringstream csv;
  csv << stamp.csv_header();
  csv << "s";
  for (int j = 0; j < model.geometry.n_leads; ++j) csv << ",dQ" << (j + 1) << "_ds";
  csv << "\n";
  std::vector<Eigen::VectorXd> f(grid.size());
  for (size_t i = 0; i < grid.size(); ++i) {
    f[i] = pumped_current(model, grid[i], rho).per_lead;
    csv << format_double(grid[i]);
    for (int j = 0; j < f[i].size(); ++j) csv << "," << format_double(f[i](j));
    csv << "\n";
  }
  const CycleResult cyc = cycle_charge(model, rho, grid);
  const WindingResult wind = total_charge_winding(model, mu, grid);

  json summary;
  stamp.apply(summary);
  summary["mu"] = mu;
  json q = json::array();
  for (int j = 0; j < cyc.Q.size(); ++j) q.push_back(cyc.Q(j));
  summary["Q"] = q;
  summary["winding"] = wind.winding;
  summary["residuals"] = {{"grid_estimate", cyc.grid_estimate},
                          {"winding_residual", wind.residual},
                          {"max_phase_step", wind.max_step}};

  const std::string cpath = (fs::path(cfg.out_dir) / "bpt_trace.csv").string();
  const std::string jpath = (fs::path(cfg.out_dir) / "bpt_summary.json").string();
  write_text_file(cpath, csv.str());
  write_text_file(jpath, summary.dump(2) + "\n");
  RunOutcome out;
  out.artifacts = {cpath, jpath};
  std::ostringstream os;
  os << "bpt: Q = [";
  for (int j = 0; j < cyc.Q.size(); ++j) os << (j ? ", " : "") << cyc.Q(j);
  os << "], winding " << wind.winding;
  out.summary = os.str();
  return out;
}

RunOutcome run_evolve(const RunConfig& cfg, const DrivenPumpModel& model, const json& p,
                      const Stamp& stamp, const Budget& budget) {
  budget.check("evolve run");
  const auto t0 = std::chrono::steady_clock::now();
  EvolveArtifacts ev = evolve_run(model, p);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  const std::string cpath = (fs::path(cfg.out_dir) / "evolve_trace.csv").string();
  const std::string jpath = (fs::path(cfg.out_dir) / "evolve_summary.json").string();
  const std::string mpath = (fs::path(cfg.out_dir) / "run_meta.json").string();
  write_text_file(cpath, trace_csv(ev.trace, stamp, model.geometry.n_leads));
  write_text_file(jpath, evolve_summary_json(ev, stamp).dump(2) + "\n");
  json meta;  // the one file carrying timings; excluded from byte-compare
  stamp.apply(meta);
  meta["wall_seconds"] = wall;
  write_text_file(mpath, meta.dump(2) + "\n");
  RunOutcome out;
  out.artifacts = {cpath, jpath, mpath};
  std::ostringstream os;
  os << "evolve eps=" << ev.plan.eps << ": cycle charge [";
  for (int j = 0; j < ev.trace.cycle_total.size(); ++j)
    os << (j ? ", " : "") << ev.trace.cycle_total(j);
  os << "]";
  out.summary = os.str();
  return out;
}

Eigen::VectorXd bpt_reference(const DrivenPumpModel& model, const SpectralDensity& rho,
                              double cycle_end, int n = 512) {
  return cycle_charge(model, rho, uniform_grid(0.0, cycle_end, n)).Q;
}

RunOutcome run_sweep_eps(const RunConfig& cfg, const DrivenPumpModel& model, const json& p,
                         const Stamp& stamp, const Budget& budget) {
  require_keys(p, {"eps_list", "ammeter", "kind", "filter", "mu", "rho", "width",
                  "dt", "epochs", "tail_factor", "cycle_end"},
               "params(sweep-eps)");
  std::vector<double> eps_list;
  for (const auto& v : p.at("eps_list")) eps_list.push_back(v.get<double>());
  if (eps_list.empty()) throw ConfigInvalidError("sweep-eps: empty eps_list");
  const json tol = json::parse(cfg.tolerances_json);
  require_keys(tol, {"rel_tol"}, "tolerances(sweep-eps)");
  const double rel_tol = tol.value("rel_tol", 0.10);

  double mu = 2.0;
  const SpectralDensity rho = rho_from_params(p, &mu);
  const Eigen::VectorXd Qref = bpt_reference(model, rho, p.value("cycle_end", 1.0));

  std::vector<EvolveArtifacts> points(eps_list.size());
  std::vector<double> walls(eps_list.size(), 0.0);
  std::vector<std::function<void()>> tasks;
  for (size_t i = 0; i < eps_list.size(); ++i)
    tasks.push_back([&, i] {
      json pp = p;
      pp.erase("eps_list");
      pp["eps"] = eps_list[i];
      const auto t0 = std::chrono::steady_clock::now();
      points[i] = evolve_run(model, pp);
      walls[i] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    });
  run_pool(tasks, worker_cap(), budget);

  const int n = model.geometry.n_leads;
  std::ostringstream csv;
  csv << stamp.csv_header();
  csv << "eps,ammeter,lead,Q_dynamics,Q_bpt,abs_err,rel_err\n";
  std::vector<double> errs;
  for (size_t i = 0; i < eps_list.size(); ++i) {
    double worst = 0.0;
    for (int j = 0; j < n; ++j) {
      const double qd = points[i].trace.cycle_total(j);
      const double err = std::abs(qd - Qref(j));
      const double rel = err / Qref.cwiseAbs().maxCoeff();
      worst = std::max(worst, rel);
      csv << format_double(eps_list[i]) << "," << format_double(points[i].ammeter) << ","
          << (j + 1) << "," << format_double(qd) << "," << format_double(Qref(j)) << ","
          << format_double(err) << "," << format_double(rel) << "\n";
    }
    errs.push_back(worst);
  }
  bool monotone = true;
  for (size_t i = 0; i + 1 < errs.size(); ++i)
    if (!(errs[i] > errs[i + 1])) monotone = false;
  const bool final_ok = errs.back() <= rel_tol;

  json rep;
  stamp.apply(rep);
  rep["eps"] = eps_list;
  rep["max_rel_err"] = errs;
  json qrefj = json::array();
  for (int j = 0; j < n; ++j) qrefj.push_back(Qref(j));
  rep["Q_bpt"] = qrefj;
  rep["mu"] = mu;
  rep["verdicts"] = {{"errors_strictly_decreasing", monotone},
                     {"final_rel_err_within_tol", final_ok},
                     {"rel_tol", rel_tol}};
  json meta;
  stamp.apply(meta);
  meta["wall_seconds_per_point"] = walls;

  const std::string cpath = (fs::path(cfg.out_dir) / "sweep_eps.csv").string();
  const std::string jpath = (fs::path(cfg.out_dir) / "sweep_eps_report.json").string();
  write_text_file(cpath, csv.str());
  write_text_file(jpath, rep.dump(2) + "\n");
  write_text_file((fs::path(cfg.out_dir) / "run_meta.json").string(), meta.dump(2) + "\n");

  RunOutcome out;
  out.exit_code = (monotone && final_ok) ? 0 : 2;
  out.artifacts = {cpath, jpath};
  std::ostringstream os;
  os << "sweep-eps: max rel err per eps [";
  for (size_t i = 0; i < errs.size(); ++i) os << (i ? ", " : "") << errs[i];
  os << "] " << (out.exit_code == 0 ? "PASS" : "FAIL");
  out.summary = os.str();
  return out;
}

RunOutcome run_sweep_ammeter(const RunConfig& cfg, const DrivenPumpModel& model,
                             const json& p, const Stamp& stamp, const Budget& budget) {
  require_keys(p, {"eps", "a_list", "kinds", "mu", "rho", "width", "dt", "epochs",
                  "tail_factor", "cycle_end"},
               "params(sweep-ammeter)");
  budget.check("sweep-ammeter run");
  const double eps = p.at("eps").get<double>();
  std::vector<double> a_list;
  for (const auto& v : p.at("a_list")) a_list.push_back(v.get<double>());
  std::vector<std::string> kinds = {"position", "dilation"};
  if (p.contains("kinds")) {
    kinds.clear();
    for (const auto& v : p["kinds"]) kinds.push_back(v.get<std::string>());
  }
  const double width = p.value("width", 5.0);
  double mu = 2.0;
  const SpectralDensity rho = rho_from_params(p, &mu);
  const json tol = json::parse(cfg.tolerances_json);
  require_keys(tol, {"pairwise_base"}, "tolerances(sweep-ammeter)");
  const double pairwise_base = tol.value("pairwise_base", 0.05);

  // one propagation measures every (kind, a) pair
  PropagationPlan plan = PropagationPlan::make_auto(
      eps, *std::max_element(a_list.begin(), a_list.end()), width, p.value("cycle_end", 1.0),
      p.value("epochs", 800), p.value("tail_factor", 1.6));
  plan.dt_lab = p.value("dt", 0.05);
  const SparseCplx H0 = frozen_hamiltonian(model, 0.0, true, plan.lead_length);
  std::vector<CurrentOperator> ops;
  std::vector<std::pair<std::string, double>> labels;
  for (const std::string& kind : kinds)
    for (double a : a_list) {
      const auto batch = build_ops(model, H0, plan, kind, a, width, mu, false);
      for (const auto& op : batch) {
        ops.push_back(op);
        labels.emplace_back(kind, a);
      }
    }
  const ChargeTrace tr = measure_pumped_charge(model, rho, plan, ops);

  const int n = model.geometry.n_leads;
  std::ostringstream csv;
  csv << stamp.csv_header();
  csv << "kind,ammeter,lead,Q\n";
  for (size_t k = 0; k < ops.size(); ++k)
    csv << labels[k].first << "," << format_double(labels[k].second) << ","
        << (static_cast<int>(k) % n + 1) << "," << format_double(tr.cycle_total(k)) << "\n";

  // verdicts: per-a pairwise agreement under an envelope that tightens as the
  // ammeter moves out (tol(a) = base * a_min / a)
  std::sort(a_list.begin(), a_list.end());
  const double scale =
      std::max(tr.cycle_total.cwiseAbs().maxCoeff(), 1e-12);
  bool all_ok = true;
  json per_a = json::array();
  for (double a : a_list) {
    const double tol_a = pairwise_base * a_list.front() / a;
    double spread = 0.0;
    for (int j = 0; j < n; ++j) {
      std::vector<double> vals;
      for (size_t k = 0; k < ops.size(); ++k)
        if (labels[k].second == a && static_cast<int>(k) % n == j)
          vals.push_back(tr.cycle_total(k));
      if (vals.size() > 1) {
        const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
        spread = std::max(spread, (*mx - *mn) / scale);
      }
    }
    const bool ok = spread <= tol_a;
    all_ok = all_ok && ok;
    per_a.push_back({{"a", a}, {"spread", spread}, {"tol", tol_a}, {"pass", ok}});
  }
  // cross-a agreement within the base tolerance for every kind
  for (const std::string& kind : kinds)
    for (int j = 0; j < n; ++j) {
      std::vector<double> vals;
      for (size_t k = 0; k < ops.size(); ++k)
        if (labels[k].first == kind && static_cast<int>(k) % n == j)
          vals.push_back(tr.cycle_total(k));
      if (vals.size() > 1) {
        const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
        if ((*mx - *mn) / scale > pairwise_base) all_ok = false;
      }
    }

  json rep;
  stamp.apply(rep);
  rep["eps"] = eps;
  rep["mu"] = mu;
  rep["per_ammeter"] = per_a;
  rep["verdicts"] = {{"pairwise_within_envelope", all_ok},
                     {"pairwise_base", pairwise_base}};

  const std::string cpath = (fs::path(cfg.out_dir) / "sweep_ammeter.csv").string();
  const std::string jpath = (fs::path(cfg.out_dir) / "sweep_ammeter_report.json").string();
  write_text_file(cpath, csv.str());
  write_text_file(jpath, rep.dump(2) + "\n");

  RunOutcome out;
  out.exit_code = all_ok ? 0 : 2;
  out.artifacts = {cpath, jpath};
  out.summary = std::string("sweep-ammeter: ") + (all_ok ? "PASS" : "FAIL");
  return out;
}

RunOutcome run_lab(const RunConfig& cfg, const json& p, const Stamp& stamp) {
  require_keys(p, {"check", "levels", "g_power", "g_scale", "mourre", "exclusion"},
               "params(lab)");
  const std::string check = p.value("check", std::string("all"));
  std::vector<std::pair<int, double>> levels = {{250, 0.2}, {500, 0.1}, {1000, 0.05}};
  if (p.contains("levels")) {
    levels.clear();
    for (const auto& lv : p["levels"])
      levels.emplace_back(lv.at(0).get<int>(), lv.at(1).get<double>());
  }
  const int g_power = p.value("g_power", 1);
  const double g_scale = p.value("g_scale", 1.0);
  auto g = [g_power, g_scale](double E) {
    return E <= 0.0 ? 0.0 : std::pow(E, g_power) * std::exp(-g_scale * E);
  };
  auto f_gauss = [](double a) { return std::exp(-a * a / 4.0); };
  auto f_gauss_c = [](cplx z) { return std::exp(-z * z / 4.0); };

  json outj;
  stamp.apply(outj);
  outj["check"] = check;
  json rows = json::array();
  auto trend_ok = [](const std::vector<double>& e) {
    for (size_t i = 0; i + 1 < e.size(); ++i)
      if (!(e[i] > e[i + 1])) return false;
    return true;
  };

  std::vector<double> errs;
  if (check == "hs_norm" || check == "trace" || check == "all") {
    for (const auto& [N, h] : levels) {
      const HalfLineGrid grid(N, h);
      const IdentityCheck r = check == "trace" ? trace_formula_check(grid, g, f_gauss)
                                               : hs_norm_check(grid, g, f_gauss);
      errs.push_back(r.relative_error);
      rows.push_back({{"N", N}, {"h", h}, {"lhs", r.lhs}, {"rhs", r.rhs},
                      {"error", r.relative_error}});
    }
  } else if (check == "pull_through") {
    for (const auto& [N, h] : levels) {
      const HalfLineGrid grid(N, h);
      const PullThroughResult r =
          pull_through_check(grid, f_gauss_c, p.value("exclusion", 0.25));
      errs.push_back(r.relative);
      rows.push_back({{"N", N}, {"h", h}, {"inner_residual", r.inner_residual},
                      {"relative", r.relative}});
    }
  } else if (check == "mourre") {
    json mp = p.value("mourre", json::object());
    require_keys(mp, {"N", "h", "lo", "hi"}, "params.mourre");
    const int N = mp.value("N", 2000);
    const double h = mp.value("h", 0.1);
    const double lo = mp.value("lo", 1.0), hi = mp.value("hi", 1.2);
    const HalfLineGrid grid(N, h);
    const MourreResult r =
        mourre_bound(grid.H0().cast<cplx>(), grid.assembled_commutator(), lo, hi);
    rows.push_back({{"N", N}, {"h", h}, {"lo", lo}, {"hi", hi}, {"theta", r.theta},
                    {"dim", r.subspace_dim}});
  }
  outj["rows"] = rows;
  if (!errs.empty()) outj["refinement_trend_ok"] = trend_ok(errs);

  const std::string jpath = (fs::path(cfg.out_dir) / ("lab_" + check + ".json")).string();
  write_text_file(jpath, outj.dump(2) + "\n");
  RunOutcome out;
  out.artifacts = {jpath};
  out.summary = "lab " + check + " -> " + jpath;
  return out;
}

}  // namespace

RunOutcome compare_outputs(const std::string& bpt_summary_path,
                           const std::string& dynamics_summary_path,
                           const std::string& out_dir, double rel_tol) {
  json b, d;
  try {
    b = json::parse(read_text_file(bpt_summary_path));
    d = json::parse(read_text_file(dynamics_summary_path));
  } catch (const json::exception& e) {
    throw ConfigInvalidError(std::string("compare: bad summary JSON: ") + e.what());
  }
  if (!b.contains("model_hash") || !d.contains("model_hash"))
    throw MismatchedRunsError("compare: summaries missing model hashes");
  if (b["model_hash"] != d["model_hash"])
    throw MismatchedRunsError("compare: model hashes differ");
  if (b.contains("mu") && d.contains("mu") && b["mu"] != d["mu"])
    throw MismatchedRunsError("compare: occupation (mu) differs");
  if (!b.contains("Q") || !d.contains("cycle_total"))
    throw MismatchedRunsError("compare: summaries lack charge vectors");
  const auto qb = b["Q"].get<std::vector<double>>();
  const auto qd = d["cycle_total"].get<std::vector<double>>();
  if (qb.size() != qd.size()) throw MismatchedRunsError("compare: lead counts differ");

  double scale = 1e-12;
  for (double v : qb) scale = std::max(scale, std::abs(v));
  std::ostringstream csv;
  csv << "# adiapump " << kVersion << " compare\n";
  csv << "lead,Q_bpt,Q_dynamics,abs_err,rel_err\n";
  double worst = 0.0;
  for (size_t j = 0; j < qb.size(); ++j) {
    const double err = std::abs(qb[j] - qd[j]);
    worst = std::max(worst, err / scale);
    csv << (j + 1) << "," << format_double(qb[j]) << "," << format_double(qd[j]) << ","
        << format_double(err) << "," << format_double(err / scale) << "\n";
  }
  fs::create_directories(out_dir);
  const std::string cpath = (fs::path(out_dir) / "compare.csv").string();
  write_text_file(cpath, csv.str());
  json rep;
  rep["version"] = kVersion;
  rep["model_hash"] = b["model_hash"];
  rep["max_rel_err"] = worst;
  rep["rel_tol"] = rel_tol;
  rep["pass"] = worst <= rel_tol;
  const std::string jpath = (fs::path(out_dir) / "compare_report.json").string();
  write_text_file(jpath, rep.dump(2) + "\n");

  RunOutcome out;
  out.exit_code = worst <= rel_tol ? 0 : 2;
  out.artifacts = {cpath, jpath};
  std::ostringstream os;
  os << "compare: max rel err " << worst << (out.exit_code == 0 ? " PASS" : " FAIL");
  out.summary = os.str();
  return out;
}

RunOutcome run(const RunConfig& cfg) {
  const Budget budget(cfg.budget_seconds);
  fs::create_directories(cfg.out_dir);
  const json params = json::parse(cfg.params_json);

  if (cfg.kind == "compare") {
    require_keys(params, {"bpt", "dynamics"}, "params(compare)");
    const json tol = json::parse(cfg.tolerances_json);
    return compare_outputs(params.at("bpt").get<std::string>(),
                           params.at("dynamics").get<std::string>(), cfg.out_dir,
                           tol.value("rel_tol", 0.10));
  }
  if (cfg.kind == "lab") {
    Stamp stamp{cfg.config_hash(), "none"};
    return run_lab(cfg, params, stamp);
  }

  const DrivenPumpModel model = DrivenPumpModel::from_json_text(cfg.model_json);
  Stamp stamp{cfg.config_hash(), model_hash_of(model)};
  if (cfg.kind == "smatrix") return run_smatrix(cfg, model, params, stamp);
  if (cfg.kind == "bpt") return run_bpt(cfg, model, params, stamp);
  if (cfg.kind == "evolve") return run_evolve(cfg, model, params, stamp, budget);
  if (cfg.kind == "sweep-eps") return run_sweep_eps(cfg, model, params, stamp, budget);
  if (cfg.kind == "sweep-ammeter")
    return run_sweep_ammeter(cfg, model, params, stamp, budget);
  throw ConfigInvalidError("run: unhandled kind " + cfg.kind);
}

}  // namespace adiapump
