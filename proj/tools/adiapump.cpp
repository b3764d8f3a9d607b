// adiapump: frozen S-matrix pumping calculations and their verification by
// adiabatic time-dependent propagation, one subcommand per experiment kind.

#include <CLI11.hpp>
#include <cstdio>
#include <json.hpp>

#include "adiapump/errors.hpp"
#include "adiapump/experiments.hpp"
#include "adiapump/io_util.hpp"
#include "adiapump/version.hpp"

using nlohmann::json;
using namespace adiapump;

namespace {

// A subcommand accepts either a full RunConfig (object with "kind") or a bare
// model file; direct flags fill the parameter block. The two schemas share no
// keys, so sniffing is unambiguous.
json load_config_or_model(const std::string& path, const std::string& kind) {
  const std::string text = read_text_file(path);
  json j = json::parse(text, nullptr, true);
  if (j.is_object() && j.contains("kind")) {
    if (j["kind"] != kind)
      throw ConfigInvalidError("config kind '" + j["kind"].get<std::string>() +
                               "' does not match subcommand '" + kind + "'");
    return j;
  }
  json cfg;
  cfg["kind"] = kind;
  cfg["model"] = j;  // inline the model document
  cfg["params"] = json::object();
  return cfg;
}

int execute(json cfg, const std::string& out_dir) {
  if (!out_dir.empty()) cfg["out"] = out_dir;
  const RunConfig rc = RunConfig::from_json_text(cfg.dump());
  const RunOutcome outcome = run(rc);
  std::printf("%s\n", outcome.summary.c_str());
  for (const auto& a : outcome.artifacts) std::printf("  wrote %s\n", a.c_str());
  return outcome.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adiabatic quantum pump toolkit"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path, out_dir;

  auto add_common = [&](CLI::App* sub, bool config_required = true) {
    sub->add_option("--config", config_path, "run config or model JSON")
        ->required(config_required);
    sub->add_option("--out", out_dir, "output directory");
  };

  // smatrix
  auto* sm = app.add_subcommand("smatrix", "frozen scattering matrix fibers to CSV");
  std::vector<double> sm_s, sm_E;
  std::string sm_route = "matching";
  add_common(sm);
  sm->add_option("--s", sm_s, "epoch values");
  sm->add_option("--energy", sm_E, "energies inside the band (0,4)");
  sm->add_option("--route", sm_route, "matching|gf")->check(CLI::IsMember({"matching", "gf"}));

  // bpt
  auto* bp = app.add_subcommand("bpt", "pumped charge from the frozen S-matrix");
  double bp_mu = 2.0;
  int bp_n = 400;
  add_common(bp);
  bp->add_option("--mu", bp_mu, "Fermi energy");
  bp->add_option("--grid", bp_n, "epoch grid intervals over one cycle");

  // evolve
  auto* ev = app.add_subcommand("evolve", "adiabatic propagation with ammeters");
  double ev_eps = 0.04, ev_a = 30.0, ev_mu = 2.0, ev_width = 5.0;
  int ev_L = -1;
  std::string ev_kind = "position", ev_filter = "off";
  add_common(ev);
  ev->add_option("--eps", ev_eps, "adiabatic parameter");
  ev->add_option("--ammeter", ev_a, "ammeter position (sites)");
  ev->add_option("--lead-length", ev_L, "lead length override (auto if omitted)");
  ev->add_option("--kind", ev_kind, "position|dilation")
      ->check(CLI::IsMember({"position", "dilation"}));
  ev->add_option("--filter", ev_filter, "on|off spectral filter")
      ->check(CLI::IsMember({"on", "off"}));
  ev->add_option("--mu", ev_mu, "Fermi energy");
  ev->add_option("--width", ev_width, "switch width (sites)");

  // sweep-eps
  auto* se = app.add_subcommand("sweep-eps", "dynamics vs BPT over an eps ladder");
  std::vector<double> se_eps;
  double se_a = 30.0, se_mu = 2.0;
  std::string se_kind = "position";
  add_common(se);
  se->add_option("--eps", se_eps, "eps values (descending)");
  se->add_option("--ammeter", se_a, "ammeter position");
  se->add_option("--kind", se_kind, "position|dilation");
  se->add_option("--mu", se_mu, "Fermi energy");

  // sweep-ammeter
  auto* sa = app.add_subcommand("sweep-ammeter", "ammeter independence study");
  std::vector<double> sa_a;
  double sa_eps = 0.04, sa_mu = 2.0;
  add_common(sa);
  sa->add_option("--eps", sa_eps, "adiabatic parameter");
  sa->add_option("--ammeter", sa_a, "ammeter positions");
  sa->add_option("--mu", sa_mu, "Fermi energy");

  // lab
  auto* lb = app.add_subcommand("lab", "half-line operator identity checks");
  std::string lb_check = "all";
  add_common(lb, false);
  lb->add_option("--check", lb_check, "hs_norm|trace|pull_through|mourre|all");

  // compare
  auto* cp = app.add_subcommand("compare", "compare BPT and dynamics outputs");
  std::string cp_bpt, cp_dyn;
  double cp_tol = 0.10;
  cp->add_option("--bpt", cp_bpt, "bpt_summary.json")->required();
  cp->add_option("--dynamics", cp_dyn, "evolve_summary.json")->required();
  cp->add_option("--tol", cp_tol, "relative tolerance");
  cp->add_option("--out", out_dir, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sm->parsed()) {
      json cfg = load_config_or_model(config_path, "smatrix");
      if (!sm_s.empty()) cfg["params"]["s_values"] = sm_s;
      if (!sm_E.empty()) cfg["params"]["energies"] = sm_E;
      if (!cfg["params"].contains("energies")) cfg["params"]["energies"] = {2.0};
      cfg["params"]["route"] = sm_route;
      return execute(cfg, out_dir);
    }
    if (bp->parsed()) {
      json cfg = load_config_or_model(config_path, "bpt");
      if (!cfg["params"].contains("mu")) cfg["params"]["mu"] = bp_mu;
      if (!cfg["params"].contains("n")) cfg["params"]["n"] = bp_n;
      return execute(cfg, out_dir);
    }
    if (ev->parsed()) {
      json cfg = load_config_or_model(config_path, "evolve");
      auto& pp = cfg["params"];
      if (!pp.contains("eps")) pp["eps"] = ev_eps;
      if (!pp.contains("ammeter")) pp["ammeter"] = ev_a;
      if (!pp.contains("kind")) pp["kind"] = ev_kind;
      if (!pp.contains("mu")) pp["mu"] = ev_mu;
      if (!pp.contains("width")) pp["width"] = ev_width;
      if (ev_L > 0) pp["lead_length"] = ev_L;
      if (!pp.contains("filter")) pp["filter"] = (ev_filter == "on");
      return execute(cfg, out_dir);
    }
    if (se->parsed()) {
      json cfg = load_config_or_model(config_path, "sweep-eps");
      auto& pp = cfg["params"];
      if (!pp.contains("eps_list"))
        pp["eps_list"] = se_eps.empty() ? std::vector<double>{0.16, 0.08, 0.04, 0.02} : se_eps;
      if (!pp.contains("ammeter")) pp["ammeter"] = se_a;
      if (!pp.contains("kind")) pp["kind"] = se_kind;
      if (!pp.contains("mu")) pp["mu"] = se_mu;
      return execute(cfg, out_dir);
    }
    if (sa->parsed()) {
      json cfg = load_config_or_model(config_path, "sweep-ammeter");
      auto& pp = cfg["params"];
      if (!pp.contains("a_list"))
        pp["a_list"] = sa_a.empty() ? std::vector<double>{20, 40, 60} : sa_a;
      if (!pp.contains("eps")) pp["eps"] = sa_eps;
      if (!pp.contains("mu")) pp["mu"] = sa_mu;
      return execute(cfg, out_dir);
    }
    if (lb->parsed()) {
      json cfg;
      if (!config_path.empty()) {
        cfg = load_config_or_model(config_path, "lab");
      } else {
        cfg["kind"] = "lab";
        cfg["params"] = json::object();
      }
      if (!cfg["params"].contains("check")) cfg["params"]["check"] = lb_check;
      if (cfg["params"]["check"] == "mourre" && !cfg["params"].contains("mourre"))
        cfg["params"]["mourre"] = json::object();
      return execute(cfg, out_dir);
    }
    if (cp->parsed()) {
      json cfg;
      cfg["kind"] = "compare";
      cfg["params"] = {{"bpt", cp_bpt}, {"dynamics", cp_dyn}};
      cfg["tolerances"] = {{"rel_tol", cp_tol}};
      return execute(cfg, out_dir);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 1;
}
