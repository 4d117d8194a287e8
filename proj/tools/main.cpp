// hvac: scenario generation, single runs, comparisons, oracle and DCV calibration.

#include "hvac/baselines.hpp"
#include "hvac/compare.hpp"
#include "hvac/io.hpp"
#include "hvac/scenario_gen.hpp"
#include "hvac/tldm.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace hvac;

namespace {

enum Exit { ok = 0, input_error = 2, nonconvergence = 3, comfort_infeasible = 4 };

struct Args {
  std::string building = "building.json";
  std::string scenario = "scenario.json";
  std::string out = ".";
  std::string profile = "benchmark5";
  std::string method = "tldm";
  std::vector<std::string> methods{"tldm", "fixed", "dcv1", "dcv2"};
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  int zones = 5;
  int start = 0;
  int flow_levels = 21;
  int dr_levels = 11;
  double band = 25.0;
  bool timing = false;
  bool sequential = false;
};

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p);
  if (!f) throw InputError("cannot write " + p.string());
  return f;
}

fs::path out_dir(const Args& a) {
  fs::path d(a.out);
  std::error_code ec;
  fs::create_directories(d, ec);
  if (ec) throw InputError("cannot create " + d.string() + ": " + ec.message());
  return d;
}

struct Loaded {
  Building building;
  Scenario scenario;
  CompareConfig config;
};

Loaded load(const Args& a) {
  Loaded l;
  l.building = load_building(a.building);
  l.scenario = load_scenario(a.scenario);
  for (const auto& s : a.overrides) apply_override(s, l.config, l.building);
  l.building.validate();
  l.scenario.validate(l.building);
  l.config.tldm.validate(l.building);
  l.config.parallel = !a.sequential;
  return l;
}

int gen_scenario(const Args& a) {
  GeneratorOptions go;
  go.profile = parse_profile(a.profile);
  if (a.zones < 1) throw InputError("--zones must be >= 1");
  go.zones = a.zones;
  go.seed = a.seed;
  const Case c = generate_case(go);
  const fs::path d = out_dir(a);
  save_building(d / "building.json", c.building);
  save_scenario(d / "scenario.json", c.scenario);
  std::cout << "wrote " << (d / "building.json").string() << " and " << (d / "scenario.json").string() << " ("
            << c.building.zone_count() << " zones)\n";
  return ok;
}

int exit_for(const std::vector<MethodOutcome>& rows) {
  int code = ok;
  for (const auto& r : rows) {
    if (!r.ok || r.unconverged_epochs > 0 || r.fallback_epochs > 0) return nonconvergence;
    // Baselines do not manage CO2; only their thermal limits count here.
    const bool co2_enforced = r.method == Method::tldm;
    if (r.floor_epochs > 0 || !r.comfort.temp_satisfied || (co2_enforced && !r.comfort.co2_satisfied))
      code = comfort_infeasible;
  }
  return code;
}

int run_methods(const Args& a, const std::vector<std::string>& names) {
  Loaded l = load(a);
  std::vector<Method> methods;
  for (const auto& n : names) methods.push_back(parse_method(n));
  const fs::path d = out_dir(a);
  l.config.log_dir = d.string();
  const auto rows = compare(l.building, l.scenario, methods, l.config);

  for (const auto& r : rows) {
    const std::string m = to_string(r.method);
    if (!r.ok) {
      std::cerr << m << ": failed: " << r.error << "\n";
      continue;
    }
    auto rep = open_out(d / (m + "_report.csv"));
    write_report_csv(rep, r.report);
    auto st = open_out(d / (m + "_stats.csv"));
    write_stats_csv(st, r.report, a.timing);
  }
  auto cmp = open_out(d / "comparison.csv");
  write_comparison_csv(cmp, rows, a.timing);
  std::ostringstream table;
  write_comparison_csv(table, rows, a.timing);
  std::cout << table.str();
  for (const auto& r : rows) {
    if (!r.ok) continue;
    if (r.fallback_epochs || r.unconverged_epochs || r.floor_epochs)
      std::cerr << to_string(r.method) << ": " << r.fallback_epochs << " fallback, " << r.unconverged_epochs
                << " unconverged, " << r.floor_epochs << " floor-limited epochs\n";
  }
  return exit_for(rows);
}

int oracle(const Args& a) {
  Loaded l = load(a);
  PlantState s = l.scenario.initial_state();
  s.time_index = a.start;
  OracleOptions oo;
  oo.flow_levels = a.flow_levels;
  oo.dr_levels = a.dr_levels;
  const OracleResult orc = brute_force_oracle(l.building, l.scenario, s, oo);
  const EpochResult ep = tldm_epoch(l.building, l.scenario, s, l.config.tldm);
  const double tldm_cost = rollout(l.building, l.scenario, s, ep.plan).total_cost;

  const fs::path d = out_dir(a);
  auto f = open_out(d / "oracle.csv");
  f << "method,feasible,cost,step,dr";
  for (std::size_t i = 0; i < l.building.zone_count(); ++i) f << ",m_" << i;
  f << "\n";
  auto rows = [&](const char* name, bool feasible, double cost, const ControlPlan& p) {
    for (int k = 0; k < p.steps(); ++k) {
      f << name << "," << (feasible ? 1 : 0) << "," << format_number(cost) << "," << k << ","
        << format_number(p.vent_fraction[k]);
      for (Eigen::Index i = 0; i < p.flows.rows(); ++i) f << "," << format_number(p.flows(i, k));
      f << "\n";
    }
  };
  if (orc.feasible) rows("oracle", true, orc.cost, orc.plan);
  else f << "oracle,0,,,\n";
  rows("tldm", true, tldm_cost, ep.plan);

  std::cout << "oracle cost " << format_number(orc.cost) << (orc.feasible ? "" : " (infeasible)") << "\n"
            << "tldm cost   " << format_number(tldm_cost) << "\n";
  if (orc.feasible && orc.cost > 0.0) std::cout << "ratio       " << format_number(tldm_cost / orc.cost) << "\n";
  return orc.feasible ? ok : comfort_infeasible;
}

int calibrate(const Args& a) {
  Loaded l = load(a);
  std::vector<Method> methods;
  if (a.method == "all") methods = {Method::dcv1, Method::dcv2};
  else methods.push_back(parse_method(a.method));
  const fs::path d = out_dir(a);
  auto f = open_out(d / "calibration.csv");
  f << "method,rp,ra,max_co2_ppm,cost,evaluations,converged\n";
  int code = ok;
  for (Method m : methods) {
    if (m != Method::dcv1 && m != Method::dcv2) throw InputError("calibrate-dcv takes dcv1, dcv2 or all");
    const DcvConfig base = m == Method::dcv1 ? l.config.dcv1 : l.config.dcv2;
    const CalibrationResult c = calibrate_dcv(l.building, l.scenario, base, {l.config.baseline_ulc, {}}, a.band);
    f << to_string(m) << "," << format_number(c.config.per_person_rate) << "," << format_number(c.config.per_area_rate)
      << "," << format_number(c.max_co2) << "," << format_number(c.cost) << "," << c.evaluations << ","
      << (c.converged ? 1 : 0) << "\n";
    std::cout << to_string(m) << ": R_p=" << format_number(c.config.per_person_rate)
              << " max CO2=" << format_number(c.max_co2) << " cost=" << format_number(c.cost)
              << (c.converged ? "" : " (not in band)") << "\n";
    if (!c.converged) code = nonconvergence;
  }
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-level HVAC / ventilation controller: simulation and comparison harness"};
  app.require_subcommand(1);
  Args a;
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off")
      ->check(CLI::IsMember({"trace", "debug", "info", "warn", "error", "critical", "off"}));

  auto files = [&](CLI::App* c) {
    c->add_option("--building", a.building, "building JSON")->check(CLI::ExistingFile);
    c->add_option("--scenario", a.scenario, "scenario JSON")->check(CLI::ExistingFile);
    c->add_option("--out", a.out, "output directory");
    c->add_option("--set", a.overrides, "key=value override, repeatable");
  };

  auto* gen = app.add_subcommand("gen-scenario", "write building.json and scenario.json");
  gen->add_option("--profile", a.profile, "benchmark5, office or single")
      ->check(CLI::IsMember({"benchmark5", "office", "single"}));
  gen->add_option("--zones", a.zones, "zone count (office)");
  gen->add_option("--seed", a.seed, "generator seed");
  gen->add_option("--out", a.out, "output directory");

  auto* run = app.add_subcommand("run", "full-day receding-horizon run of one method");
  files(run);
  run->add_option("--method", a.method, "tldm, fixed, dcv1 or dcv2");
  run->add_flag("--timing", a.timing, "add wall-clock columns to the CSV outputs");

  auto* cmp = app.add_subcommand("compare", "run several methods on one scenario");
  files(cmp);
  cmp->add_option("--methods", a.methods, "comma separated method list")->delimiter(',');
  cmp->add_flag("--timing", a.timing, "add wall-clock columns to the CSV outputs");
  cmp->add_flag("--sequential", a.sequential, "run methods one after another");

  auto* orc = app.add_subcommand("oracle", "grid oracle against one epoch of the two-level method");
  files(orc);
  orc->add_option("--start", a.start, "time index of the epoch");
  orc->add_option("--flow-levels", a.flow_levels, "flow grid levels per zone and step");
  orc->add_option("--dr-levels", a.dr_levels, "ventilation grid levels per step");

  auto* cal = app.add_subcommand("calibrate-dcv", "bisect the per-person rate until max CO2 sits under the cap");
  files(cal);
  cal->add_option("--method", a.method, "dcv1, dcv2 or all");
  cal->add_option("--band", a.band, "ppm band under the cap");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? ok : input_error;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));
  if (cal->parsed() && a.method == "tldm") a.method = "all";

  try {
    if (gen->parsed()) return gen_scenario(a);
    if (run->parsed()) return run_methods(a, {a.method});
    if (cmp->parsed()) return run_methods(a, a.methods);
    if (orc->parsed()) return oracle(a);
    if (cal->parsed()) return calibrate(a);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return input_error;
  } catch (const ParameterError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return input_error;
  } catch (const StabilityError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return input_error;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return nonconvergence;
  }
  return input_error;
}
