#include "hvac/compare.hpp"

#include "hvac/parallel.hpp"

#include <spdlog/spdlog.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>

namespace hvac {

Method parse_method(const std::string& name) {
  if (name == "tldm") return Method::tldm;
  if (name == "fixed") return Method::fixed;
  if (name == "dcv1") return Method::dcv1;
  if (name == "dcv2") return Method::dcv2;
  throw InputError("unknown method '" + name + "' (expected tldm, fixed, dcv1 or dcv2)");
}

const char* to_string(Method m) {
  switch (m) {
    case Method::tldm: return "tldm";
    case Method::fixed: return "fixed";
    case Method::dcv1: return "dcv1";
    case Method::dcv2: return "dcv2";
  }
  return "?";
}

int transient_steps(const Building& building, double hours) {
  return static_cast<int>(std::ceil(hours / building.horizon.step_hours() - 1e-9));
}

RunReport run_method(Method method, const Building& building, const Scenario& scenario, const CompareConfig& config,
                     const MpcOptions& options) {
  BaselineOptions bo{config.baseline_ulc, options};
  switch (method) {
    case Method::tldm: return mpc_run(building, scenario, config.tldm, options);
    case Method::fixed: return run_fixed_vent(building, scenario, bo);
    case Method::dcv1: return run_dcv(building, scenario, config.dcv1, bo);
    case Method::dcv2: return run_dcv(building, scenario, config.dcv2, bo);
  }
  throw InputError("unknown method");
}

MethodOutcome summarize(Method method, const Building& building, RunReport report, const CompareConfig& config) {
  MethodOutcome o;
  o.method = method;
  o.ok = true;
  o.comfort = check_comfort(report, building.zones, config.comfort_tolerance,
                            transient_steps(building, config.transient_hours));
  double ms = 0.0;
  for (const auto& s : report.solver_stats) {
    ms += s.wall_ms;
    o.fallback_epochs += s.fallback ? 1 : 0;
    o.unconverged_epochs += (s.adal_unconverged > 0 || s.llc_c2_failures > 0) ? 1 : 0;
    o.floor_epochs += (s.dr_floor_hit && s.residual_violation > 0.0) ? 1 : 0;
  }
  o.mean_epoch_ms = report.solver_stats.empty() ? 0.0 : ms / static_cast<double>(report.solver_stats.size());
  o.report = std::move(report);
  return o;
}

std::vector<MethodOutcome> compare(const Building& building, const Scenario& scenario,
                                   const std::vector<Method>& methods, const CompareConfig& config) {
  if (methods.empty()) throw InputError("method list is empty");
  std::vector<MethodOutcome> out(methods.size());
  auto body = [&](std::size_t i) {
    const Method m = methods[i];
    std::unique_ptr<std::ofstream> log;
    MpcOptions mo;
    if (!config.log_dir.empty()) {
      log = std::make_unique<std::ofstream>(std::filesystem::path(config.log_dir) /
                                            (std::string(to_string(m)) + "_epochs.jsonl"));
      mo.log = log.get();
    }
    try {
      out[i] = summarize(m, building, run_method(m, building, scenario, config, mo), config);
    } catch (const std::exception& e) {
      spdlog::error("method {} failed: {}", to_string(m), e.what());
      out[i].method = m;
      out[i].ok = false;
      out[i].error = e.what();
    }
  };
  if (config.parallel) {
    ThreadPool::shared().parallel_for(methods.size(), body);
  } else {
    for (std::size_t i = 0; i < methods.size(); ++i) body(i);
  }
  return out;
}

}  // namespace hvac
