#pragma once

// Method registry and the paired comparison harness.

#include "hvac/baselines.hpp"
#include "hvac/model.hpp"
#include "hvac/tldm.hpp"

#include <string>
#include <vector>

namespace hvac {

enum class Method { tldm, fixed, dcv1, dcv2 };

Method parse_method(const std::string& name);
const char* to_string(Method m);

struct CompareConfig {
  TldmConfig tldm;
  UlcOptions baseline_ulc;
  DcvConfig dcv1 = DcvConfig::variant_one();
  DcvConfig dcv2 = DcvConfig::variant_two();
  double transient_hours = 2.0;  // temperature samples before this are not scored
  double comfort_tolerance = 0.0;
  bool parallel = true;
  std::string log_dir;  // per-method JSON-lines epoch logs when set
};

struct MethodOutcome {
  Method method = Method::tldm;
  bool ok = false;
  std::string error;
  RunReport report;
  ComfortSummary comfort;
  double mean_epoch_ms = 0.0;
  int fallback_epochs = 0;
  int unconverged_epochs = 0;  // some ADAL run or C2 check failed in the epoch
  int floor_epochs = 0;        // ventilation floor reached with a residual violation
};

/// Samples skipped for temperature scoring.
int transient_steps(const Building& building, double hours);

RunReport run_method(Method method, const Building& building, const Scenario& scenario, const CompareConfig& config,
                     const MpcOptions& options = {});

/// Scores a finished run: comfort after the transient, epoch timing and flags.
MethodOutcome summarize(Method method, const Building& building, RunReport report, const CompareConfig& config);

/// Runs each method; a failing method is recorded and the rest continue.
std::vector<MethodOutcome> compare(const Building& building, const Scenario& scenario,
                                   const std::vector<Method>& methods, const CompareConfig& config);

}  // namespace hvac
