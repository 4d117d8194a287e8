#include "hvac/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>

namespace hvac {

using nlohmann::json;

namespace {

std::vector<double> to_vec(const Vector& v) { return {v.data(), v.data() + v.size()}; }

Vector from_vec(const std::vector<double>& v) { return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size())); }

template <class T>
void read_opt(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

json read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

double parse_double(const std::string& key, const std::string& v) {
  double x = 0.0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc{} || r.ptr != end) throw InputError("override " + key + ": '" + v + "' is not a number");
  return x;
}

int parse_int(const std::string& key, const std::string& v) {
  int x = 0;
  const auto* end = v.data() + v.size();
  const auto r = std::from_chars(v.data(), end, x);
  if (r.ec != std::errc{} || r.ptr != end) throw InputError("override " + key + ": '" + v + "' is not an integer");
  return x;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on") return true;
  if (v == "false" || v == "0" || v == "off") return false;
  throw InputError("override " + key + ": '" + v + "' is not a boolean");
}

using Setter = std::function<void(const std::string&, const std::string&, CompareConfig&, Building&)>;

std::vector<AdalConfig*> adal_targets(CompareConfig& c, int which) {  // 0 both, 1 ulc, 2 llc
  std::vector<AdalConfig*> t;
  if (which != 2) {
    t.push_back(&c.tldm.ulc.adal);
    t.push_back(&c.baseline_ulc.adal);
  }
  if (which != 1) t.push_back(&c.tldm.llc.adal);
  return t;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> m;
    const std::pair<const char*, int> scopes[] = {{"", 0}, {"ulc.", 1}, {"llc.", 2}};
    for (const auto& [prefix, which] : scopes) {
      const int w = which;
      const std::string p = prefix;
      m[p + "rho"] = [w](auto& k, auto& v, auto& c, auto&) { for (auto* a : adal_targets(c, w)) a->rho = parse_double(k, v); };
      m[p + "tau"] = [w](auto& k, auto& v, auto& c, auto&) { for (auto* a : adal_targets(c, w)) a->tau = parse_double(k, v); };
      m[p + "eps_in"] = [w](auto& k, auto& v, auto& c, auto&) { for (auto* a : adal_targets(c, w)) a->eps_in = parse_double(k, v); };
      m[p + "eps_step"] = [w](auto& k, auto& v, auto& c, auto&) { for (auto* a : adal_targets(c, w)) a->eps_step = parse_double(k, v); };
      m[p + "eps_out"] = [w](auto& k, auto& v, auto& c, auto&) { for (auto* a : adal_targets(c, w)) a->eps_out = parse_double(k, v); };
      m[p + "max_inner"] = [w](auto& k, auto& v, auto& c, auto&) { for (auto* a : adal_targets(c, w)) a->max_inner = parse_int(k, v); };
      m[p + "max_outer"] = [w](auto& k, auto& v, auto& c, auto&) { for (auto* a : adal_targets(c, w)) a->max_outer = parse_int(k, v); };
      m[p + "residual_balancing"] = [w](auto& k, auto& v, auto& c, auto&) {
        for (auto* a : adal_targets(c, w)) a->residual_balancing = parse_bool(k, v);
      };
      m[p + "multiplier_step"] = [w](auto& k, auto& v, auto& c, auto&) {
        MultiplierStep s;
        if (v == "rho") {
          s = MultiplierStep::rho;
        } else if (v == "rho_tau") {
          s = MultiplierStep::rho_tau;
        } else {
          throw InputError("override " + k + ": expected rho or rho_tau");
        }
        for (auto* a : adal_targets(c, w)) a->step = s;
      };
    }
    m["dr_step"] = [](auto& k, auto& v, auto& c, auto&) { c.tldm.dr_step = parse_double(k, v); };
    m["max_dr_iters"] = [](auto& k, auto& v, auto& c, auto&) { c.tldm.max_dr_iters = parse_int(k, v); };
    m["temp_tolerance"] = [](auto& k, auto& v, auto& c, auto&) { c.tldm.temp_tolerance = parse_double(k, v); };
    m["co2_guard"] = [](auto& k, auto& v, auto& c, auto&) { c.tldm.co2_guard = parse_double(k, v); };
    m["warm_start"] = [](auto& k, auto& v, auto& c, auto&) { c.tldm.warm_start = parse_bool(k, v); };
    m["soft_fallback"] = [](auto& k, auto& v, auto& c, auto&) { c.tldm.soft_fallback = parse_bool(k, v); };
    m["transient_hours"] = [](auto& k, auto& v, auto& c, auto&) { c.transient_hours = parse_double(k, v); };
    m["comfort_tolerance"] = [](auto& k, auto& v, auto& c, auto&) { c.comfort_tolerance = parse_double(k, v); };
    auto ulc_both = [](CompareConfig& c, const std::function<void(UlcOptions&)>& f) {
      f(c.tldm.ulc);
      f(c.baseline_ulc);
    };
    m["ulc.transient_margin"] = [ulc_both](auto& k, auto& v, auto& c, auto&) { ulc_both(c, [&](UlcOptions& u) { u.transient_margin = parse_double(k, v); }); };
    m["ulc.repair"] = [ulc_both](auto& k, auto& v, auto& c, auto&) { ulc_both(c, [&](UlcOptions& u) { u.repair = parse_bool(k, v); }); };
    m["ulc.capacity_backoff"] = [ulc_both](auto& k, auto& v, auto& c, auto&) { ulc_both(c, [&](UlcOptions& u) { u.capacity_backoff = parse_double(k, v); }); };
    m["ulc.theta_scale"] = [ulc_both](auto& k, auto& v, auto& c, auto&) { ulc_both(c, [&](UlcOptions& u) { u.theta_scale = parse_double(k, v); }); };
    m["ulc.tie_break"] = [ulc_both](auto& k, auto& v, auto& c, auto&) { ulc_both(c, [&](UlcOptions& u) { u.tie_break = parse_double(k, v); }); };
    m["llc.co2_floor_margin"] = [](auto& k, auto& v, auto& c, auto&) { c.tldm.llc.co2_floor_margin = parse_double(k, v); };
    m["llc.capacity_backoff"] = [](auto& k, auto& v, auto& c, auto&) { c.tldm.llc.capacity_backoff = parse_double(k, v); };
    m["llc.soft_penalty"] = [](auto& k, auto& v, auto& c, auto&) { c.tldm.llc.soft_penalty = parse_double(k, v); };
    m["dcv1.rp"] = [](auto& k, auto& v, auto& c, auto&) { c.dcv1.per_person_rate = parse_double(k, v); };
    m["dcv2.rp"] = [](auto& k, auto& v, auto& c, auto&) { c.dcv2.per_person_rate = parse_double(k, v); };
    m["dcv2.ra"] = [](auto& k, auto& v, auto& c, auto&) { c.dcv2.per_area_rate = parse_double(k, v); };
    m["dcv.resolve"] = [](auto& k, auto& v, auto& c, auto&) { c.dcv1.resolve = c.dcv2.resolve = parse_bool(k, v); };
    m["ahu.supply_temp"] = [](auto& k, auto& v, auto&, auto& b) { b.ahu.supply_temp = parse_double(k, v); };
    m["ahu.fan_coeff"] = [](auto& k, auto& v, auto&, auto& b) { b.ahu.fan_coeff = parse_double(k, v); };
    m["ahu.cop_inverse"] = [](auto& k, auto& v, auto&, auto& b) { b.ahu.cop_inverse = parse_double(k, v); };
    m["ahu.total_flow_max"] = [](auto& k, auto& v, auto&, auto& b) { b.ahu.total_flow_max = parse_double(k, v); };
    m["ahu.dr_min"] = [](auto& k, auto& v, auto&, auto& b) { b.ahu.dr_min = parse_double(k, v); };
    m["ahu.dr_max"] = [](auto& k, auto& v, auto&, auto& b) { b.ahu.dr_max = parse_double(k, v); };
    m["ahu.specific_heat"] = [](auto& k, auto& v, auto&, auto& b) { b.ahu.specific_heat = parse_double(k, v); };
    m["ahu.air_density"] = [](auto& k, auto& v, auto&, auto& b) { b.ahu.air_density = parse_double(k, v); };
    m["zone.temp_min"] = [](auto& k, auto& v, auto&, auto& b) { for (auto& z : b.zones) z.temp_min = parse_double(k, v); };
    m["zone.temp_max"] = [](auto& k, auto& v, auto&, auto& b) { for (auto& z : b.zones) z.temp_max = parse_double(k, v); };
    m["zone.co2_max"] = [](auto& k, auto& v, auto&, auto& b) { for (auto& z : b.zones) z.co2_max = parse_double(k, v); };
    m["zone.flow_min"] = [](auto& k, auto& v, auto&, auto& b) { for (auto& z : b.zones) z.flow_min = parse_double(k, v); };
    m["zone.flow_max"] = [](auto& k, auto& v, auto&, auto& b) { for (auto& z : b.zones) z.flow_max = parse_double(k, v); };
    return m;
  }();
  return table;
}

}  // namespace

json to_json(const Building& b) {
  json zones = json::array();
  for (const auto& z : b.zones) {
    zones.push_back({{"heat_capacity", z.heat_capacity},
                     {"air_mass", z.air_mass},
                     {"area", z.area},
                     {"resistance_to_outside", z.resistance_to_outside},
                     {"flow_min", z.flow_min},
                     {"flow_max", z.flow_max},
                     {"temp_min", z.temp_min},
                     {"temp_max", z.temp_max},
                     {"co2_max", z.co2_max}});
  }
  json adj = json::array();
  for (const auto& e : b.topology.edges()) adj.push_back({{"a", e.a}, {"b", e.b}, {"resistance", e.resistance}});
  const auto& a = b.ahu;
  return {{"horizon", {{"step_seconds", b.horizon.step_seconds}, {"horizon_steps", b.horizon.horizon_steps}, {"day_steps", b.horizon.day_steps}}},
          {"ahu", {{"supply_temp", a.supply_temp}, {"fan_coeff", a.fan_coeff}, {"cop_inverse", a.cop_inverse},
                   {"total_flow_max", a.total_flow_max}, {"dr_min", a.dr_min}, {"dr_max", a.dr_max},
                   {"dr_step", a.dr_step}, {"specific_heat", a.specific_heat}, {"air_density", a.air_density}}},
          {"zones", zones},
          {"adjacency", adj}};
}

json to_json(const Scenario& s) {
  return {{"outdoor_temp", s.outdoor_temp},
          {"outdoor_co2", s.outdoor_co2},
          {"occupancy", s.occupancy},
          {"internal_gain", s.internal_gain},
          {"price", s.price},
          {"co2_gen_rate", s.co2_gen_rate},
          {"initial_temps", to_vec(s.initial_temps)},
          {"initial_co2", to_vec(s.initial_co2)}};
}

Building building_from_json(const json& j) {
  try {
    Building b;
    if (j.contains("horizon")) {
      const auto& h = j.at("horizon");
      read_opt(h, "step_seconds", b.horizon.step_seconds);
      read_opt(h, "horizon_steps", b.horizon.horizon_steps);
      read_opt(h, "day_steps", b.horizon.day_steps);
    }
    if (j.contains("ahu")) {
      const auto& a = j.at("ahu");
      read_opt(a, "supply_temp", b.ahu.supply_temp);
      read_opt(a, "fan_coeff", b.ahu.fan_coeff);
      read_opt(a, "cop_inverse", b.ahu.cop_inverse);
      read_opt(a, "total_flow_max", b.ahu.total_flow_max);
      read_opt(a, "dr_min", b.ahu.dr_min);
      read_opt(a, "dr_max", b.ahu.dr_max);
      read_opt(a, "dr_step", b.ahu.dr_step);
      read_opt(a, "specific_heat", b.ahu.specific_heat);
      read_opt(a, "air_density", b.ahu.air_density);
    }
    for (const auto& zj : j.at("zones")) {
      ZoneParams z;
      read_opt(zj, "heat_capacity", z.heat_capacity);
      read_opt(zj, "air_mass", z.air_mass);
      read_opt(zj, "area", z.area);
      read_opt(zj, "resistance_to_outside", z.resistance_to_outside);
      read_opt(zj, "flow_min", z.flow_min);
      read_opt(zj, "flow_max", z.flow_max);
      read_opt(zj, "temp_min", z.temp_min);
      read_opt(zj, "temp_max", z.temp_max);
      read_opt(zj, "co2_max", z.co2_max);
      b.zones.push_back(z);
    }
    std::vector<Adjacency> edges;
    if (j.contains("adjacency")) {
      for (const auto& e : j.at("adjacency")) {
        Adjacency a;
        a.a = e.at("a").get<std::size_t>();
        a.b = e.at("b").get<std::size_t>();
        read_opt(e, "resistance", a.resistance);
        edges.push_back(a);
      }
    }
    for (const auto& e : edges) {
      if (e.a >= b.zones.size() || e.b >= b.zones.size()) throw InputError("adjacency refers to a missing zone");
    }
    b.topology = BuildingTopology(b.zones.size(), edges);
    b.validate();
    return b;
  } catch (const json::exception& e) {
    throw InputError(std::string("building: ") + e.what());
  }
}

Scenario scenario_from_json(const json& j) {
  try {
    Scenario s;
    s.outdoor_temp = j.at("outdoor_temp").get<std::vector<double>>();
    s.outdoor_co2 = j.at("outdoor_co2").get<std::vector<double>>();
    s.occupancy = j.at("occupancy").get<std::vector<std::vector<double>>>();
    s.internal_gain = j.at("internal_gain").get<std::vector<std::vector<double>>>();
    s.price = j.at("price").get<std::vector<double>>();
    read_opt(j, "co2_gen_rate", s.co2_gen_rate);
    s.initial_temps = from_vec(j.at("initial_temps").get<std::vector<double>>());
    s.initial_co2 = from_vec(j.at("initial_co2").get<std::vector<double>>());
    return s;
  } catch (const json::exception& e) {
    throw InputError(std::string("scenario: ") + e.what());
  }
}

void save_building(const std::filesystem::path& path, const Building& building) { write_file(path, to_json(building)); }
void save_scenario(const std::filesystem::path& path, const Scenario& scenario) { write_file(path, to_json(scenario)); }
Building load_building(const std::filesystem::path& path) { return building_from_json(read_file(path)); }
Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_json(read_file(path)); }

std::string format_number(double v) {
  if (v == 0.0) v = 0.0;  // no "-0"
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void write_report_csv(std::ostream& out, const RunReport& r) {
  const std::size_t n = r.temps.empty() ? 0 : static_cast<std::size_t>(r.temps.front().size());
  out << "step,time_index";
  for (std::size_t i = 0; i < n; ++i) out << ",T_" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",C_" << i;
  for (std::size_t i = 0; i < n; ++i) out << ",m_" << i;
  out << ",dr,cooling_kw,fan_kw,price,cost\n";
  for (std::size_t k = 0; k < r.temps.size(); ++k) {
    out << k << ',' << r.start_index + static_cast<int>(k);
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_number(r.temps[k](static_cast<Eigen::Index>(i)));
    for (std::size_t i = 0; i < n; ++i) out << ',' << format_number(r.co2[k](static_cast<Eigen::Index>(i)));
    const bool control = k < r.flows.size();
    for (std::size_t i = 0; i < n; ++i) {
      out << ',';
      if (control) out << format_number(r.flows[k](static_cast<Eigen::Index>(i)));
    }
    if (control) {
      out << ',' << format_number(r.dr[k]) << ',' << format_number(r.cooling_power[k]) << ','
          << format_number(r.fan_power[k]) << ',' << format_number(r.price[k]) << ',' << format_number(r.step_cost[k]);
    } else {
      out << ",,,,,";
    }
    out << '\n';
  }
}

void write_stats_csv(std::ostream& out, const RunReport& r, bool timing) {
  out << "time_index,dr_iterations,ulc_iterations,ulc_residual,llc_invoked,llc_inner,llc_outer,llc_residual,"
         "supply_delta,adal_runs,adal_unconverged,llc_c2_failures,dr_floor_hit,fallback,residual_violation";
  if (timing) out << ",wall_ms";
  out << '\n';
  for (const auto& s : r.solver_stats) {
    out << s.time_index << ',' << s.dr_iterations << ',' << s.ulc_iterations << ',' << format_number(s.ulc_residual)
        << ',' << s.llc_invoked << ',' << s.llc_inner_iterations << ',' << s.llc_outer_iterations << ','
        << format_number(s.llc_residual) << ',' << format_number(s.llc_supply_delta) << ',' << s.adal_runs << ','
        << s.adal_unconverged << ',' << s.llc_c2_failures << ',' << s.dr_floor_hit << ',' << s.fallback << ','
        << format_number(s.residual_violation);
    if (timing) out << ',' << format_number(s.wall_ms);
    out << '\n';
  }
}

void write_comparison_csv(std::ostream& out, const std::vector<MethodOutcome>& rows, bool timing) {
  out << "method,cost,max_co2_ppm,max_temp_violation_C";
  if (timing) out << ",mean_epoch_ms";
  out << '\n';
  for (const auto& o : rows) {
    out << to_string(o.method);
    if (o.ok) {
      out << ',' << format_number(o.report.total_cost) << ',' << format_number(o.comfort.max_co2) << ','
          << format_number(o.comfort.max_temp_violation);
      if (timing) out << ',' << format_number(o.mean_epoch_ms);
    } else {
      out << ",,,";
      if (timing) out << ',';
    }
    out << '\n';
  }
}

void apply_override(const std::string& assignment, CompareConfig& config, Building& building) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw InputError("override '" + assignment + "' must be key=value");
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);
  const auto& t = setters();
  const auto it = t.find(key);
  if (it == t.end()) throw InputError("unknown override key '" + key + "'");
  it->second(key, value, config, building);
}

std::vector<std::string> override_keys() {
  std::vector<std::string> keys;
  for (const auto& [k, v] : setters()) keys.push_back(k);
  return keys;
}

}  // namespace hvac
