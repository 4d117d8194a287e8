#include "hvac/scenario_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace hvac {

namespace {

double hour_of(int t, const HorizonConfig& h) {
  const int day = h.day_steps;
  const int tod = ((t % day) + day) % day;
  return tod * 24.0 / day;
}

void fill_exogenous(Case& c, const GeneratorOptions& o, const std::vector<double>& peaks,
                    const std::vector<double>& baseline) {
  const auto& h = c.building.horizon;
  const std::size_t n = peaks.size();
  const int len = h.day_steps + h.horizon_steps;
  Scenario& s = c.scenario;
  s.outdoor_temp.resize(static_cast<std::size_t>(len));
  s.outdoor_co2.assign(static_cast<std::size_t>(len), o.outdoor_co2);
  s.price.resize(static_cast<std::size_t>(len));
  s.occupancy.assign(n, std::vector<double>(static_cast<std::size_t>(len), 0.0));
  s.internal_gain.assign(n, std::vector<double>(static_cast<std::size_t>(len), 0.0));
  for (int t = 0; t < len; ++t) {
    const auto ts = static_cast<std::size_t>(t);
    const double hr = hour_of(t, h);
    s.outdoor_temp[ts] = o.outdoor_mean + o.outdoor_amplitude * std::cos(2.0 * std::numbers::pi * (hr - o.outdoor_peak_hour) / 24.0);
    s.price[ts] = (hr >= o.peak_start_hour && hr < o.peak_end_hour) ? o.price_peak : o.price_offpeak;
    const double frac = office_occupancy_fraction(hr);
    for (std::size_t i = 0; i < n; ++i) {
      const double occ = std::round(peaks[i] * frac);
      s.occupancy[i][ts] = occ;
      s.internal_gain[i][ts] = occ * o.gains.per_person + baseline[i];
    }
  }
  s.co2_gen_rate = 40.0;
  s.initial_co2 = Vector::Constant(static_cast<Eigen::Index>(n), o.initial_co2);
}

}  // namespace

Profile parse_profile(const std::string& name) {
  if (name == "benchmark5") return Profile::benchmark5;
  if (name == "office") return Profile::office;
  if (name == "single") return Profile::single;
  throw InputError("unknown profile '" + name + "' (expected benchmark5, office or single)");
}

const char* to_string(Profile p) {
  switch (p) {
    case Profile::benchmark5: return "benchmark5";
    case Profile::office: return "office";
    case Profile::single: return "single";
  }
  return "?";
}

double office_occupancy_fraction(double hour) {
  if (hour < 8.0 || hour >= 19.0) return 0.0;
  if (hour < 9.0) return hour - 8.0;
  if (hour >= 12.0 && hour < 13.0) return 0.5;
  if (hour < 17.0) return 1.0;
  return (19.0 - hour) / 2.0;
}

Case benchmark5(const GeneratorOptions& o) {
  Case c;
  c.building.horizon = o.horizon;
  c.building.zones.assign(5, ZoneParams{});
  std::vector<Adjacency> ring;
  for (std::size_t i = 0; i < 5; ++i) ring.push_back({i, (i + 1) % 5, 14.0});
  c.building.topology = BuildingTopology(5, ring);
  c.building.ahu.total_flow_max = o.capacity_fraction * 5 * ZoneParams{}.flow_max;
  std::vector<double> peaks{9, 6, 10, 5, 8};
  for (double& p : peaks) p = std::round(p * o.peak_occupancy_scale);
  const std::vector<double> baseline(5, o.gains.baseline);
  fill_exogenous(c, o, peaks, baseline);
  c.scenario.initial_temps.resize(5);
  c.scenario.initial_temps << 29, 30, 31, 30, 29;
  return c;
}

Case office_case(const GeneratorOptions& o) {
  if (o.zones < 1) throw InputError("zones must be >= 1");
  const auto n = static_cast<std::size_t>(o.zones);
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  Case c;
  c.building.horizon = o.horizon;
  c.building.zones.assign(n, ZoneParams{});
  std::vector<double> peaks(n), baseline(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& z = c.building.zones[i];
    z.area = 60.0 + 80.0 * u01(rng);
    peaks[i] = std::round(0.08 * z.area * (0.6 + 0.6 * u01(rng)) * o.peak_occupancy_scale);
    baseline[i] = o.gain_per_area * z.area;
  }

  // Random tree with degree cap, then extra edges while the cap allows.
  std::vector<int> degree(n, 0);
  std::set<std::pair<std::size_t, std::size_t>> edges;
  auto add = [&](std::size_t a, std::size_t b) {
    if (a == b || degree[a] >= 4 || degree[b] >= 4) return false;
    const auto key = std::minmax(a, b);
    if (!edges.insert(key).second) return false;
    ++degree[a];
    ++degree[b];
    return true;
  };
  for (std::size_t i = 1; i < n; ++i) {
    std::vector<std::size_t> open;
    for (std::size_t j = 0; j < i; ++j) {
      if (degree[j] < 4) open.push_back(j);
    }
    const std::size_t pick = open[static_cast<std::size_t>(u01(rng) * static_cast<double>(open.size())) % open.size()];
    add(i, pick);
  }
  const std::size_t extra = n / 2;
  for (std::size_t e = 0, tries = 0; e < extra && tries < 20 * n; ++tries) {
    const auto a = static_cast<std::size_t>(u01(rng) * static_cast<double>(n)) % n;
    const auto b = static_cast<std::size_t>(u01(rng) * static_cast<double>(n)) % n;
    if (add(a, b)) ++e;
  }
  std::vector<Adjacency> adj;
  for (const auto& [a, b] : edges) adj.push_back({a, b, 14.0});
  c.building.topology = BuildingTopology(n, adj);

  double sum_max = 0.0;
  for (const auto& z : c.building.zones) sum_max += z.flow_max;
  c.building.ahu.total_flow_max = o.capacity_fraction * sum_max;

  fill_exogenous(c, o, peaks, baseline);
  c.scenario.initial_temps.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) c.scenario.initial_temps(static_cast<Eigen::Index>(i)) = 24.5 + 1.0 * u01(rng);
  return c;
}

Case single_zone_case(const GeneratorOptions& o, double occupants, double initial_co2) {
  Case c;
  c.building.horizon.step_seconds = o.horizon.step_seconds;
  c.building.horizon.horizon_steps = 3;
  c.building.horizon.day_steps = 3;
  c.building.zones.assign(1, ZoneParams{});
  c.building.topology = BuildingTopology(1, {});
  c.building.ahu.total_flow_max = c.building.zones[0].flow_max;
  const std::size_t len = 6;
  Scenario& s = c.scenario;
  s.outdoor_temp.assign(len, o.outdoor_mean + o.outdoor_amplitude);
  s.outdoor_co2.assign(len, o.outdoor_co2);
  s.price.assign(len, o.price_peak);
  s.occupancy.assign(1, std::vector<double>(len, std::round(occupants)));
  s.internal_gain.assign(1, std::vector<double>(len, o.gains(std::round(occupants))));
  s.co2_gen_rate = 40.0;
  s.initial_temps = Vector::Constant(1, 25.0);
  s.initial_co2 = Vector::Constant(1, initial_co2);
  return c;
}

Case generate_case(const GeneratorOptions& o) {
  switch (o.profile) {
    case Profile::benchmark5: return benchmark5(o);
    case Profile::office: return office_case(o);
    case Profile::single: return single_zone_case(o);
  }
  throw InputError("unknown profile");
}

}  // namespace hvac
