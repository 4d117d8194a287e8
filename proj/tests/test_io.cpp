#include "hvac/compare.hpp"
#include "hvac/io.hpp"
#include "hvac/scenario_gen.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace hvac;
using namespace hvac::test;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("hvac_test_io_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Json, BuildingAndScenarioRoundTrip) {
  Case c = benchmark5();
  const Building b = building_from_json(to_json(c.building));
  EXPECT_EQ(to_json(b), to_json(c.building));
  EXPECT_EQ(b.zone_count(), 5u);
  EXPECT_EQ(b.topology.edges().size(), c.building.topology.edges().size());
  const Scenario s = scenario_from_json(to_json(c.scenario));
  EXPECT_EQ(s.occupancy, c.scenario.occupancy);
  EXPECT_EQ(s.initial_temps, c.scenario.initial_temps);

  const fs::path dir = scratch_dir("roundtrip");
  save_building(dir / "b.json", c.building);
  save_scenario(dir / "s.json", c.scenario);
  EXPECT_EQ(to_json(load_building(dir / "b.json")), to_json(c.building));
  EXPECT_EQ(to_json(load_scenario(dir / "s.json")), to_json(c.scenario));
}

TEST(Json, ErrorsAreTyped) {
  const fs::path dir = scratch_dir("errors");
  EXPECT_THROW(load_building(dir / "missing.json"), InputError);
  std::ofstream(dir / "bad.json") << "{ not json";
  EXPECT_THROW(load_scenario(dir / "bad.json"), InputError);
  auto j = to_json(benchmark5().building);
  j["zones"][0]["flow_max"] = -1.0;
  EXPECT_THROW(building_from_json(j).validate(), ParameterError);
}

TEST(Generator, SameSeedSameBytes) {
  const fs::path dir = scratch_dir("seed");
  GeneratorOptions o;
  o.profile = Profile::office;
  o.zones = 12;
  o.seed = 42;
  for (const char* tag : {"a", "b"}) {
    Case c = generate_case(o);
    save_building(dir / (std::string(tag) + "_b.json"), c.building);
    save_scenario(dir / (std::string(tag) + "_s.json"), c.scenario);
  }
  EXPECT_EQ(slurp(dir / "a_b.json"), slurp(dir / "b_b.json"));
  EXPECT_EQ(slurp(dir / "a_s.json"), slurp(dir / "b_s.json"));
  o.seed = 43;
  EXPECT_NE(to_json(generate_case(o).scenario), to_json(load_scenario(dir / "a_s.json")));
}

TEST(Generator, OfficeDegreeBoundAndConnectivity) {
  GeneratorOptions o;
  o.profile = Profile::office;
  o.zones = 50;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    o.seed = seed;
    Case c = generate_case(o);
    ASSERT_EQ(c.building.zone_count(), 50u);
    EXPECT_NO_THROW(c.building.validate());
    EXPECT_NO_THROW(c.scenario.validate(c.building));
    std::vector<int> seen(50, 0);
    std::vector<std::size_t> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const auto i = stack.back();
      stack.pop_back();
      EXPECT_LE(c.building.topology.degree(i), 4u);
      for (const auto& [j, r] : c.building.topology.neighbors(i))
        if (!seen[j]++) stack.push_back(j);
    }
    EXPECT_EQ(std::count(seen.begin(), seen.end(), 0), 0) << "seed " << seed;
  }
}

TEST(Generator, BenchmarkRing) {
  Case c = benchmark5();
  ASSERT_EQ(c.building.zone_count(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_EQ(c.building.topology.degree(i), 2u);
  Vector t0(5);
  t0 << 29.0, 30.0, 31.0, 30.0, 29.0;
  EXPECT_EQ(c.scenario.initial_temps, t0);
  EXPECT_EQ(c.building.horizon.horizon_steps, 10);
  EXPECT_EQ(c.building.horizon.day_steps, 48);
  EXPECT_GE(c.scenario.length(), 58u);
}

TEST(Overrides, AppliesAndRejects) {
  CompareConfig cfg;
  Building b = benchmark5().building;
  apply_override("ulc.rho=2.5", cfg, b);
  EXPECT_EQ(cfg.tldm.ulc.adal.rho, 2.5);
  EXPECT_EQ(cfg.baseline_ulc.adal.rho, 2.5);
  EXPECT_NE(cfg.tldm.llc.adal.rho, 2.5);
  apply_override("eps_step=0", cfg, b);
  EXPECT_EQ(cfg.tldm.llc.adal.eps_step, 0.0);
  apply_override("dcv1.rp=24.375", cfg, b);
  EXPECT_EQ(cfg.dcv1.per_person_rate, 24.375);
  apply_override("warm_start=off", cfg, b);
  EXPECT_FALSE(cfg.tldm.warm_start);
  apply_override("zone.co2_max=1000", cfg, b);
  for (const auto& z : b.zones) EXPECT_EQ(z.co2_max, 1000.0);
  apply_override("llc.multiplier_step=rho", cfg, b);
  EXPECT_EQ(cfg.tldm.llc.adal.step, MultiplierStep::rho);

  for (const char* bad : {"rho", "=1", "nosuch=1", "rho=abc", "rho=1x", "max_inner=2.5", "warm_start=maybe",
                          "multiplier_step=fast"}) {
    EXPECT_THROW(apply_override(bad, cfg, b), InputError) << bad;
  }
  const auto keys = override_keys();
  EXPECT_NE(std::find(keys.begin(), keys.end(), "dcv2.ra"), keys.end());
}

TEST(Csv, NumberFormat) {
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(0.0), "0");
  EXPECT_EQ(format_number(1.5), "1.5");
  EXPECT_EQ(format_number(-2.25e-7), "-2.25e-07");
  EXPECT_EQ(format_number(1.0 / 3.0), "0.3333333333");
}

TEST(Csv, ReportAndComparisonLayout) {
  Building b = isolated_building(2, 3, 4);
  Scenario s = constant_scenario(b, 30.0, 2.0, 1.0);
  CompareConfig cfg;
  cfg.transient_hours = 0.0;
  EXPECT_THROW(compare(b, s, {}, cfg), InputError);
  auto out = compare(b, s, {Method::fixed}, cfg);
  ASSERT_EQ(out.size(), 1u);
  ASSERT_TRUE(out[0].ok) << out[0].error;

  std::ostringstream rep;
  write_report_csv(rep, out[0].report);
  std::istringstream in(rep.str());
  std::string header, line;
  std::getline(in, header);
  EXPECT_EQ(header.rfind("step,time_index,T_0,T_1,C_0,C_1,m_0,m_1", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_EQ(line.find("-0,"), std::string::npos);
    EXPECT_EQ(std::count(line.begin(), line.end(), ','), std::count(header.begin(), header.end(), ','));
  }
  EXPECT_EQ(rows, 4 + 1);  // final state row carries no controls

  std::ostringstream cmp, timed;
  write_comparison_csv(cmp, out, false);
  write_comparison_csv(timed, out, true);
  const std::string table = cmp.str();
  EXPECT_EQ(table.substr(0, table.find('\n')), "method,cost,max_co2_ppm,max_temp_violation_C");
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 2);
  EXPECT_NE(timed.str().find("mean_epoch_ms"), std::string::npos);

  std::ostringstream st, st_t;
  write_stats_csv(st, out[0].report, false);
  write_stats_csv(st_t, out[0].report, true);
  EXPECT_EQ(st.str().find("wall_ms"), std::string::npos);
  EXPECT_NE(st_t.str().find("wall_ms"), std::string::npos);
}

TEST(Methods, NamesRoundTrip) {
  for (Method m : {Method::tldm, Method::fixed, Method::dcv1, Method::dcv2}) EXPECT_EQ(parse_method(to_string(m)), m);
  EXPECT_THROW(parse_method("mpc"), InputError);
  for (Profile p : {Profile::benchmark5, Profile::office, Profile::single}) EXPECT_EQ(parse_profile(to_string(p)), p);
}
