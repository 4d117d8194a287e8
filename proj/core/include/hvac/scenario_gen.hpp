#pragma once

#include "hvac/model.hpp"

#include <cstdint>
#include <string>

namespace hvac {

enum class Profile { benchmark5, office, single };

Profile parse_profile(const std::string& name);
const char* to_string(Profile p);

struct GeneratorOptions {
  Profile profile = Profile::benchmark5;
  int zones = 5;
  std::uint64_t seed = 1;
  HorizonConfig horizon;
  GainModel gains{0.1, 2.5};
  double gain_per_area = 0.025;  // kW/m^2, office baseline
  double peak_occupancy_scale = 1.0;
  double outdoor_mean = 29.5;
  double outdoor_amplitude = 3.5;
  double outdoor_peak_hour = 15.0;
  double outdoor_co2 = 400.0;
  double initial_co2 = 420.0;
  double price_peak = 0.20;
  double price_offpeak = 0.12;
  double peak_start_hour = 8.0;
  double peak_end_hour = 20.0;
  double capacity_fraction = 0.8;  // total_flow_max as a share of summed zone maxima
};

struct Case {
  Building building;
  Scenario scenario;
};

/// Fraction of peak occupancy at an hour of day in [0, 24).
double office_occupancy_fraction(double hour);

Case generate_case(const GeneratorOptions& options);

/// Ring of five zones with the reference parameter set.
Case benchmark5(const GeneratorOptions& options = {});

/// Random office floor with max node degree 4.
Case office_case(const GeneratorOptions& options);

/// One zone, three-step horizon, constant occupancy high enough that the CO2
/// cap binds; small enough for the grid oracle.
Case single_zone_case(const GeneratorOptions& options = {}, double occupants = 6.0, double initial_co2 = 700.0);

}  // namespace hvac
