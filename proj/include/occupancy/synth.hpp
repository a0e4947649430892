#pragma once

#include <cstdint>
#include <vector>

#include "occupancy/dataset.hpp"

namespace occupancy {

// Single-zone classroom driven by a known occupancy schedule.
//
//   dC/dt = N(t) * g * 1000 / V - lambda * (C - C_out)      [ppm/h]
//   dE/dt = N(t) * m - lambda * E                           [%RH/h], RH = baseline + E
//
// N is piecewise constant, so both are integrated with their exact
// exponential solutions. Air temperature follows its baseline only.
struct RoomScenario {
    std::string room_id = "2.04";
    double volume_m3 = 141.0;
    double outdoor_co2_ppm = 420.0;
    double air_change_per_h = 2.5;
    double co2_generation_lph = 18.7;  // per person
    double moisture_pct_per_h = 0.25;  // RH increase rate per person
    std::optional<double> initial_co2_ppm;  // defaults to outdoor level

    double rh_mean = 55.0;
    double rh_daily_amplitude = 4.0;
    double t_mean = 21.0;
    double t_amplitude = 0.8;
    double t_period_h = 37.0;  // deliberately incommensurate with the school day

    double co2_noise_ppm = 10.0;
    double rh_noise_pct = 0.3;
    double t_noise_c = 0.05;

    // Sensor glitches: short bursts of implausible CO2 readings.
    std::size_t co2_glitches = 0;
    double glitch_ppm = 800.0;

    std::vector<OccupancyInterval> schedule;
    std::uint64_t seed = 1;

    void validate() const;  // throws InvalidArgument
};

struct SimulationResult {
    SensorSeries series;
    OccupancySchedule schedule;
    std::vector<double> true_co2;  // noise-free concentration at each sample
    std::vector<int> true_occupants;
};

// Samples at [start, end) every 60 s.
SimulationResult simulate_classroom(const RoomScenario& scenario, Timestamp start, Timestamp end);

// Closed-form single step of the first-order model.
double co2_after(double c0, double occupants, double hours, const RoomScenario& s);
double co2_steady_state(double occupants, const RoomScenario& s);

struct ScheduleOptions {
    int min_classes = 4;
    int max_classes = 6;
    int min_occupants = 15;  // students plus teacher
    int max_occupants = 28;
    int first_class_minute = 8 * 60 + 15;  // local time
    int class_minutes = 90;
    int break_minutes_min = 10;
    int break_minutes_max = 30;
    Minutes utc_offset{0};
};

// Weekday classes between `first_day` and `first_day + days`.
std::vector<OccupancyInterval> make_school_schedule(const std::string& room_id, Timestamp first_day, int days,
                                                    std::uint64_t seed, const ScheduleOptions& options = {});

}  // namespace occupancy
