#include "occupancy/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "occupancy/errors.hpp"
#include "occupancy/random.hpp"

namespace occupancy {

void RoomScenario::validate() const {
    if (!(volume_m3 > 0.0)) throw InvalidArgument("scenario volume must be positive");
    if (!(air_change_per_h > 0.0)) throw InvalidArgument("air-change rate must be positive");
    if (!(co2_generation_lph > 0.0)) throw InvalidArgument("CO2 generation rate must be positive");
    if (!(outdoor_co2_ppm >= 0.0)) throw InvalidArgument("outdoor CO2 must be non-negative");
    if (moisture_pct_per_h < 0.0) throw InvalidArgument("moisture rate must be non-negative");
    if (co2_noise_ppm < 0.0 || rh_noise_pct < 0.0 || t_noise_c < 0.0)
        throw InvalidArgument("noise standard deviations must be non-negative");
    if (!(t_period_h > 0.0)) throw InvalidArgument("temperature period must be positive");
}

double co2_steady_state(double occupants, const RoomScenario& s) {
    return s.outdoor_co2_ppm + occupants * s.co2_generation_lph * 1000.0 / (s.air_change_per_h * s.volume_m3);
}

double co2_after(double c0, double occupants, double hours, const RoomScenario& s) {
    const double css = co2_steady_state(occupants, s);
    return css + (c0 - css) * std::exp(-s.air_change_per_h * hours);
}

namespace {

double moisture_after(double e0, double occupants, double hours, const RoomScenario& s) {
    const double ess = occupants * s.moisture_pct_per_h / s.air_change_per_h;
    return ess + (e0 - ess) * std::exp(-s.air_change_per_h * hours);
}

// Occupants over [from, to) split at interval boundaries.
template <typename Fn>
void for_each_constant_piece(const std::vector<OccupancyInterval>& sched, Timestamp from, Timestamp to, Fn fn) {
    Timestamp t = from;
    auto it = std::upper_bound(sched.begin(), sched.end(), t, [](Timestamp v, const auto& iv) { return v < iv.start; });
    if (it != sched.begin() && std::prev(it)->end > t) --it;
    while (t < to) {
        int n = 0;
        Timestamp piece_end = to;
        if (it != sched.end()) {
            if (it->start <= t) {
                n = it->occupants;
                piece_end = std::min(to, it->end);
            } else {
                piece_end = std::min(to, it->start);
            }
        }
        fn(n, std::chrono::duration<double, std::ratio<3600>>(piece_end - t).count());
        t = piece_end;
        if (it != sched.end() && it->end <= t) ++it;
    }
}

}  // namespace

SimulationResult simulate_classroom(const RoomScenario& scenario, Timestamp start, Timestamp end) {
    scenario.validate();
    if (end <= start) throw InvalidArgument("simulation end must be after start");
    std::vector<OccupancyInterval> sched;
    for (auto iv : scenario.schedule) {
        iv.room_id = scenario.room_id;
        if (iv.start < start || iv.end > end) throw InvalidArgument("schedule interval outside the simulated range");
        sched.push_back(iv);
    }
    OccupancySchedule schedule(sched);
    sched = schedule.intervals(scenario.room_id);

    Rng co2_noise(mix_seed(scenario.seed, 1));
    Rng rh_noise(mix_seed(scenario.seed, 2));
    Rng t_noise(mix_seed(scenario.seed, 3));
    Rng glitch_rng(mix_seed(scenario.seed, 4));
    const double t_phase = Rng(mix_seed(scenario.seed, 5)).uniform(0.0, 2.0 * std::numbers::pi);

    const auto samples = static_cast<std::size_t>((end - start) / kSamplePeriod);
    SimulationResult out;
    out.true_co2.reserve(samples);
    out.true_occupants.reserve(samples);
    std::vector<SensorRecord> records;
    records.reserve(samples);

    double c = scenario.initial_co2_ppm.value_or(scenario.outdoor_co2_ppm);
    double excess_rh = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const Timestamp t = start + k * kSamplePeriod;
        const double hours_since_start = std::chrono::duration<double, std::ratio<3600>>(t - start).count();
        const double hour_of_day =
            std::chrono::duration<double, std::ratio<3600>>(t - std::chrono::floor<std::chrono::days>(t)).count();

        out.true_co2.push_back(c);
        out.true_occupants.push_back(schedule.lookup(scenario.room_id, t).value_or(0));

        const double rh_base =
            scenario.rh_mean + scenario.rh_daily_amplitude * std::sin(2.0 * std::numbers::pi * (hour_of_day - 9.0) / 24.0);
        const double t_base =
            scenario.t_mean + scenario.t_amplitude * std::sin(2.0 * std::numbers::pi * hours_since_start / scenario.t_period_h + t_phase);
        SensorRecord r;
        r.timestamp = t;
        r.co2 = std::max(0.0, c + scenario.co2_noise_ppm * co2_noise.gaussian());
        r.rh = std::clamp(rh_base + excess_rh + scenario.rh_noise_pct * rh_noise.gaussian(), 0.0, 100.0);
        r.t_in = t_base + scenario.t_noise_c * t_noise.gaussian();
        records.push_back(r);

        for_each_constant_piece(sched, t, t + kSamplePeriod, [&](int n, double hours) {
            c = co2_after(c, n, hours, scenario);
            excess_rh = moisture_after(excess_rh, n, hours, scenario);
        });
    }

    for (std::size_t g = 0; g < scenario.co2_glitches && samples > 2; ++g) {
        const std::size_t at = glitch_rng.below(samples - 1);
        const std::size_t len = 1 + glitch_rng.below(2);
        for (std::size_t i = at; i < std::min(samples, at + len); ++i) records[i].co2 += scenario.glitch_ppm;
    }

    out.series = SensorSeries(scenario.room_id, std::move(records));
    out.schedule = std::move(schedule);
    return out;
}

std::vector<OccupancyInterval> make_school_schedule(const std::string& room_id, Timestamp first_day, int days,
                                                    std::uint64_t seed, const ScheduleOptions& o) {
    using namespace std::chrono;
    Rng rng(mix_seed(seed, 0x736368ULL));
    std::vector<OccupancyInterval> out;
    const Timestamp day0 = local_midnight(first_day, o.utc_offset);
    for (int d = 0; d < days; ++d) {
        const Timestamp day = day0 + std::chrono::days{d};
        const auto wd = to_local(day, o.utc_offset).weekday;
        if (wd == 0 || wd == 6) continue;
        const auto classes = rng.between(o.min_classes, o.max_classes);
        Timestamp t = day + minutes{o.first_class_minute};
        for (std::int64_t c = 0; c < classes; ++c) {
            const int n = static_cast<int>(rng.between(o.min_occupants, o.max_occupants));
            out.push_back({room_id, t, t + minutes{o.class_minutes}, n});
            t += minutes{o.class_minutes + rng.between(o.break_minutes_min, o.break_minutes_max)};
        }
    }
    return out;
}

}  // namespace occupancy
