#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

#include "doctest.h"
#include "occupancy/errors.hpp"
#include "occupancy/metrics.hpp"
#include "occupancy/synth.hpp"

using namespace occupancy;

namespace {

const Timestamp kMonday = parse_timestamp("2013-04-01T00:00:00Z");

RoomScenario quiet() {
    RoomScenario s;
    s.co2_noise_ppm = s.rh_noise_pct = s.t_noise_c = 0.0;
    return s;
}

// Independent classical RK4 with a 1 s step. N(t) is supplied per step.
double rk4(double c, double hours, const std::function<double(double)>& occupants, const RoomScenario& s) {
    const double h = 1.0 / 3600.0;
    const auto steps = static_cast<long>(std::llround(hours / h));
    for (long i = 0; i < steps; ++i) {
        const double n = occupants(i * h);
        const auto f = [&](double x) {
            return n * s.co2_generation_lph * 1000.0 / s.volume_m3 - s.air_change_per_h * (x - s.outdoor_co2_ppm);
        };
        const double k1 = f(c), k2 = f(c + 0.5 * h * k1), k3 = f(c + 0.5 * h * k2), k4 = f(c + h * k3);
        c += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
    }
    return c;
}

}  // namespace

TEST_CASE("empty room stays at outdoor level") {
    const auto r = simulate_classroom(quiet(), kMonday, kMonday + std::chrono::hours{24});
    CHECK(r.series.size() == 1440);
    for (const auto& rec : r.series.records()) CHECK(rec.co2 == doctest::Approx(420.0).epsilon(1e-12));
}

TEST_CASE("steady state matches the closed form and an RK4 integrator") {
    auto s = quiet();
    s.air_change_per_h = 2.0;
    s.co2_generation_lph = 18.72;
    const double closed = co2_steady_state(26, s);
    CHECK(closed - s.outdoor_co2_ppm == doctest::Approx(26 * 18720.0 / (2 * 141.0)).epsilon(1e-12));

    s.schedule = {{s.room_id, kMonday, kMonday + std::chrono::hours{24}, 26}};
    const auto r = simulate_classroom(s, kMonday, kMonday + std::chrono::hours{24});
    CHECK(std::abs(r.series.records().back().co2 - closed) < 1.0);
    const double ref = rk4(420.0, 24.0 - 1.0 / 60.0, [](double) { return 26.0; }, s);
    CHECK(std::abs(r.true_co2.back() - ref) < 1.0);
}

TEST_CASE("decay and class transitions against RK4") {
    auto s = quiet();
    // Class 08:00-09:30 with 22 occupants, then 14.5 h of decay.
    s.schedule = {{s.room_id, kMonday + std::chrono::hours{8}, kMonday + std::chrono::minutes{570}, 22}};
    const auto r = simulate_classroom(s, kMonday, kMonday + std::chrono::hours{24});
    for (const int minute : {480, 500, 569, 570, 600, 720, 1439}) {
        const double ref = rk4(s.outdoor_co2_ppm, minute / 60.0,
                               [](double t) { return (t >= 8.0 && t < 9.5) ? 22.0 : 0.0; }, s);
        CHECK(std::abs(r.true_co2[minute] - ref) < 1.0);
    }
    const double peak = r.true_co2[570];
    CHECK(co2_after(peak, 0, 1.0, s) - 420.0 == doctest::Approx((peak - 420.0) * std::exp(-2.5)).epsilon(1e-12));
}

TEST_CASE("simulated readings are plausible and seeded") {
    RoomScenario s;
    s.schedule = make_school_schedule(s.room_id, kMonday, 7, 3);
    s.co2_glitches = 3;
    const auto a = simulate_classroom(s, kMonday, kMonday + std::chrono::hours{24 * 7});
    const auto b = simulate_classroom(s, kMonday, kMonday + std::chrono::hours{24 * 7});
    CHECK(a.series == b.series);
    s.seed = 2;
    CHECK(!(simulate_classroom(s, kMonday, kMonday + std::chrono::hours{24 * 7}).series == a.series));
    for (std::size_t i = 0; i < a.true_co2.size(); ++i) CHECK(a.true_co2[i] >= 420.0 - 1e-9);
    for (const auto& rec : a.series.records()) CHECK((rec.rh >= 0 && rec.rh <= 100));

    // Temperature carries no occupancy information.
    std::vector<double> t, n;
    for (std::size_t i = 0; i < a.series.size(); ++i) {
        t.push_back(a.series.records()[i].t_in);
        n.push_back(a.true_occupants[i]);
    }
    CHECK(r_squared_with_p(t, n).r2 < 0.01);
}

TEST_CASE("school schedules") {
    const ScheduleOptions opt;
    const auto sched = make_school_schedule("2.04", kMonday, 14, 7, opt);
    std::map<long, int> per_day;
    for (const auto& iv : sched) {
        const auto lt = to_local(iv.start, opt.utc_offset);
        CHECK((lt.weekday >= 1 && lt.weekday <= 5));
        CHECK((iv.occupants >= 15 && iv.occupants <= 28));
        CHECK(iv.end - iv.start == std::chrono::minutes{90});
        CHECK(lt.minute_of_day >= opt.first_class_minute);
        ++per_day[std::chrono::floor<std::chrono::days>(iv.start).time_since_epoch().count()];
    }
    CHECK(per_day.size() == 10);
    for (const auto& [day, count] : per_day) CHECK((count >= 4 && count <= 6));
    CHECK_NOTHROW(OccupancySchedule(sched));
    CHECK(make_school_schedule("2.04", kMonday, 14, 7, opt) == sched);
}

TEST_CASE("invalid scenarios") {
    RoomScenario s;
    s.volume_m3 = 0;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = {};
    s.air_change_per_h = -1;
    CHECK_THROWS_AS(s.validate(), InvalidArgument);
    s = {};
    CHECK_THROWS_AS(simulate_classroom(s, kMonday, kMonday), InvalidArgument);
}
