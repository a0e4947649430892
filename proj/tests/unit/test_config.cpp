#include "doctest.h"
#include "occupancy/config.hpp"
#include "occupancy/errors.hpp"

using namespace occupancy;

TEST_CASE("config subset parsing") {
    const auto f = ConfigFile::parse(R"(
# comment
top = 1
[paths]
attendance = "att.csv"   # trailing comment
sensors = ["2.04=a.csv", "b.csv"]
[grid]
single_layer = [6, 8]
reuse_partition = false
[search]
threshold = 0.3
)");
    CHECK(f.get_int("top") == 1);
    CHECK(f.get_string("paths.attendance") == "att.csv");
    CHECK(f.get_strings("paths.sensors")->size() == 2);
    CHECK(f.get_ints("grid.single_layer") == std::vector<std::int64_t>{6, 8});
    CHECK(f.get_bool("grid.reuse_partition") == false);
    CHECK(f.get_double("search.threshold") == 0.3);
    CHECK(f.get_double("top") == 1.0);  // integers widen
    CHECK(!f.get_string("paths.missing"));
    CHECK_THROWS_AS(f.get_int("paths.attendance"), InvalidArgument);
}

TEST_CASE("syntax errors carry line numbers") {
    try {
        ConfigFile::parse("[a]\nb = 1\nc = \"open\n");
        FAIL("expected an error");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(ConfigFile::parse("[a\n"), InvalidArgument);
    CHECK_THROWS_AS(ConfigFile::parse("a = 1\na = 2\n"), InvalidArgument);
    CHECK_THROWS_AS(ConfigFile::parse("a = [1, [2]]\n"), InvalidArgument);
    CHECK_THROWS_AS(ConfigFile::parse("a = what\n"), InvalidArgument);
}

TEST_CASE("pipeline config defaults") {
    const PipelineConfig c;
    CHECK(c.search.threshold == 0.3);
    CHECK(c.final.threshold == 0.03);
    CHECK(c.split_fraction == 0.75);
    CHECK(c.folds == 10);
    CHECK(c.grid().size() == 129);
    CHECK(c.candidate.label() == "rh_co2:18,13");
    CHECK(c.vacancy == VacancyPolicy::zero_label);
    CHECK(c.mask_rules().size() == 1);
}

TEST_CASE("pipeline config mapping") {
    const auto f = ConfigFile::parse(R"(
[paths]
sensors = ["2.04=data/s.csv"]
attendance = "/abs/att.csv"
[mask]
vacancy = "exclude"
utc_offset = "+01:00"
night_end = "06:30"
[grid]
combos = ["rh_co2", "rh_t"]
structures = ["18,13", "6"]
folds = 5
[final]
threshold = 0.05
stepmax = 200
[train]
split_mode = "time_block"
[run]
seed = 42
)");
    const auto c = pipeline_config_from(f, "/cfg");
    REQUIRE(c.sensors.size() == 1);
    CHECK(c.sensors[0].room_id == "2.04");
    CHECK(c.sensors[0].path == std::filesystem::path("/cfg/data/s.csv"));
    CHECK(c.attendance == std::filesystem::path("/abs/att.csv"));
    CHECK(c.utc_offset == Minutes{60});
    CHECK(c.night_end_minute == 390);
    CHECK(c.mask_rules().size() == 3);
    REQUIRE(c.grid().size() == 4);
    CHECK(c.grid()[0].label() == "rh_co2:18,13");
    CHECK(c.grid()[3].label() == "rh_t:6");
    CHECK(c.folds == 5);
    CHECK(c.final.threshold == 0.05);
    CHECK(c.final.stepmax == 200);
    CHECK(c.search.threshold == 0.3);
    CHECK(c.split_mode == SplitMode::time_block);
    CHECK(c.seed == 42);
}

TEST_CASE("unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(pipeline_config_from(ConfigFile::parse("[grid]\nfold = 5\n")), InvalidArgument);
    CHECK_THROWS_AS(pipeline_config_from(ConfigFile::parse("[mask]\nvacancy = \"sometimes\"\n")), InvalidArgument);
    CHECK_THROWS_AS(pipeline_config_from(ConfigFile::parse("[train]\nsplit = 1.5\n")), InvalidArgument);
    CHECK_THROWS_AS(parse_clock_minutes("7:00"), InvalidArgument);
    CHECK(parse_clock_minutes("24:00") == 1440);
    CHECK(parse_sensor_source("dir/2.10.csv").room_id == "2.10");
    CHECK(parse_sensor_source("a=b.csv").path == std::filesystem::path("b.csv"));
}
