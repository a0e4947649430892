#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "occupancy/errors.hpp"
#include "occupancy/model_io.hpp"
#include "occupancy/random.hpp"

using namespace occupancy;

namespace {

TrainedModel random_model(std::uint64_t seed) {
    Rng rng(seed);
    TrainedModel m;
    const std::vector<std::vector<std::size_t>> shapes = {{6}, {18, 13}, {21, 7}};
    m.network = init_network({10, shapes[seed % 3], 1}, seed);
    for (auto& w : m.network.parameters()) w *= std::pow(10.0, rng.uniform(-300, 300));
    m.scaler.location.resize(10);
    m.scaler.scale.resize(10);
    for (auto& v : m.scaler.location) v = rng.uniform(-1e3, 1e3) / 3.0;
    for (auto& v : m.scaler.scale) v = rng.uniform(1e-3, 1e3) / 7.0;
    m.combo = kAllCombos[seed % 3];
    m.metadata.seed = seed;
    m.metadata.epochs = rng.below(10000);
    m.metadata.final_error = rng.uniform();
    m.metadata.rooms = {"2.04", "2.10"};
    m.metadata.config.threshold = 0.03;
    return m;
}

}  // namespace

TEST_CASE("model documents round-trip bit for bit") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const auto m = random_model(seed);
        const auto doc = to_json(m);
        CHECK(model_from_json(nlohmann::json::parse(doc.dump())) == m);
    }
    const auto path = std::filesystem::temp_directory_path() / "occupancy_test_model.json";
    const auto m = random_model(2);
    save_model(m, path);
    CHECK(load_model(path) == m);
    std::filesystem::remove(path);
}

TEST_CASE("document layout") {
    const auto doc = to_json(random_model(1));
    CHECK(doc.at("format") == "occupancy-mlp");
    CHECK(doc.at("version") == kModelFormatVersion);
    CHECK(doc.at("structure").at("hidden") == nlohmann::json::array({18, 13}));
    CHECK(doc.at("layers").size() == 3);
    CHECK(doc.at("layers")[0].at("weights").size() == 10);
    CHECK(doc.at("layers")[0].at("weights")[0].size() == 18);
    CHECK(doc.at("window_spec") == "-30:-21,-20:-3,-2:2,3:20,21:30");
}

TEST_CASE("malformed documents are data errors") {
    auto doc = to_json(random_model(1));
    auto bad = doc;
    bad["format"] = "other";
    CHECK_THROWS_AS(model_from_json(bad), DataError);
    bad = doc;
    bad["version"] = 99;
    CHECK_THROWS_AS(model_from_json(bad), DataError);
    bad = doc;
    bad["layers"][0]["biases"].erase(0);
    CHECK_THROWS_AS(model_from_json(bad), DataError);
    bad = doc;
    bad.erase("scaler");
    CHECK_THROWS_AS(model_from_json(bad), DataError);
    CHECK_THROWS_AS(load_model("/nonexistent/model.json"), DataError);
}

TEST_CASE("auxiliary documents") {
    RpropConfig c;
    c.threshold = 0.03;
    c.stepmax = 1234;
    const auto back = rprop_config_from_json(to_json(c));
    CHECK(back.threshold == 0.03);
    CHECK(back.stepmax == 1234);
    MetricReport r;
    r.n = 3;
    r.mse = 1.5;
    const auto j = to_json(r);
    CHECK(j.at("n") == 3);
    CHECK(j.at("r2").is_null());
    TrainReport t;
    t.error_trace = {3, 2, 1};
    CHECK(!to_json(t).contains("error_trace"));
    CHECK(to_json(t, true).at("error_trace").size() == 3);
}
