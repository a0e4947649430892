#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "occupancy/cli.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "occupancy");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = occupancy::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("occupancy_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("help and usage errors") {
    CHECK(run({"--help"}).code == 0);
    for (const char* sub : {"synth", "ingest", "cv", "train", "estimate", "report"}) {
        const auto r = run({sub, "--help"});
        CHECK(r.code == 0);
        CHECK(!r.out.empty());
    }
    const auto bogus = run({"frobnicate"});
    CHECK(bogus.code == 1);
    CHECK(!bogus.err.empty());
    CHECK(run({"train", "--no-such-flag"}).code == 1);
    CHECK(run({}).code == 1);
}

TEST_CASE("data errors exit with 2") {
    const auto dir = scratch("data");
    CHECK(run({"ingest", "--sensors", (dir / "missing.csv").string(), "--attendance",
               (dir / "missing_att.csv").string()})
              .code == 2);
    std::ofstream(dir / "bad.toml") << "[grid]\nfold = 3\n";
    CHECK(run({"ingest", "--config", (dir / "bad.toml").string()}).code == 1);  // bad config is a usage error
    std::ofstream(dir / "s.csv") << "timestamp,rh,t_in,co2\n2013-04-03T08:00:00Z,45,21,850\n"
                                    "2013-04-03T08:00:00Z,45,21,850\n";
    std::ofstream(dir / "a.csv") << "room_id,start,end,occupants\n";
    const auto r = run({"ingest", "--sensors", (dir / "s.csv").string(), "--attendance", (dir / "a.csv").string()});
    CHECK(r.code == 2);
    CHECK(r.err.find("line 3") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("small pipeline through the CLI is reproducible") {
    std::string first_model, first_cv;
    for (int pass = 0; pass < 2; ++pass) {
        const auto dir = scratch("pipe" + std::to_string(pass));
        const auto d = dir.string();
        REQUIRE(run({"synth", "--days", "3", "--synth-seed", "7", "--out-dir", d}).code == 0);
        CHECK(fs::exists(dir / "run.toml"));
        CHECK(fs::exists(dir / "attendance.csv"));
        const auto cfg = (dir / "run.toml").string();
        REQUIRE(run({"ingest", "--config", cfg}).code == 0);
        CHECK(fs::exists(dir / "ingest_summary.json"));
        REQUIRE(run({"cv", "--config", cfg, "--combos", "rh_co2", "t_co2", "--structures", "6", "--folds", "3", "--stepmax", "30",
                     "--stride", "10"})
                    .code == 0);
        CHECK(fs::exists(dir / "grid_summary.json"));
        // stepmax 30 cannot reach the threshold: --strict turns that into exit 3.
        CHECK(run({"cv", "--config", cfg, "--combos", "rh_co2", "--structures", "6", "--folds", "3", "--stepmax", "5", "--stride",
                   "10", "--strict"})
                  .code == 3);
        const auto tr =
            run({"train", "--config", cfg, "--structure", "6", "--combo", "rh_co2", "--stepmax", "200", "--stride", "5"});
        REQUIRE(tr.code == 0);
        CHECK(tr.out.find("MSE") != std::string::npos);
        REQUIRE(run({"estimate", "--config", cfg, "--model", (dir / "model.json").string()}).code == 0);
        REQUIRE(run({"report", "--config", cfg}).code == 0);
        CHECK(fs::exists(dir / "report_2.04.csv"));
        CHECK(fs::exists(dir / "report_2.04.json"));
        if (pass == 0) {
            first_model = slurp(dir / "model.json");
            first_cv = slurp(dir / "cv_results.csv");
        } else {
            CHECK(slurp(dir / "model.json") == first_model);
            CHECK(slurp(dir / "cv_results.csv") == first_cv);
        }
        fs::remove_all(dir);
    }
}
