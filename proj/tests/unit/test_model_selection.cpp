#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "doctest.h"
#include "occupancy/errors.hpp"
#include "occupancy/metrics.hpp"
#include "occupancy/model_selection.hpp"
#include "occupancy/random.hpp"

using namespace occupancy;

namespace {

FeatureSet affine_set(std::size_t n, std::uint64_t seed, VariableCombo combo = VariableCombo::rh_co2) {
    Rng rng(seed);
    FeatureSet fs;
    fs.combo = combo;
    const auto t0 = parse_timestamp("2013-04-03T08:00:00Z");
    for (std::size_t i = 0; i < n; ++i) {
        const int y = static_cast<int>(rng.between(0, 30));
        std::vector<double> x(10);
        for (auto& v : x) v = rng.uniform(-1, 1);
        x[3] = 2.0 * y + 400.0;
        fs.vectors.push_back({t0 + i * kSamplePeriod, x, y, 0});
    }
    return fs;
}

CVResult scored(double mean, std::vector<std::size_t> hidden, VariableCombo combo = VariableCombo::rh_co2) {
    CVResult r;
    r.candidate = {combo, {10, hidden, 1}};
    r.mean_mse = mean;
    return r;
}

}  // namespace

TEST_CASE("fold sizes") {
    const auto f100 = make_folds(100, 10, 1);
    CHECK(f100.sizes() == std::vector<std::size_t>(10, 10));
    const auto f103 = make_folds(103, 10, 1);
    const auto sizes = f103.sizes();
    CHECK(std::count(sizes.begin(), sizes.end(), 11) == 3);
    CHECK(std::count(sizes.begin(), sizes.end(), 10) == 7);
    CHECK(make_folds(103, 10, 5).fold_of == make_folds(103, 10, 5).fold_of);
    CHECK(make_folds(103, 10, 5).fold_of != make_folds(103, 10, 6).fold_of);
    CHECK_THROWS_AS(make_folds(9, 10, 1), InvalidArgument);
    CHECK_THROWS_AS(make_folds(10, 1, 1), InvalidArgument);
}

TEST_CASE("fold laws on random parameters") {
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t k = 2 + rng.below(14);
        const std::size_t n = k + rng.below(500);
        const auto f = make_folds(n, k, rng.below(1u << 30));
        std::vector<int> seen(n, 0);
        std::size_t lo = n, hi = 0;
        for (std::size_t j = 0; j < k; ++j) {
            const auto m = f.members(j);
            lo = std::min(lo, m.size());
            hi = std::max(hi, m.size());
            for (const auto i : m) ++seen[i];
            auto c = f.complement(j);
            CHECK(c.size() + m.size() == n);
            std::vector<std::size_t> both;
            std::set_intersection(m.begin(), m.end(), c.begin(), c.end(), std::back_inserter(both));
            CHECK(both.empty());
        }
        CHECK(std::all_of(seen.begin(), seen.end(), [](int s) { return s == 1; }));
        CHECK(hi - lo <= 1);
    }
}

TEST_CASE("cross-validation learns an affine target") {
    const auto fs = affine_set(200, 3);
    const auto folds = make_folds(fs.size(), 10, 4);
    RpropConfig cfg;
    cfg.threshold = 0.01;
    cfg.stepmax = 20000;
    const CandidateSpec cand{VariableCombo::rh_co2, {10, {6}, 1}};
    const auto r = cross_validate(fs, cand, folds, cfg, 11);
    CHECK(r.fold_mse.size() == 10);
    CHECK(r.converged.size() == 10);
    CHECK(r.mean_mse < 1e-2);

    // Mean and per-fold MSEs are recomputable from the stored predictions.
    double sum = 0;
    for (std::size_t j = 0; j < 10; ++j) {
        const auto& f = r.folds[j];
        CHECK(f.indices == folds.members(j));
        CHECK(mse(f.predictions, f.observations) == r.fold_mse[j]);
        CHECK(f.scaler == fit_scaler(select(fs, folds.complement(j))));
        CHECK(f.network_seed == fold_network_seed(11, 0, j));
        sum += r.fold_mse[j];
    }
    CHECK(r.mean_mse == doctest::Approx(sum / 10).epsilon(1e-14));
}

TEST_CASE("folds that exhaust the budget are flagged") {
    const auto fs = affine_set(60, 5);
    RpropConfig cfg;
    cfg.threshold = 1e-9;
    cfg.stepmax = 3;
    const auto r = cross_validate(fs, {VariableCombo::rh_co2, {10, {6}, 1}}, make_folds(60, 10, 1), cfg, 1);
    CHECK(std::none_of(r.converged.begin(), r.converged.end(), [](bool b) { return b; }));
    for (const double m : r.fold_mse) CHECK(std::isfinite(m));
}

TEST_CASE("ranking and tie-breaks") {
    CHECK(ranks_before(scored(1.0, {20}), scored(2.0, {6})));
    CHECK(ranks_before(scored(1.0, {6}), scored(1.0, {18, 13})));  // fewer parameters
    CHECK(!ranks_before(scored(1.0, {18, 13}), scored(1.0, {6})));
    CHECK(ranks_before(scored(1.0, {6}), scored(1.0, {6}, VariableCombo::t_co2)));
    CHECK(!ranks_before(scored(1.0, {6}), scored(1.0, {6})));
}

TEST_CASE("default grid") {
    const auto grid = make_grid(GridAxes::defaults());
    CHECK(grid.size() == 129);
    std::set<std::string> labels;
    for (const auto& c : grid) labels.insert(c.label());
    CHECK(labels.size() == 129);
    CHECK(labels.count("rh_co2:17,13"));
    CHECK(!labels.count("rh_co2:18,13"));  // odd first-layer sizes only
    CHECK(labels.count("rh_t:6"));
    CHECK(labels.count("t_co2:21,7"));
    CHECK(default_candidate().label() == "rh_co2:18,13");
    CHECK(default_candidate().structure.parameter_count() == 459);
}

TEST_CASE("grid search is deterministic and worker-independent") {
    std::map<VariableCombo, FeatureSet> sets;
    sets[VariableCombo::rh_co2] = affine_set(80, 1);
    sets[VariableCombo::rh_t] = affine_set(80, 1, VariableCombo::rh_t);
    for (auto& v : sets[VariableCombo::rh_t].vectors) v.values[3] = 0.0;  // remove the signal
    const std::vector<CandidateSpec> grid = {{VariableCombo::rh_t, {10, {6}, 1}},
                                             {VariableCombo::rh_co2, {10, {6}, 1}},
                                             {VariableCombo::rh_co2, {10, {7}, 1}}};
    RpropConfig cfg;
    cfg.stepmax = 300;
    const auto a = grid_search(sets, grid, cfg, 9, {5, true, 1});
    const auto b = grid_search(sets, grid, cfg, 9, {5, true, 4});
    REQUIRE(a.ranked.size() == 3);
    CHECK(a.winner == a.ranked[0].candidate);
    CHECK(a.ranked.back().candidate.combo == VariableCombo::rh_t);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(a.ranked[i].candidate == b.ranked[i].candidate);
        CHECK(a.ranked[i].fold_mse == b.ranked[i].fold_mse);
    }
    for (std::size_t i = 1; i < 3; ++i) CHECK(!ranks_before(a.ranked[i], a.ranked[i - 1]));

    std::ostringstream csv;
    write_cv_csv(csv, a);
    std::string first;
    std::istringstream lines(csv.str());
    std::getline(lines, first);
    CHECK(first == "combo,structure,fold,mse,converged");
    std::size_t rows = 0;
    for (std::string l; std::getline(lines, l);) ++rows;
    CHECK(rows == 15);

    CHECK_THROWS_AS(grid_search(sets, {}, cfg, 9), InvalidArgument);
    CHECK_THROWS_AS(grid_search(sets, {{VariableCombo::t_co2, {10, {6}, 1}}}, cfg, 9), InvalidArgument);
}

TEST_CASE("seed derivation") {
    CHECK(fold_network_seed(1, 0, 0) != fold_network_seed(1, 0, 1));
    CHECK(fold_network_seed(1, 0, 0) != fold_network_seed(1, 1, 0));
    CHECK(fold_network_seed(1, 2, 3) == fold_network_seed(1, 2, 3));
    CHECK(partition_seed(1) != partition_seed(1, 0));
}
