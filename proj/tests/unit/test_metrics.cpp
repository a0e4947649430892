#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "occupancy/errors.hpp"
#include "occupancy/metrics.hpp"
#include "occupancy/random.hpp"

using namespace occupancy;
using V = std::vector<double>;

namespace {

double pearson(const V& a, const V& b) {
    const double n = a.size();
    const double ma = std::accumulate(a.begin(), a.end(), 0.0) / n;
    const double mb = std::accumulate(b.begin(), b.end(), 0.0) / n;
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST_CASE("hand-computed errors") {
    CHECK(mse(V{1, 2}, V{2, 4}) == 2.5);
    CHECK(mae(V{1, 2}, V{2, 4}) == 1.5);
    CHECK(mse(V{3, 4, 5}, V{3, 4, 5}) == 0.0);
    CHECK(mae(V{3, 4, 5}, V{3, 4, 5}) == 0.0);
    CHECK_THROWS_AS(mse(V{1}, V{1, 2}), InvalidArgument);
    CHECK_THROWS_AS(mae(V{}, V{}), InvalidArgument);
}

TEST_CASE("errors match loop oracles and basic laws") {
    Rng rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const auto n = 1 + rng.below(300);
        V p(n), o(n);
        for (std::size_t i = 0; i < n; ++i) {
            p[i] = rng.uniform(-10, 40);
            o[i] = rng.uniform(0, 30);
        }
        long double se = 0, ae = 0;
        for (std::size_t i = 0; i < n; ++i) {
            se += (long double)(p[i] - o[i]) * (p[i] - o[i]);
            ae += std::fabs(p[i] - o[i]);
        }
        const double ref_mse = static_cast<double>(se / n), ref_mae = static_cast<double>(ae / n);
        CHECK(std::abs(mse(p, o) - ref_mse) <= 1e-12 * ref_mse);
        CHECK(std::abs(mae(p, o) - ref_mae) <= 1e-12 * ref_mae);
        CHECK(mae(p, o) <= std::sqrt(mse(p, o)) * (1 + 1e-12));
        V p2 = p, o2 = o;
        for (auto& x : p2) x *= 3;
        for (auto& x : o2) x *= 3;
        CHECK(mse(p2, o2) == doctest::Approx(9 * mse(p, o)).epsilon(1e-12));
    }
}

TEST_CASE("perfect affine relation") {
    V obs(50), pred(50);
    Rng rng(2);
    for (std::size_t i = 0; i < 50; ++i) {
        obs[i] = rng.uniform(0, 30);
        pred[i] = 2 * obs[i] + 3;
    }
    const auto c = r_squared_with_p(pred, obs);
    CHECK(std::abs(c.r2 - 1.0) <= 1e-12);
    CHECK(c.p_value < 1e-15);
}

TEST_CASE("constructed zero correlation") {
    const auto c = r_squared_with_p(V{1, -1, -1, 1}, V{1, 2, 3, 4});
    CHECK(std::abs(c.r2) <= 1e-12);
    CHECK(std::abs(c.p_value - 1.0) <= 1e-9);
}

TEST_CASE("r2 is symmetric and affine invariant") {
    Rng rng(8);
    V a(40), b(40);
    for (std::size_t i = 0; i < 40; ++i) {
        a[i] = rng.gaussian();
        b[i] = a[i] + rng.gaussian();
    }
    const auto ab = r_squared_with_p(a, b), ba = r_squared_with_p(b, a);
    CHECK(ab.r2 == doctest::Approx(ba.r2).epsilon(1e-14));
    CHECK(ab.r2 == doctest::Approx(pearson(a, b) * pearson(a, b)).epsilon(1e-12));
    V a2 = a;
    for (auto& x : a2) x = -4 * x + 7;
    CHECK(r_squared_with_p(a2, b).r2 == doctest::Approx(ab.r2).epsilon(1e-12));
}

TEST_CASE("degenerate inputs") {
    CHECK_THROWS_AS(r_squared_with_p(V{1, 1, 1}, V{1, 2, 3}), DegenerateVariance);
    CHECK_THROWS_AS(r_squared_with_p(V{1, 2, 3}, V{2, 2, 2}), DegenerateVariance);
    CHECK_THROWS_AS(r_squared_with_p(V{1, 2}, V{2, 1}), InvalidArgument);
    const auto rep = evaluate(V{1, 1, 1}, V{1, 2, 3});
    CHECK(!rep.r2);
    CHECK(!rep.p_value);
    CHECK(rep.mse == doctest::Approx(5.0 / 3));
    CHECK(rep.rmse == doctest::Approx(std::sqrt(5.0 / 3)));
}

TEST_CASE("incomplete beta and t tails against reference values") {
    // Reference values from an independent special-function library.
    struct B {
        double a, b, x, v;
    };
    for (const auto& c : {B{0.5, 0.5, 0.3, 0.36901011956554536}, B{2, 3, 0.4, 0.5248},
                          B{9, 0.5, 0.95, 0.34328958321110953}, B{0.5, 9, 0.01, 0.32512876737378865},
                          B{50, 60, 0.45, 0.46423529143060444}, B{1, 1, 0.77, 0.77}})
        CHECK(incomplete_beta(c.a, c.b, c.x) == doctest::Approx(c.v).epsilon(1e-12));
    CHECK(incomplete_beta(2, 3, 0.0) == 0.0);
    CHECK(incomplete_beta(2, 3, 1.0) == 1.0);
    struct T {
        double t, dof, p;
    };
    for (const auto& c : {T{0.0, 18, 1.0}, T{1.0, 18, 0.3305649312781843}, T{2.1, 5, 0.08975324988459868},
                          T{-3.3, 48, 0.0018280815752957078}, T{10.0, 3, 0.0021283990584141494},
                          T{0.25, 1, 0.8440417392452614}})
        CHECK(student_t_two_sided(c.t, c.dof) == doctest::Approx(c.p).epsilon(1e-10));
}

TEST_CASE("p-value agrees with a permutation test") {
    Rng rng(20131);
    V x(20), y(20);
    for (std::size_t i = 0; i < 20; ++i) {
        x[i] = rng.gaussian();
        y[i] = 0.4 * x[i] + rng.gaussian();
    }
    const double p = r_squared_with_p(x, y).p_value;
    const double r_obs = std::abs(pearson(x, y));
    std::size_t extreme = 0;
    const std::size_t draws = 200000;
    V perm = y;
    for (std::size_t d = 0; d < draws; ++d) {
        for (std::size_t i = perm.size() - 1; i > 0; --i) std::swap(perm[i], perm[rng.below(i + 1)]);
        extreme += std::abs(pearson(x, perm)) >= r_obs - 1e-12;
    }
    const double p_perm = static_cast<double>(extreme) / draws;
    CHECK(std::abs(p - p_perm) <= 0.01);
}
