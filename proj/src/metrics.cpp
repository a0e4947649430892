#include "occupancy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "occupancy/errors.hpp"

namespace occupancy {
namespace {

void check_pair(std::span<const double> pred, std::span<const double> obs) {
    if (pred.size() != obs.size()) throw InvalidArgument("prediction and observation lengths differ");
    if (pred.empty()) throw InvalidArgument("metrics need at least one pair");
}

// Lentz's method for the continued fraction of I_x(a, b).
double beta_continued_fraction(double a, double b, double x) {
    constexpr int kMaxIterations = 10000;
    constexpr double kEps = 1e-16;
    constexpr double kTiny = 1e-300;
    const double qab = a + b;
    const double qap = a + 1.0;
    const double qam = a - 1.0;
    double c = 1.0;
    double d = 1.0 - qab * x / qap;
    if (std::abs(d) < kTiny) d = kTiny;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= kMaxIterations; ++m) {
        const double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < kTiny) d = kTiny;
        c = 1.0 + aa / c;
        if (std::abs(c) < kTiny) c = kTiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kEps) break;
    }
    return h;
}

}  // namespace

double mse(std::span<const double> pred, std::span<const double> obs) {
    check_pair(pred, obs);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - obs[i]) * (pred[i] - obs[i]);
    return sum / static_cast<double>(pred.size());
}

double mae(std::span<const double> pred, std::span<const double> obs) {
    check_pair(pred, obs);
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) sum += std::abs(pred[i] - obs[i]);
    return sum / static_cast<double>(pred.size());
}

double incomplete_beta(double a, double b, double x) {
    if (!(a > 0.0 && b > 0.0)) throw InvalidArgument("incomplete beta needs a, b > 0");
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double log_front =
        std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) + b * std::log1p(-x);
    const double front = std::exp(log_front);
    // The continued fraction converges quickly for x < (a + 1) / (a + b + 2); use symmetry otherwise.
    if (x < (a + 1.0) / (a + b + 2.0)) return front * beta_continued_fraction(a, b, x) / a;
    return 1.0 - front * beta_continued_fraction(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double dof) {
    if (!(dof > 0.0)) throw InvalidArgument("degrees of freedom must be positive");
    if (std::isinf(t)) return 0.0;
    if (std::isnan(t)) throw InvalidArgument("t statistic is NaN");
    const double x = dof / (dof + t * t);
    return std::clamp(incomplete_beta(0.5 * dof, 0.5, x), 0.0, 1.0);
}

Correlation r_squared_with_p(std::span<const double> pred, std::span<const double> obs) {
    check_pair(pred, obs);
    const std::size_t n = pred.size();
    if (n < 3) throw InvalidArgument("r_squared_with_p needs at least 3 pairs");
    double mp = 0.0, mo = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mp += pred[i];
        mo += obs[i];
    }
    mp /= static_cast<double>(n);
    mo /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dp = pred[i] - mp;
        const double d_o = obs[i] - mo;
        sxy += dp * d_o;
        sxx += dp * dp;
        syy += d_o * d_o;
    }
    if (sxx == 0.0 || syy == 0.0) throw DegenerateVariance("correlation undefined: one series has zero variance");
    const double r = std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
    const double r2 = r * r;
    const double dof = static_cast<double>(n - 2);
    double p = 0.0;
    if (r2 < 1.0) p = student_t_two_sided(r * std::sqrt(dof / (1.0 - r2)), dof);
    return {r2, p};
}

MetricReport evaluate(std::span<const double> pred, std::span<const double> obs) {
    MetricReport m;
    m.n = pred.size();
    m.mse = mse(pred, obs);
    m.rmse = std::sqrt(m.mse);
    m.mae = mae(pred, obs);
    if (m.n >= 3) {
        try {
            const auto c = r_squared_with_p(pred, obs);
            m.r2 = c.r2;
            m.p_value = c.p_value;
        } catch (const DegenerateVariance&) {
        }
    }
    return m;
}

}  // namespace occupancy
