#pragma once

#include <cstddef>
#include <optional>
#include <span>

namespace occupancy {

// All variances use the population (1/n) convention.

double mse(std::span<const double> pred, std::span<const double> obs);
double mae(std::span<const double> pred, std::span<const double> obs);

struct Correlation {
    double r2;       // squared Pearson correlation, not 1 - SS_res/SS_tot
    double p_value;  // two-sided t-test on r with n - 2 degrees of freedom
};

// Throws DegenerateVariance if either side is constant, InvalidArgument if n < 3.
Correlation r_squared_with_p(std::span<const double> pred, std::span<const double> obs);

// Two-sided tail probability P(|T| >= |t|) for Student's t with `dof` degrees of freedom.
double student_t_two_sided(double t, double dof);
// Regularized incomplete beta I_x(a, b), continued-fraction evaluation.
double incomplete_beta(double a, double b, double x);

struct MetricReport {
    std::size_t n = 0;
    double mse = 0.0;
    double rmse = 0.0;
    double mae = 0.0;
    std::optional<double> r2;  // absent when a side has zero variance or n < 3
    std::optional<double> p_value;
};

MetricReport evaluate(std::span<const double> pred, std::span<const double> obs);

}  // namespace occupancy
