#pragma once

#include <cstddef>
#include <functional>
#include <numbers>

namespace dualsel::specfun
{

inline constexpr double kEulerGamma = 0.5772156649015329;
inline constexpr double kPi = std::numbers::pi;

// Default absolute tolerance for every integral that feeds an ESR value.
inline constexpr double kDefaultTolerance = 1e-9;
inline constexpr std::size_t kDefaultMaxEvaluations = 400000;

struct QuadratureResult
{
    double value = 0.0;
    double abs_error_estimate = 0.0;
    std::size_t evaluations = 0;
};

using Integrand = std::function<double(double)>;

/// Exponential integral E1(x) = int_x^inf e^{-t}/t dt for x > 0.
/// Underflows to exactly 0 for large x. Throws DomainError for x <= 0 or
/// non-finite x.
double e1(double x);

/// e^x E1(x), bounded for all x > 0 (behaves like 1/x at infinity).
/// Accepts x = +inf and returns 0 there.
double e1_scaled(double x);

/// x e^x E1(x); tends to 1 as x -> inf, returns 1 at x = +inf.
double x_e1_scaled(double x);

/// Real dilogarithm Li2(x) = -int_0^x log(1-t)/t dt for x <= 1.
double li2(double x);

/// Adaptive Gauss-Kronrod (7/15) integration over the finite interval [a, b].
/// Subdivides the interval with the largest error estimate until the summed
/// estimate is below tol. Throws NumericalError when the evaluation budget
/// runs out.
QuadratureResult quad_finite(const Integrand& f, double a, double b,
                             double tol = kDefaultTolerance,
                             std::size_t max_evaluations = kDefaultMaxEvaluations);

/// Integral of f over [a, inf) through u = a + v/(1-v), v in [0, 1).
/// f should decay at least like 1/u^2.
QuadratureResult quad_semi_infinite(const Integrand& f, double a,
                                    double tol = kDefaultTolerance,
                                    std::size_t max_evaluations = kDefaultMaxEvaluations);

} // namespace dualsel::specfun
