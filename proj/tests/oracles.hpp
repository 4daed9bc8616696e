#pragma once

// Test-only reference computations. Nothing here calls into the library's
// quadrature or special functions.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/expint.hpp>

#include <cmath>
#include <limits>
#include <random>

namespace oracle
{

inline constexpr double kInf = std::numeric_limits<double>::infinity();

template <class F>
double integrate(F f, double a, double b, double rel_tol = 1e-14)
{
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, rel_tol);
}

// E1(x) = int_{log x}^{inf} exp(-e^s) ds (t = e^s), truncated where the
// integrand drops below e^{-60} relative to the left end.
inline double e1_quadrature(double x)
{
    return integrate([](double s) { return std::exp(-std::exp(s)); }, std::log(x),
                     std::log(x + 60.0), 1e-15);
}

inline double e1_boost(double x) { return boost::math::expint(1, x); }

// Li2(x) = -int_0^1 log(1 - x s)/s ds, for x < 1.
inline double li2_quadrature(double x)
{
    return -integrate(
        [x](double s) { return s == 0.0 ? -x : std::log1p(-x * s) / s; }, 0.0, 1.0, 1e-15);
}

inline double binom(int n, int k)
{
    double r = 1.0;
    for (int i = 1; i <= k; ++i)
        r = r * (n - k + i) / i;
    return r;
}

// 1 - F_X(x) for the n-th smallest of K unit exponentials, as the probability
// that fewer than n of them lie below x.
inline double order_stat_survival(double x, int k, int n)
{
    const double p = -std::expm1(-x);
    double s = 0.0;
    for (int i = 0; i < n; ++i)
        s += binom(k, i) * std::pow(p, i) * std::pow(1.0 - p, k - i);
    return s;
}

// Independent draws for Monte Carlo oracles (not the library's Philox streams).
struct ExpSource
{
    explicit ExpSource(std::uint64_t seed) : engine(seed) {}
    double operator()() { return dist(engine); }
    std::mt19937_64 engine;
    std::exponential_distribution<double> dist{1.0};
};

} // namespace oracle
