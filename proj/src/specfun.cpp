#include "dualsel/specfun.hpp"

#include "dualsel/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace dualsel::specfun
{

namespace
{

constexpr double kEps = std::numeric_limits<double>::epsilon();

void require_positive_finite(double x, const char* who)
{
    if (!(x > 0.0) || !std::isfinite(x))
        throw DomainError(std::string(who) + ": argument must be positive and finite, got " +
                          std::to_string(x));
}

// E1(x) for 0 < x <= 1: -gamma - log x + sum_{k>=1} (-1)^{k+1} x^k / (k k!)
double e1_series(double x)
{
    double sum = 0.0;
    double term = 1.0; // (-1)^{k+1} x^k / k!
    for (int k = 1; k < 100; ++k)
    {
        term *= (k == 1) ? x : -x / k;
        const double add = term / k;
        sum += add;
        if (std::abs(add) < kEps * std::abs(sum))
            break;
    }
    return -kEulerGamma - std::log(x) + sum;
}

// e^x E1(x) for x > 1 by the modified Lentz continued fraction
//   E1(x) = e^{-x} / (x + 1 - 1^2/(x + 3 - 2^2/(x + 5 - ...)))
double e1_scaled_cf(double x)
{
    constexpr double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 1000; ++i)
    {
        const double an = -static_cast<double>(i) * i;
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        const double del = c * d;
        h *= del;
        if (std::abs(del - 1.0) < kEps)
            return h;
    }
    throw NumericalError("e1: continued fraction failed to converge", h, std::abs(h));
}

// sum_{k>=1} x^k / k^2 for |x| <= 1/2
double li2_series(double x)
{
    double sum = 0.0;
    double power = 1.0;
    for (int k = 1; k < 200; ++k)
    {
        power *= x;
        const double add = power / (static_cast<double>(k) * k);
        sum += add;
        if (std::abs(add) <= 0.25 * kEps * std::abs(sum))
            break;
    }
    return sum;
}

// Gauss-Kronrod 15-point abscissae and weights (7-point Gauss embedded at
// the odd indices).
constexpr std::array<double, 8> kXgk = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWgk = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kWg = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment
{
    double a;
    double b;
    double value;
    double error;
};

Segment gauss_kronrod15(const Integrand& f, double a, double b)
{
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double abs_half = std::abs(half);

    std::array<double, 7> f1{};
    std::array<double, 7> f2{};

    const double fc = f(center);
    double res_g = fc * kWg[3];
    double res_k = fc * kWgk[7];
    double res_abs = std::abs(res_k);

    for (int j = 0; j < 7; ++j)
    {
        const double dx = half * kXgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double pair = f1[j] + f2[j];
        res_k += kWgk[j] * pair;
        res_abs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1)
            res_g += kWg[j / 2] * pair;
    }

    const double mean = 0.5 * res_k;
    double res_asc = kWgk[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        res_asc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

    const double value = res_k * half;
    res_abs *= abs_half;
    res_asc *= abs_half;
    double err = std::abs((res_k - res_g) * half);
    if (res_asc != 0.0 && err != 0.0)
        err = res_asc * std::min(1.0, std::pow(200.0 * err / res_asc, 1.5));
    if (res_abs > std::numeric_limits<double>::min() / (50.0 * kEps))
        err = std::max(50.0 * kEps * res_abs, err);
    if (!std::isfinite(value) || !std::isfinite(err))
        throw NumericalError("quadrature: integrand is not finite on [" + std::to_string(a) +
                                 ", " + std::to_string(b) + "]",
                             value, std::numeric_limits<double>::infinity());
    return {a, b, value, err};
}

} // namespace

double e1(double x)
{
    require_positive_finite(x, "e1");
    if (x <= 1.0)
        return e1_series(x);
    return e1_scaled_cf(x) * std::exp(-x);
}

double e1_scaled(double x)
{
    if (x == std::numeric_limits<double>::infinity())
        return 0.0;
    require_positive_finite(x, "e1_scaled");
    if (x <= 1.0)
        return std::exp(x) * e1_series(x);
    return e1_scaled_cf(x);
}

double x_e1_scaled(double x)
{
    if (x == std::numeric_limits<double>::infinity())
        return 1.0;
    return x * e1_scaled(x);
}

double li2(double x)
{
    if (!std::isfinite(x) || x > 1.0)
        throw DomainError("li2: argument must be finite and <= 1, got " + std::to_string(x));

    constexpr double pi2_6 = kPi * kPi / 6.0;
    if (x == 1.0)
        return pi2_6;
    if (x < -1.0)
    {
        const double l = std::log(-x);
        return -pi2_6 - 0.5 * l * l - li2(1.0 / x);
    }
    if (x < -0.5)
    {
        // Landen: maps [-1, -1/2) onto (1/3, 1/2]
        const double l = std::log1p(-x);
        return -li2_series(x / (x - 1.0)) - 0.5 * l * l;
    }
    if (x <= 0.5)
        return li2_series(x);
    // reflection for (1/2, 1)
    return pi2_6 - std::log(x) * std::log1p(-x) - li2_series(1.0 - x);
}

QuadratureResult quad_finite(const Integrand& f, double a, double b, double tol,
                             std::size_t max_evaluations)
{
    if (!(tol > 0.0))
        throw DomainError("quadrature: tolerance must be positive");
    if (!std::isfinite(a) || !std::isfinite(b))
        throw DomainError("quad_finite: interval endpoints must be finite");
    if (a == b)
        return {0.0, 0.0, 1};

    constexpr std::size_t kPerRule = 15;
    auto by_error = [](const Segment& l, const Segment& r) { return l.error < r.error; };

    std::vector<Segment> heap;
    heap.push_back(gauss_kronrod15(f, a, b));
    std::size_t evaluations = kPerRule;

    auto totals = [&heap] {
        double value = 0.0;
        double error = 0.0;
        for (const auto& s : heap)
        {
            value += s.value;
            error += s.error;
        }
        return std::pair{value, error};
    };

    for (;;)
    {
        const auto [value, error] = totals();
        if (error <= tol)
            return {value, error, evaluations};
        if (evaluations + 2 * kPerRule > max_evaluations)
            throw NumericalError("quadrature: evaluation budget exhausted", value, error);

        std::pop_heap(heap.begin(), heap.end(), by_error);
        const Segment worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        if (mid <= std::min(worst.a, worst.b) || mid >= std::max(worst.a, worst.b))
            throw NumericalError("quadrature: interval cannot be subdivided further", value, error);

        heap.push_back(gauss_kronrod15(f, worst.a, mid));
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(gauss_kronrod15(f, mid, worst.b));
        std::push_heap(heap.begin(), heap.end(), by_error);
        evaluations += 2 * kPerRule;
    }
}

QuadratureResult quad_semi_infinite(const Integrand& f, double a, double tol,
                                    std::size_t max_evaluations)
{
    if (!std::isfinite(a))
        throw DomainError("quad_semi_infinite: lower limit must be finite");
    auto mapped = [&f, a](double v) {
        if (v >= 1.0)
            return 0.0;
        const double w = 1.0 - v;
        const double u = a + v / w;
        if (!std::isfinite(u))
            return 0.0;
        const double fu = f(u);
        return fu == 0.0 ? 0.0 : fu / (w * w);
    };
    return quad_finite(mapped, 0.0, 1.0, tol, max_evaluations);
}

} // namespace dualsel::specfun
