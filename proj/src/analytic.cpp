#include "dualsel/analytic.hpp"

#include "dualsel/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dualsel
{

using specfun::e1_scaled;
using specfun::kEulerGamma;
using specfun::x_e1_scaled;

namespace
{

void require_supported(int num_users)
{
    if (num_users > kMaxUsers)
        throw CapabilityError("K = " + std::to_string(num_users) +
                              " exceeds the supported maximum of " + std::to_string(kMaxUsers) +
                              " users for closed-form evaluation");
}

void require_dual_scheme(const SystemConfig& cfg, const char* who)
{
    if (cfg.is_tdma())
        throw DomainError(std::string(who) +
                          ": served index must be below K (n = K is the TDMA-like case)");
}

double sign(int k) { return (k % 2 == 0) ? 1.0 : -1.0; }

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

} // namespace

SystemConfig::SystemConfig(int num_users, int served_index, double rho)
    : num_users_(num_users), served_index_(served_index), rho_(rho)
{
    if (num_users < 2)
        throw DomainError("SystemConfig: K must be at least 2");
    if (served_index < 1 || served_index > num_users)
        throw DomainError("SystemConfig: served index " + std::to_string(served_index) +
                          " outside [1, " + std::to_string(num_users) + "]");
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw DomainError("SystemConfig: transmit SNR must be positive and finite");
}

EsrValue EsrValue::from_difference(double unclamped)
{
    return {std::max(0.0, unclamped), unclamped};
}

double binomial(int n, int k)
{
    if (k < 0 || n < 0 || k > n)
        return 0.0;
    k = std::min(k, n - k);
    if (n > 60)
        return std::round(std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                                   std::lgamma(n - k + 1.0)));
    std::uint64_t result = 1;
    for (int i = 1; i <= k; ++i)
        result = result * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    return static_cast<double>(result);
}

XiTable::XiTable(int num_users, int served_index)
    : num_users_(num_users), served_index_(served_index)
{
    if (num_users < 2)
        throw DomainError("xi_table: K must be at least 2");
    require_supported(num_users);
    if (served_index < 1 || served_index > num_users - 1)
        throw DomainError("xi_table: served index must lie in [1, K-1]");

    const int n = served_index;
    const int span = num_users - n;
    const double lead = n * binomial(num_users, n);
    coefficients_.resize(static_cast<std::size_t>((span + 1) * n));
    for (int i = 0; i <= span; ++i)
        for (int j = 0; j < n; ++j)
            coefficients_[static_cast<std::size_t>(i * n + j)] =
                sign(i + j) * lead * binomial(span, i) * binomial(n - 1, j);
}

double XiTable::at(int i, int j) const
{
    if (i < 0 || i > max_i() || j < 0 || j > max_j())
        throw DomainError("XiTable::at: index out of range");
    return coefficients_[static_cast<std::size_t>(i * served_index_ + j)];
}

XiTable xi_table(int num_users, int served_index) { return XiTable(num_users, served_index); }

double cdf_T(double t, const SystemConfig& cfg)
{
    require_dual_scheme(cfg, "cdf_T");
    return cdf_T(t, cfg.rho(), xi_table(cfg.num_users(), cfg.served_index()));
}

double cdf_T(double t, double rho, const XiTable& table)
{
    if (!(t >= 0.0))
        throw DomainError("cdf_T: t must be non-negative");
    if (t == std::numeric_limits<double>::infinity())
        return 1.0;

    const int span = table.max_i();
    const int n = table.served_index();
    const int base = span + 1; // K - n + 1
    const double decay = std::exp(-2.0 * t / rho);

    double sum = 0.0;
    if (t >= 1.0)
    {
        double decay_i = 1.0;
        for (int i = 0; i <= span; ++i, decay_i *= decay)
            for (int j = 0; j < n; ++j)
                sum += table.at(i, j) * decay_i / (i * (t - 1.0) + base + j);
    }
    else
    {
        // e^{-2t(K-n+1+j) / (rho(1-t))} = r^{K-n+1+j}
        const double r = std::exp(-2.0 * t / (rho * (1.0 - t)));
        std::vector<double> tail(static_cast<std::size_t>(n));
        for (int j = 0; j < n; ++j)
            tail[static_cast<std::size_t>(j)] = std::pow(r, base + j);
        double decay_i = 1.0;
        for (int i = 0; i <= span; ++i, decay_i *= decay)
            for (int j = 0; j < n; ++j)
                sum += table.at(i, j) * (decay_i - tail[static_cast<std::size_t>(j)]) /
                       (i * (t - 1.0) + base + j);
    }
    return clamp_probability(sum);
}

double cdf_T_high_snr(double t, int num_users, int served_index)
{
    return cdf_T_high_snr(t, xi_table(num_users, served_index));
}

double cdf_T_high_snr(double t, const XiTable& table)
{
    if (!(t >= 0.0))
        throw DomainError("cdf_T_high_snr: t must be non-negative");
    if (t < 1.0)
        return 0.0;
    if (t == std::numeric_limits<double>::infinity())
        return 1.0;
    const int base = table.max_i() + 1;
    double sum = 0.0;
    for (int i = 0; i <= table.max_i(); ++i)
        for (int j = 0; j <= table.max_j(); ++j)
            sum += table.at(i, j) / (i * (t - 1.0) + base + j);
    return clamp_probability(sum);
}

double cdf_order_stat(double x, int num_users, int served_index)
{
    if (num_users < 1)
        throw DomainError("cdf_order_stat: K must be at least 1");
    if (served_index < 1 || served_index > num_users)
        throw DomainError("cdf_order_stat: order index outside [1, K]");
    if (!(x >= 0.0))
        throw DomainError("cdf_order_stat: x must be non-negative");
    if (x == std::numeric_limits<double>::infinity())
        return 1.0;

    const double below = -std::expm1(-x);
    const double above = std::exp(-x);
    double sum = 0.0;
    for (int i = served_index; i <= num_users; ++i)
        sum += binomial(num_users, i) * std::pow(below, i) * std::pow(above, num_users - i);
    return clamp_probability(sum);
}

double mean_log_rate_order_stat(int num_users, int served_index, double snr)
{
    if (num_users < 1)
        throw DomainError("mean_log_rate_order_stat: K must be at least 1");
    require_supported(num_users);
    if (served_index < 1 || served_index > num_users)
        throw DomainError("mean_log_rate_order_stat: order index outside [1, K]");
    if (!(snr > 0.0) || !std::isfinite(snr))
        throw DomainError("mean_log_rate_order_stat: SNR must be positive and finite");

    const int k_users = num_users;
    const double inv = 1.0 / snr;

    // E[log(1 + snr max)] from 1 - (1 - e^{-x})^K
    double sum = 0.0;
    for (int i = 1; i <= k_users; ++i)
        sum += sign(i + 1) * binomial(k_users, i) * e1_scaled(i * inv);

    // minus the order statistics above n that are not the maximum
    for (int i = served_index; i <= k_users - 1; ++i)
    {
        const double outer = binomial(k_users, i);
        for (int j = 0; j <= i; ++j)
            sum -= sign(j) * outer * binomial(i, j) * e1_scaled((k_users + j - i) * inv);
    }
    return sum;
}

double exp_cb(const SystemConfig& cfg)
{
    require_dual_scheme(cfg, "exp_cb");
    return mean_log_rate_order_stat(cfg.num_users(), cfg.served_index(), 0.5 * cfg.rho());
}

double theta_unconstrained(double u, double rho)
{
    if (!(u > 0.0) || !std::isfinite(u))
        throw DomainError("theta: u must be positive and finite");
    const double up1 = u + 1.0;
    const double x = 2.0 * up1 / (rho * u);
    const double scaled = e1_scaled(x);
    // (2/rho) S / (u (u+1)) rewritten as x S / (u+1)^2
    return (scaled + 1.0 - std::log1p(u)) / (up1 * up1) - x_e1_scaled(x) / (up1 * up1);
}

double theta(double u, double rho)
{
    if (!(u > 0.0) || !std::isfinite(u))
        throw DomainError("theta: u must be positive and finite");
    const double a = 2.0 / rho;
    const double up1 = u + 1.0;
    const double x = a * up1 * up1 / u;
    const double scaled = e1_scaled(x);
    // (2/rho) S / (u (u+1)) rewritten as x S / (u+1)^3
    const double bracket = (scaled + 1.0) / (up1 * up1) - x_e1_scaled(x) / (up1 * up1 * up1);
    return std::exp(-a * up1) * bracket;
}

double theta(double u, double rho, ThetaForm form)
{
    return form == ThetaForm::exact ? theta(u, rho) : theta_unconstrained(u, rho);
}

double psi(const SystemConfig& cfg, ThetaForm form, double tol)
{
    require_dual_scheme(cfg, "psi");
    const XiTable table = xi_table(cfg.num_users(), cfg.served_index());
    const double rho = cfg.rho();
    auto integrand = [&](double u) {
        if (u <= 0.0)
            return 0.0;
        return theta(u, rho, form) * cdf_T(u, rho, table);
    };
    const auto lower = specfun::quad_finite(integrand, 0.0, 1.0, 0.5 * tol);
    const auto upper = specfun::quad_semi_infinite(integrand, 1.0, 0.5 * tol);
    return lower.value + upper.value;
}

double eve_rate_term_always_noise(double rho)
{
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw DomainError("eve_rate_term_always_noise: SNR must be positive and finite");
    return 1.0 - x_e1_scaled(2.0 / rho);
}

double exp_ce(const SystemConfig& cfg, ThetaForm form, double tol)
{
    require_dual_scheme(cfg, "exp_ce");
    return eve_rate_term_always_noise(cfg.rho()) + std::exp(2.0 / cfg.rho()) * psi(cfg, form, tol);
}

EsrValue esr_exact(const SystemConfig& cfg, ThetaForm form, double tol)
{
    require_supported(cfg.num_users());
    if (cfg.is_tdma())
        return esr_tdma_exact(cfg.num_users(), cfg.rho());
    return EsrValue::from_difference(exp_cb(cfg) - exp_ce(cfg, form, tol));
}

EsrValue esr_tdma_exact(int num_users, double rho)
{
    return EsrValue::from_difference(mean_log_rate_order_stat(num_users, num_users, rho) -
                                     mean_log_rate_order_stat(1, 1, rho));
}

double upsilon_closed_form(double xi, double rho)
{
    if (!(xi > 0.0) || !std::isfinite(xi))
        throw DomainError("upsilon: xi must be positive and finite");
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw DomainError("upsilon: SNR must be positive and finite");

    const double ln2 = std::log(2.0);
    const double lead = std::log(0.5 * rho) + 1.0 - kEulerGamma;
    if (xi == 1.0)
        return lead / 8.0 + ln2 / 4.0 - 3.0 / 8.0;

    const double gap = 1.0 - xi;
    const double gap2 = gap * gap;
    const double nu = lead * (xi - 1.0 + 2.0 * std::log(2.0 / (1.0 + xi))) / (2.0 * gap2) +
                      1.0 / gap - (specfun::kPi * specfun::kPi + 12.0 * ln2 * ln2) / (12.0 * gap2);

    double zeta = 0.0;
    if (xi < 1.0)
    {
        zeta = 2.0 * ln2 * std::log((xi + 1.0) / xi) - ln2 * ln2;
    }
    else
    {
        const double l1 = std::log((xi - 1.0) / xi);
        const double l2 = std::log((xi - 1.0) / (2.0 * xi));
        zeta = 2.0 * ln2 * std::log((xi + 1.0) / (xi - 1.0)) + l1 * l1 - l2 * l2;
    }
    const double mu = (2.0 * (specfun::li2((xi - 1.0) / xi) - specfun::li2((xi - 1.0) / (2.0 * xi))) -
                       specfun::li2(-xi) + zeta) /
                      gap2;
    return nu + mu;
}

double upsilon_xi(int i, int j, int num_users, int served_index)
{
    if (served_index < 1 || served_index > num_users - 1)
        throw DomainError("upsilon: served index must lie in [1, K-1]");
    if (i < 1 || i > num_users - served_index || j < 0 || j > served_index - 1)
        throw DomainError("upsilon: (i, j) outside i in [1, K-n], j in [0, n-1]");
    return static_cast<double>(num_users - served_index + 1 + j) / i - 1.0;
}

double upsilon(int i, int j, int num_users, int served_index, double rho)
{
    return upsilon_closed_form(upsilon_xi(i, j, num_users, served_index), rho);
}

double varpi(int num_users, int served_index)
{
    require_supported(num_users);
    if (served_index < 1 || served_index > num_users)
        throw DomainError("varpi: served index outside [1, K]");
    const int k_users = num_users;
    double sum = 0.0;
    for (int i = served_index; i <= k_users - 1; ++i)
        for (int j = 0; j <= i; ++j)
            sum -= sign(j + 1) * binomial(k_users, i) * binomial(i, j) *
                   std::log(static_cast<double>(k_users + j - i));
    for (int i = 1; i <= k_users; ++i)
        sum += sign(i) * binomial(k_users, i) * std::log(static_cast<double>(i));
    return sum;
}

EsrValue esr_high_snr(const SystemConfig& cfg)
{
    require_supported(cfg.num_users());
    if (cfg.is_tdma())
        return esr_tdma_high_snr(cfg.num_users(), TdmaVariant::corrected);

    const int k_users = cfg.num_users();
    const int n = cfg.served_index();
    const double rho = cfg.rho();
    const XiTable table = xi_table(k_users, n);

    double eve_sum = 0.0;
    for (int i = 1; i <= k_users - n; ++i)
        for (int j = 0; j < n; ++j)
            eve_sum += table.at(i, j) / i * upsilon(i, j, k_users, n, rho);

    const double value =
        0.5 * (std::log(0.5 * rho) - 1.0 - kEulerGamma) + varpi(k_users, n) - eve_sum;
    return EsrValue::from_difference(value);
}

EsrValue esr_tdma_high_snr(int num_users, TdmaVariant variant)
{
    if (num_users < 1)
        throw DomainError("esr_tdma_high_snr: K must be at least 1");
    require_supported(num_users);
    double flipped = 0.0;
    for (int i = 1; i <= num_users; ++i)
        flipped += sign(i + 1) * binomial(num_users, i) * std::log(static_cast<double>(i));
    return EsrValue::from_difference(variant == TdmaVariant::flipped_sign ? flipped : -flipped);
}

} // namespace dualsel
