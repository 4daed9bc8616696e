#pragma once

#include "dualsel/analytic.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace dualsel::montecarlo
{

/// One slot: BS-side gains |h_i|^2 sorted ascending, eavesdropper gains
/// |g_i|^2 in the same user order (not sorted).
struct ChannelRealization
{
    std::vector<double> gains_bs;
    std::vector<double> gains_eve;
};

struct SlotRates
{
    double rate_bs = 0.0;
    double rate_eve = 0.0;
    bool eve_decoded_jamming = false;
};

struct EsrEstimate
{
    double esr = 0.0;
    double mean_cb = 0.0;
    double mean_ce = 0.0;
    double std_error = 0.0;
    std::uint64_t trials = 0;
    std::uint64_t seed = 0;
};

// Worker count 0 means std::thread::hardware_concurrency(). Results never
// depend on it.
inline constexpr unsigned kAutoWorkers = 0;

/// 2K unit-mean exponentials from the stream keyed by (seed, trial_index).
ChannelRealization draw_realization(std::uint64_t seed, std::uint64_t trial_index, int num_users);

/// Rates of one slot with user K jamming at R_J = log(1 + Gamma_b,z). The
/// eavesdropper cancels the jamming signal iff Gamma_b,z <= Gamma_e,z.
SlotRates slot_rates(const ChannelRealization& realization, int served_index, double rho);

EsrEstimate estimate_esr(const SystemConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                         unsigned workers = kAutoWorkers);

/// Best user alone at full power P, eavesdropper overhears it without jamming.
EsrEstimate estimate_esr_tdma(int num_users, double rho, std::uint64_t trials,
                              std::uint64_t seed, unsigned workers = kAutoWorkers);

/// Sorted draws of T = |h_K|^2 / (|h_n|^2 + 2/rho).
std::vector<double> empirical_cdf_T(const SystemConfig& cfg, std::uint64_t samples,
                                    std::uint64_t seed, unsigned workers = kAutoWorkers);

/// Sorted draws of the n-th smallest BS gain |h_n|^2.
std::vector<double> empirical_order_stat(int num_users, int served_index, std::uint64_t samples,
                                         std::uint64_t seed, unsigned workers = kAutoWorkers);

/// Kolmogorov-Smirnov distance sup |F_emp - F| of a sorted sample.
double ks_distance(std::span<const double> sorted_sample, const std::function<double(double)>& cdf);

} // namespace dualsel::montecarlo
