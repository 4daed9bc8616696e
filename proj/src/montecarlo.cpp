#include "dualsel/montecarlo.hpp"

#include "dualsel/errors.hpp"
#include "dualsel/philox.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <string>
#include <thread>

namespace dualsel::montecarlo
{

namespace
{

// Trials are reduced in fixed-size blocks, in block order, so the summation
// tree does not depend on how many workers ran.
constexpr std::uint64_t kBlockTrials = 4096;

enum Substream : std::uint32_t
{
    kBsGains = 0,
    kEveGains = 1,
};

double exponential(TrialStream& stream) { return -std::log1p(-stream.next_uniform()); }

unsigned resolve_workers(unsigned workers)
{
    if (workers == kAutoWorkers)
        workers = std::max(1u, std::thread::hardware_concurrency());
    return workers;
}

// Calls body(block, begin, end) for every block of [0, count), spreading the
// blocks over the workers.
template <class Body>
void for_each_block(std::uint64_t count, unsigned workers, const Body& body)
{
    const std::uint64_t blocks = (count + kBlockTrials - 1) / kBlockTrials;
    const auto run = [&](std::atomic<std::uint64_t>& next) {
        for (std::uint64_t b = next.fetch_add(1); b < blocks; b = next.fetch_add(1))
            body(b, b * kBlockTrials, std::min(count, (b + 1) * kBlockTrials));
    };

    std::atomic<std::uint64_t> next{0};
    const auto threads = static_cast<unsigned>(
        std::min<std::uint64_t>(resolve_workers(workers), std::max<std::uint64_t>(blocks, 1)));
    if (threads <= 1)
    {
        run(next);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w)
        pool.emplace_back([&] { run(next); });
}

// Neumaier compensated sum in extended precision.
class CompensatedSum
{
  public:
    void add(long double x) noexcept
    {
        const long double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            comp_ += (sum_ - t) + x;
        else
            comp_ += (x - t) + sum_;
        sum_ = t;
    }
    long double value() const noexcept { return sum_ + comp_; }

  private:
    long double sum_ = 0.0L;
    long double comp_ = 0.0L;
};

struct RateMoments
{
    CompensatedSum cb;
    CompensatedSum ce;
    CompensatedSum diff;
    CompensatedSum diff_sq;

    void add(double rate_bs, double rate_eve) noexcept
    {
        const long double d = static_cast<long double>(rate_bs) - rate_eve;
        cb.add(rate_bs);
        ce.add(rate_eve);
        diff.add(d);
        diff_sq.add(d * d);
    }

    void merge(const RateMoments& other) noexcept
    {
        cb.add(other.cb.value());
        ce.add(other.ce.value());
        diff.add(other.diff.value());
        diff_sq.add(other.diff_sq.value());
    }
};

template <class RatesOf>
EsrEstimate estimate(std::uint64_t trials, std::uint64_t seed, unsigned workers,
                     const RatesOf& rates_of)
{
    if (trials < 1)
        throw DomainError("estimate_esr: at least one trial is required");

    const std::uint64_t blocks = (trials + kBlockTrials - 1) / kBlockTrials;
    std::vector<RateMoments> partial(blocks);
    for_each_block(trials, workers, [&](std::uint64_t b, std::uint64_t begin, std::uint64_t end) {
        RateMoments& acc = partial[b];
        for (std::uint64_t t = begin; t < end; ++t)
        {
            const auto [rate_bs, rate_eve] = rates_of(t);
            acc.add(rate_bs, rate_eve);
        }
    });

    RateMoments total;
    for (const auto& block : partial)
        total.merge(block);

    const long double count = static_cast<long double>(trials);
    const long double mean_diff = total.diff.value() / count;
    long double variance = 0.0L;
    if (trials > 1)
        variance = std::max(0.0L, (total.diff_sq.value() - mean_diff * total.diff.value()) /
                                      (count - 1.0L));

    EsrEstimate result;
    result.mean_cb = static_cast<double>(total.cb.value() / count);
    result.mean_ce = static_cast<double>(total.ce.value() / count);
    result.esr = std::max(0.0, result.mean_cb - result.mean_ce);
    result.std_error = static_cast<double>(std::sqrt(variance / count));
    result.trials = trials;
    result.seed = seed;
    return result;
}

void require_rho(double rho)
{
    if (!(rho > 0.0) || !std::isfinite(rho))
        throw DomainError("transmit SNR must be positive and finite");
}

template <class SampleOf>
std::vector<double> sorted_sample(std::uint64_t samples, unsigned workers, const SampleOf& sample_of)
{
    if (samples < 1)
        throw DomainError("empirical sample size must be at least 1");
    std::vector<double> values(samples);
    for_each_block(samples, workers, [&](std::uint64_t, std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t t = begin; t < end; ++t)
            values[t] = sample_of(t);
    });
    std::sort(values.begin(), values.end());
    return values;
}

} // namespace

ChannelRealization draw_realization(std::uint64_t seed, std::uint64_t trial_index, int num_users)
{
    if (num_users < 1)
        throw DomainError("draw_realization: K must be at least 1");
    ChannelRealization r;
    r.gains_bs.resize(static_cast<std::size_t>(num_users));
    r.gains_eve.resize(static_cast<std::size_t>(num_users));

    TrialStream bs(seed, trial_index, kBsGains);
    for (auto& g : r.gains_bs)
        g = exponential(bs);
    std::sort(r.gains_bs.begin(), r.gains_bs.end());

    TrialStream eve(seed, trial_index, kEveGains);
    for (auto& g : r.gains_eve)
        g = exponential(eve);
    return r;
}

SlotRates slot_rates(const ChannelRealization& realization, int served_index, double rho)
{
    const auto k_users = static_cast<int>(realization.gains_bs.size());
    if (static_cast<int>(realization.gains_eve.size()) != k_users)
        throw DomainError("slot_rates: BS and eavesdropper gain vectors differ in length");
    if (served_index < 1 || served_index > k_users - 1)
        throw DomainError("slot_rates: served index " + std::to_string(served_index) +
                          " outside [1, K-1]");
    require_rho(rho);

    const double noise = 2.0 / rho;
    const auto n = static_cast<std::size_t>(served_index - 1);
    const auto k = static_cast<std::size_t>(k_users - 1);
    const double h_served = realization.gains_bs[n];
    const double h_jammer = realization.gains_bs[k];
    const double g_served = realization.gains_eve[n];
    const double g_jammer = realization.gains_eve[k];

    const double gamma_bs = h_jammer / (h_served + noise);
    const double gamma_eve = g_jammer / (g_served + noise);

    SlotRates rates;
    rates.rate_bs = std::log1p(0.5 * rho * h_served);
    rates.eve_decoded_jamming = gamma_bs <= gamma_eve;
    rates.rate_eve = rates.eve_decoded_jamming ? std::log1p(0.5 * rho * g_served)
                                               : std::log1p(g_served / (g_jammer + noise));
    return rates;
}

EsrEstimate estimate_esr(const SystemConfig& cfg, std::uint64_t trials, std::uint64_t seed,
                         unsigned workers)
{
    if (cfg.is_tdma())
        throw DomainError("estimate_esr: served index must be below K; use estimate_esr_tdma");
    const int k_users = cfg.num_users();
    const int n = cfg.served_index();
    const double rho = cfg.rho();
    return estimate(trials, seed, workers, [&](std::uint64_t t) {
        const SlotRates r = slot_rates(draw_realization(seed, t, k_users), n, rho);
        return std::pair{r.rate_bs, r.rate_eve};
    });
}

EsrEstimate estimate_esr_tdma(int num_users, double rho, std::uint64_t trials, std::uint64_t seed,
                              unsigned workers)
{
    if (num_users < 1)
        throw DomainError("estimate_esr_tdma: K must be at least 1");
    require_rho(rho);
    const auto best = static_cast<std::size_t>(num_users - 1);
    return estimate(trials, seed, workers, [&](std::uint64_t t) {
        const ChannelRealization r = draw_realization(seed, t, num_users);
        return std::pair{std::log1p(rho * r.gains_bs[best]), std::log1p(rho * r.gains_eve[best])};
    });
}

std::vector<double> empirical_cdf_T(const SystemConfig& cfg, std::uint64_t samples,
                                    std::uint64_t seed, unsigned workers)
{
    if (cfg.is_tdma())
        throw DomainError("empirical_cdf_T: served index must be below K");
    const int k_users = cfg.num_users();
    const auto n = static_cast<std::size_t>(cfg.served_index() - 1);
    const auto k = static_cast<std::size_t>(k_users - 1);
    const double noise = 2.0 / cfg.rho();
    return sorted_sample(samples, workers, [&](std::uint64_t t) {
        const ChannelRealization r = draw_realization(seed, t, k_users);
        return r.gains_bs[k] / (r.gains_bs[n] + noise);
    });
}

std::vector<double> empirical_order_stat(int num_users, int served_index, std::uint64_t samples,
                                         std::uint64_t seed, unsigned workers)
{
    if (num_users < 1 || served_index < 1 || served_index > num_users)
        throw DomainError("empirical_order_stat: need 1 <= n <= K");
    const auto n = static_cast<std::size_t>(served_index - 1);
    return sorted_sample(samples, workers, [&](std::uint64_t t) {
        return draw_realization(seed, t, num_users).gains_bs[n];
    });
}

double ks_distance(std::span<const double> sorted_sample, const std::function<double(double)>& cdf)
{
    if (sorted_sample.empty())
        throw DomainError("ks_distance: empty sample");
    const auto count = static_cast<double>(sorted_sample.size());
    double distance = 0.0;
    for (std::size_t i = 0; i < sorted_sample.size(); ++i)
    {
        const double f = cdf(sorted_sample[i]);
        distance = std::max({distance, (static_cast<double>(i) + 1.0) / count - f,
                             f - static_cast<double>(i) / count});
    }
    return distance;
}

} // namespace dualsel::montecarlo
