#include "dualsel/selection.hpp"

#include "dualsel/errors.hpp"

#include <future>
#include <string>

namespace dualsel
{

std::string_view to_string(Method method)
{
    switch (method)
    {
    case Method::analytic:
        return "analytic";
    case Method::montecarlo:
        return "montecarlo";
    case Method::high_snr:
        return "high_snr";
    }
    return "unknown";
}

double Candidate::value() const
{
    if (const auto* v = std::get_if<EsrValue>(&esr))
        return v->value;
    return std::get<montecarlo::EsrEstimate>(esr).esr;
}

int argmax_served(std::span<const double> esr_by_n)
{
    if (esr_by_n.empty())
        throw DomainError("argmax_served: no candidates");
    std::size_t best = 0;
    for (std::size_t i = 1; i < esr_by_n.size(); ++i)
        if (esr_by_n[i] > esr_by_n[best])
            best = i;
    return static_cast<int>(best) + 1;
}

SelectionResult select_served(int num_users, double rho, Method method,
                              const SelectionOptions& options)
{
    if (num_users < 2)
        throw DomainError("select_served: K must be at least 2");
    if (num_users > kMaxUsers)
        throw CapabilityError("select_served: K = " + std::to_string(num_users) +
                              " exceeds the supported maximum of " + std::to_string(kMaxUsers));

    SelectionResult result;
    result.method = method;
    result.esr_by_n.reserve(static_cast<std::size_t>(num_users));

    switch (method)
    {
    case Method::analytic: {
        std::vector<std::future<EsrValue>> pending;
        for (int n = 1; n <= num_users; ++n)
            pending.push_back(std::async(std::launch::async, [=, tol = options.tol] {
                return esr_exact(SystemConfig(num_users, n, rho), ThetaForm::exact, tol);
            }));
        for (int n = 1; n <= num_users; ++n)
            result.esr_by_n.push_back({n, pending[static_cast<std::size_t>(n - 1)].get()});
        break;
    }
    case Method::high_snr:
        for (int n = 1; n <= num_users; ++n)
            result.esr_by_n.push_back({n, esr_high_snr(SystemConfig(num_users, n, rho))});
        break;
    case Method::montecarlo:
        for (int n = 1; n < num_users; ++n)
            result.esr_by_n.push_back(
                {n, montecarlo::estimate_esr(SystemConfig(num_users, n, rho), options.trials,
                                             options.seed, options.workers)});
        result.esr_by_n.push_back({num_users, montecarlo::estimate_esr_tdma(
                                                  num_users, rho, options.trials, options.seed,
                                                  options.workers)});
        break;
    }

    std::vector<double> values;
    values.reserve(result.esr_by_n.size());
    for (const auto& c : result.esr_by_n)
        values.push_back(c.value());
    result.best_n = argmax_served(values);
    return result;
}

} // namespace dualsel
