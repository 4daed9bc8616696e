#pragma once

#include "dualsel/analytic.hpp"
#include "dualsel/montecarlo.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

namespace dualsel
{

enum class Method
{
    analytic,
    montecarlo,
    high_snr,
};

std::string_view to_string(Method method);

struct Candidate
{
    int served_index = 0;
    std::variant<EsrValue, montecarlo::EsrEstimate> esr;

    double value() const;
};

struct SelectionResult
{
    int best_n = 0;
    std::vector<Candidate> esr_by_n; // n = 1..K in order; n = K is the TDMA-like case
    Method method = Method::analytic;
};

struct SelectionOptions
{
    std::uint64_t trials = 10000;
    std::uint64_t seed = 1;
    unsigned workers = montecarlo::kAutoWorkers;
    double tol = specfun::kDefaultTolerance;
};

/// 1-based index of the largest entry; ties go to the smaller index.
int argmax_served(std::span<const double> esr_by_n);

/// Exhaustive search over the served index with the jammer fixed to user K.
SelectionResult select_served(int num_users, double rho, Method method,
                              const SelectionOptions& options = {});

} // namespace dualsel
