#pragma once

#include <stdexcept>
#include <string>

namespace dualsel
{

// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

// Request is well-formed but outside what the implementation supports
// with guaranteed accuracy (e.g. K above the alternating-sum cap).
class CapabilityError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// A numerical procedure did not reach its tolerance. Carries the best
// estimate it had and the associated error bound.
class NumericalError : public std::runtime_error
{
  public:
    NumericalError(const std::string& what, double best_estimate, double error_bound)
        : std::runtime_error(what), best_estimate_(best_estimate), error_bound_(error_bound)
    {
    }

    double best_estimate() const noexcept { return best_estimate_; }
    double error_bound() const noexcept { return error_bound_; }

  private:
    double best_estimate_;
    double error_bound_;
};

} // namespace dualsel
