#pragma once

#include "dualsel/specfun.hpp"

#include <cstdint>
#include <vector>

namespace dualsel
{

// Alternating sums over binomial coefficients lose roughly one decimal digit
// per two users; above this K results are refused rather than returned
// inaccurate.
inline constexpr int kMaxUsers = 20;

/// Scenario: K users sorted by BS channel gain, user n carries the secret
/// signal, user K jams, rho = P / noise variance (linear). n = K is the
/// TDMA-like case: the best user transmits alone at full power.
class SystemConfig
{
  public:
    SystemConfig(int num_users, int served_index, double rho);

    int num_users() const noexcept { return num_users_; }
    int served_index() const noexcept { return served_index_; }
    int jammer_index() const noexcept { return num_users_; }
    double rho() const noexcept { return rho_; }
    bool is_tdma() const noexcept { return served_index_ == num_users_; }

  private:
    int num_users_;
    int served_index_;
    double rho_;
};

/// Ergodic secrecy rate in nats, before and after the {x}^+ clamp.
struct EsrValue
{
    double value = 0.0;
    double unclamped = 0.0;

    static EsrValue from_difference(double unclamped);
};

/// Coefficients Xi_ij of the CDF of T = |h_K|^2 / (|h_n|^2 + 2/rho), for
/// i in [0, K-n] and j in [0, n-1].
class XiTable
{
  public:
    XiTable(int num_users, int served_index);

    int num_users() const noexcept { return num_users_; }
    int served_index() const noexcept { return served_index_; }
    int max_i() const noexcept { return num_users_ - served_index_; }
    int max_j() const noexcept { return served_index_ - 1; }
    double at(int i, int j) const;

  private:
    int num_users_;
    int served_index_;
    std::vector<double> coefficients_;
};

XiTable xi_table(int num_users, int served_index);

/// Exact binomial coefficient C(n, k) as a double; 0 for k outside [0, n].
double binomial(int n, int k);

// CDF of T (two-branch closed form, t >= 1 and 0 <= t < 1).
double cdf_T(double t, const SystemConfig& cfg);
double cdf_T(double t, double rho, const XiTable& table);

// High-SNR limit of the CDF of T; identically 0 below t = 1.
double cdf_T_high_snr(double t, int num_users, int served_index);
double cdf_T_high_snr(double t, const XiTable& table);

/// CDF of the n-th smallest of K i.i.d. unit-mean exponentials.
double cdf_order_stat(double x, int num_users, int served_index);

/// E[log(1 + snr X)] where X is the n-th smallest of K unit-mean
/// exponentials, through the E1 closed form. Valid for 1 <= n <= K.
double mean_log_rate_order_stat(int num_users, int served_index, double snr);

/// E[C_b,s] = E[log(1 + (rho/2)|h_n|^2)] for the dual-selection scheme.
double exp_cb(const SystemConfig& cfg);

/// Which kernel to integrate against F_T for the eavesdropper term.
///
/// exact:   the inner v-integral runs over v >= 2u/rho, the range where the
///          change of variables u = y/(z + 2/rho), v = y keeps z >= 0.
///          Theta(u) = e^{-2(u+1)/rho} [ (S+1)/(u+1)^2 - (2/rho) S/(u(u+1)) ]
///          with S = e^x E1(x), x = 2(u+1)^2/(rho u).
/// unconstrained: the inner integral taken over all v >= 0, giving
///          Theta(u) = (S+1-log(u+1))/(u+1)^2 - (2/rho) S/(u(u+1))
///          with x = 2(u+1)/(rho u). It ignores z >= 0 and overstates the ESR
///          by O(log(rho)/rho); kept for comparison.
enum class ThetaForm
{
    exact,
    unconstrained,
};

double theta(double u, double rho);
double theta_unconstrained(double u, double rho);
double theta(double u, double rho, ThetaForm form);

/// Psi = int_0^inf Theta(u) F_T(u) du, split at the branch point u = 1.
double psi(const SystemConfig& cfg, ThetaForm form = ThetaForm::exact,
           double tol = specfun::kDefaultTolerance);

/// R_e1 = 1 - (2/rho) e^{2/rho} E1(2/rho).
double eve_rate_term_always_noise(double rho);

/// E[C_e,s] = R_e1 + e^{2/rho} Psi.
double exp_ce(const SystemConfig& cfg, ThetaForm form = ThetaForm::exact,
              double tol = specfun::kDefaultTolerance);

/// Exact ESR. n = K is evaluated as the TDMA-like scheme at full power.
EsrValue esr_exact(const SystemConfig& cfg, ThetaForm form = ThetaForm::exact,
                   double tol = specfun::kDefaultTolerance);

/// Exact ESR of the TDMA-like scheme: E[log(1+rho|h_K|^2)] - E[log(1+rho|g|^2)].
EsrValue esr_tdma_exact(int num_users, double rho);

// High-SNR closed forms.

/// Upsilon for a given xi > 0 (picks the xi = 1, xi < 1 or xi > 1 branch).
double upsilon_closed_form(double xi, double rho);

/// xi_ij = (K - n + 1 + j)/i - 1.
double upsilon_xi(int i, int j, int num_users, int served_index);

double upsilon(int i, int j, int num_users, int served_index, double rho);

/// The constant varpi in the high-SNR expansion of E[C_b,s].
double varpi(int num_users, int served_index);

/// High-SNR ESR of the dual-selection scheme. n = K is routed to the
/// corrected TDMA high-SNR expression.
EsrValue esr_high_snr(const SystemConfig& cfg);

enum class TdmaVariant
{
    flipped_sign, // {sum_i (-1)^{i+1} C(K,i) log i}^+
    corrected,    // {sum_i (-1)^i C(K,i) log i}^+
};

EsrValue esr_tdma_high_snr(int num_users, TdmaVariant variant);

} // namespace dualsel
