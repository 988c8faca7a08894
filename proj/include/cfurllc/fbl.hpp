#pragma once

#include <span>
#include <vector>

#include "cfurllc/channel.hpp"
#include "cfurllc/config.hpp"
#include "cfurllc/power.hpp"
#include "cfurllc/scenario.hpp"

namespace cfurllc {

// Finite-blocklength constants shared by every rate expression.
struct FblParams {
  double eta = 0.0;             // K / L
  std::vector<double> alpha;    // Q^-1(eps_k) / sqrt(L (1 - eta)) per device
  double bandwidth_hz = 0.0;
  int blocklength = 0;

  // B (1 - eta) / ln 2: converts nats-per-use f values into bit/s.
  double rate_scale() const;

  static FblParams from_config(const SystemConfig& cfg);
  // Same constants with every alpha forced to zero (infinite blocklength).
  FblParams without_dispersion() const;
};

double q_function(double x);
// Inverse Gaussian tail, |Q(result) - eps| <= 1e-12. Defined on (0, 0.5].
double q_inverse(double eps);

// Rate-domain helper g(x) = (x + 1) ln(1 + 1/x) / sqrt(2x + 1), strictly
// decreasing on (0, inf).
double g_function(double x);
// Right end of the region on which f_k is non-negative, decreasing and
// convex: g^-1(alpha). Infinite when alpha == 0.
double f_domain_upper(double alpha);

// f(x) = ln(1 + 1/x) - alpha sqrt((2x + 1) / (x + 1)^2). Throws DomainError
// (carrying the boundary) when x is outside (0, g^-1(alpha)].
double f_value(double x, double alpha);
double f_k(double x, const FblParams& params, int k);
// Solves f_k(x) = y by bisection in log x; relative accuracy 1e-10 on f.
double f_k_inverse(double y, const FblParams& params, int k);

// Normal-approximation achievable rate (bit/s). May be negative.
double fbl_rate(double gamma, const FblParams& params, int k);
// Rate from an SINR lower bound, clamped at zero outside f's domain.
double lb_rate(double gamma_lb, const FblParams& params, int k);

// Closed-form SINR lower bounds for statistical-CSI detection.
double lb_sinr_mrc(const LargeScaleModel& model, const EstimationStats& stats,
                   const PowerAllocation& power, int k);
double lb_sinr_fzf(const LargeScaleModel& model, const EstimationStats& stats,
                   const PowerAllocation& power, int k);

// Product-form rewrite of the MRC bound. Everything is kept as logarithms:
// products over the service set are sums of log1p terms.
struct SinrBreakdownMrc {
  double log_theta = 0.0;
  double log_sigma = 0.0;
  std::vector<double> log_xi;  // indexed by interfering device k'
};

// Product-form rewrite of the FZF bound.
struct SinrBreakdownFzf {
  double log_varpi = 0.0;
  std::vector<double> log_vartheta;  // k' -> ln vartheta_{k,k'}
  std::vector<double> log_mu;        // k' -> ln mu_{k,k'}
};

SinrBreakdownMrc mrc_breakdown(const LargeScaleModel& model, std::span<const double> pilot, int k);
SinrBreakdownFzf fzf_breakdown(const LargeScaleModel& model, std::span<const double> pilot, int k);

// Reassembles the SINR from a breakdown (log-domain throughout).
double sinr_from_breakdown(const SinrBreakdownMrc& b, std::span<const double> payload,
                           int num_antennas, int k);
double sinr_from_breakdown(const SinrBreakdownFzf& b, std::span<const double> payload,
                           int num_antennas, int service_set_size, int k);

double log_sum_exp(std::span<const double> values);

}  // namespace cfurllc
