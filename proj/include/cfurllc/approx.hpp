#pragma once

#include <span>
#include <vector>

#include "cfurllc/scenario.hpp"

namespace cfurllc {

// Tangent bounds in the log variable used by one SCA iteration.
//   ln(1 + x)  >= rho  ln x + delta        (any x_hat > 0)
//   G(x)       <= rho~ ln x + delta~       (x_hat >= (sqrt(17) - 3) / 4)
// Both hold with equality at x = x_hat.
struct LogApproxCoeffs {
  double rho = 0.0;
  double delta = 0.0;
  double rho_tilde = 0.0;
  double delta_tilde = 0.0;
  bool clamped = false;  // expansion point for the G bound was raised to the threshold
};

struct LogLowerCoeffs {
  double rho;
  double delta;
};

struct LogUpperCoeffs {
  double rho_tilde;
  double delta_tilde;
};

// Smallest expansion point for which the G upper bound is valid.
double g_bound_threshold();

// Dispersion factor G(x) = sqrt((2/x + 1) / (1/x + 1)^2).
double dispersion_factor(double x);

LogLowerCoeffs lemma2_coeffs(double x_hat);
// Throws DomainError when x_hat is below g_bound_threshold().
LogUpperCoeffs lemma3_coeffs(double x_hat);

// Both bounds at one SINR expansion point; the G expansion point is clamped
// up to the threshold when needed (and `clamped` is set).
LogApproxCoeffs log_approx_coeffs(double chi_hat);

// theta_k(p) >= exp(c) p^a with equality at p_hat (MRC numerator factor).
struct MonomialApproxMrc {
  double a = 1.0;
  double c = 0.0;
};

// varpi_k^2 prod_{k' != k} vartheta_{k,k'}^2 >= exp(d) prod_j p_j^{b_j}
// with equality at the expansion point (FZF numerator factor).
struct MonomialApproxFzf {
  std::vector<double> b;
  double d = 0.0;
};

// ln theta_k as a function of device k's pilot power.
double log_theta(const LargeScaleModel& model, double pilot_k, int k);
// ln [varpi_k^2 prod_{k' != k} vartheta_{k,k'}^2] as a function of all pilots.
double log_fzf_numerator(const LargeScaleModel& model, std::span<const double> pilot, int k);

MonomialApproxMrc theorem3_coeffs(const LargeScaleModel& model, double pilot_hat_k, int k);
MonomialApproxFzf theorem4_coeffs(const LargeScaleModel& model, std::span<const double> pilot_hat,
                                  int k);

}  // namespace cfurllc
