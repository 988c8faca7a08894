#include "cfurllc/approx.hpp"

#include <cmath>

#include "cfurllc/errors.hpp"
#include "cfurllc/fbl.hpp"

namespace cfurllc {

double g_bound_threshold() { return (std::sqrt(17.0) - 3.0) / 4.0; }

double dispersion_factor(double x) {
  if (!(x > 0.0)) throw DomainError("dispersion_factor: x must be positive", 0.0);
  return std::sqrt(x * (x + 2.0)) / (1.0 + x);
}

LogLowerCoeffs lemma2_coeffs(double x_hat) {
  if (!(x_hat > 0.0)) throw DomainError("lemma2_coeffs: expansion point must be positive", 0.0);
  const double rho = x_hat / (1.0 + x_hat);
  return {rho, std::log1p(x_hat) - rho * std::log(x_hat)};
}

LogUpperCoeffs lemma3_coeffs(double x_hat) {
  const double threshold = g_bound_threshold();
  if (!(x_hat >= threshold)) {
    throw DomainError("lemma3_coeffs: expansion point below (sqrt(17)-3)/4", threshold);
  }
  const double root = std::sqrt(x_hat * x_hat + 2.0 * x_hat);
  const double rho_t = x_hat / root - x_hat * root / ((1.0 + x_hat) * (1.0 + x_hat));
  const double g_hat = std::sqrt(1.0 - 1.0 / ((1.0 + x_hat) * (1.0 + x_hat)));
  return {rho_t, g_hat - rho_t * std::log(x_hat)};
}

LogApproxCoeffs log_approx_coeffs(double chi_hat) {
  LogApproxCoeffs out;
  const LogLowerCoeffs lower = lemma2_coeffs(chi_hat);
  out.rho = lower.rho;
  out.delta = lower.delta;
  double g_point = chi_hat;
  if (g_point < g_bound_threshold()) {
    g_point = g_bound_threshold();
    out.clamped = true;
  }
  const LogUpperCoeffs upper = lemma3_coeffs(g_point);
  out.rho_tilde = upper.rho_tilde;
  out.delta_tilde = upper.delta_tilde;
  return out;
}

namespace {

const std::vector<int>& checked_set(const LargeScaleModel& model, int k) {
  const auto& set = model.service_sets.at(k);
  if (set.empty()) throw DomainError("device has an empty AP service set");
  return set;
}

// Per-m log terms ln(beta_m^2 prod_{n != m}(K beta_n p + 1)) and the ratios
// r_n = K beta_n p / (K beta_n p + 1) that form their log-derivatives.
struct ThetaTerms {
  std::vector<double> log_terms;
  std::vector<double> ratio;
  double ratio_sum = 0.0;
};

ThetaTerms theta_terms(const LargeScaleModel& model, double pilot, int k, double beta_power) {
  const auto& set = checked_set(model, k);
  const double kp = model.num_devices() * pilot;
  ThetaTerms t;
  double log_total = 0.0;
  std::vector<double> log_factor;
  for (int n : set) {
    const double x = kp * model.beta(n, k);
    log_factor.push_back(std::log1p(x));
    log_total += log_factor.back();
    t.ratio.push_back(x / (1.0 + x));
    t.ratio_sum += t.ratio.back();
  }
  for (std::size_t i = 0; i < set.size(); ++i) {
    t.log_terms.push_back(beta_power * std::log(model.beta(set[i], k)) + log_total - log_factor[i]);
  }
  return t;
}

// sum_m w_m sum_{n != m} r_n with softmax weights w over the log terms
double weighted_ratio(const ThetaTerms& t) {
  const double lse = log_sum_exp(t.log_terms);
  double acc = 0.0;
  for (std::size_t i = 0; i < t.log_terms.size(); ++i) {
    acc += std::exp(t.log_terms[i] - lse) * (t.ratio_sum - t.ratio[i]);
  }
  return acc;
}

}  // namespace

double log_theta(const LargeScaleModel& model, double pilot_k, int k) {
  if (!(pilot_k > 0.0)) throw DomainError("log_theta: pilot must be positive", 0.0);
  const ThetaTerms t = theta_terms(model, pilot_k, k, 2.0);
  return std::log(model.num_devices() * pilot_k) + log_sum_exp(t.log_terms);
}

double log_fzf_numerator(const LargeScaleModel& model, std::span<const double> pilot, int k) {
  const int K = model.num_devices();
  const auto& set = checked_set(model, k);
  double total = 0.0;
  for (int j = 0; j < K; ++j) {
    if (!(pilot[j] > 0.0)) throw DomainError("log_fzf_numerator: pilots must be positive", 0.0);
    if (j == k) continue;
    for (int m : set) total += std::log1p(K * pilot[j] * model.beta(m, j));
  }
  // varpi^2 = K p_k (sum_m beta_m prod_{n != m} sqrt(K p_k beta_n + 1))^2
  std::vector<double> half(set.size());
  const double log_total_k = [&] {
    double s = 0.0;
    for (int m : set) s += std::log1p(K * pilot[k] * model.beta(m, k));
    return s;
  }();
  for (std::size_t i = 0; i < set.size(); ++i) {
    // ln beta_m + 0.5 (log_total - log_factor_m)
    const double log_factor = std::log1p(K * pilot[k] * model.beta(set[i], k));
    half[i] = std::log(model.beta(set[i], k)) + 0.5 * (log_total_k - log_factor);
  }
  return total + std::log(K * pilot[k]) + 2.0 * log_sum_exp(half);
}

MonomialApproxMrc theorem3_coeffs(const LargeScaleModel& model, double pilot_hat_k, int k) {
  if (!(pilot_hat_k > 0.0)) throw DomainError("theorem3_coeffs: pilot must be positive", 0.0);
  const ThetaTerms t = theta_terms(model, pilot_hat_k, k, 2.0);
  MonomialApproxMrc out;
  out.a = 1.0 + weighted_ratio(t);
  const double log_theta_hat = std::log(model.num_devices() * pilot_hat_k) + log_sum_exp(t.log_terms);
  out.c = log_theta_hat - out.a * std::log(pilot_hat_k);
  return out;
}

MonomialApproxFzf theorem4_coeffs(const LargeScaleModel& model, std::span<const double> pilot_hat,
                                  int k) {
  const int K = model.num_devices();
  if (static_cast<int>(pilot_hat.size()) != K) throw DomainError("theorem4_coeffs: wrong length");
  const auto& set = checked_set(model, k);
  MonomialApproxFzf out;
  out.b.assign(K, 0.0);
  for (int j = 0; j < K; ++j) {
    if (!(pilot_hat[j] > 0.0)) throw DomainError("theorem4_coeffs: pilots must be positive", 0.0);
    if (j == k) continue;
    double s = 0.0;
    for (int m : set) {
      const double x = K * pilot_hat[j] * model.beta(m, j);
      s += x / (1.0 + x);
    }
    out.b[j] = s;
  }
  // varpi terms: ln beta_m + 0.5 sum_{n != m} ln(1 + K p beta_n); derivative
  // of 2 ln varpi w.r.t. ln p_k is 1 + sum_m w_m sum_{n != m} r_n
  ThetaTerms t = theta_terms(model, pilot_hat[k], k, 1.0);
  for (std::size_t i = 0; i < t.log_terms.size(); ++i) {
    const double log_b = std::log(model.beta(set[i], k));
    t.log_terms[i] = log_b + 0.5 * (t.log_terms[i] - log_b);
  }
  out.b[k] = 1.0 + weighted_ratio(t);

  double dot = 0.0;
  for (int j = 0; j < K; ++j) dot += out.b[j] * std::log(pilot_hat[j]);
  out.d = log_fzf_numerator(model, pilot_hat, k) - dot;
  return out;
}

}  // namespace cfurllc
