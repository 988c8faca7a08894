#include "cfurllc/fbl.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "cfurllc/errors.hpp"

namespace cfurllc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double dispersion(double gamma) {
  // 1 - (1 + gamma)^-2 without cancellation
  return gamma * (2.0 + gamma) / ((1.0 + gamma) * (1.0 + gamma));
}

double sum_over(const std::vector<int>& set, auto&& term) {
  double s = 0.0;
  for (int m : set) s += term(m);
  return s;
}

const std::vector<int>& service_set(const LargeScaleModel& model, int k) {
  const auto& set = model.service_sets.at(k);
  if (set.empty()) throw DomainError("device has an empty AP service set");
  return set;
}

void check_powers(const PowerAllocation& power, int K) {
  if (power.size() != K || static_cast<int>(power.payload.size()) != K) {
    throw DomainError("power allocation has wrong length");
  }
  for (int k = 0; k < K; ++k) {
    if (!(power.pilot[k] > 0.0) || !(power.payload[k] > 0.0)) {
      throw DomainError("powers must be positive", 0.0);
    }
  }
}

}  // namespace

double log_sum_exp(std::span<const double> values) {
  double hi = -kInf;
  for (double v : values) hi = std::max(hi, v);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double v : values) s += std::exp(v - hi);
  return hi + std::log(s);
}

double FblParams::rate_scale() const {
  return bandwidth_hz * (1.0 - eta) / std::numbers::ln2;
}

FblParams FblParams::from_config(const SystemConfig& cfg) {
  cfg.validate();
  FblParams p;
  p.eta = cfg.eta();
  p.bandwidth_hz = cfg.bandwidth_hz;
  p.blocklength = cfg.blocklength;
  const double denom = std::sqrt(cfg.blocklength * (1.0 - p.eta));
  for (int k = 0; k < cfg.num_devices; ++k) {
    p.alpha.push_back(q_inverse(cfg.dep_epsilon.at(k)) / denom);
  }
  return p;
}

FblParams FblParams::without_dispersion() const {
  FblParams p = *this;
  std::fill(p.alpha.begin(), p.alpha.end(), 0.0);
  return p;
}

double q_function(double x) { return 0.5 * std::erfc(x / std::numbers::sqrt2); }

double q_inverse(double eps) {
  if (!(eps > 0.0 && eps <= 0.5)) throw DomainError("q_inverse: eps must lie in (0, 0.5]", 0.5);
  if (eps == 0.5) return 0.0;
  double lo = 0.0;
  double hi = 1.0;
  while (q_function(hi) > eps) hi *= 2.0;
  double x = 0.5 * (lo + hi);
  for (int it = 0; it < 200; ++it) {
    const double q = q_function(x);
    if (q > eps) lo = x; else hi = x;
    const double pdf = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    double next = x + (q - eps) / pdf;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (std::abs(next - x) <= 1e-15 * std::max(1.0, x)) {
      x = next;
      break;
    }
    x = next;
  }
  return x;
}

double g_function(double x) {
  if (!(x > 0.0)) throw DomainError("g_function: x must be positive", 0.0);
  return (x + 1.0) * std::log1p(1.0 / x) / std::sqrt(2.0 * x + 1.0);
}

double f_domain_upper(double alpha) {
  if (alpha < 0.0) throw DomainError("alpha must be non-negative", 0.0);
  if (alpha == 0.0) return kInf;
  double lo = 1.0;
  double hi = 1.0;
  while (g_function(lo) < alpha) lo *= 0.5;
  while (g_function(hi) > alpha) hi *= 2.0;
  for (int it = 0; it < 200 && hi / lo > 1.0 + 1e-15; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (g_function(mid) > alpha) lo = mid; else hi = mid;
  }
  // lo satisfies g(lo) >= alpha, i.e. f(lo) >= 0
  return lo;
}

double f_value(double x, double alpha) {
  const double upper = f_domain_upper(alpha);
  if (!(x > 0.0) || x > upper * (1.0 + 1e-12)) {
    throw DomainError("f: x outside the feasible region (0, g^-1(alpha)]", upper);
  }
  return std::log1p(1.0 / x) - alpha * std::sqrt((2.0 * x + 1.0) / ((x + 1.0) * (x + 1.0)));
}

double f_k(double x, const FblParams& params, int k) { return f_value(x, params.alpha.at(k)); }

double f_k_inverse(double y, const FblParams& params, int k) {
  const double alpha = params.alpha.at(k);
  if (!std::isfinite(y) || y < 0.0) {
    throw InfeasibleError("f_k_inverse: target " + std::to_string(y) +
                          " is outside the range of f_k");
  }
  const double upper = f_domain_upper(alpha);
  const auto f = [&](double x) {
    return std::log1p(1.0 / x) - alpha * std::sqrt((2.0 * x + 1.0) / ((x + 1.0) * (x + 1.0)));
  };
  if (y == 0.0) {
    if (std::isinf(upper)) throw InfeasibleError("f_k_inverse: zero rate needs infinite x");
    return upper;
  }
  double hi = std::isinf(upper) ? 1.0 : upper;
  if (std::isinf(upper)) {
    while (f(hi) > y) hi *= 2.0;
  }
  double lo = std::min(1.0, 0.5 * hi);
  while (f(lo) < y) lo *= 0.5;
  for (int it = 0; it < 300 && hi / lo > 1.0 + 1e-15; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (f(mid) > y) lo = mid; else hi = mid;
  }
  return std::sqrt(lo * hi);
}

double fbl_rate(double gamma, const FblParams& params, int k) {
  if (!(gamma > 0.0)) throw DomainError("fbl_rate: SINR must be positive", 0.0);
  const double qinv = params.alpha.at(k) * std::sqrt(params.blocklength * (1.0 - params.eta));
  const double shannon = (1.0 - params.eta) * std::log2(1.0 + gamma);
  const double penalty = std::sqrt((1.0 - params.eta) * dispersion(gamma) / params.blocklength) *
                         qinv / std::numbers::ln2;
  return params.bandwidth_hz * (shannon - penalty);
}

double lb_rate(double gamma_lb, const FblParams& params, int k) {
  if (!(gamma_lb > 0.0)) return 0.0;
  const double alpha = params.alpha.at(k);
  const double x = 1.0 / gamma_lb;
  if (x > f_domain_upper(alpha)) return 0.0;
  const double f =
      std::log1p(1.0 / x) - alpha * std::sqrt((2.0 * x + 1.0) / ((x + 1.0) * (x + 1.0)));
  return params.rate_scale() * std::max(0.0, f);
}

double lb_sinr_mrc(const LargeScaleModel& model, const EstimationStats& stats,
                   const PowerAllocation& power, int k) {
  const int K = model.num_devices();
  check_powers(power, K);
  const auto& set = service_set(model, k);
  const double lam_sum = sum_over(set, [&](int m) { return stats.lambda(m, k); });
  double interference = 0.0;
  for (int kp = 0; kp < K; ++kp) {
    interference +=
        power.payload[kp] * sum_over(set, [&](int m) { return stats.lambda(m, k) * model.beta(m, kp); });
  }
  return model.antennas_per_ap * power.payload[k] * lam_sum * lam_sum / (interference + lam_sum);
}

double lb_sinr_fzf(const LargeScaleModel& model, const EstimationStats& stats,
                   const PowerAllocation& power, int k) {
  const int K = model.num_devices();
  const int N = model.antennas_per_ap;
  if (N <= K) throw ConfigError("FZF needs more antennas per AP than devices (N > K)");
  check_powers(power, K);
  const auto& set = service_set(model, k);
  const double sqrt_sum = sum_over(set, [&](int m) { return std::sqrt(stats.lambda(m, k)); });
  double interference = 0.0;
  for (int kp = 0; kp < K; ++kp) {
    interference += power.payload[kp] * sum_over(set, [&](int m) { return stats.err_var(m, kp); });
  }
  return power.payload[k] * (N - K) * sqrt_sum * sqrt_sum /
         (static_cast<double>(set.size()) + interference);
}

SinrBreakdownMrc mrc_breakdown(const LargeScaleModel& model, std::span<const double> pilot, int k) {
  const int K = model.num_devices();
  if (static_cast<int>(pilot.size()) != K || !(pilot[k] > 0.0)) {
    throw DomainError("mrc_breakdown: pilot powers must be positive", 0.0);
  }
  const auto& set = service_set(model, k);
  const double kp = K * pilot[k];

  // ln(K p beta_n + 1) for each n in the set; sums over n != m reuse the total
  std::vector<double> log_factor;
  double log_sigma = 0.0;
  for (int n : set) {
    log_factor.push_back(std::log1p(kp * model.beta(n, k)));
    log_sigma += log_factor.back();
  }

  SinrBreakdownMrc out;
  out.log_sigma = log_sigma;
  std::vector<double> terms;
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double b = model.beta(set[i], k);
    terms.push_back(std::log(kp) + 2.0 * std::log(b) + (log_sigma - log_factor[i]));
  }
  out.log_theta = log_sum_exp(terms);

  out.log_xi.resize(K);
  std::vector<double> xi_terms(set.size());
  for (int other = 0; other < K; ++other) {
    for (std::size_t i = 0; i < set.size(); ++i) {
      xi_terms[i] = terms[i] + std::log(model.beta(set[i], other));
    }
    out.log_xi[other] = log_sum_exp(xi_terms);
  }
  return out;
}

SinrBreakdownFzf fzf_breakdown(const LargeScaleModel& model, std::span<const double> pilot, int k) {
  const int K = model.num_devices();
  if (static_cast<int>(pilot.size()) != K) throw DomainError("fzf_breakdown: wrong pilot length");
  for (double p : pilot) {
    if (!(p > 0.0)) throw DomainError("fzf_breakdown: pilot powers must be positive", 0.0);
  }
  const auto& set = service_set(model, k);

  SinrBreakdownFzf out;
  out.log_vartheta.resize(K);
  out.log_mu.resize(K);
  std::vector<double> log_factor(set.size());
  std::vector<double> terms(set.size());
  for (int other = 0; other < K; ++other) {
    const double kp = K * pilot[other];
    double total = 0.0;
    for (std::size_t i = 0; i < set.size(); ++i) {
      log_factor[i] = std::log1p(kp * model.beta(set[i], other));
      total += log_factor[i];
    }
    out.log_vartheta[other] = 0.5 * total;
    for (std::size_t i = 0; i < set.size(); ++i) {
      terms[i] = std::log(model.beta(set[i], other)) + (total - log_factor[i]);
    }
    out.log_mu[other] = log_sum_exp(terms);

    if (other == k) {
      for (std::size_t i = 0; i < set.size(); ++i) {
        const double b = model.beta(set[i], k);
        terms[i] = 0.5 * (std::log(kp) + 2.0 * std::log(b)) + 0.5 * (total - log_factor[i]);
      }
      out.log_varpi = log_sum_exp(terms);
    }
  }
  return out;
}

double sinr_from_breakdown(const SinrBreakdownMrc& b, std::span<const double> payload,
                           int num_antennas, int k) {
  std::vector<double> den_terms;
  for (std::size_t other = 0; other < payload.size(); ++other) {
    den_terms.push_back(std::log(payload[other]) + b.log_xi[other]);
  }
  den_terms.push_back(b.log_theta);
  const double log_num = std::log(num_antennas) + std::log(payload[k]) + 2.0 * b.log_theta;
  const double log_den = b.log_sigma + log_sum_exp(den_terms);
  return std::exp(log_num - log_den);
}

double sinr_from_breakdown(const SinrBreakdownFzf& b, std::span<const double> payload,
                           int num_antennas, int service_set_size, int k) {
  const int K = static_cast<int>(payload.size());
  double log_all = 0.0;  // ln prod_{k'} vartheta^2
  for (double v : b.log_vartheta) log_all += 2.0 * v;
  const double log_num = std::log(payload[k]) + std::log(num_antennas - K) + 2.0 * b.log_varpi +
                         (log_all - 2.0 * b.log_vartheta[k]);
  std::vector<double> den_terms;
  den_terms.push_back(std::log(service_set_size) + log_all);
  for (int other = 0; other < K; ++other) {
    den_terms.push_back(std::log(payload[other]) + b.log_mu[other] +
                        (log_all - 2.0 * b.log_vartheta[other]));
  }
  return std::exp(log_num - log_sum_exp(den_terms));
}

}  // namespace cfurllc
