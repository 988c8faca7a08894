#pragma once

// Reference formulas written directly from the closed forms, without going
// through the library, so tests compare two independent evaluations.

#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "cfurllc/rng.hpp"
#include "cfurllc/scenario.hpp"

namespace oracle {

inline double q(double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); }

// Q^-1 by plain bisection on Q.
inline double q_inverse(double eps) {
  double lo = 0.0, hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (q(mid) > eps ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

inline double f(double x, double alpha) {
  return std::log(1.0 + 1.0 / x) - alpha * std::sqrt((2.0 * x + 1.0) / ((x + 1.0) * (x + 1.0)));
}

inline double lambda(double K, double pp, double beta) {
  return K * pp * beta * beta / (K * pp * beta + 1.0);
}

// Single-device lower-bound SINRs over the APs listed in `aps`.
inline double sinr_mrc_single(const std::vector<double>& beta, double N, double pp, double pd) {
  double sl = 0.0, slb = 0.0;
  for (double b : beta) {
    const double l = lambda(1.0, pp, b);
    sl += l;
    slb += l * b;
  }
  return N * pd * sl * sl / (pd * slb + sl);
}

inline double sinr_fzf_single(const std::vector<double>& beta, double N, double pp, double pd) {
  double sq = 0.0, err = 0.0;
  for (double b : beta) {
    const double l = lambda(1.0, pp, b);
    sq += std::sqrt(l);
    err += b - l;
  }
  return pd * (N - 1.0) * sq * sq / (static_cast<double>(beta.size()) + pd * err);
}

// Best weighted rate w * R(pp, pd) with R >= r_req over a log grid in
// (pp, pd) restricted to the energy budget pp + (L - 1) pd <= E. Returns 0
// if no grid point meets the requirement.
inline double grid_best_single(const std::function<double(double, double)>& sinr, double E, int L,
                               double alpha, double scale, double r_req, double w, int points) {
  const double pp_max = E, pd_max = E / (L - 1);
  const double span = std::log(1e-5);
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    const double pp = pp_max * std::exp(span * (1.0 - static_cast<double>(i) / (points - 1)));
    for (int j = 0; j < points; ++j) {
      const double pd = pd_max * std::exp(span * (1.0 - static_cast<double>(j) / (points - 1)));
      if (pp + (L - 1) * pd > E * (1.0 + 1e-12)) continue;
      const double g = sinr(pp, pd);
      const double r = scale * f(1.0 / g, alpha);
      if (r >= r_req) best = std::max(best, w * r);
    }
  }
  return best;
}

// Random M x K gain matrix spanning a few decades.
inline Eigen::MatrixXd random_beta(cfurllc::CounterRng& rng, int M, int K, double lo = 1e-2,
                                   double hi = 1e2) {
  Eigen::MatrixXd b(M, K);
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) b(m, k) = std::exp(rng.uniform(std::log(lo), std::log(hi)));
  }
  return b;
}

}  // namespace oracle
