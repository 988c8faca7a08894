#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cfurllc/scenario.hpp"

namespace cfurllc {

// MMSE estimation statistics for orthogonal pilots of length K:
// lambda(m,k) = K p_k beta^2 / (K p_k beta + 1), err_var = beta - lambda.
struct EstimationStats {
  Eigen::MatrixXd lambda;
  Eigen::MatrixXd err_var;
};

EstimationStats estimation_stats(const LargeScaleModel& model, std::span<const double> pilot_power);

// One small-scale realization. Index [m] holds the N x K matrix of AP m.
struct ChannelRealization {
  std::vector<Eigen::MatrixXcd> g;
  std::vector<Eigen::MatrixXcd> g_hat;
  std::vector<Eigen::MatrixXcd> g_tilde;
};

// Draws g ~ CN(0, beta I_N), the de-spread pilot observation g + n^p with
// n^p ~ CN(0, I_N / (K p_k)), and the MMSE estimate. Every (AP, device) pair
// of trial `trial` uses its own Philox substream, so trials can be generated
// in any order or concurrently.
ChannelRealization draw_channel(const LargeScaleModel& model, std::span<const double> pilot_power,
                                std::uint64_t seed, std::uint64_t trial);

}  // namespace cfurllc
