#include "cfurllc/channel.hpp"

#include <cmath>

#include "cfurllc/errors.hpp"
#include "cfurllc/rng.hpp"

namespace cfurllc {

namespace {
void check_pilots(const LargeScaleModel& model, std::span<const double> pilot_power) {
  if (static_cast<int>(pilot_power.size()) != model.num_devices()) {
    throw DomainError("pilot power vector has wrong length");
  }
  for (double p : pilot_power) {
    if (!(p > 0.0)) throw DomainError("pilot power must be positive", 0.0);
  }
}
}  // namespace

EstimationStats estimation_stats(const LargeScaleModel& model, std::span<const double> pilot_power) {
  check_pilots(model, pilot_power);
  const int M = model.num_aps();
  const int K = model.num_devices();
  EstimationStats stats;
  stats.lambda.resize(M, K);
  stats.err_var.resize(M, K);
  for (int k = 0; k < K; ++k) {
    const double kp = K * pilot_power[k];
    for (int m = 0; m < M; ++m) {
      const double b = model.beta(m, k);
      const double lam = kp * b * b / (kp * b + 1.0);
      stats.lambda(m, k) = lam;
      // beta - lambda, written without cancellation
      stats.err_var(m, k) = b / (kp * b + 1.0);
    }
  }
  return stats;
}

ChannelRealization draw_channel(const LargeScaleModel& model, std::span<const double> pilot_power,
                                std::uint64_t seed, std::uint64_t trial) {
  check_pilots(model, pilot_power);
  const int M = model.num_aps();
  const int K = model.num_devices();
  const int N = model.antennas_per_ap;

  ChannelRealization out;
  out.g.reserve(M);
  out.g_hat.reserve(M);
  out.g_tilde.reserve(M);
  for (int m = 0; m < M; ++m) {
    Eigen::MatrixXcd g(N, K), g_hat(N, K);
    for (int k = 0; k < K; ++k) {
      const double b = model.beta(m, k);
      const double kp = K * pilot_power[k];
      const double shrink = kp * b / (kp * b + 1.0);
      CounterRng fading(seed, trial, substream_id(StreamTag::kChannel, m, k));
      CounterRng pilot_noise(seed, trial, substream_id(StreamTag::kPilotNoise, m, k));
      for (int n = 0; n < N; ++n) {
        const std::complex<double> gv = fading.complex_normal(b);
        const std::complex<double> np = pilot_noise.complex_normal(1.0 / kp);
        g(n, k) = gv;
        g_hat(n, k) = shrink * (gv + np);
      }
    }
    out.g_tilde.push_back(g - g_hat);
    out.g.push_back(std::move(g));
    out.g_hat.push_back(std::move(g_hat));
  }
  return out;
}

}  // namespace cfurllc
