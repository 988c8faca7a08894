#include "cfurllc/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "cfurllc/errors.hpp"

namespace cfurllc {

namespace {

constexpr int kMaxRedraws = 3;

// Redraws of a rank-deficient trial use disjoint high stream bits.
std::uint64_t redraw_stream(std::uint64_t trial, int redraw) {
  return trial | (static_cast<std::uint64_t>(redraw) << 48);
}

}  // namespace

double TermSample::sinr() const {
  double den = ls + noise;
  for (double v : ui) den += v;
  return ds / den;
}

TermSample decode_mrc(const LargeScaleModel& model, const ChannelRealization& channel,
                      const EstimationStats& stats, const PowerAllocation& power,
                      int k) {
  const int K = model.num_devices();
  const double N = model.antennas_per_ap;
  TermSample s;
  s.ui.assign(K, 0.0);
  double lam_sum = 0.0;
  std::complex<double> own(0.0);
  double noise_power = 0.0;
  std::vector<std::complex<double>> cross(K, 0.0);
  for (int m : model.service_sets.at(k)) {
    const auto a = channel.g_hat[m].col(k);
    lam_sum += stats.lambda(m, k);
    own += a.dot(channel.g[m].col(k));
    noise_power += a.squaredNorm();
    for (int j = 0; j < K; ++j) {
      if (j != k) cross[j] += a.dot(channel.g[m].col(j));
    }
  }
  const double ds = std::sqrt(power.payload[k]) * N * lam_sum;
  s.ds = ds * ds;
  s.ls = power.payload[k] * std::norm(own - N * lam_sum);
  s.noise = noise_power;
  for (int j = 0; j < K; ++j) {
    if (j != k) s.ui[j] = power.payload[j] * std::norm(cross[j]);
  }
  return s;
}

std::optional<std::vector<Eigen::MatrixXcd>> zero_forcing_filters(const ChannelRealization& channel) {
  std::vector<Eigen::MatrixXcd> out;
  for (const Eigen::MatrixXcd& gh : channel.g_hat) {
    // G (G^H G)^-1 = Q R^-H with G = QR; avoids squaring the condition number
    const Eigen::HouseholderQR<Eigen::MatrixXcd> qr(gh);
    const Eigen::Index K = gh.cols();
    const Eigen::MatrixXcd r = qr.matrixQR().topRows(K).triangularView<Eigen::Upper>();
    const Eigen::VectorXd d = r.diagonal().cwiseAbs();
    if (d.minCoeff() <= 1e-10 * d.maxCoeff()) return std::nullopt;
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(gh.rows(), K);
    const Eigen::MatrixXcd r_inv_h = r.adjoint().triangularView<Eigen::Lower>().solve(
        Eigen::MatrixXcd::Identity(K, K));
    out.push_back(q * r_inv_h);
  }
  return out;
}

TermSample decode_fzf(const LargeScaleModel& model, const ChannelRealization& channel,
                      const std::vector<Eigen::MatrixXcd>& filters, const EstimationStats& stats,
                      const PowerAllocation& power,
                      int k, FzfNormalization norm) {
  const int K = model.num_devices();
  const int N = model.antennas_per_ap;
  if (N <= K) throw ConfigError("FZF needs more antennas per AP than devices (N > K)");
  TermSample s;
  s.ui.assign(K, 0.0);
  std::complex<double> mean_part(0.0), leak(0.0);
  double noise_power = 0.0;
  std::vector<std::complex<double>> cross(K, 0.0);
  for (int m : model.service_sets.at(k)) {
    Eigen::VectorXcd a = filters[m].col(k);
    if (norm == FzfNormalization::kAnalytic) {
      a *= std::sqrt((N - K) * stats.lambda(m, k));
    } else {
      a /= a.norm();
    }
    mean_part += a.dot(channel.g_hat[m].col(k));
    leak += a.dot(channel.g_tilde[m].col(k));
    noise_power += a.squaredNorm();
    for (int j = 0; j < K; ++j) {
      if (j != k) cross[j] += a.dot(channel.g[m].col(j));
    }
  }
  // With the analytic scaling a^H g_hat_k is the deterministic
  // sqrt((N - K) lambda) per AP, so this equals the expectation.
  s.ds = power.payload[k] * std::norm(mean_part);
  s.ls = power.payload[k] * std::norm(leak);
  s.noise = noise_power;
  for (int j = 0; j < K; ++j) {
    if (j != k) s.ui[j] = power.payload[j] * std::norm(cross[j]);
  }
  return s;
}

namespace {

struct TrialSlot {
  bool ok = false;
  std::vector<double> rate, inv_sinr, ds, ls, noise;
  std::vector<std::vector<double>> ui;
};

TrialSlot run_trial(const LargeScaleModel& model, const FblParams& fbl, const EstimationStats& stats,
                    const PowerAllocation& power, Decoder decoder, std::uint64_t seed,
                    std::uint64_t trial, FzfNormalization norm) {
  const int K = model.num_devices();
  TrialSlot slot;
  for (int redraw = 0; redraw <= kMaxRedraws; ++redraw) {
    const std::uint64_t stream = redraw_stream(trial, redraw);
    const ChannelRealization ch = draw_channel(model, power.pilot, seed, stream);
    std::optional<std::vector<Eigen::MatrixXcd>> filters;
    if (decoder == Decoder::kFzf) {
      filters = zero_forcing_filters(ch);
      if (!filters) continue;
    }
    for (int k = 0; k < K; ++k) {
      const TermSample t = decoder == Decoder::kMrc
                               ? decode_mrc(model, ch, stats, power, k)
                               : decode_fzf(model, ch, *filters, stats, power, k, norm);
      const double gamma = t.sinr();
      slot.rate.push_back(gamma > 0.0 ? std::max(0.0, fbl_rate(gamma, fbl, k)) : 0.0);
      slot.inv_sinr.push_back(1.0 / gamma);
      slot.ds.push_back(t.ds);
      slot.ls.push_back(t.ls);
      slot.noise.push_back(t.noise);
      slot.ui.push_back(t.ui);
    }
    slot.ok = true;
    return slot;
  }
  return slot;
}

// Welford running mean and variance; stable for nearly constant samples.
class Accumulator {
 public:
  void add(double v) {
    ++n_;
    const double delta = v - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (v - mean_);
  }
  Estimate finish() const {
    Estimate e;
    if (n_ == 0) return e;
    e.mean = mean_;
    if (n_ > 1) e.std_error = std::sqrt(std::max(0.0, m2_ / (n_ - 1)) / n_);
    return e;
  }

 private:
  double mean_ = 0.0;
  double m2_ = 0.0;
  long n_ = 0;
};

}  // namespace

McResult run_monte_carlo(const LargeScaleModel& model, const FblParams& fbl,
                         const PowerAllocation& power, Decoder decoder, std::uint64_t seed,
                         const McOptions& options) {
  if (options.trials < 1) throw ConfigError("trials must be positive");
  if (decoder == Decoder::kFzf && model.antennas_per_ap <= model.num_devices()) {
    throw ConfigError("FZF needs more antennas per AP than devices (N > K)");
  }
  const int K = model.num_devices();
  const EstimationStats stats = estimation_stats(model, power.pilot);

  std::vector<TrialSlot> slots(options.trials);
  const int threads = std::clamp(options.threads, 1, options.trials);
  const auto worker = [&](int first) {
    for (int t = first; t < options.trials; t += threads) {
      slots[t] = run_trial(model, fbl, stats, power, decoder, seed, static_cast<std::uint64_t>(t),
                           options.fzf_normalization);
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < threads; ++i) pool.emplace_back(worker, i);
    for (auto& th : pool) th.join();
  }

  // reduction in trial order, independent of the thread schedule
  std::vector<Accumulator> rate(K), inv(K), ds(K), ls(K), nz(K);
  std::vector<std::vector<Accumulator>> ui(K, std::vector<Accumulator>(K));
  McResult res;
  for (const TrialSlot& s : slots) {
    if (!s.ok) {
      ++res.trials_failed;
      continue;
    }
    ++res.trials_used;
    for (int k = 0; k < K; ++k) {
      rate[k].add(s.rate[k]);
      inv[k].add(s.inv_sinr[k]);
      ds[k].add(s.ds[k]);
      ls[k].add(s.ls[k]);
      nz[k].add(s.noise[k]);
      for (int j = 0; j < K; ++j) ui[k][j].add(s.ui[k][j]);
    }
  }
  for (int k = 0; k < K; ++k) {
    res.rate.push_back(rate[k].finish());
    res.inv_sinr.push_back(inv[k].finish());
    res.ds.push_back(ds[k].finish());
    res.ls.push_back(ls[k].finish());
    res.noise.push_back(nz[k].finish());
    std::vector<Estimate> row;
    for (int j = 0; j < K; ++j) row.push_back(ui[k][j].finish());
    res.ui.push_back(std::move(row));
  }
  return res;
}

std::vector<Estimate> ergodic_rate(const LargeScaleModel& model, const FblParams& fbl,
                                   const PowerAllocation& power, Decoder decoder,
                                   std::uint64_t seed, const McOptions& options) {
  return run_monte_carlo(model, fbl, power, decoder, seed, options).rate;
}

}  // namespace cfurllc
