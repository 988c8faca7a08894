#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "cfurllc/channel.hpp"
#include "cfurllc/fbl.hpp"
#include "cfurllc/optimizer.hpp"
#include "cfurllc/power.hpp"
#include "cfurllc/scenario.hpp"

namespace cfurllc {

// Squared magnitudes of the four signal terms seen by one device in one
// trial. ui[k'] is the interference from device k' (ui[k] is zero).
struct TermSample {
  double ds = 0.0;
  double ls = 0.0;
  double noise = 0.0;  // noise power given the combiner
  std::vector<double> ui;

  double sinr() const;
};

// Per-trial outcome for every device.
struct TrialOutcome {
  std::vector<double> sinr;
  std::vector<double> rate;  // bit/s, clamped at 0
  std::vector<TermSample> terms;
};

// How the zero-forcing combiner is scaled: by the expected norm used in the
// closed-form analysis, or to unit norm in every realization.
enum class FzfNormalization { kAnalytic, kPerRealization };

TermSample decode_mrc(const LargeScaleModel& model, const ChannelRealization& channel,
                      const EstimationStats& stats, const PowerAllocation& power,
                      int k);

// G_hat (G_hat^H G_hat)^-1 per AP; nullopt if some estimate is rank deficient.
std::optional<std::vector<Eigen::MatrixXcd>> zero_forcing_filters(const ChannelRealization& channel);

TermSample decode_fzf(const LargeScaleModel& model, const ChannelRealization& channel,
                      const std::vector<Eigen::MatrixXcd>& filters, const EstimationStats& stats,
                      const PowerAllocation& power,
                      int k, FzfNormalization norm = FzfNormalization::kAnalytic);

struct Estimate {
  double mean = 0.0;
  double std_error = 0.0;
  double half_width() const { return 1.96 * std_error; }  // 95 % normal CI
};

struct McOptions {
  int trials = 1000;
  int threads = 1;
  FzfNormalization fzf_normalization = FzfNormalization::kAnalytic;
};

struct McResult {
  std::vector<Estimate> rate;       // per device, bit/s
  std::vector<Estimate> inv_sinr;   // per device, E[1 / gamma]
  std::vector<Estimate> ds, ls, noise;
  std::vector<std::vector<Estimate>> ui;  // [k][k']
  int trials_used = 0;
  int trials_failed = 0;
};

// Runs `trials` independent channel realizations. Results are bitwise
// identical for any thread count.
McResult run_monte_carlo(const LargeScaleModel& model, const FblParams& fbl,
                         const PowerAllocation& power, Decoder decoder, std::uint64_t seed,
                         const McOptions& options = {});

std::vector<Estimate> ergodic_rate(const LargeScaleModel& model, const FblParams& fbl,
                                   const PowerAllocation& power, Decoder decoder,
                                   std::uint64_t seed, const McOptions& options = {});

}  // namespace cfurllc
