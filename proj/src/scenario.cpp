#include "cfurllc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cfurllc/errors.hpp"
#include "cfurllc/rng.hpp"

namespace cfurllc {

namespace {
constexpr double kBoltzmann = 1.381e-23;
constexpr double kNoiseTemperatureK = 290.0;
}  // namespace

double path_loss_constant_db(const SystemConfig& cfg) {
  const double lf = std::log10(cfg.carrier_freq_mhz);
  return 46.3 + 33.9 * lf - 13.82 * std::log10(cfg.ap_height_m) -
         (1.1 * lf - 0.7) * cfg.device_height_m + (1.56 * lf - 0.8);
}

double path_loss_db(double distance_m, const SystemConfig& cfg) {
  if (!(distance_m > 0.0)) throw DomainError("path_loss_db: distance must be positive", 0.0);
  const double d = distance_m / 1000.0;
  const double d0 = cfg.breakpoint_d0_m / 1000.0;
  const double d1 = cfg.breakpoint_d1_m / 1000.0;
  const double base = path_loss_constant_db(cfg);
  if (d > d1) return base + 35.0 * std::log10(d);
  if (d <= d0) return base + 15.0 * std::log10(d1) + 20.0 * std::log10(d0);
  return base + 15.0 * std::log10(d1) + 20.0 * std::log10(d);
}

double noise_power_w(const SystemConfig& cfg) {
  return cfg.bandwidth_hz * kBoltzmann * kNoiseTemperatureK *
         std::pow(10.0, cfg.noise_figure_db / 10.0);
}

std::vector<Point> ap_grid(int num_aps, double side_m) {
  const int per_side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(num_aps))));
  if (num_aps <= 0 || per_side * per_side != num_aps) {
    throw ConfigError("num_aps must be a perfect square (grid constellation), got " +
                      std::to_string(num_aps));
  }
  const double spacing = side_m / per_side;
  std::vector<Point> out;
  out.reserve(num_aps);
  for (int row = 0; row < per_side; ++row) {
    for (int col = 0; col < per_side; ++col) {
      out.push_back({spacing * (col + 0.5), spacing * (row + 0.5)});
    }
  }
  return out;
}

std::vector<int> select_aps(std::span<const double> beta_col, double threshold) {
  if (beta_col.empty()) throw DomainError("select_aps: empty beta column");
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw DomainError("select_aps: threshold must lie in (0, 1]", threshold);
  }
  std::vector<int> order(beta_col.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return beta_col[a] > beta_col[b]; });
  if (threshold >= 1.0) return order;

  const double total = std::accumulate(beta_col.begin(), beta_col.end(), 0.0);
  double cumulative = 0.0;
  std::vector<int> chosen;
  for (int m : order) {
    chosen.push_back(m);
    cumulative += beta_col[m];
    if (cumulative >= threshold * total) break;
  }
  return chosen;
}

LargeScaleModel make_model(Eigen::MatrixXd beta, double threshold, int antennas_per_ap,
                           std::vector<double> energy, std::vector<double> weights) {
  LargeScaleModel model;
  model.beta = std::move(beta);
  model.antennas_per_ap = antennas_per_ap;
  model.energy = std::move(energy);
  model.weights = std::move(weights);
  if (static_cast<int>(model.energy.size()) != model.num_devices() ||
      static_cast<int>(model.weights.size()) != model.num_devices()) {
    throw ConfigError("make_model: energy/weights size must equal the number of devices");
  }
  return with_threshold(std::move(model), threshold);
}

LargeScaleModel with_threshold(LargeScaleModel model, double threshold) {
  model.service_sets.clear();
  for (int k = 0; k < model.num_devices(); ++k) {
    const Eigen::VectorXd col = model.beta.col(k);
    model.service_sets.push_back(select_aps({col.data(), static_cast<std::size_t>(col.size())},
                                            threshold));
  }
  return model;
}

LargeScaleModel generate_topology(const SystemConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const int M = cfg.num_aps;
  const int K = cfg.num_devices;

  LargeScaleModel model;
  model.antennas_per_ap = cfg.antennas_per_ap;
  model.ap_positions = ap_grid(M, cfg.area_side_m);

  CounterRng rng(seed, 0, substream_id(StreamTag::kTopology, 0));
  for (int k = 0; k < K; ++k) {
    const double x = rng.uniform(0.0, cfg.area_side_m);
    const double y = rng.uniform(0.0, cfg.area_side_m);
    model.device_positions.push_back({x, y});
  }
  CounterRng weight_rng(seed, 0, substream_id(StreamTag::kTopology, 1));
  for (int k = 0; k < K; ++k) {
    model.weights.push_back(cfg.weights.empty() ? weight_rng.uniform() : cfg.weights.at(k));
    model.energy.push_back(cfg.energy_budget.at(k));
  }

  const double pn = noise_power_w(cfg);
  model.beta.resize(M, K);
  for (int m = 0; m < M; ++m) {
    for (int k = 0; k < K; ++k) {
      const double dx = model.ap_positions[m].x - model.device_positions[k].x;
      const double dy = model.ap_positions[m].y - model.device_positions[k].y;
      const double d = std::max(std::hypot(dx, dy), cfg.min_distance_m);
      model.beta(m, k) = std::pow(10.0, -path_loss_db(d, cfg) / 10.0) / pn;
    }
  }
  return with_threshold(std::move(model), cfg.ap_select_threshold);
}

}  // namespace cfurllc
