#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "cfurllc/config.hpp"

namespace cfurllc {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Large-scale state of one deployment. beta is M x K and already divided by
// the noise power, so every SINR downstream sees unit noise.
struct LargeScaleModel {
  Eigen::MatrixXd beta;
  // Per device, AP indices sorted by descending beta.
  std::vector<std::vector<int>> service_sets;
  std::vector<Point> ap_positions;
  std::vector<Point> device_positions;
  std::vector<double> energy;
  std::vector<double> weights;
  int antennas_per_ap = 1;

  int num_aps() const { return static_cast<int>(beta.rows()); }
  int num_devices() const { return static_cast<int>(beta.cols()); }
};

// Three-slope path loss (dB) with breakpoints d0 < d1. Distances enter the
// log terms in kilometres.
double path_loss_db(double distance_m, const SystemConfig& cfg);
// Constant term of the three-slope model (Hata-style correction).
double path_loss_constant_db(const SystemConfig& cfg);

// Thermal noise power B k_B T0 10^(NF/10) in watts.
double noise_power_w(const SystemConfig& cfg);

// M APs on a sqrt(M) x sqrt(M) grid with half-spacing margins; M = 1 puts the
// single AP at the centre.
std::vector<Point> ap_grid(int num_aps, double side_m);

// Smallest prefix of the descending-sorted column whose sum reaches
// threshold * total.
std::vector<int> select_aps(std::span<const double> beta_col, double threshold);

// Draws device positions and weights from `seed`, computes noise-normalized
// beta and the service sets.
LargeScaleModel generate_topology(const SystemConfig& cfg, std::uint64_t seed);

// Builds a model around a given beta matrix (used by tests and by sweeps that
// re-threshold an existing deployment).
LargeScaleModel make_model(Eigen::MatrixXd beta, double threshold, int antennas_per_ap,
                           std::vector<double> energy, std::vector<double> weights);

// Recomputes service sets for a new threshold, keeping everything else.
LargeScaleModel with_threshold(LargeScaleModel model, double threshold);

}  // namespace cfurllc
