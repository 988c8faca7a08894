#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace cfurllc {

// Per-device parameter: either a single value broadcast to all devices or
// one value per device.
struct PerDevice {
  std::vector<double> values;

  PerDevice() = default;
  PerDevice(double v) : values{v} {}  // NOLINT(google-explicit-constructor)
  PerDevice(std::vector<double> v) : values(std::move(v)) {}  // NOLINT

  double at(int k) const { return values.size() == 1 ? values.front() : values.at(k); }
  bool empty() const { return values.empty(); }
  bool fits(int num_devices) const {
    return values.size() == 1 || static_cast<int>(values.size()) == num_devices;
  }
};

// All scalar parameters of a deployment plus solver tolerances and seeds.
// Defaults are the factory scenario: 10 MHz, L = 1000, 2.1 GHz carrier,
// 15 m AP height, 1.6 m device height, 9 dB noise figure, 5 Mbps at 1e-5 DEP.
struct SystemConfig {
  double bandwidth_hz = 10e6;
  int blocklength = 1000;
  int num_devices = 10;
  int num_aps = 1;
  int antennas_per_ap = 144;
  double carrier_freq_mhz = 2100.0;
  double ap_height_m = 15.0;
  double device_height_m = 1.6;
  double noise_figure_db = 9.0;
  double area_side_m = 1000.0;
  double breakpoint_d0_m = 10.0;
  double breakpoint_d1_m = 50.0;
  double min_distance_m = 1.0;

  PerDevice dep_epsilon{1e-5};
  PerDevice rate_req_bps{5e6};
  PerDevice energy_budget{100.0};  // 20 dB, in W x symbols
  PerDevice weights;               // empty: drawn uniformly in [0,1] per deployment

  double ap_select_threshold = 0.9;
  std::uint64_t master_seed = 1;
  double gp_tolerance = 1e-9;
  double sca_tolerance = 0.01;
  int sca_max_iterations = 50;

  // Pilot length equals K (orthogonal pilots).
  int pilot_length() const { return num_devices; }
  double eta() const { return static_cast<double>(num_devices) / blocklength; }

  // Throws ConfigError on any violated invariant.
  void validate() const;
  // Same as validate() but also requires N > K (zero-forcing).
  void validate_for_zero_forcing() const;

  // Canonical "key = value" text; parse_config(to_text()) round-trips.
  std::string to_text() const;
  // FNV-1a 64 of to_text(), rendered as 16 hex digits.
  std::string hash() const;
};

// Parses the plain-text key/value format (one key per line, '#' comments,
// per-device values as comma-separated lists). Unset keys keep the defaults
// of `base`. Errors carry the offending line number.
SystemConfig parse_config(std::istream& in, SystemConfig base = {});
SystemConfig load_config(const std::string& path, SystemConfig base = {});

double db_to_linear(double db);

}  // namespace cfurllc
