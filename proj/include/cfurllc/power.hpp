#pragma once

#include <vector>

namespace cfurllc {

// Pilot and payload powers per device (watts; noise-normalized model).
struct PowerAllocation {
  std::vector<double> pilot;
  std::vector<double> payload;

  int size() const { return static_cast<int>(pilot.size()); }

  static PowerAllocation uniform(int num_devices, double pilot_w, double payload_w) {
    return {std::vector<double>(num_devices, pilot_w), std::vector<double>(num_devices, payload_w)};
  }
};

}  // namespace cfurllc
