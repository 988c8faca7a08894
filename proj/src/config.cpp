#include "cfurllc/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <sstream>

#include "cfurllc/errors.hpp"

namespace cfurllc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("not a number: '" + t + "'");
  }
  return v;
}

std::int64_t to_int(const std::string& text) {
  const std::string t = trim(text);
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("not an integer: '" + t + "'");
  }
  return v;
}

std::uint64_t to_u64(const std::string& text) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc{} || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("not an unsigned integer: '" + t + "'");
  }
  return v;
}

PerDevice to_list(const std::string& text) {
  PerDevice out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.values.push_back(to_double(item));
  if (out.values.empty()) throw ConfigError("empty list");
  return out;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt(const PerDevice& p) {
  std::string s;
  for (std::size_t i = 0; i < p.values.size(); ++i) {
    if (i) s += ",";
    s += fmt(p.values[i]);
  }
  return s;
}

using Setter = std::function<void(SystemConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"bandwidth_hz", [](SystemConfig& c, const std::string& v) { c.bandwidth_hz = to_double(v); }},
      {"blocklength", [](SystemConfig& c, const std::string& v) { c.blocklength = static_cast<int>(to_int(v)); }},
      {"num_devices", [](SystemConfig& c, const std::string& v) { c.num_devices = static_cast<int>(to_int(v)); }},
      {"num_aps", [](SystemConfig& c, const std::string& v) { c.num_aps = static_cast<int>(to_int(v)); }},
      {"antennas_per_ap", [](SystemConfig& c, const std::string& v) { c.antennas_per_ap = static_cast<int>(to_int(v)); }},
      {"carrier_freq_mhz", [](SystemConfig& c, const std::string& v) { c.carrier_freq_mhz = to_double(v); }},
      {"ap_height_m", [](SystemConfig& c, const std::string& v) { c.ap_height_m = to_double(v); }},
      {"device_height_m", [](SystemConfig& c, const std::string& v) { c.device_height_m = to_double(v); }},
      {"noise_figure_db", [](SystemConfig& c, const std::string& v) { c.noise_figure_db = to_double(v); }},
      {"area_side_m", [](SystemConfig& c, const std::string& v) { c.area_side_m = to_double(v); }},
      {"breakpoint_d0_m", [](SystemConfig& c, const std::string& v) { c.breakpoint_d0_m = to_double(v); }},
      {"breakpoint_d1_m", [](SystemConfig& c, const std::string& v) { c.breakpoint_d1_m = to_double(v); }},
      {"min_distance_m", [](SystemConfig& c, const std::string& v) { c.min_distance_m = to_double(v); }},
      {"dep_epsilon", [](SystemConfig& c, const std::string& v) { c.dep_epsilon = to_list(v); }},
      {"rate_req_bps", [](SystemConfig& c, const std::string& v) { c.rate_req_bps = to_list(v); }},
      {"energy_budget", [](SystemConfig& c, const std::string& v) { c.energy_budget = to_list(v); }},
      {"energy_budget_db",
       [](SystemConfig& c, const std::string& v) {
         PerDevice p = to_list(v);
         for (double& x : p.values) x = db_to_linear(x);
         c.energy_budget = p;
       }},
      {"weights", [](SystemConfig& c, const std::string& v) { c.weights = to_list(v); }},
      {"ap_select_threshold", [](SystemConfig& c, const std::string& v) { c.ap_select_threshold = to_double(v); }},
      {"master_seed", [](SystemConfig& c, const std::string& v) { c.master_seed = to_u64(v); }},
      {"gp_tolerance", [](SystemConfig& c, const std::string& v) { c.gp_tolerance = to_double(v); }},
      {"sca_tolerance", [](SystemConfig& c, const std::string& v) { c.sca_tolerance = to_double(v); }},
      {"sca_max_iterations", [](SystemConfig& c, const std::string& v) { c.sca_max_iterations = static_cast<int>(to_int(v)); }},
  };
  return table;
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

void SystemConfig::validate() const {
  require(bandwidth_hz > 0, "bandwidth_hz must be positive");
  require(num_devices > 0, "num_devices must be positive");
  require(num_aps > 0, "num_aps must be positive");
  require(antennas_per_ap > 0, "antennas_per_ap must be positive");
  require(blocklength > num_devices, "blocklength must exceed num_devices (pilot length)");
  require(carrier_freq_mhz > 0, "carrier_freq_mhz must be positive");
  require(ap_height_m > 0 && device_height_m > 0, "heights must be positive");
  require(area_side_m > 0, "area_side_m must be positive");
  require(breakpoint_d0_m > 0 && breakpoint_d1_m > breakpoint_d0_m,
          "breakpoints must satisfy 0 < d0 < d1");
  require(min_distance_m > 0, "min_distance_m must be positive");
  require(ap_select_threshold > 0 && ap_select_threshold <= 1,
          "ap_select_threshold must lie in (0, 1]");
  require(gp_tolerance > 0 && sca_tolerance > 0, "tolerances must be positive");
  require(sca_max_iterations > 0, "sca_max_iterations must be positive");

  const auto check_list = [&](const PerDevice& p, const char* name, auto pred, const char* what) {
    require(!p.empty() && p.fits(num_devices),
            std::string(name) + " needs 1 or num_devices entries");
    for (double v : p.values) require(pred(v), std::string(name) + " " + what);
  };
  check_list(dep_epsilon, "dep_epsilon", [](double v) { return v > 0 && v < 0.5; },
             "must lie in (0, 0.5)");
  check_list(rate_req_bps, "rate_req_bps", [](double v) { return v > 0; }, "must be positive");
  check_list(energy_budget, "energy_budget", [](double v) { return v > 0; }, "must be positive");
  if (!weights.empty()) {
    check_list(weights, "weights", [](double v) { return v >= 0 && v <= 1; },
               "must lie in [0, 1]");
  }
}

void SystemConfig::validate_for_zero_forcing() const {
  validate();
  require(antennas_per_ap > num_devices,
          "zero-forcing needs antennas_per_ap > num_devices");
}

std::string SystemConfig::to_text() const {
  std::ostringstream os;
  os << "bandwidth_hz = " << fmt(bandwidth_hz) << "\n"
     << "blocklength = " << blocklength << "\n"
     << "num_devices = " << num_devices << "\n"
     << "num_aps = " << num_aps << "\n"
     << "antennas_per_ap = " << antennas_per_ap << "\n"
     << "carrier_freq_mhz = " << fmt(carrier_freq_mhz) << "\n"
     << "ap_height_m = " << fmt(ap_height_m) << "\n"
     << "device_height_m = " << fmt(device_height_m) << "\n"
     << "noise_figure_db = " << fmt(noise_figure_db) << "\n"
     << "area_side_m = " << fmt(area_side_m) << "\n"
     << "breakpoint_d0_m = " << fmt(breakpoint_d0_m) << "\n"
     << "breakpoint_d1_m = " << fmt(breakpoint_d1_m) << "\n"
     << "min_distance_m = " << fmt(min_distance_m) << "\n"
     << "dep_epsilon = " << fmt(dep_epsilon) << "\n"
     << "rate_req_bps = " << fmt(rate_req_bps) << "\n"
     << "energy_budget = " << fmt(energy_budget) << "\n";
  if (!weights.empty()) os << "weights = " << fmt(weights) << "\n";
  os << "ap_select_threshold = " << fmt(ap_select_threshold) << "\n"
     << "master_seed = " << master_seed << "\n"
     << "gp_tolerance = " << fmt(gp_tolerance) << "\n"
     << "sca_tolerance = " << fmt(sca_tolerance) << "\n"
     << "sca_max_iterations = " << sca_max_iterations << "\n";
  return os.str();
}

std::string SystemConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_text()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

SystemConfig parse_config(std::istream& in, SystemConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(where + "unknown key '" + key + "'");
    try {
      it->second(base, value);
    } catch (const ConfigError& e) {
      throw ConfigError(where + key + ": " + e.what());
    }
  }
  return base;
}

SystemConfig load_config(const std::string& path, SystemConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  return parse_config(in, std::move(base));
}

}  // namespace cfurllc
