#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cfurllc/config.hpp"
#include "cfurllc/errors.hpp"
#include "cfurllc/rng.hpp"
#include "cfurllc/scenario.hpp"

using namespace cfurllc;

TEST_SUITE("scenario") {
  TEST_CASE("philox matches the published known-answer vector") {
    const auto out = Philox4x32::block({0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu, 0xFFFFFFFFu},
                                       {0xFFFFFFFFu, 0xFFFFFFFFu});
    CHECK(out[0] == 0x408f276du);
    CHECK(out[1] == 0x41c83b0eu);
    CHECK(out[2] == 0xa20bc7c6u);
    CHECK(out[3] == 0x6d5451fdu);
    const auto zero = Philox4x32::block({0, 0, 0, 0}, {0, 0});
    CHECK(zero[0] == 0x6627e8d5u);
    CHECK(zero[1] == 0xe169c58du);
    CHECK(zero[2] == 0xbc57ac4cu);
    CHECK(zero[3] == 0x9b00dbd8u);
    const auto pi = Philox4x32::block({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                                      {0xa4093822u, 0x299f31d0u});
    CHECK(pi[0] == 0xd16cfe09u);
    CHECK(pi[1] == 0x94fdccebu);
    CHECK(pi[2] == 0x5001e420u);
    CHECK(pi[3] == 0x24126ea1u);
  }

  TEST_CASE("complex normal draws have the requested second moments") {
    CounterRng rng(7, 0, 0);
    double re2 = 0.0, im2 = 0.0, cross = 0.0;
    constexpr int n = 200000;
    for (int i = 0; i < n; ++i) {
      const auto z = rng.complex_normal(2.0);
      re2 += z.real() * z.real();
      im2 += z.imag() * z.imag();
      cross += z.real() * z.imag();
    }
    CHECK(re2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(im2 / n == doctest::Approx(1.0).epsilon(0.02));
    CHECK(std::abs(cross / n) < 0.02);
  }

  TEST_CASE("path loss constant matches a term-by-term hand evaluation") {
    SystemConfig cfg;
    const double lf = std::log10(2100.0);
    const double hand = 46.3 + 33.9 * lf - 13.82 * std::log10(15.0) - (1.1 * lf - 0.7) * 1.6 +
                        (1.56 * lf - 0.8);
    CHECK(path_loss_constant_db(cfg) == doctest::Approx(hand).epsilon(1e-12));
    CHECK(path_loss_constant_db(cfg) == doctest::Approx(142.32).epsilon(1e-4));
  }

  TEST_CASE("path loss branches are continuous and use kilometres") {
    SystemConfig cfg;
    const double base = path_loss_constant_db(cfg);
    const double d1 = cfg.breakpoint_d1_m;
    const double d0 = cfg.breakpoint_d0_m;
    // branch 1 and branch 3 evaluated at d1
    CHECK(path_loss_db(d1, cfg) == doctest::Approx(base + 35.0 * std::log10(d1 / 1000.0)));
    CHECK(path_loss_db(d1 * (1 + 1e-12), cfg) == doctest::Approx(path_loss_db(d1, cfg)));
    CHECK(path_loss_db(d0, cfg) == doctest::Approx(path_loss_db(d0 * (1 + 1e-12), cfg)));
    CHECK(path_loss_db(100.0, cfg) == doctest::Approx(base - 35.0));
    CHECK(path_loss_db(1.0, cfg) == doctest::Approx(path_loss_db(5.0, cfg)));
    CHECK_THROWS_AS(path_loss_db(0.0, cfg), DomainError);
  }

  TEST_CASE("noise power") {
    SystemConfig cfg;
    CHECK(noise_power_w(cfg) == doctest::Approx(3.181e-13).epsilon(1e-3));
    cfg.bandwidth_hz = 1.0;
    cfg.noise_figure_db = 0.0;
    CHECK(noise_power_w(cfg) == doctest::Approx(4.0049e-21).epsilon(1e-4));
    const double one = noise_power_w(cfg);
    cfg.bandwidth_hz = 2.0;
    CHECK(noise_power_w(cfg) == doctest::Approx(2.0 * one));
  }

  TEST_CASE("access points sit on a regular grid") {
    const auto one = ap_grid(1, 1000.0);
    REQUIRE(one.size() == 1);
    CHECK(one[0].x == doctest::Approx(500.0));
    CHECK(one[0].y == doctest::Approx(500.0));
    const auto four = ap_grid(4, 1000.0);
    REQUIRE(four.size() == 4);
    for (const Point& p : four) {
      CHECK((p.x == doctest::Approx(250.0) || p.x == doctest::Approx(750.0)));
      CHECK((p.y == doctest::Approx(250.0) || p.y == doctest::Approx(750.0)));
    }
  }

  TEST_CASE("service set selection") {
    const std::vector<double> b{0.2, 0.5, 0.3};
    const auto s = select_aps(b, 0.75);
    REQUIRE(s.size() == 2);
    CHECK(s[0] == 1);
    CHECK(s[1] == 2);
    CHECK(select_aps(b, 1.0).size() == 3);
    const std::vector<double> single{3.0};
    CHECK(select_aps(single, 0.1) == std::vector<int>{0});
    CHECK(select_aps(single, 1.0) == std::vector<int>{0});
  }

  TEST_CASE("topology generation is deterministic and noise-normalized") {
    SystemConfig cfg;
    cfg.num_devices = 4;
    cfg.num_aps = 4;
    cfg.antennas_per_ap = 8;
    const LargeScaleModel a = generate_topology(cfg, 99);
    const LargeScaleModel b = generate_topology(cfg, 99);
    const LargeScaleModel c = generate_topology(cfg, 100);
    CHECK(a.beta == b.beta);
    CHECK(a.beta != c.beta);
    CHECK(a.beta.rows() == 4);
    CHECK(a.beta.cols() == 4);
    for (int k = 0; k < 4; ++k) {
      const Point d = a.device_positions[k];
      CHECK(d.x >= 0.0);
      CHECK(d.x <= 1000.0);
      for (int m = 0; m < 4; ++m) {
        const Point p = a.ap_positions[m];
        const double dist = std::max(std::hypot(p.x - d.x, p.y - d.y), cfg.min_distance_m);
        const double expect = std::pow(10.0, -path_loss_db(dist, cfg) / 10.0) / noise_power_w(cfg);
        CHECK(a.beta(m, k) == doctest::Approx(expect).epsilon(1e-9));
      }
      CHECK(a.weights[k] >= 0.0);
      CHECK(a.weights[k] <= 1.0);
    }
  }

  TEST_CASE("re-thresholding keeps gains and recomputes service sets") {
    Eigen::MatrixXd beta(3, 1);
    beta << 0.5, 0.3, 0.2;
    const LargeScaleModel m = make_model(beta, 0.75, 4, {1.0}, {1.0});
    CHECK(m.service_sets[0].size() == 2);
    const LargeScaleModel all = with_threshold(m, 1.0);
    CHECK(all.service_sets[0].size() == 3);
    CHECK(all.beta == m.beta);
  }
}

TEST_SUITE("config") {
  TEST_CASE("defaults validate and round-trip through text") {
    SystemConfig c;
    c.validate();
    std::istringstream in(c.to_text());
    const SystemConfig back = parse_config(in);
    CHECK(back.to_text() == c.to_text());
    CHECK(back.hash() == c.hash());
    CHECK(c.hash().size() == 16);
  }

  TEST_CASE("parsing values, lists and comments") {
    std::istringstream in(
        "# comment\n"
        "num_devices = 3\n"
        "rate_req_bps = 1e6, 2e6, 3e6  # trailing\n"
        "energy_budget_db = 20\n"
        "\n");
    const SystemConfig c = parse_config(in);
    CHECK(c.num_devices == 3);
    CHECK(c.rate_req_bps.at(2) == doctest::Approx(3e6));
    CHECK(c.energy_budget.at(1) == doctest::Approx(100.0));
    CHECK(c.pilot_length() == 3);
    CHECK(c.eta() == doctest::Approx(3.0 / 1000.0));
  }

  TEST_CASE("errors carry the line number") {
    std::istringstream bad_key("blocklength = 100\nbogus = 1\n");
    try {
      parse_config(bad_key);
      FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    std::istringstream bad_value("bandwidth_hz = ten\n");
    CHECK_THROWS_AS(parse_config(bad_value), ConfigError);
    std::istringstream no_eq("bandwidth_hz 10\n");
    CHECK_THROWS_AS(parse_config(no_eq), ConfigError);
  }

  TEST_CASE("structural invariants") {
    SystemConfig c;
    c.num_devices = 4;
    c.rate_req_bps = PerDevice(std::vector<double>{1.0, 2.0});
    CHECK_THROWS_AS(c.validate(), ConfigError);
    SystemConfig z;
    z.num_devices = 8;
    z.antennas_per_ap = 8;
    CHECK_THROWS_AS(z.validate_for_zero_forcing(), ConfigError);
    z.antennas_per_ap = 9;
    CHECK_NOTHROW(z.validate_for_zero_forcing());
    CHECK_THROWS_AS(load_config("/nonexistent/file.cfg"), ConfigError);
  }
}
