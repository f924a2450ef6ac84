// SPDX-License-Identifier: Apache-2.0

#include <cmath>

#include "doctest.h"
#include "starsec/config.hpp"
#include "starsec/types.hpp"

using namespace starsec;

TEST_CASE("defaults fill absent fields") {
  const SystemConfig cfg = parse_config(R"({"K": 30, "N": 2})");
  CHECK(cfg.K == 30);
  CHECK(cfg.N == 2);
  CHECK(cfg.tau == 1.0);
  CHECK(cfg.algo.epsilon == 0.01);
  CHECK(cfg.algo.omega == 1.5);
  CHECK(cfg.algo.zeta0 == 1e-4);
  CHECK(cfg.algo.xi0 == 1e-4);
  CHECK(cfg.sigma2 == doctest::Approx(1e-12).epsilon(1e-12));
  CHECK(cfg.channel.lambda0 == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK_FALSE(cfg.pmax_w.has_value());
}

TEST_CASE("unit conversions") {
  CHECK(dbm_to_watts(-90.0) == doctest::Approx(1e-12).epsilon(1e-12));
  CHECK(db_to_linear(-30.0) == doctest::Approx(1e-3).epsilon(1e-12));
  CHECK(dbm_to_watts(30.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(watts_to_dbm(dbm_to_watts(17.5)) == doctest::Approx(17.5).epsilon(1e-12));
  const SystemConfig cfg =
      parse_config(R"({"noise_dBm": -90, "Pmax_dBm": 20, "channel": {"lambda0_dB": -30}})");
  CHECK(cfg.sigma2 == doctest::Approx(1e-12).epsilon(1e-12));
  CHECK(cfg.pmax() == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(cfg.channel.lambda0 == doctest::Approx(1e-3).epsilon(1e-12));
}

TEST_CASE("missing power is an error when power is required") {
  CHECK_THROWS_AS(parse_config(R"({"K": 30})", {}, {.require_power = true}), ParseError);
  const SystemConfig cfg = parse_config(R"({"K": 30})");
  CHECK_THROWS_AS(cfg.pmax(), ValidationError);
}

TEST_CASE("schema violations name the key") {
  try {
    parse_config(R"({"K": 30, "bogus": 1})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  try {
    parse_config(R"({"algorithm": {"omega": "fast"}})");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("algorithm.omega") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config(R"({"Pmax_dBm": 10, "Pmax_W": 1})"), ParseError);
  CHECK_THROWS_AS(parse_config("{not json"), ParseError);
}

TEST_CASE("overrides use dotted keys") {
  const SystemConfig cfg = parse_config(R"({"Pmax_W": 1})", {"algorithm.omega=2", "K=12",
                                                             "Pmax_dBm=10", "algorithm.mu_update=literal"});
  CHECK(cfg.algo.omega == 2.0);
  CHECK(cfg.K == 12);
  CHECK(cfg.pmax() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(cfg.algo.mu_update == MuUpdate::literal);
  CHECK_THROWS_AS(parse_config("{}", {"noequals"}), ParseError);
}

TEST_CASE("validate") {
  SystemConfig cfg;
  CHECK(validate(cfg).empty());

  cfg.algo.omega = 0.9;
  auto v = validate(cfg);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field.find("omega") != std::string::npos);

  cfg = SystemConfig{};
  cfg.geometry.user2 = {45.0, -5.0};
  v = validate(cfg);
  REQUIRE(v.size() == 1);
  CHECK(v[0].field == "geometry");

  cfg = SystemConfig{};
  cfg.K = 0;
  cfg.N = 0;
  cfg.tau = -1;
  v = validate(cfg);
  REQUIRE(v.size() == 3);
  CHECK(std::is_sorted(v.begin(), v.end(),
                       [](const Violation& a, const Violation& b) { return a.field < b.field; }));
  CHECK_THROWS_AS(require_valid(cfg), ValidationError);
}

TEST_CASE("parse, serialize, parse round trip") {
  SystemConfig cfg = parse_config(
      R"({"K": 17, "N": 3, "Pmax_dBm": 23.7, "noise_dBm": -87.1, "tau": 0.7, "seed": 18446744073709551615,
          "geometry": {"eve": [47.5, 9.25]},
          "channel": {"lambda0_dB": -31.3, "rician_k": 2.5},
          "algorithm": {"omega": 1.7, "max_inner": 9, "rank_surrogate": "printed", "sic_trace_order": false}})");
  const std::string text = serialize_config(cfg);
  const SystemConfig again = parse_config(text);
  CHECK(again == cfg);
  CHECK(serialize_config(again) == text);
}
