// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "starsec/optimizer.hpp"
#include "starsec/oracle.hpp"
#include "support/desk.hpp"

using namespace starsec;

namespace {

double wrapped_distance(double a, double b) {
  const double d = std::remainder(a - b, 2.0 * std::numbers::pi);
  return std::abs(d);
}

}  // namespace

TEST_CASE("oracle rejects oversized instances and degenerate grids") {
  const ChannelRealization big = generate_channels(desk::config(4, 1, 20.0, 1), 1);
  CHECK_THROWS_AS(brute_force_best(big, desk::config(4, 1, 20.0, 1)), ValidationError);
  const ChannelRealization wide = generate_channels(desk::config(1, 3, 20.0, 1), 1);
  CHECK_THROWS_AS(brute_force_best(wide, desk::config(1, 3, 20.0, 1)), ValidationError);
  const SystemConfig cfg = desk::config(1, 1, 20.0, 1);
  const ChannelRealization ch = generate_channels(cfg, 1);
  CHECK_THROWS_AS(brute_force_best(ch, cfg, GridSpec{1, 5}), ValidationError);
  CHECK_THROWS_AS(brute_force_best(ch, cfg, GridSpec{4, 1}), ValidationError);
}

TEST_CASE("zero power budget gives zero oracle rate") {
  SystemConfig cfg = desk::config(2, 1, 20.0, 3);
  const ChannelRealization ch = generate_channels(cfg, 3);
  cfg.pmax_w = 0.0;
  const OracleResult r = brute_force_best(ch, cfg, GridSpec{4, 3});
  CHECK(r.sum_rate == 0.0);
  CHECK(r.feasible > 0);
}

TEST_CASE("single reflecting element aligns the cascade with the direct path") {
  SystemConfig cfg = desk::config(1, 1, 20.0, 9);
  cfg.algo.sic_trace_order = false;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ChannelRealization ch = generate_channels(cfg, seed);
    ch.h_t2.setZero();
    ch.h_re.setZero();
    ch.h_be.setZero();
    const int P = 32;
    const OracleResult r = brute_force_best(ch, cfg, GridSpec{P, 3});
    REQUIRE(r.state.beta(Mode::reflect)[0] == 1.0);
    const cplx a = std::conj(ch.h_r1[0]) * ch.H_br(0, 0);
    const cplx d = std::conj(ch.h_b1[0]);
    const double theta = std::arg(d) - std::arg(a);
    CHECK(wrapped_distance(std::arg(r.state.phi(Mode::reflect)[0]), theta) <=
          std::numbers::pi / P + 1e-12);
    const double gain = std::pow(std::abs(a) + std::abs(d), 2.0);
    const double best = std::log2(1.0 + cfg.pmax() * gain / cfg.sigma2);
    CHECK(r.sum_rate <= best + 1e-9);
    CHECK(r.sum_rate >= std::log2(1.0 + cfg.pmax() * gain * std::pow(std::cos(std::numbers::pi / P), 2.0) / cfg.sigma2) - 1e-9);
  }
}

TEST_CASE("refining the phase grid changes the best rate by at most 0.05") {
  const SystemConfig cfg = desk::config(2, 1, 20.0, 1);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const ChannelRealization ch = generate_channels(cfg, seed);
    const OracleResult coarse = brute_force_best(ch, cfg, GridSpec{8, 5});
    const OracleResult fine = brute_force_best(ch, cfg, GridSpec{64, 5});
    INFO("seed " << seed);
    CHECK(fine.sum_rate >= coarse.sum_rate - 1e-12);
    CHECK(fine.sum_rate - coarse.sum_rate <= 0.05);
  }
}

TEST_CASE("the returned configuration is feasible") {
  for (bool order : {true, false}) {
    SystemConfig cfg = desk::config(2, 2, 30.0, 4);
    cfg.algo.sic_trace_order = order;
    for (std::uint64_t seed = 1; seed <= 3; ++seed) {
      const ChannelRealization ch = generate_channels(cfg, seed);
      const OracleResult r = brute_force_best(ch, cfg, GridSpec{4, 5});
      const RateReport again = evaluate_solution(ch, r.beams, r.state, cfg);
      CHECK(again.leakage_ok);
      CHECK(again.sic_ok);
      CHECK(again.power_used <= cfg.pmax() * (1.0 + 1e-9));
      CHECK(again.sum_rate == r.sum_rate);
      CHECK(oracle_feasible(ch, r.beams, r.state, cfg, again));
      CHECK(r.evaluated > 0);
      CHECK(r.feasible <= r.evaluated);
    }
  }
}
