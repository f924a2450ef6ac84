// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <limits>

#include "doctest.h"
#include "starsec/channel.hpp"

using namespace starsec;

TEST_CASE("path loss") {
  CHECK(path_loss(1.0, 2.0, 1e-3) == doctest::Approx(1e-3).epsilon(1e-15));
  CHECK(path_loss(10.0, 2.0, 1e-3) == doctest::Approx(1e-5).epsilon(1e-15));
  for (double d : {0.5, 3.0, 77.0}) CHECK(path_loss(d, 0.0, 2e-3) == 2e-3);
  CHECK_THROWS_AS(path_loss(0.0, 2.0, 1e-3), DomainError);
  CHECK_THROWS_AS(path_loss(-1.0, 2.0, 1e-3), DomainError);
}

TEST_CASE("Rician weights and limits") {
  Rng rng(1);
  const CMatrix los = ula_response(4, 0.3) * ula_response(2, -0.2).transpose();
  const CMatrix pure = draw_rician(los, std::numeric_limits<double>::infinity(), rng);
  CHECK((pure - los).norm() == 0.0);
  for (Eigen::Index i = 0; i < pure.size(); ++i) CHECK(std::abs(pure(i)) == doctest::Approx(1.0));

  // With k = 1 the LoS weight is 1/sqrt(2): the sample mean converges to los/sqrt(2).
  Rng rng2(2);
  cplx mean = 0.0;
  const int draws = 100000;
  for (int t = 0; t < draws; ++t) mean += draw_rician(CMatrix::Ones(1, 1), 1.0, rng2)(0, 0);
  mean /= draws;
  CHECK(std::abs(mean - cplx(1.0 / std::sqrt(2.0), 0.0)) < 0.01);
}

TEST_CASE("fading second moments") {
  Rng rng(3);
  const int draws = 100000;
  double rice = 0.0;
  double ray = 0.0;
  cplx ray_mean = 0.0;
  for (int t = 0; t < draws; ++t) {
    rice += std::norm(draw_rician(1, 1, 1.0, rng)(0, 0));
    const cplx g = draw_rayleigh(1, 1, rng)(0, 0);
    ray += std::norm(g);
    ray_mean += g;
  }
  CHECK(rice / draws == doctest::Approx(1.0).epsilon(0.02));
  CHECK(ray / draws == doctest::Approx(1.0).epsilon(0.02));
  CHECK(std::abs(ray_mean / static_cast<double>(draws)) < 0.02);
}

TEST_CASE("same seed gives identical draws") {
  Rng a(42);
  Rng b(42);
  CHECK(draw_rayleigh(3, 2, a) == draw_rayleigh(3, 2, b));
}

TEST_CASE("generate_channels shapes and determinism") {
  SystemConfig cfg;
  const auto ch = generate_channels(cfg, 5);
  CHECK(ch.H_br.rows() == 30);
  CHECK(ch.H_br.cols() == 2);
  CHECK(ch.h_r1.size() == 30);
  CHECK(ch.h_t2.size() == 30);
  CHECK(ch.h_re.size() == 30);
  CHECK(ch.h_b1.size() == 2);
  CHECK(ch.h_be.size() == 2);
  CHECK(ch.seed_used == 5);
  const auto again = generate_channels(cfg, 5);
  CHECK(dump_channels(ch) == dump_channels(again));
  CHECK(ch.H_br.allFinite());

  SystemConfig bad;
  bad.K = 0;
  CHECK_THROWS_AS(generate_channels(bad, 1), ValidationError);
}

TEST_CASE("link powers match path-loss means") {
  SystemConfig cfg;
  cfg.K = 8;
  const auto& g = cfg.geometry;
  const auto& p = cfg.channel;
  const int draws = 10000;
  double br = 0, r1 = 0, t2 = 0, re = 0, b1 = 0, be = 0;
  for (int s = 0; s < draws; ++s) {
    const auto ch = generate_channels(cfg, 1000 + s);
    br += ch.H_br.squaredNorm();
    r1 += ch.h_r1.squaredNorm();
    t2 += ch.h_t2.squaredNorm();
    re += ch.h_re.squaredNorm();
    b1 += ch.h_b1.squaredNorm();
    be += ch.h_be.squaredNorm();
  }
  const double K = cfg.K;
  const double N = cfg.N;
  CHECK(br / draws == doctest::Approx(K * N * path_loss(distance(g.bs, g.ris), p.alpha_los, p.lambda0)).epsilon(0.03));
  CHECK(r1 / draws == doctest::Approx(K * path_loss(distance(g.ris, g.user1), p.alpha_nlos_r, p.lambda0)).epsilon(0.03));
  CHECK(t2 / draws == doctest::Approx(K * path_loss(distance(g.ris, g.user2), p.alpha_nlos_t, p.lambda0)).epsilon(0.03));
  CHECK(re / draws == doctest::Approx(K * path_loss(distance(g.ris, g.eve), p.alpha_nlos_r, p.lambda0)).epsilon(0.03));
  CHECK(b1 / draws == doctest::Approx(N * path_loss(distance(g.bs, g.user1), p.alpha_direct, p.lambda0)).epsilon(0.03));
  CHECK(be / draws == doctest::Approx(N * path_loss(distance(g.bs, g.eve), p.alpha_direct, p.lambda0)).epsilon(0.03));
}

TEST_CASE("distinct seeds are uncorrelated") {
  SystemConfig cfg;
  cfg.K = 4;
  const int draws = 10000;
  cplx corr = 0.0;
  double pa = 0.0, pb = 0.0;
  for (int s = 0; s < draws; ++s) {
    const auto a = generate_channels(cfg, 2 * s);
    const auto b = generate_channels(cfg, 2 * s + 1);
    const cplx x = a.h_b1[0];
    const cplx y = b.h_b1[0];
    corr += x * std::conj(y);
    pa += std::norm(x);
    pb += std::norm(y);
  }
  CHECK(std::abs(corr) / std::sqrt(pa * pb) < 0.05);
}

TEST_CASE("channel dump round trip") {
  SystemConfig cfg;
  cfg.K = 5;
  const auto ch = generate_channels(cfg, 77);
  const auto back = parse_channels(dump_channels(ch));
  CHECK(back.H_br == ch.H_br);
  CHECK(back.h_r1 == ch.h_r1);
  CHECK(back.h_be == ch.h_be);
  CHECK(back.seed_used == 77);
  const auto path = std::filesystem::temp_directory_path() / "starsec_channel_dump.txt";
  save_channels(ch, path);
  CHECK(load_channels(path).h_t2 == ch.h_t2);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(parse_channels("garbage"), ParseError);
}
