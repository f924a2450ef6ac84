// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "starsec/harness.hpp"
#include "support/desk.hpp"

using namespace starsec;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "starsec_test_harness";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("scheme names round-trip") {
  for (Scheme s : all_schemes()) CHECK(parse_scheme(scheme_name(s)) == s);
  CHECK(all_schemes().size() == 5);
  CHECK(std::string(scheme_name(Scheme::star_jam)) == "star-jam");
  CHECK_THROWS_AS(parse_scheme("ris"), ValidationError);
}

TEST_CASE("scheme masks") {
  const int K = 5;
  const ModeMask all = scheme_options(Scheme::star_jam, K).mask.value_or(ModeMask::all(K));
  for (int k = 0; k < K; ++k) CHECK(all.count(k) == 3);

  const ModeMask star = scheme_options(Scheme::star, K).mask.value();
  for (int k = 0; k < K; ++k) {
    CHECK(star.allows(k, Mode::reflect));
    CHECK(star.allows(k, Mode::transmit));
    CHECK_FALSE(star.allows(k, Mode::jam));
  }

  const ModeMask conv = scheme_options(Scheme::conv_ris, K).mask.value();
  const ModeMask conv_jam = scheme_options(Scheme::conv_ris_jam, K).mask.value();
  for (int k = 0; k < K; ++k) {
    const bool reflect_part = k < 3;
    CHECK(conv.allows(k, Mode::reflect) == reflect_part);
    CHECK(conv.allows(k, Mode::transmit) == !reflect_part);
    CHECK_FALSE(conv.allows(k, Mode::jam));
    CHECK(conv_jam.allows(k, Mode::reflect) == reflect_part);
    CHECK(conv_jam.allows(k, Mode::transmit) == !reflect_part);
    CHECK(conv_jam.allows(k, Mode::jam) == reflect_part);
  }

  const ModeMask none = scheme_options(Scheme::no_ris, K).mask.value();
  for (int k = 0; k < K; ++k) CHECK(none.count(k) == 0);
}

TEST_CASE("table format contract") {
  Table t;
  t.columns = {{0, 10, 20, 30, 40}, {1, 2, 3, 4, 5}, {1, 2, 3, 4, 5},
               {1, 2, 3, 4, 5},     {1, 2, 3, 4, 5}, {0.1, 0.2, 0.3, 0.4, 0.5}};
  const std::string text = format_table(t);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x1 y1 y2 y3 y4 y5");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 5);
  CHECK(text.find('\r') == std::string::npos);
  CHECK(text.back() == '\n');

  CHECK(format_table(Table{}) == "x1\n");
  const auto empty = scratch("empty.txt");
  emit_table(Table{}, empty);
  CHECK(slurp(empty) == "x1\n");
  CHECK(read_table(empty).rows() == 0);
}

TEST_CASE("tables round-trip to full precision") {
  Rng rng(5);
  Table t;
  t.columns.resize(4);
  for (int i = 0; i < 7; ++i) {
    t.columns[0].push_back(i * 10.0);
    for (int c = 1; c < 4; ++c) t.columns[c].push_back(std::exp(20.0 * rng.uniform() - 10.0));
  }
  t.columns[2][3] = std::nan("");
  const auto path = scratch("roundtrip.txt");
  emit_table(t, path);
  const Table back = read_table(path);
  REQUIRE(back.columns.size() == t.columns.size());
  for (std::size_t c = 0; c < t.columns.size(); ++c) {
    for (std::size_t i = 0; i < t.rows(); ++i) {
      if (std::isnan(t.columns[c][i])) {
        CHECK(std::isnan(back.columns[c][i]));
      } else {
        CHECK(back.columns[c][i] == t.columns[c][i]);
      }
    }
  }
  CHECK_THROWS_AS(parse_table("x1 y2\n1 2\n"), ParseError);
  CHECK_THROWS_AS(parse_table("x1 y1\n1\n"), ParseError);
  CHECK_THROWS_AS(parse_table("x1 y1\n1 2 3\n"), ParseError);
  CHECK_THROWS_AS(emit_table(t, "/nonexistent-dir/x.txt"), IoError);
}

TEST_CASE("power sweep is deterministic and paired") {
  SystemConfig cfg = desk::config(4, 2, 20.0, 40);
  const std::vector<Scheme> schemes = {Scheme::star_jam, Scheme::no_ris};
  const SweepResult a = run_power_sweep(cfg, {10.0, 20.0}, schemes, 2);
  const SweepResult b = run_power_sweep(cfg, {10.0, 20.0}, schemes, 2);
  CHECK(format_table(sweep_table(a)) == format_table(sweep_table(b)));
  CHECK(format_table(se_table(a)) == format_table(se_table(b)));
  CHECK(a.axis == "power_dbm");
  CHECK(a.trials == 2);
  CHECK(a.seed_base == 40);
  REQUIRE(a.trial_rates.size() == 2);
  for (std::size_t s = 0; s < schemes.size(); ++s) {
    for (std::size_t x = 0; x < a.x.size(); ++x) {
      double sum = 0.0;
      int n = 0;
      for (double r : a.trial_rates[s][x]) {
        if (std::isnan(r)) continue;
        sum += r;
        ++n;
      }
      CHECK(n + a.infeasible[s][x] == 2);
      if (n > 0) CHECK(a.mean[s][x] == doctest::Approx(sum / n).epsilon(1e-14));
    }
  }
  CHECK_THROWS_AS(run_power_sweep(cfg, {10.0}, schemes, 0), ValidationError);
  CHECK_THROWS_AS(run_k_sweep(cfg, {4}, 0), ValidationError);
}

TEST_CASE("no-ris rate does not depend on K") {
  SystemConfig cfg = desk::config(4, 2, 20.0, 60);
  cfg.algo.sic_trace_order = false;
  const SweepResult small = run_power_sweep(cfg, {20.0}, {Scheme::no_ris}, 2);
  cfg.K = 12;
  const SweepResult large = run_power_sweep(cfg, {20.0}, {Scheme::no_ris}, 2);
  REQUIRE(small.infeasible[0][0] == 0);
  REQUIRE(large.infeasible[0][0] == 0);
  CHECK(small.mean[0][0] > 0.0);
  CHECK(std::abs(small.mean[0][0] - large.mean[0][0]) <= 1e-4);
}

TEST_CASE("k sweep and mode histogram") {
  SystemConfig cfg = desk::config(4, 2, 20.0, 70);
  const SweepResult k = run_k_sweep(cfg, {2, 4}, 1);
  CHECK(k.axis == "K");
  CHECK(k.x == std::vector<double>{2.0, 4.0});
  CHECK(k.schemes == std::vector<Scheme>{Scheme::star_jam});
  CHECK(format_table(sweep_table(k)) == format_table(sweep_table(run_k_sweep(cfg, {2, 4}, 1))));

  const ModeHistogram h = mode_histogram(cfg, {10.0, 20.0}, 2);
  REQUIRE(h.powers_dbm.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    if (h.converged[i] == 0) continue;
    CHECK(h.reflect[i] + h.transmit[i] + h.jam[i] == doctest::Approx(4.0).epsilon(1e-12));
  }
  const Table t = histogram_table(h);
  CHECK(t.columns.size() == 4);
  CHECK(t.rows() == 2);
}

TEST_CASE("convergence trace with a single outer iteration") {
  SystemConfig cfg = desk::config(4, 2, 20.0, 80);
  cfg.algo.max_outer = 1;
  const ConvergenceTrace tr = convergence_trace(cfg, 20.0, 80);
  CHECK(tr.overall.size() == 1);
  CHECK_FALSE(tr.active.empty());
  const Table t = convergence_table(tr);
  CHECK(t.columns.size() == 4);
  CHECK(t.rows() == std::max({tr.active.size(), tr.passive.size(), tr.overall.size()}));
  CHECK(t.columns[0].front() == 1.0);
}

TEST_CASE("manifest is a pure function of its inputs") {
  SystemConfig cfg = desk::config(8, 2, 20.0, 11);
  const std::string m = run_manifest("power-sweep", cfg, 3, {"out/fig2.txt"});
  CHECK(m == run_manifest("power-sweep", cfg, 3, {"out/fig2.txt"}));
  const auto doc = nlohmann::json::parse(m);
  CHECK(doc["command"] == "power-sweep");
  CHECK(doc["trials"] == 3);
  CHECK(doc["seed_base"] == 11);
  CHECK(doc["seeds"] == nlohmann::json::array({11, 12, 13}));
  CHECK(doc["outputs"][0] == "out/fig2.txt");
  CHECK(doc["config"]["K"] == 8);
}
