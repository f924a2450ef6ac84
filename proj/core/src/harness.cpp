// SPDX-License-Identifier: Apache-2.0

#include "starsec/harness.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "starsec/channel.hpp"

#ifndef STARSEC_VERSION
#define STARSEC_VERSION "unknown"
#endif

namespace starsec {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Stats {
  double mean = kNaN;
  double se = 0.0;
};

Stats stats(const std::vector<double>& v) {
  Stats s;
  if (v.empty()) return s;
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / static_cast<double>(v.size());
  if (v.size() > 1) {
    double ss = 0.0;
    for (double x : v) ss += (x - s.mean) * (x - s.mean);
    const double var = ss / static_cast<double>(v.size() - 1);
    s.se = std::sqrt(var / static_cast<double>(v.size()));
  }
  return s;
}

void require_trials(int trials) {
  if (trials < 1) throw ValidationError("trials must be >= 1");
}

SystemConfig trial_config(SystemConfig cfg, int trial) {
  cfg.seed += static_cast<std::uint64_t>(trial);
  return cfg;
}

}  // namespace

const char* scheme_name(Scheme s) {
  switch (s) {
    case Scheme::star_jam:
      return "star-jam";
    case Scheme::star:
      return "star";
    case Scheme::conv_ris:
      return "conv-ris";
    case Scheme::conv_ris_jam:
      return "conv-ris-jam";
    case Scheme::no_ris:
      return "no-ris";
  }
  return "?";
}

Scheme parse_scheme(const std::string& name) {
  for (Scheme s : all_schemes()) {
    if (name == scheme_name(s)) return s;
  }
  throw ValidationError("unknown scheme '" + name + "'");
}

std::vector<Scheme> all_schemes() {
  return {Scheme::star_jam, Scheme::star, Scheme::conv_ris, Scheme::conv_ris_jam, Scheme::no_ris};
}

OptimizeOptions scheme_options(Scheme s, int K) {
  OptimizeOptions o;
  ModeMask m = ModeMask::all(K);
  const int split = (K + 1) / 2;
  for (int k = 0; k < K; ++k) {
    auto& a = m.allowed[k];
    switch (s) {
      case Scheme::star_jam:
        break;
      case Scheme::star:
        a[2] = false;
        break;
      case Scheme::conv_ris:
        a = {k < split, k >= split, false};
        break;
      case Scheme::conv_ris_jam:
        a = {k < split, k >= split, k < split};
        break;
      case Scheme::no_ris:
        a = {false, false, false};
        break;
    }
  }
  o.mask = m;
  return o;
}

SweepResult run_power_sweep(const SystemConfig& cfg, const std::vector<double>& powers_dbm,
                            const std::vector<Scheme>& schemes, int trials) {
  require_trials(trials);
  SweepResult r;
  r.axis = "power_dbm";
  r.x = powers_dbm;
  r.schemes = schemes;
  r.trials = trials;
  r.seed_base = cfg.seed;
  const std::size_t S = schemes.size();
  const std::size_t P = powers_dbm.size();
  r.mean.assign(S, std::vector<double>(P, kNaN));
  r.se.assign(S, std::vector<double>(P, 0.0));
  r.infeasible.assign(S, std::vector<int>(P, 0));
  r.trial_rates.assign(S, std::vector<std::vector<double>>(P));
  for (std::size_t p = 0; p < P; ++p) {
    std::vector<std::vector<double>> rates(S);
    for (int t = 0; t < trials; ++t) {
      SystemConfig tc = trial_config(cfg, t);
      tc.pmax_w = dbm_to_watts(powers_dbm[p]);
      const ChannelRealization ch = generate_channels(tc, tc.seed);
      for (std::size_t s = 0; s < S; ++s) {
        const SolutionRecord rec = optimize(ch, tc, scheme_options(schemes[s], tc.K));
        if (rec.status == RecordStatus::infeasible) {
          ++r.infeasible[s][p];
          r.trial_rates[s][p].push_back(kNaN);
        } else {
          rates[s].push_back(rec.report.sum_rate);
          r.trial_rates[s][p].push_back(rec.report.sum_rate);
        }
      }
    }
    for (std::size_t s = 0; s < S; ++s) {
      const Stats st = stats(rates[s]);
      r.mean[s][p] = st.mean;
      r.se[s][p] = st.se;
    }
  }
  return r;
}

SweepResult run_k_sweep(const SystemConfig& cfg, const std::vector<int>& k_values, int trials) {
  require_trials(trials);
  SweepResult r;
  r.axis = "K";
  r.schemes = {Scheme::star_jam};
  r.trials = trials;
  r.seed_base = cfg.seed;
  r.mean.assign(1, {});
  r.se.assign(1, {});
  r.infeasible.assign(1, {});
  r.trial_rates.assign(1, {});
  for (int K : k_values) {
    std::vector<double> rates;
    std::vector<double> all;
    int bad = 0;
    for (int t = 0; t < trials; ++t) {
      SystemConfig tc = trial_config(cfg, t);
      tc.K = K;
      const ChannelRealization ch = generate_channels(tc, tc.seed);
      const SolutionRecord rec = optimize(ch, tc, scheme_options(Scheme::star_jam, K));
      if (rec.status == RecordStatus::infeasible) {
        ++bad;
        all.push_back(kNaN);
      } else {
        rates.push_back(rec.report.sum_rate);
        all.push_back(rec.report.sum_rate);
      }
    }
    r.trial_rates[0].push_back(std::move(all));
    const Stats st = stats(rates);
    r.x.push_back(K);
    r.mean[0].push_back(st.mean);
    r.se[0].push_back(st.se);
    r.infeasible[0].push_back(bad);
  }
  return r;
}

ModeHistogram mode_histogram(const SystemConfig& cfg, const std::vector<double>& powers_dbm,
                             int trials) {
  require_trials(trials);
  ModeHistogram h;
  h.powers_dbm = powers_dbm;
  h.trials = trials;
  h.seed_base = cfg.seed;
  for (double p : powers_dbm) {
    double sums[3] = {0.0, 0.0, 0.0};
    int n = 0;
    for (int t = 0; t < trials; ++t) {
      SystemConfig tc = trial_config(cfg, t);
      tc.pmax_w = dbm_to_watts(p);
      const ChannelRealization ch = generate_channels(tc, tc.seed);
      const SolutionRecord rec = optimize(ch, tc, scheme_options(Scheme::star_jam, tc.K));
      if (rec.status != RecordStatus::converged) continue;
      ++n;
      for (int z = 0; z < 3; ++z) sums[z] += rec.state.beta(static_cast<Mode>(z)).sum();
    }
    const double d = n > 0 ? static_cast<double>(n) : kNaN;
    h.reflect.push_back(sums[0] / d);
    h.transmit.push_back(sums[1] / d);
    h.jam.push_back(sums[2] / d);
    h.converged.push_back(n);
  }
  return h;
}

ConvergenceTrace convergence_trace(const SystemConfig& cfg, double power_dbm,
                                   std::uint64_t seed) {
  SystemConfig tc = cfg;
  tc.seed = seed;
  tc.pmax_w = dbm_to_watts(power_dbm);
  const ChannelRealization ch = generate_channels(tc, seed);
  const SolutionRecord rec = optimize(ch, tc, scheme_options(Scheme::star_jam, tc.K));
  ConvergenceTrace out;
  out.status = rec.status;
  for (const auto& row : rec.trace) {
    switch (row.stage) {
      case Stage::active:
        out.active.push_back(row.rate);
        break;
      case Stage::passive:
        out.passive.push_back(row.rate);
        break;
      case Stage::outer:
        out.overall.push_back(row.physical);
        break;
    }
  }
  return out;
}

namespace {

Table scheme_table(const SweepResult& r, const auto& cell) {
  Table t;
  t.columns.push_back(r.x);
  for (std::size_t s = 0; s < r.schemes.size(); ++s) {
    std::vector<double> col;
    for (std::size_t i = 0; i < r.x.size(); ++i) col.push_back(cell(s, i));
    t.columns.push_back(std::move(col));
  }
  return t;
}

}  // namespace

Table sweep_table(const SweepResult& r) {
  return scheme_table(r, [&](std::size_t s, std::size_t i) { return r.mean[s][i]; });
}

Table infeasible_table(const SweepResult& r) {
  return scheme_table(
      r, [&](std::size_t s, std::size_t i) { return static_cast<double>(r.infeasible[s][i]); });
}

Table se_table(const SweepResult& r) {
  return scheme_table(r, [&](std::size_t s, std::size_t i) { return r.se[s][i]; });
}

Table histogram_table(const ModeHistogram& h) {
  return Table{{h.powers_dbm, h.reflect, h.transmit, h.jam}};
}

Table convergence_table(const ConvergenceTrace& t) {
  const std::size_t n = std::max({t.active.size(), t.passive.size(), t.overall.size()});
  auto pad = [&](const std::vector<double>& v) {
    std::vector<double> out = v;
    const double last = v.empty() ? kNaN : v.back();
    out.resize(n, last);
    return out;
  };
  std::vector<double> it(n);
  for (std::size_t i = 0; i < n; ++i) it[i] = static_cast<double>(i + 1);
  return Table{{it, pad(t.active), pad(t.passive), pad(t.overall)}};
}

std::string format_table(const Table& t) {
  std::string out = "x1";
  for (std::size_t c = 1; c < t.columns.size(); ++c) out += " y" + std::to_string(c);
  out += '\n';
  char buf[40];
  for (std::size_t i = 0; i < t.rows(); ++i) {
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", t.columns[c][i]);
      if (c > 0) out += ' ';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Table parse_table(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("table: missing header");
  std::istringstream head(line);
  std::string tok;
  std::size_t ncol = 0;
  while (head >> tok) {
    const std::string want = ncol == 0 ? "x1" : "y" + std::to_string(ncol);
    if (tok != want) throw ParseError("table: unexpected header token '" + tok + "'");
    ++ncol;
  }
  Table t;
  t.columns.assign(ncol == 1 ? 1 : ncol, {});
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    for (std::size_t c = 0; c < ncol; ++c) {
      if (!(row >> tok)) throw ParseError("table: short row");
      t.columns[c].push_back(std::strtod(tok.c_str(), nullptr));
    }
    if (row >> tok) throw ParseError("table: long row");
  }
  return t;
}

void emit_table(const Table& t, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write table '" + path.string() + "'");
  out << format_table(t);
  if (!out) throw IoError("write failed for table '" + path.string() + "'");
}

Table read_table(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open table '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_table(ss.str());
}

void emit_sweep(const SweepResult& r, const std::filesystem::path& stem) {
  const std::string base = stem.string();
  emit_table(sweep_table(r), base + ".txt");
  emit_table(se_table(r), base + ".se.txt");
  emit_table(infeasible_table(r), base + ".infeasible.txt");
}

std::string run_manifest(const std::string& command, const SystemConfig& cfg, int trials,
                         const std::vector<std::string>& outputs,
                         const std::vector<std::pair<std::string, std::string>>& arguments) {
  nlohmann::ordered_json doc;
  doc["tool"] = "starsec";
  doc["version"] = STARSEC_VERSION;
  doc["command"] = command;
  doc["arguments"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : arguments) doc["arguments"][key] = value;
  doc["trials"] = trials;
  doc["seed_base"] = cfg.seed;
  std::vector<std::uint64_t> seeds;
  for (int t = 0; t < trials; ++t) seeds.push_back(cfg.seed + static_cast<std::uint64_t>(t));
  doc["seeds"] = seeds;
  doc["outputs"] = outputs;
  doc["config"] = nlohmann::ordered_json::parse(serialize_config(cfg));
  return doc.dump(2) + "\n";
}

}  // namespace starsec
