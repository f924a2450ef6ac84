// SPDX-License-Identifier: Apache-2.0

#include "starsec/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <span>
#include <sstream>

#include "json.hpp"
#include "starsec/types.hpp"

namespace starsec {

using nlohmann::json;

double distance(const Point2& a, const Point2& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

double SystemConfig::pmax() const {
  if (!pmax_w) {
    throw ValidationError("Pmax_dBm is required: no transmit power configured");
  }
  return *pmax_w;
}

namespace {

// Alternative spellings of one quantity; at most one may appear.
struct UnitPair {
  const char* db_key;
  const char* linear_key;
};

constexpr UnitPair kTopPairs[] = {{"Pmax_dBm", "Pmax_W"}, {"noise_dBm", "sigma2_W"}};
constexpr UnitPair kChannelPairs[] = {{"lambda0_dB", "lambda0"}};

const std::set<std::string> kTopKeys = {"N", "K", "Pmax_dBm", "Pmax_W", "noise_dBm",
                                        "sigma2_W", "tau", "seed", "geometry", "channel",
                                        "algorithm"};
const std::set<std::string> kGeometryKeys = {"bs", "ris", "user1", "user2", "eve"};
const std::set<std::string> kChannelKeys = {"lambda0_dB", "lambda0", "alpha_los",
                                            "alpha_nlos_r", "alpha_nlos_t",
                                            "alpha_direct", "rician_k"};
const std::set<std::string> kAlgorithmKeys = {
    "epsilon", "zeta0", "xi0", "omega", "max_inner", "max_outer", "solver_tol",
    "mu_update", "rank_surrogate", "subtract_binary_penalty", "penalty_per_inner",
    "sic_trace_order", "sic_rate_bound", "jamming_full_leakage", "agm_literal_soc",
    "max_polish", "rank_tol", "xi_polish", "randomization_samples"};

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  if (!obj.is_object()) {
    throw ParseError("key '" + prefix + "' must be an object");
  }
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.contains(key)) {
      throw ParseError("unknown key '" + prefix + (prefix.empty() ? "" : ".") + key + "'");
    }
  }
}

double get_number(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_number()) {
    throw ParseError("key '" + path + "' must be a number");
  }
  return v.get<double>();
}

int get_int(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_number_integer()) {
    throw ParseError("key '" + path + "' must be an integer");
  }
  return v.get<int>();
}

bool get_bool(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_boolean()) {
    throw ParseError("key '" + path + "' must be a boolean");
  }
  return v.get<bool>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_string()) {
    throw ParseError("key '" + path + "' must be a string");
  }
  return v.get<std::string>();
}

Point2 get_point(const json& obj, const std::string& key, const std::string& path) {
  const auto& v = obj.at(key);
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
    throw ParseError("key '" + path + "' must be a two-element numeric array [x, y]");
  }
  return {v[0].get<double>(), v[1].get<double>()};
}

void check_pairs(const json& obj, std::span<const UnitPair> pairs, const std::string& prefix) {
  for (const auto& p : pairs) {
    if (obj.contains(p.db_key) && obj.contains(p.linear_key)) {
      throw ParseError("keys '" + prefix + p.db_key + "' and '" + prefix + p.linear_key +
                       "' are mutually exclusive");
    }
  }
}

json parse_override_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error&) {
    return json(text);
  }
}

void apply_override(json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ParseError("override '" + assignment + "' is not of the form key=value");
  }
  const std::string path = assignment.substr(0, eq);
  const json value = parse_override_value(assignment.substr(eq + 1));

  json* node = &doc;
  std::string::size_type start = 0;
  for (;;) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? dot : dot - start);
    if (key.empty()) {
      throw ParseError("override '" + assignment + "' has an empty key segment");
    }
    if (dot == std::string::npos) {
      // Setting one spelling of a unit pair replaces the other.
      auto drop_partner = [&](std::span<const UnitPair> pairs) {
        for (const auto& p : pairs) {
          if (key == p.db_key) node->erase(p.linear_key);
          if (key == p.linear_key) node->erase(p.db_key);
        }
      };
      if (node == &doc) drop_partner(kTopPairs);
      if (start > 0 && path.substr(0, start - 1) == "channel") drop_partner(kChannelPairs);
      (*node)[key] = value;
      return;
    }
    if (!node->contains(key)) {
      (*node)[key] = json::object();
    }
    node = &(*node)[key];
    start = dot + 1;
  }
}

std::string rank_surrogate_name(RankSurrogate r) {
  return r == RankSurrogate::difference_of_convex ? "dc" : "printed";
}

std::string mu_update_name(MuUpdate m) { return m == MuUpdate::agm_tight ? "agm" : "literal"; }

SystemConfig from_json(const json& doc, ParseOptions options) {
  check_keys(doc, kTopKeys, "");
  check_pairs(doc, kTopPairs, "");

  SystemConfig cfg;
  if (doc.contains("N")) cfg.N = get_int(doc, "N", "N");
  if (doc.contains("K")) cfg.K = get_int(doc, "K", "K");
  if (doc.contains("Pmax_dBm")) cfg.pmax_w = dbm_to_watts(get_number(doc, "Pmax_dBm", "Pmax_dBm"));
  if (doc.contains("Pmax_W")) cfg.pmax_w = get_number(doc, "Pmax_W", "Pmax_W");
  if (doc.contains("noise_dBm")) cfg.sigma2 = dbm_to_watts(get_number(doc, "noise_dBm", "noise_dBm"));
  if (doc.contains("sigma2_W")) cfg.sigma2 = get_number(doc, "sigma2_W", "sigma2_W");
  if (doc.contains("tau")) cfg.tau = get_number(doc, "tau", "tau");
  if (doc.contains("seed")) {
    const auto& v = doc.at("seed");
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
      throw ParseError("key 'seed' must be a non-negative integer");
    }
    cfg.seed = v.get<std::uint64_t>();
  }

  if (doc.contains("geometry")) {
    const auto& g = doc.at("geometry");
    check_keys(g, kGeometryKeys, "geometry");
    if (g.contains("bs")) cfg.geometry.bs = get_point(g, "bs", "geometry.bs");
    if (g.contains("ris")) cfg.geometry.ris = get_point(g, "ris", "geometry.ris");
    if (g.contains("user1")) cfg.geometry.user1 = get_point(g, "user1", "geometry.user1");
    if (g.contains("user2")) cfg.geometry.user2 = get_point(g, "user2", "geometry.user2");
    if (g.contains("eve")) cfg.geometry.eve = get_point(g, "eve", "geometry.eve");
  }

  if (doc.contains("channel")) {
    const auto& c = doc.at("channel");
    check_keys(c, kChannelKeys, "channel");
    check_pairs(c, kChannelPairs, "channel.");
    auto& ch = cfg.channel;
    if (c.contains("lambda0_dB")) ch.lambda0 = db_to_linear(get_number(c, "lambda0_dB", "channel.lambda0_dB"));
    if (c.contains("lambda0")) ch.lambda0 = get_number(c, "lambda0", "channel.lambda0");
    if (c.contains("alpha_los")) ch.alpha_los = get_number(c, "alpha_los", "channel.alpha_los");
    if (c.contains("alpha_nlos_r")) ch.alpha_nlos_r = get_number(c, "alpha_nlos_r", "channel.alpha_nlos_r");
    if (c.contains("alpha_nlos_t")) ch.alpha_nlos_t = get_number(c, "alpha_nlos_t", "channel.alpha_nlos_t");
    if (c.contains("alpha_direct")) ch.alpha_direct = get_number(c, "alpha_direct", "channel.alpha_direct");
    if (c.contains("rician_k")) ch.rician_k = get_number(c, "rician_k", "channel.rician_k");
  }

  if (doc.contains("algorithm")) {
    const auto& a = doc.at("algorithm");
    check_keys(a, kAlgorithmKeys, "algorithm");
    auto& al = cfg.algo;
    auto num = [&](const char* key, double& out) {
      if (a.contains(key)) out = get_number(a, key, std::string("algorithm.") + key);
    };
    auto integer = [&](const char* key, int& out) {
      if (a.contains(key)) out = get_int(a, key, std::string("algorithm.") + key);
    };
    auto flag = [&](const char* key, bool& out) {
      if (a.contains(key)) out = get_bool(a, key, std::string("algorithm.") + key);
    };
    num("epsilon", al.epsilon);
    num("zeta0", al.zeta0);
    num("xi0", al.xi0);
    num("omega", al.omega);
    integer("max_inner", al.max_inner);
    integer("max_outer", al.max_outer);
    num("solver_tol", al.solver_tol);
    if (a.contains("mu_update")) {
      const auto v = get_string(a, "mu_update", "algorithm.mu_update");
      if (v == "agm") al.mu_update = MuUpdate::agm_tight;
      else if (v == "literal") al.mu_update = MuUpdate::literal;
      else throw ParseError("key 'algorithm.mu_update' must be \"agm\" or \"literal\"");
    }
    if (a.contains("rank_surrogate")) {
      const auto v = get_string(a, "rank_surrogate", "algorithm.rank_surrogate");
      if (v == "dc") al.rank_surrogate = RankSurrogate::difference_of_convex;
      else if (v == "printed") al.rank_surrogate = RankSurrogate::as_printed;
      else throw ParseError("key 'algorithm.rank_surrogate' must be \"dc\" or \"printed\"");
    }
    flag("subtract_binary_penalty", al.subtract_binary_penalty);
    flag("penalty_per_inner", al.penalty_per_inner);
    flag("sic_trace_order", al.sic_trace_order);
    flag("sic_rate_bound", al.sic_rate_bound);
    flag("jamming_full_leakage", al.jamming_full_leakage);
    flag("agm_literal_soc", al.agm_literal_soc);
    integer("max_polish", al.max_polish);
    num("rank_tol", al.rank_tol);
    num("xi_polish", al.xi_polish);
    integer("randomization_samples", al.randomization_samples);
  }

  if (options.require_power && !cfg.pmax_w) {
    throw ParseError("key 'Pmax_dBm' is required: give an explicit transmit power");
  }
  return cfg;
}

json point_json(const Point2& p) { return json::array({p.x, p.y}); }

}  // namespace

SystemConfig parse_config(std::string_view text, const std::vector<std::string>& overrides,
                          ParseOptions options) {
  json doc;
  try {
    doc = text.empty() ? json::object() : json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed config document: ") + e.what());
  }
  if (!doc.is_object()) {
    throw ParseError("config document must be a JSON object");
  }
  for (const auto& o : overrides) {
    apply_override(doc, o);
  }
  return from_json(doc, options);
}

SystemConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides,
                         ParseOptions options) {
  std::ifstream in(path);
  if (!in) {
    throw ParseError("cannot open config file '" + path.string() + "'");
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides, options);
}

std::string serialize_config(const SystemConfig& cfg) {
  json doc;
  doc["N"] = cfg.N;
  doc["K"] = cfg.K;
  if (cfg.pmax_w) doc["Pmax_W"] = *cfg.pmax_w;
  doc["sigma2_W"] = cfg.sigma2;
  doc["tau"] = cfg.tau;
  doc["seed"] = cfg.seed;
  doc["geometry"] = {{"bs", point_json(cfg.geometry.bs)},
                     {"ris", point_json(cfg.geometry.ris)},
                     {"user1", point_json(cfg.geometry.user1)},
                     {"user2", point_json(cfg.geometry.user2)},
                     {"eve", point_json(cfg.geometry.eve)}};
  const auto& c = cfg.channel;
  doc["channel"] = {{"lambda0", c.lambda0},         {"alpha_los", c.alpha_los},
                    {"alpha_nlos_r", c.alpha_nlos_r}, {"alpha_nlos_t", c.alpha_nlos_t},
                    {"alpha_direct", c.alpha_direct}, {"rician_k", c.rician_k}};
  const auto& a = cfg.algo;
  doc["algorithm"] = {{"epsilon", a.epsilon},
                      {"zeta0", a.zeta0},
                      {"xi0", a.xi0},
                      {"omega", a.omega},
                      {"max_inner", a.max_inner},
                      {"max_outer", a.max_outer},
                      {"solver_tol", a.solver_tol},
                      {"mu_update", mu_update_name(a.mu_update)},
                      {"rank_surrogate", rank_surrogate_name(a.rank_surrogate)},
                      {"subtract_binary_penalty", a.subtract_binary_penalty},
                      {"penalty_per_inner", a.penalty_per_inner},
                      {"sic_trace_order", a.sic_trace_order},
                      {"sic_rate_bound", a.sic_rate_bound},
                      {"jamming_full_leakage", a.jamming_full_leakage},
                      {"agm_literal_soc", a.agm_literal_soc},
                      {"max_polish", a.max_polish},
                      {"rank_tol", a.rank_tol},
                      {"xi_polish", a.xi_polish},
                      {"randomization_samples", a.randomization_samples}};
  return doc.dump(2) + "\n";
}

std::vector<Violation> validate(const SystemConfig& cfg) {
  std::vector<Violation> out;
  auto add = [&](std::string field, std::string msg) {
    out.push_back({std::move(field), std::move(msg)});
  };
  if (cfg.N < 1) add("N", "antenna count N must be >= 1");
  if (cfg.K < 1) add("K", "element count K must be >= 1");
  // A zero budget is a legal degenerate case (all rates zero).
  if (cfg.pmax_w && !(*cfg.pmax_w >= 0.0 && std::isfinite(*cfg.pmax_w))) {
    add("Pmax", "transmit power must be finite and >= 0");
  }
  if (!(cfg.sigma2 > 0.0)) add("sigma2", "noise power must be > 0");
  if (!(cfg.tau > 0.0)) add("tau", "leakage tolerance tau must be > 0");

  const auto& g = cfg.geometry;
  const double plane = g.ris.x;
  if (!(g.user1.x < plane) || !(g.eve.x < plane) || !(g.user2.x > plane)) {
    add("geometry",
        "User1 and Eve must lie on the reflection side (x < ris.x) and User2 on the "
        "transmission side (x > ris.x)");
  } else if (distance(g.bs, g.ris) <= 0.0 || distance(g.bs, g.user1) <= 0.0 ||
             distance(g.bs, g.eve) <= 0.0) {
    add("geometry", "BS must not coincide with the STAR-RIS, User1 or Eve");
  }

  const auto& c = cfg.channel;
  if (!(c.lambda0 > 0.0)) add("channel.lambda0", "reference path gain must be > 0");
  if (!(c.alpha_los >= 0.0) || !(c.alpha_nlos_r >= 0.0) || !(c.alpha_nlos_t >= 0.0) ||
      !(c.alpha_direct >= 0.0)) {
    add("channel.alpha", "path-loss exponents must be >= 0");
  }
  if (!(c.rician_k >= 0.0)) add("channel.rician_k", "Rician factor must be >= 0");

  const auto& a = cfg.algo;
  if (!(a.epsilon > 0.0)) add("algorithm.epsilon", "epsilon must be > 0");
  if (!(a.zeta0 > 0.0)) add("algorithm.zeta0", "zeta0 must be > 0");
  if (!(a.xi0 > 0.0)) add("algorithm.xi0", "xi0 must be > 0");
  if (!(a.omega > 1.0)) add("algorithm.omega", "omega must be > 1");
  if (a.max_inner < 1) add("algorithm.max_inner", "max_inner must be >= 1");
  if (a.max_outer < 1) add("algorithm.max_outer", "max_outer must be >= 1");
  if (!(a.solver_tol > 0.0)) add("algorithm.solver_tol", "solver_tol must be > 0");
  if (a.max_polish < 1) add("algorithm.max_polish", "max_polish must be >= 1");
  if (!(a.rank_tol > 0.0)) add("algorithm.rank_tol", "rank_tol must be > 0");
  if (!(a.xi_polish > 0.0)) add("algorithm.xi_polish", "xi_polish must be > 0");
  if (a.randomization_samples < 0) {
    add("algorithm.randomization_samples", "randomization_samples must be >= 0");
  }

  std::stable_sort(out.begin(), out.end(),
                   [](const Violation& l, const Violation& r) { return l.field < r.field; });
  return out;
}

void require_valid(const SystemConfig& cfg) {
  const auto violations = validate(cfg);
  if (violations.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& v : violations) {
    msg += "\n  " + v.field + ": " + v.message;
  }
  throw ValidationError(msg);
}

}  // namespace starsec
