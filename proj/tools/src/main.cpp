// SPDX-License-Identifier: Apache-2.0
//
// starsec command-line tool: figure-data sweeps, single runs and manifest
// replay.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "starsec/harness.hpp"

namespace fs = std::filesystem;
using namespace starsec;

namespace {

/// Everything a subcommand needs; recorded in and rebuilt from a manifest.
struct Run {
  std::string command;
  SystemConfig cfg;
  int trials = 1;
  std::vector<double> powers;
  std::vector<std::string> schemes;
  std::vector<int> k_values;
  double power = 20.0;
};

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& f) {
  std::string out;
  for (const auto& x : v) {
    if (!out.empty()) out += ' ';
    out += f(x);
  }
  return out;
}

template <class T>
std::vector<T> split(const std::string& s) {
  std::vector<T> out;
  std::istringstream in(s);
  T x;
  while (in >> x) out.push_back(x);
  return out;
}

std::vector<std::pair<std::string, std::string>> arguments(const Run& r) {
  std::vector<std::pair<std::string, std::string>> a;
  if (r.command == "power-sweep" || r.command == "modes") {
    a.emplace_back("powers", join(r.powers, number));
  }
  if (r.command == "power-sweep") {
    a.emplace_back("schemes", join(r.schemes, [](const std::string& s) { return s; }));
  }
  if (r.command == "k-sweep") {
    a.emplace_back("k_values", join(r.k_values, [](int k) { return std::to_string(k); }));
  }
  if (r.command == "k-sweep" || r.command == "convergence" || r.command == "single") {
    a.emplace_back("power", number(r.power));
  }
  return a;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> sweep_outputs(const std::string& stem) {
  return {stem + ".txt", stem + ".se.txt", stem + ".infeasible.txt"};
}

void execute(const Run& r, const fs::path& out) {
  fs::create_directories(out);
  std::vector<std::string> outputs;
  SystemConfig cfg = r.cfg;
  if (r.command == "power-sweep") {
    std::vector<Scheme> schemes;
    for (const auto& s : r.schemes) schemes.push_back(parse_scheme(s));
    emit_sweep(run_power_sweep(cfg, r.powers, schemes, r.trials), out / "fig2");
    outputs = sweep_outputs("fig2");
  } else if (r.command == "k-sweep") {
    cfg.pmax_w = dbm_to_watts(r.power);
    emit_sweep(run_k_sweep(cfg, r.k_values, r.trials), out / "fig3");
    outputs = sweep_outputs("fig3");
  } else if (r.command == "modes") {
    emit_table(histogram_table(mode_histogram(cfg, r.powers, r.trials)), out / "fig5.txt");
    outputs = {"fig5.txt"};
  } else if (r.command == "convergence") {
    emit_table(convergence_table(convergence_trace(cfg, r.power, cfg.seed)), out / "fig6.txt");
    outputs = {"fig6.txt"};
  } else if (r.command == "single") {
    cfg.pmax_w = dbm_to_watts(r.power);
    require_valid(cfg);
    const SolutionRecord rec = optimize(generate_channels(cfg, cfg.seed), cfg);
    write_text(out / "single.txt", rec.to_text());
    outputs = {"single.txt"};
  } else {
    throw ValidationError("unknown command '" + r.command + "'");
  }
  write_text(out / "manifest.json", run_manifest(r.command, r.cfg, r.trials, outputs, arguments(r)));
  for (const auto& o : outputs) std::cout << (out / o).string() << '\n';
  std::cout << (out / "manifest.json").string() << '\n';
}

Run from_manifest(const fs::path& path) {
  const auto doc = nlohmann::json::parse(slurp(path));
  Run r;
  r.command = doc.at("command").get<std::string>();
  r.trials = doc.at("trials").get<int>();
  r.cfg = parse_config(doc.at("config").dump());
  const auto& a = doc.at("arguments");
  if (a.contains("powers")) r.powers = split<double>(a["powers"].get<std::string>());
  if (a.contains("schemes")) r.schemes = split<std::string>(a["schemes"].get<std::string>());
  if (a.contains("k_values")) r.k_values = split<int>(a["k_values"].get<std::string>());
  if (a.contains("power")) r.power = std::stod(a["power"].get<std::string>());
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Secure STAR-RIS NOMA simulator and optimizer"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int trials = 0;
  std::string out = "out";
  std::vector<double> powers = {0, 10, 20, 30, 40};
  std::vector<std::string> schemes;
  for (Scheme s : all_schemes()) schemes.emplace_back(scheme_name(s));
  std::vector<int> k_values = {20, 30, 40, 50, 60};
  double power = 20.0;
  double convergence_power = 40.0;
  std::string manifest;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "Override a config key, e.g. --set algorithm.omega=2");
    sub->add_option("--seed", seed, "Seed base (trial t uses seed + t)");
    sub->add_option("--trials", trials, "Monte-Carlo trials per point")->check(CLI::PositiveNumber);
    sub->add_option("--out", out, "Output directory")->capture_default_str();
  };

  auto* power_sweep = app.add_subcommand("power-sweep", "Sum-rate versus transmit power");
  common(power_sweep);
  power_sweep->add_option("--powers", powers, "Transmit powers in dBm")->capture_default_str();
  power_sweep->add_option("--scheme", schemes, "Schemes to run (repeatable)")
      ->check(CLI::IsMember({"star-jam", "star", "conv-ris", "conv-ris-jam", "no-ris"}));

  auto* k_sweep = app.add_subcommand("k-sweep", "Sum-rate versus element count (star-jam)");
  common(k_sweep);
  k_sweep->add_option("--k", k_values, "Element counts")->capture_default_str();
  k_sweep->add_option("--power", power, "Transmit power in dBm")->capture_default_str();

  auto* modes = app.add_subcommand("modes", "Mean reflect/transmit/jam element counts");
  common(modes);
  modes->add_option("--powers", powers, "Transmit powers in dBm")->capture_default_str();

  auto* convergence = app.add_subcommand("convergence", "Per-iteration rate trace");
  common(convergence);
  convergence->add_option("--power", convergence_power, "Transmit power in dBm")
      ->capture_default_str();

  auto* single = app.add_subcommand("single", "One optimization; writes the solution record");
  common(single);
  single->add_option("--power", power, "Transmit power in dBm")->capture_default_str();

  auto* replay = app.add_subcommand("replay", "Re-run the command recorded in a manifest");
  replay->add_option("manifest", manifest, "manifest.json of an earlier run")
      ->required()
      ->check(CLI::ExistingFile);
  replay->add_option("--out", out, "Output directory")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (replay->parsed()) {
      execute(from_manifest(manifest), out);
      return 0;
    }
    CLI::App* sub = app.get_subcommands().front();
    Run r;
    r.command = sub->get_name();
    r.cfg = config_path.empty() ? parse_config("{}", overrides)
                                : load_config(config_path, overrides);
    if (sub->count("--seed") > 0) r.cfg.seed = seed;
    r.trials = trials > 0 ? trials : (r.command == "k-sweep" ? 10 : 20);
    if (r.command == "convergence" || r.command == "single") r.trials = 1;
    r.powers = powers;
    r.schemes = schemes;
    r.k_values = k_values;
    r.power = r.command == "convergence" ? convergence_power : power;
    execute(r, out);
  } catch (const std::exception& e) {
    std::cerr << "starsec: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
