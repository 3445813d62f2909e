// Command-line front end for the coherence-transfer simulator. Every
// subcommand reads an optional key=value config file, applies convenience
// flags and --set overrides in order, runs one experiment driver and writes
// a CSV table to stdout or to the configured output path.

#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "combsim/experiments.hpp"
#include "combsim/selftest.hpp"

namespace {

struct CommonOpts {
  std::string config;
  std::vector<std::pair<std::string, std::string>> pre;  // convenience flags, in order
  std::vector<std::string> sets;
};

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t");
  const auto b = s.find_last_not_of(" \t");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

void add_common(CLI::App* sub, CommonOpts& c) {
  sub->add_option("--config", c.config, "key=value configuration file");
  auto alias = [sub, &c](const std::string& flag, const std::string& key,
                         const std::string& help) {
    sub->add_option_function<std::string>(
        flag, [&c, key](const std::string& v) { c.pre.emplace_back(key, v); }, help);
  };
  alias("--system", "system", "spin system file (default: built-in reference)");
  alias("--sequence", "sequence", "comma-separated sequence names or .seq paths");
  alias("--engine", "engine", "exact | effective");
  alias("--powder", "powder", "zcw3:N | beta_gl:N | grid:N | file:PATH");
  alias("--rf-dist", "rf_dist", "delta | lorentzian:PCT[:MODE[:N]] | gaussian:...");
  alias("--mixing-ms", "mixing_ms", "mixing time(s) in ms, or 'auto'");
  alias("--out", "out", "output CSV path (default: stdout)");
  sub->add_option("--set", c.sets, "override any config key: --set key=value")
      ->expected(-1)
      ->allow_extra_args(false);
}

combsim::ExperimentConfig make_config(const CommonOpts& c) {
  combsim::ExperimentConfig cfg = c.config.empty()
                                      ? combsim::ExperimentConfig{}
                                      : combsim::ExperimentConfig::from_file(c.config);
  for (const auto& [key, value] : c.pre) cfg.apply_override(key, value);
  for (const std::string& s : c.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--set expects key=value, got '" + s + "'");
    cfg.apply_override(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
  return cfg;
}

void emit(const combsim::CsvTable& table, const combsim::ExperimentConfig& cfg) {
  if (cfg.out.empty()) {
    combsim::write_csv(std::cout, table);
    return;
  }
  std::ofstream f(cfg.out);
  if (!f) throw std::runtime_error("cannot open output file: " + cfg.out);
  combsim::write_csv(f, table);
  std::cerr << "wrote " << cfg.out << "\n";
}

int run_selftest_cmd() {
  const auto results = combsim::run_selftest();
  std::printf("%-32s %-6s %-13s %-9s %s\n", "check", "status", "measured", "bound",
              "detail");
  for (const auto& r : results)
    std::printf("%-32s %-6s %-13.3e %-9.0e %s\n", r.name.c_str(),
                r.pass ? "PASS" : "FAIL", r.measured, r.bound, r.detail.c_str());
  return combsim::all_pass(results) ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dipolar-recoupling coherence transfer simulator"};
  app.require_subcommand(1);

  CommonOpts eff_o, map_o, prof_o, match_o, traj_o;
  auto* eff = app.add_subcommand("efficiency", "transfer efficiency vs mixing time");
  add_common(eff, eff_o);
  auto* map = app.add_subcommand("map", "efficiency map over rf scale and coupling scale");
  add_common(map, map_o);
  auto* prof = app.add_subcommand("profiles",
                                  "independent-channel rf and offset error profiles");
  add_common(prof, prof_o);
  auto* match = app.add_subcommand("matching", "efficiency vs I-channel rf field");
  add_common(match, match_o);
  auto* traj = app.add_subcommand("trajectory", "rotation-vector trajectory export");
  add_common(traj, traj_o);
  auto* self = app.add_subcommand("selftest", "run built-in invariant checks");

  std::string seq_name;
  auto* seqs = app.add_subcommand("sequences", "list built-in sequences or print one");
  seqs->add_option("--name", seq_name, "print the schedule for this sequence");

  CLI11_PARSE(app, argc, argv);

  try {
    if (eff->parsed()) {
      const auto cfg = make_config(eff_o);
      emit(combsim::to_csv(combsim::run_efficiency_vs_time(cfg), cfg), cfg);
    } else if (map->parsed()) {
      const auto cfg = make_config(map_o);
      emit(combsim::to_csv(combsim::run_map_rf_vs_dipole(cfg), cfg), cfg);
    } else if (prof->parsed()) {
      const auto cfg = make_config(prof_o);
      emit(combsim::to_csv(combsim::run_offset_rf_profiles(cfg), cfg), cfg);
    } else if (match->parsed()) {
      const auto cfg = make_config(match_o);
      emit(combsim::to_csv(combsim::run_matching_profile(cfg), cfg), cfg);
    } else if (traj->parsed()) {
      const auto cfg = make_config(traj_o);
      emit(combsim::to_csv(combsim::run_trajectory(cfg), cfg), cfg);
    } else if (self->parsed()) {
      return run_selftest_cmd();
    } else if (seqs->parsed()) {
      if (seq_name.empty()) {
        for (const auto& n : combsim::known_sequence_names()) std::cout << n << "\n";
      } else {
        std::cout << combsim::serialize_sequence(combsim::sequence_by_name(seq_name));
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
