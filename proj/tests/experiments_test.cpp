#include "combsim/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "doctest.h"

using namespace combsim;

namespace {
const char* data_dir = COMBSIM_DATA_DIR;
}

TEST_CASE("config overrides, file parsing, and echo") {
  ExperimentConfig cfg;
  cfg.apply_override("engine", "effective");
  cfg.apply_override("time_points", "12");
  cfg.apply_override("t_max_factor", "1.5");
  CHECK(cfg.engine == "effective");
  CHECK(cfg.time_points == 12);
  CHECK(cfg.t_max_factor == doctest::Approx(1.5));
  CHECK_THROWS_AS(cfg.apply_override("no_such_key", "1"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.apply_override("time_points", "1.5"), std::invalid_argument);
  CHECK_THROWS_AS(cfg.apply_override("match_p", "abc"), std::invalid_argument);

  {
    std::ofstream f("exp.cfg");
    f << "# comment\nsequence = comb3dcp\npowder = beta_gl:8 # inline\n\nmatch_p = 4.5\n";
  }
  const ExperimentConfig file = ExperimentConfig::from_file("exp.cfg");
  CHECK(file.sequence == "comb3dcp");
  CHECK(file.powder == "beta_gl:8");
  CHECK(file.match_p == doctest::Approx(4.5));
  std::remove("exp.cfg");

  bool saw_powder = false;
  for (const auto& [k, v] : cfg.echo())
    if (k == "powder") saw_powder = (v == "zcw3:4180");
  CHECK(saw_powder);
}

TEST_CASE("config resolved helpers") {
  ExperimentConfig cfg;
  cfg.sequence = "dcp, comb3dcp";
  const auto seqs = cfg.sequence_list();
  REQUIRE(seqs.size() == 2);
  CHECK(seqs[1].name == "comb3dcp");

  cfg.sequence = std::string(data_dir) + "/sequences/comb6dcp.seq";
  CHECK(cfg.sequence_list()[0].name == "comb6dcp");

  CHECK(cfg.gamma_values_rad().size() == 6);
  cfg.gamma_list_deg = "0,90";
  CHECK(cfg.gamma_values_rad()[1] == doctest::Approx(M_PI / 2));

  cfg.pulse_model = "finite:50";
  CHECK(cfg.pulse().instantaneous == false);
  CHECK(cfg.pulse().amp_hz == doctest::Approx(50e3));
  cfg.pulse_model = "square:50";
  CHECK_THROWS_AS((void)cfg.pulse(), std::invalid_argument);
  cfg.pulse_model = "instantaneous";

  CHECK(cfg.mixing_time_s(sequence_by_name("dcp"), 0) == doctest::Approx(1.8e-3));
  CHECK(cfg.mixing_time_s(sequence_by_name("comb6dcp"), 2) == doctest::Approx(12.8e-3));
  CHECK_THROWS_AS((void)cfg.mixing_time_s(sequence_by_name("composite2q"), 0),
                  std::invalid_argument);
  cfg.mixing_ms = "2.5";
  CHECK(cfg.mixing_time_s(sequence_by_name("dcp"), 3) == doctest::Approx(2.5e-3));
  cfg.mixing_ms = "1.0,2.0,3.0";
  CHECK(cfg.mixing_time_s(sequence_by_name("dcp"), 1) == doctest::Approx(2e-3));

  cfg.width_convention = "sideways";
  CHECK_THROWS_AS((void)cfg.rf_dist_spec(), std::invalid_argument);
}

TEST_CASE("csv rendering") {
  CsvTable t;
  t.metadata = {{"alpha", "1"}};
  t.columns = {"a", "b"};
  t.rows = {{"1", "2"}, {"3", "4"}};
  t.footer = {"note"};
  std::ostringstream out;
  write_csv(out, t);
  CHECK(out.str() == "# alpha = 1\na,b\n1,2\n3,4\n# note\n");
  CHECK(fmt9(0.1) == "0.1");
  CHECK(fmt9(1234567891.0) == "1.23456789e+09");
}

TEST_CASE("profile width helper") {
  const std::vector<double> x = {0, 1, 2, 3, 4};
  CHECK(profile_fwhm(x, {0.0, 0.5, 1.0, 0.5, 0.0}) == doctest::Approx(2.0));
  CHECK(profile_fwhm(x, {0.9, 1.0, 0.95, 0.9, 0.85}) == doctest::Approx(0.0));  // no crossing
  CHECK(profile_fwhm(x, {0.0, 0.0, 0.0, 0.0, 0.0}) == doctest::Approx(0.0));
}

TEST_CASE("effective time sweep hits the closed-form powder peak") {
  ExperimentConfig cfg;
  cfg.engine = "effective";
  cfg.sequence = "dcp";
  cfg.powder = "beta_gl:32";
  cfg.time_points = 129;
  const auto res = run_efficiency_vs_time(cfg);
  REQUIRE(res.curves.size() == 1);
  const auto& c = res.curves[0];
  CHECK(c.time_ms.front() == doctest::Approx(0.0));
  CHECK(c.eff.front() == doctest::Approx(0.0));
  CHECK(c.peak_eff == doctest::Approx(0.7329).epsilon(2e-3));
  // nominal pi time for 890 Hz coupling is ~1.59 ms; powder peak sits later
  CHECK(c.peak_time_ms > 1.6);
  CHECK(c.peak_time_ms < 2.3);
}

TEST_CASE("exact and effective engines agree on the plain transfer peak") {
  ExperimentConfig cfg;
  cfg.sequence = "dcp";
  cfg.engine = "exact";
  cfg.powder = "zcw3:89";
  cfg.time_points = 48;
  const double exact_peak = run_efficiency_vs_time(cfg).curves[0].peak_eff;
  cfg.engine = "effective";
  cfg.powder = "beta_gl:32";
  const double eff_peak = run_efficiency_vs_time(cfg).curves[0].peak_eff;
  CHECK(std::abs(exact_peak - eff_peak) < 0.08);
}

TEST_CASE("robustness map: nominal cell is full transfer for the composite") {
  ExperimentConfig cfg;
  cfg.engine = "effective";
  cfg.sequence = "comb3dcp";
  cfg.rf_scale_min = 0.9;
  cfg.rf_scale_max = 1.1;
  cfg.rf_scale_points = 3;
  cfg.dipole_min = 0.0;
  cfg.dipole_max = 2.0;
  cfg.dipole_points = 5;
  const auto maps = run_map_rf_vs_dipole(cfg);
  REQUIRE(maps.size() == 1);
  const auto& m = maps[0];
  REQUIRE(m.rf_scale.size() == 3);
  REQUIRE(m.dipole_scale.size() == 5);
  CHECK(m.eff[1][2] == doctest::Approx(1.0).epsilon(1e-9));  // (rf=1, dipole=1)
  CHECK(m.eff[1][0] == doctest::Approx(0.0).epsilon(1e-9));  // no coupling, no transfer
  const auto csv = to_csv(maps, cfg);
  CHECK(csv.rows.size() == 15);
  CHECK(csv.columns.size() == 4);
}

TEST_CASE("offset and rf profiles on a single orientation") {
  ExperimentConfig cfg;
  cfg.sequence = "dcp,comb3dcp";
  cfg.powder = "grid:1";
  cfg.rf_delta_points = 3;
  cfg.rf_delta_max = 0.05;
  cfg.offset_points = 5;
  cfg.offset_max_hz = 4000.0;
  const auto res = run_offset_rf_profiles(cfg);
  REQUIRE(res.grids.size() == 4);  // (rf, offset) x 2 sequences
  CHECK(res.grids[0].mode == "rf");
  CHECK(res.grids[1].mode == "offset");
  // center cells (no error) reproduce the plain efficiencies at fixed times
  const auto& dcp_rf = res.grids[0];
  CHECK(dcp_rf.eff[1][1] > 0.5);
  // offset area statistic: compensated sequence keeps more of the grid alive
  int live_dcp = 0, live_c3 = 0;
  for (std::size_t i = 0; i < 5; ++i)
    for (std::size_t j = 0; j < 5; ++j) {
      live_dcp += res.grids[1].eff[i][j] >= 0.5;
      live_c3 += res.grids[3].eff[i][j] >= 0.5;
    }
  CHECK(live_c3 >= live_dcp);
  CHECK(live_c3 >= 15);  // >= 60% of 25 cells

  cfg.engine = "effective";
  CHECK_THROWS_AS((void)run_offset_rf_profiles(cfg), std::invalid_argument);
}

TEST_CASE("matching profile peaks at the nominal rf field") {
  ExperimentConfig cfg;
  cfg.sequence = "dcp";
  cfg.powder = "zcw3:55";
  cfg.rf_I_min_khz = 33.0;
  cfg.rf_I_max_khz = 37.0;
  cfg.rf_I_points = 5;
  const auto res = run_matching_profile(cfg);
  REQUIRE(res.profiles.size() == 1);
  const auto& p = res.profiles[0];
  REQUIRE(p.eff.size() == 5);
  CHECK(p.rf_I_khz[2] == doctest::Approx(35.0));
  for (int k : {0, 1, 3, 4}) CHECK(p.eff[2] > p.eff[k]);
  cfg.engine = "effective";
  CHECK_THROWS_AS((void)run_matching_profile(cfg), std::invalid_argument);
}

TEST_CASE("trajectory csv export") {
  ExperimentConfig cfg;
  cfg.sequence = "comb3dcp";
  cfg.gamma_list_deg = "0,60";
  cfg.samples_per_quarter = 4;
  const auto res = run_trajectory(cfg);
  REQUIRE(res.items.size() == 2);
  const auto csv = to_csv(res, cfg);
  CHECK(csv.columns.size() == 8);
  CHECK(csv.rows.size() == res.items[0].points.size() + res.items[1].points.size());
  CHECK(csv.rows[0][3] == "start");
}
