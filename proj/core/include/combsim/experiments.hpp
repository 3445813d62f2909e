#pragma once
// Experiment drivers shared by the CLI and the test suite: mixing-time
// sweeps, robustness maps, rf/offset profiles, matching-condition profiles
// and rotation-vector trajectories, each with a deterministic CSV rendering.

#include "combsim/ensemble.hpp"
#include "combsim/exact.hpp"
#include "combsim/sequences.hpp"

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace combsim {

// Flat key=value configuration; every key can be overridden from the command
// line. Unknown keys are rejected. See ExperimentConfig::echo for the list.
struct ExperimentConfig {
  std::string system_path;                    // empty = built-in reference system
  std::string sequence = "dcp";               // comma-separated names or file paths
  std::string engine = "exact";               // exact | effective
  std::string powder = "zcw3:4180";
  std::string rf_dist = "delta";              // shape[:width[:mode[:nodes]]]
  std::string width_convention = "fwhm";      // fwhm | hwhm
  double rf_span_fwhm = 1.5;                  // truncation half-range
  int time_points = 64;
  double t_max_factor = 2.0;
  double match_p = 3.5;
  double match_q = 2.5;
  int slices_per_rotor = 128;
  std::string pulse_model = "instantaneous";  // instantaneous | finite:<kHz>
  double dipole_min = 0.0, dipole_max = 2.0;
  int dipole_points = 21;
  double rf_scale_min = 0.85, rf_scale_max = 1.15;
  int rf_scale_points = 21;
  double rf_delta_max = 0.1;
  int rf_delta_points = 9;
  double offset_max_hz = 4000.0;
  int offset_points = 9;
  double rf_I_min_khz = 31.0, rf_I_max_khz = 39.0;
  int rf_I_points = 81;
  double rf_S_khz = 25.0;
  std::string mixing_ms = "auto";             // number, comma list, or "auto"
  std::string gamma_list_deg = "0,30,60,90,120,150";
  int samples_per_quarter = 32;
  double kappa_scale = 1.0;
  std::string out;                            // output path; empty = stdout

  static ExperimentConfig from_file(const std::string& path);
  void apply_override(const std::string& key, const std::string& value);
  std::vector<std::pair<std::string, std::string>> echo() const;

  // resolved helpers
  SpinSystem system() const;
  std::vector<SequenceDescriptor> sequence_list() const;
  std::vector<CrystalliteOrientation> powder_set() const;
  RfDistSpec rf_dist_spec() const;
  MatchSpec match() const;
  PulseModel pulse() const;
  std::vector<double> gamma_values_rad() const;
  // per-sequence fixed mixing time; "auto" uses built-in defaults for the
  // named transfer sequences and throws otherwise
  double mixing_time_s(const SequenceDescriptor& seq, std::size_t index) const;
};

struct CsvTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> footer;
};
void write_csv(std::ostream& out, const CsvTable& table);
std::string fmt9(double v);  // %.9g

// ---- mixing-time sweeps ----
struct EfficiencyCurve {
  std::string sequence;
  std::vector<double> time_ms;
  std::vector<double> eff;
  double peak_eff = 0.0;
  double peak_time_ms = 0.0;
};
struct EfficiencyCurves {
  std::vector<EfficiencyCurve> curves;
};
EfficiencyCurves run_efficiency_vs_time(const ExperimentConfig& cfg);
CsvTable to_csv(const EfficiencyCurves& r, const ExperimentConfig& cfg);

// ---- recoupling-strength vs rf-scale robustness map ----
// effective engine: gamma-encoded single orientation, kappa_scale = dipole
// axis, correlated rf scale enters through the error fields during blocks.
// exact engine: powder + correlated rf multiplier, dipole_scale on the
// coupling, efficiency at the fixed per-sequence mixing time.
struct RobustnessMap {
  std::string sequence;
  std::vector<double> rf_scale;
  std::vector<double> dipole_scale;
  std::vector<std::vector<double>> eff;  // [rf][dipole]
  double mixing_ms = 0.0;
};
std::vector<RobustnessMap> run_map_rf_vs_dipole(const ExperimentConfig& cfg);
CsvTable to_csv(const std::vector<RobustnessMap>& r, const ExperimentConfig& cfg);

// ---- independent-channel rf and offset profiles (exact engine only) ----
struct ProfileGrid {
  std::string sequence;
  std::string mode;  // "rf" (delta_I x delta_S) or "offset" (Hz x Hz)
  std::vector<double> x1, x2;
  std::vector<std::vector<double>> eff;  // [x1][x2]
  double mixing_ms = 0.0;
};
struct OffsetRfProfiles {
  std::vector<ProfileGrid> grids;
};
OffsetRfProfiles run_offset_rf_profiles(const ExperimentConfig& cfg);
CsvTable to_csv(const OffsetRfProfiles& r, const ExperimentConfig& cfg);

// ---- matching-condition profile: I-channel rf sweep at fixed S rf ----
struct MatchingProfile {
  std::string sequence;
  std::vector<double> rf_I_khz;
  std::vector<double> eff;
  double fwhm_khz = 0.0;
  double mixing_ms = 0.0;
};
struct MatchingProfiles {
  std::vector<MatchingProfile> profiles;
};
MatchingProfiles run_matching_profile(const ExperimentConfig& cfg);
CsvTable to_csv(const MatchingProfiles& r, const ExperimentConfig& cfg);

// Interpolated full width at half maximum of a sampled profile; returns 0
// if the half level is not crossed on both sides of the peak.
double profile_fwhm(const std::vector<double>& x, const std::vector<double>& y);

// ---- rotation-vector trajectories ----
struct TrajectorySet {
  struct Item {
    std::string sequence;
    double gamma_deg = 0.0;
    std::vector<TrajectoryPoint> points;
  };
  std::vector<Item> items;
};
TrajectorySet run_trajectory(const ExperimentConfig& cfg);
CsvTable to_csv(const TrajectorySet& r, const ExperimentConfig& cfg);

}  // namespace combsim
