#pragma once
// Time-sliced exact propagation of the full rotating-frame Hamiltonian
//   H(t) = w_I(t) Iz + w_S(t) Sz + w_IS(t) 2IzSz
//        + rf_I (cos(ph_I) Ix + sin(ph_I) Iy) + rf_S (...)
//        + 2 pi off_I Iz + 2 pi off_S Sz
// with midpoint sampling on a fixed grid of slices per rotor period. Because
// H is rotor-periodic, one period of slice propagators plus its powers give
// the propagator between any two grid points in O(1) 4x4 products, which
// makes long mixing-time sweeps cheap.

#include "combsim/interactions.hpp"
#include "combsim/sequences.hpp"
#include "combsim/spinops.hpp"

#include <vector>

namespace combsim {

// Recoupling match: rf amplitudes are p and q rotor frequencies on the I and
// S channels. Non-integer p +- q avoids rotary resonance; p - q = 1 with
// p + q > 2 selects the zero-quantum transfer condition.
struct MatchSpec {
  double p = 3.5;
  double q = 2.5;
  double rf_phase_I = 0.0;  // rad
  double rf_phase_S = 0.0;
  int slices_per_rotor = 128;
};

// Multiplicative rf amplitude errors (applied to CW fields and hard pulses)
// and constant resonance offsets.
struct RfErrorSpec {
  double delta_I = 0.0;  // fractional amplitude error, field = nominal*(1+delta)
  double delta_S = 0.0;
  double offset_I_hz = 0.0;
  double offset_S_hz = 0.0;
};

// Hard pulse realization: instantaneous rotations (default) or finite pulses
// at amp_hz, simulated slice-by-slice with the internal Hamiltonian active
// and the CW recoupling fields suspended. Finite pulse durations round to
// the nearest whole slice (at least one); the amplitude is rescaled so the
// flip angle is preserved exactly.
struct PulseModel {
  bool instantaneous = true;
  double amp_hz = 100e3;
};

// Single midpoint-sampled slice propagator over [t0, t0+dt].
Operator4 slice_propagator(const FourierHamiltonian& fh, double rf_I_rad, double phase_I,
                           double rf_S_rad, double phase_S, double off_I_rad, double off_S_rad,
                           double t0, double dt);

// One rotor period of slice propagators for fixed rf fields, with prefix
// products and period powers. cumulative(k) is the propagator from grid
// point 0 to grid point k; span(a, b) from a to b.
class SliceCache {
 public:
  SliceCache(const FourierHamiltonian& fh, double rf_I_rad, double phase_I, double rf_S_rad,
             double phase_S, double off_I_rad, double off_S_rad, int slices_per_rotor,
             long max_slice);

  Operator4 cumulative(long k) const;
  Operator4 span(long a, long b) const;
  const Operator4& period() const { return prefix_.back(); }
  int slices_per_rotor() const { return n_s_; }
  double dt() const { return dt_; }

 private:
  int n_s_;
  double dt_;
  std::vector<Operator4> prefix_;  // prefix_[k] = U(0 -> k dt), k = 0..n_s
  std::vector<Operator4> powers_;  // powers_[j] = period^j
};

// Channel multipliers combining an ensemble rf node with a deterministic
// error: field = nominal * mult.
struct ChannelMult {
  double mult_I = 1.0;
  double mult_S = 1.0;
};

// Bound state for evaluating one sequence on one crystallite and rf setting
// at many mixing times. Construction builds the slice cache for the longest
// requested block grid; efficiency(s_q) then propagates the schedule with
// s_q slices per quarter turn (mixing time = total_quarter_turns*s_q*dt).
class ExactSequenceEvaluator {
 public:
  ExactSequenceEvaluator(const SpinSystem& sys, const CrystalliteOrientation& cr,
                         const SequenceDescriptor& seq, const MatchSpec& match,
                         const RfErrorSpec& rf_error, const ChannelMult& mult,
                         const PulseModel& pulse, int max_slices_per_quarter,
                         double dipole_scale = 1.0, long origin_slice = 0);

  double efficiency(int slices_per_quarter) const;
  Operator4 propagator(int slices_per_quarter) const;
  double dt() const { return cache_.dt(); }

 private:
  SequenceDescriptor seq_;
  FourierHamiltonian fh_;
  double rf_I_rad_, rf_S_rad_, phase_I_, phase_S_, off_I_rad_, off_S_rad_;
  double mult_I_, mult_S_;
  PulseModel pulse_;
  long origin_;
  SliceCache cache_;
};

// One-shot exact efficiency for a single crystallite.
double simulate_sequence_exact(const SpinSystem& sys, const CrystalliteOrientation& cr,
                               const SequenceDescriptor& seq, const MatchSpec& match,
                               const RfErrorSpec& rf_error, int slices_per_quarter,
                               const PulseModel& pulse = {}, double dipole_scale = 1.0,
                               long origin_slice = 0);

// Nominal recoupling strength |b|/(2 sqrt(2)) used for schedule durations.
double nominal_kappa_max(const SpinSystem& sys);

// Mixing-time grid for sweeps: n_points slice counts per quarter turn from 0
// to t_max_factor times the nominal quarter-turn duration, deduplicated.
struct TimeGrid {
  std::vector<int> slices_per_quarter;  // excludes zero
  std::vector<double> time_s;           // total mixing time per entry
  int total_quarter_turns = 0;
  double dt = 0.0;
};
TimeGrid mixing_time_grid(const SpinSystem& sys, const SequenceDescriptor& seq,
                          const MatchSpec& match, int n_points, double t_max_factor);

// Slice count per quarter turn for a fixed total mixing time; throws unless
// the time lands on a whole per-quarter slice count within tol_slices.
int slices_per_quarter_for_time(const SpinSystem& sys, const SequenceDescriptor& seq,
                                const MatchSpec& match, double t_mix_s,
                                double tol_slices = 1e-6);

// Per-crystallite comparison of the exact propagation against the
// first-order effective Hamiltonian built from the A_n amplitudes of the
// same crystallite (general two-subspace form).
struct EffectiveVsExactReport {
  double mean_abs_delta = 0.0;
  double max_abs_delta = 0.0;
  std::vector<double> exact_eff;
  std::vector<double> effective_eff;
};
EffectiveVsExactReport effective_vs_exact_report(const SpinSystem& sys,
                                                 const SequenceDescriptor& seq,
                                                 const std::vector<CrystalliteOrientation>& powder,
                                                 const MatchSpec& match, int slices_per_quarter);

}  // namespace combsim
