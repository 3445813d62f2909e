#pragma once
// Recoupling sequence descriptors (dipolar evolution blocks interleaved with
// hard pulses), the composite compensation sequences, and two effective-engine
// propagation backends: full 4x4 operator propagation and the classical
// rotation-vector picture on a fictitious spin-1/2 subspace.

#include "combsim/effective.hpp"
#include "combsim/spinops.hpp"

#include <string>
#include <variant>
#include <vector>

namespace combsim {

enum class PulseChannel { I, S, Both };

// quarter_turns counts nominal pi/2 units of the recoupling rotation, i.e.
// the block duration is quarter_turns * (pi/2) / |kappa_nominal|.
struct DipolarBlock {
  int quarter_turns = 1;
};

// Instantaneous rotation of the addressed spins by `flip` about the axis
// (cos phase, sin phase, 0) in their rotating frames.
struct HardPulse {
  PulseChannel channel = PulseChannel::I;
  double flip = 0.0;   // rad
  double phase = 0.0;  // rad
};

using Segment = std::variant<DipolarBlock, HardPulse>;

struct SequenceDescriptor {
  std::string name = "custom";
  Subspace subspace = Subspace::minus;
  std::vector<Segment> segments;

  int total_quarter_turns() const;
  int count_blocks() const;
};

// Plain zero-quantum transfer: one pi rotation (2 quarter turns).
SequenceDescriptor build_dcp();
// Three-block compensated transfer: pi/2, pi, pi/2 blocks separated by
// -pi/2 / +pi/2 rotations about X-, realized as pi/4 pulse pairs of
// opposite phase on the two channels.
SequenceDescriptor build_comb3dcp();
// Six-block compensated transfer (3,4,1,3,4,1 quarter turns). The final
// pulse pair has the mirrored phase assignment relative to the others;
// mirror_final_pair = true flips it to match the second pair instead.
SequenceDescriptor build_comb6dcp(bool mirror_final_pair = false);
// Homonuclear double-quantum analogues; pulses act non-selectively on both
// spins (pi/4 flips give +-pi/2 rotations about X+).
SequenceDescriptor build_horror();
SequenceDescriptor build_comb3horror();
// Composite double-quantum excitation: pi/2 rotation, axis advance by
// +2pi/3, pi rotation, axis restore. Nominal endpoint sits on the equator.
SequenceDescriptor build_composite_2q();

// Lookup by name: dcp, comb3dcp, comb6dcp, comb6dcp_mirror, horror,
// comb3horror, composite2q. Throws std::invalid_argument for unknown names.
SequenceDescriptor sequence_by_name(const std::string& name);
std::vector<std::string> known_sequence_names();

// Text form: optional "name <id>" and "subspace <minus|plus>" directives,
// then one segment per line, "D <quarter_turns>" or
// "P <I|S|B> <flip_deg> <phase_deg>". '#' starts a comment.
std::string serialize_sequence(const SequenceDescriptor& seq);
SequenceDescriptor parse_sequence(const std::string& text);
SequenceDescriptor load_sequence(const std::string& path);

// ---- 4x4 effective-engine propagation ----

// Propagator of a single hard pulse (ideal flips; rf-error fields do not
// scale pulses in the effective engine).
Operator4 pulse_propagator(const HardPulse& p);

// Propagate the sequence under the reduced effective Hamiltonian. Block
// durations are quarter_turns * (pi/2) / |params.kappa| regardless of
// kappa_scale, so kappa_scale sweeps the recoupling strength against a
// fixed schedule. Throws if params.subspace != seq.subspace or kappa == 0.
Operator4 sequence_propagator(const SequenceDescriptor& seq, const EffectiveParams& params,
                              double kappa_scale = 1.0);

// Propagate under an arbitrary effective Hamiltonian with the given quarter
// turn duration (used to compare the general first-order Hamiltonian
// against exact propagation).
Operator4 sequence_propagator_general(const SequenceDescriptor& seq, const Operator4& h_eff,
                                      double t_quarter);

// (1 - <X(sigma)>_end) / 2 starting from X(sigma); equals
// transfer_efficiency(U) for zero-quantum sequences.
double effective_efficiency(const SequenceDescriptor& seq, const EffectiveParams& params,
                            double kappa_scale = 1.0);

// Total schedule duration in seconds for the nominal kappa in params.
double sequence_duration(const SequenceDescriptor& seq, const EffectiveParams& params);

// ---- rotation-vector propagation ----

// Signed rotation angle of a hard pulse about the X axis of subspace s.
// Requires phase = 0 or pi (mod 2pi); throws otherwise (such a pulse mixes
// the subspaces and has no rotation-vector representation).
double pulse_subspace_angle(const HardPulse& p, Subspace s);

struct TrajectoryPoint {
  int phase_index = 0;     // 0 = start, then consecutive trajectory phases
  std::string label;       // Roman numeral per phase ("I", "II", ...)
  double progress = 0.0;   // fraction of the phase completed, (0, 1]
  RotVec3 v;               // coordinates scaled so the start is (1,0,0)*c
};

// Endpoint of the rotation-vector trajectory in unit coordinates
// (start = (1,0,0)); efficiency = (1 - x_end)/2.
RotVec3 rotvec_endpoint(const SequenceDescriptor& seq, const EffectiveParams& params,
                        double kappa_scale = 1.0);
double rotvec_efficiency(const SequenceDescriptor& seq, const EffectiveParams& params,
                         double kappa_scale = 1.0);

// Sampled trajectory; blocks emit samples_per_quarter points per quarter
// turn, pulses emit one point. Consecutive pulses share one phase label, so
// the three-block comb produces phases I..V. Coordinates are scaled by
// kSubspaceProjectionConstant to match subspace_project of the initial Ix.
std::vector<TrajectoryPoint> trajectory_export(const SequenceDescriptor& seq,
                                               const EffectiveParams& params,
                                               int samples_per_quarter,
                                               double kappa_scale = 1.0);

}  // namespace combsim
