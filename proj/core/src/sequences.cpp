#include "combsim/sequences.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace combsim {

namespace {
constexpr double kPi = M_PI;
constexpr double kDegToRad = M_PI / 180.0;

HardPulse pulse(PulseChannel ch, double flip, double phase) { return {ch, flip, phase}; }
}  // namespace

int SequenceDescriptor::total_quarter_turns() const {
  int n = 0;
  for (const auto& seg : segments)
    if (const auto* b = std::get_if<DipolarBlock>(&seg)) n += b->quarter_turns;
  return n;
}

int SequenceDescriptor::count_blocks() const {
  int n = 0;
  for (const auto& seg : segments)
    if (std::holds_alternative<DipolarBlock>(seg)) ++n;
  return n;
}

SequenceDescriptor build_dcp() {
  SequenceDescriptor s;
  s.name = "dcp";
  s.subspace = Subspace::minus;
  s.segments = {DipolarBlock{2}};
  return s;
}

SequenceDescriptor build_comb3dcp() {
  SequenceDescriptor s;
  s.name = "comb3dcp";
  s.subspace = Subspace::minus;
  s.segments = {
      DipolarBlock{1},
      pulse(PulseChannel::I, kPi / 4, kPi), pulse(PulseChannel::S, kPi / 4, 0.0),
      DipolarBlock{2},
      pulse(PulseChannel::I, kPi / 4, 0.0), pulse(PulseChannel::S, kPi / 4, kPi),
      DipolarBlock{1},
  };
  return s;
}

SequenceDescriptor build_comb6dcp(bool mirror_final_pair) {
  SequenceDescriptor s;
  s.name = mirror_final_pair ? "comb6dcp_mirror" : "comb6dcp";
  s.subspace = Subspace::minus;
  const double f = mirror_final_pair ? 1.0 : 0.0;  // swap phases of last pair
  s.segments = {
      DipolarBlock{3},
      pulse(PulseChannel::I, kPi / 2, kPi), pulse(PulseChannel::S, kPi / 2, 0.0),
      DipolarBlock{4},
      pulse(PulseChannel::I, kPi / 4, kPi), pulse(PulseChannel::S, kPi / 4, 0.0),
      DipolarBlock{1},
      pulse(PulseChannel::I, kPi / 2, kPi), pulse(PulseChannel::S, kPi / 2, 0.0),
      DipolarBlock{3},
      pulse(PulseChannel::I, kPi / 2, kPi), pulse(PulseChannel::S, kPi / 2, 0.0),
      DipolarBlock{4},
      pulse(PulseChannel::I, kPi / 4, f * kPi), pulse(PulseChannel::S, kPi / 4, (1.0 - f) * kPi),
      DipolarBlock{1},
  };
  return s;
}

SequenceDescriptor build_horror() {
  SequenceDescriptor s;
  s.name = "horror";
  s.subspace = Subspace::plus;
  s.segments = {DipolarBlock{2}};
  return s;
}

SequenceDescriptor build_comb3horror() {
  SequenceDescriptor s;
  s.name = "comb3horror";
  s.subspace = Subspace::plus;
  s.segments = {
      DipolarBlock{1}, pulse(PulseChannel::Both, kPi / 4, kPi),
      DipolarBlock{2}, pulse(PulseChannel::Both, kPi / 4, 0.0),
      DipolarBlock{1},
  };
  return s;
}

SequenceDescriptor build_composite_2q() {
  SequenceDescriptor s;
  s.name = "composite2q";
  s.subspace = Subspace::plus;
  s.segments = {
      DipolarBlock{1}, pulse(PulseChannel::Both, kPi / 3, 0.0),
      DipolarBlock{2}, pulse(PulseChannel::Both, kPi / 3, kPi),
  };
  return s;
}

SequenceDescriptor sequence_by_name(const std::string& name) {
  if (name == "dcp") return build_dcp();
  if (name == "comb3dcp") return build_comb3dcp();
  if (name == "comb6dcp") return build_comb6dcp(false);
  if (name == "comb6dcp_mirror") return build_comb6dcp(true);
  if (name == "horror") return build_horror();
  if (name == "comb3horror") return build_comb3horror();
  if (name == "composite2q") return build_composite_2q();
  throw std::invalid_argument("unknown sequence name: " + name);
}

std::vector<std::string> known_sequence_names() {
  return {"dcp", "comb3dcp", "comb6dcp", "comb6dcp_mirror", "horror", "comb3horror",
          "composite2q"};
}

namespace {

std::string fmt_angle(double rad) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.10g", rad / kDegToRad);
  return buf;
}

const char* channel_token(PulseChannel ch) {
  switch (ch) {
    case PulseChannel::I: return "I";
    case PulseChannel::S: return "S";
    default: return "B";
  }
}

}  // namespace

std::string serialize_sequence(const SequenceDescriptor& seq) {
  std::ostringstream out;
  out << "name " << seq.name << "\n";
  out << "subspace " << (seq.subspace == Subspace::minus ? "minus" : "plus") << "\n";
  for (const auto& seg : seq.segments) {
    if (const auto* b = std::get_if<DipolarBlock>(&seg)) {
      out << "D " << b->quarter_turns << "\n";
    } else {
      const auto& p = std::get<HardPulse>(seg);
      out << "P " << channel_token(p.channel) << " " << fmt_angle(p.flip) << " "
          << fmt_angle(p.phase) << "\n";
    }
  }
  return out.str();
}

SequenceDescriptor parse_sequence(const std::string& text) {
  SequenceDescriptor seq;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error("sequence line " + std::to_string(lineno) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;
    if (tok == "name") {
      if (!(ls >> seq.name)) fail("missing sequence name");
    } else if (tok == "subspace") {
      std::string v;
      if (!(ls >> v)) fail("missing subspace value");
      if (v == "minus")
        seq.subspace = Subspace::minus;
      else if (v == "plus")
        seq.subspace = Subspace::plus;
      else
        fail("subspace must be 'minus' or 'plus', got '" + v + "'");
    } else if (tok == "D") {
      int qt = 0;
      if (!(ls >> qt)) fail("D needs an integer quarter-turn count");
      if (qt < 1) fail("quarter_turns must be >= 1");
      seq.segments.push_back(DipolarBlock{qt});
    } else if (tok == "P") {
      std::string ch;
      double flip_deg = 0, phase_deg = 0;
      if (!(ls >> ch >> flip_deg >> phase_deg)) fail("P needs: channel flip_deg phase_deg");
      HardPulse p;
      if (ch == "I")
        p.channel = PulseChannel::I;
      else if (ch == "S")
        p.channel = PulseChannel::S;
      else if (ch == "B" || ch == "Both")
        p.channel = PulseChannel::Both;
      else
        fail("channel must be I, S or B, got '" + ch + "'");
      p.flip = flip_deg * kDegToRad;
      p.phase = phase_deg * kDegToRad;
      seq.segments.push_back(p);
    } else {
      fail("unknown directive '" + tok + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing token '" + extra + "'");
  }
  if (seq.segments.empty()) throw std::runtime_error("sequence has no segments");
  return seq;
}

SequenceDescriptor load_sequence(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sequence file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  SequenceDescriptor seq = parse_sequence(ss.str());
  return seq;
}

Operator4 pulse_propagator(const HardPulse& p) {
  const Basis& bs = basis();
  Operator4 g = Operator4::Zero();
  const double c = std::cos(p.phase), s = std::sin(p.phase);
  if (p.channel == PulseChannel::I || p.channel == PulseChannel::Both)
    g += p.flip * (c * bs.Ix + s * bs.Iy);
  if (p.channel == PulseChannel::S || p.channel == PulseChannel::Both)
    g += p.flip * (c * bs.Sx + s * bs.Sy);
  return expm_unitary(g, 1.0);
}

namespace {

void require_compatible(const SequenceDescriptor& seq, const EffectiveParams& params) {
  if (seq.subspace != params.subspace)
    throw std::invalid_argument("sequence subspace does not match effective parameters");
  if (params.kappa == 0.0)
    throw std::invalid_argument("nominal kappa must be nonzero to set block durations");
}

}  // namespace

Operator4 sequence_propagator(const SequenceDescriptor& seq, const EffectiveParams& params,
                              double kappa_scale) {
  require_compatible(seq, params);
  const double t_quarter = 0.5 * kPi / std::abs(params.kappa);
  const Operator4 h = effective_hamiltonian(params, kappa_scale);
  Operator4 u = Operator4::Identity();
  for (const auto& seg : seq.segments) {
    if (const auto* b = std::get_if<DipolarBlock>(&seg))
      u = expm_unitary(h, b->quarter_turns * t_quarter) * u;
    else
      u = pulse_propagator(std::get<HardPulse>(seg)) * u;
  }
  return u;
}

Operator4 sequence_propagator_general(const SequenceDescriptor& seq, const Operator4& h_eff,
                                      double t_quarter) {
  Operator4 u = Operator4::Identity();
  for (const auto& seg : seq.segments) {
    if (const auto* b = std::get_if<DipolarBlock>(&seg))
      u = expm_unitary(h_eff, b->quarter_turns * t_quarter) * u;
    else
      u = pulse_propagator(std::get<HardPulse>(seg)) * u;
  }
  return u;
}

double effective_efficiency(const SequenceDescriptor& seq, const EffectiveParams& params,
                            double kappa_scale) {
  const Operator4 u = sequence_propagator(seq, params, kappa_scale);
  const Basis& bs = basis();
  const Operator4& x = bs.X(seq.subspace);
  const double norm = std::real((x * x).trace());
  const double v = std::real((x * u * x * u.adjoint()).trace()) / norm;
  return 0.5 * (1.0 - v);
}

double sequence_duration(const SequenceDescriptor& seq, const EffectiveParams& params) {
  if (params.kappa == 0.0)
    throw std::invalid_argument("nominal kappa must be nonzero to set block durations");
  return seq.total_quarter_turns() * 0.5 * kPi / std::abs(params.kappa);
}

double pulse_subspace_angle(const HardPulse& p, Subspace s) {
  const double m = std::fmod(std::abs(p.phase), 2.0 * kPi);
  const bool is_x = m < 1e-9 || std::abs(m - kPi) < 1e-9 || std::abs(m - 2.0 * kPi) < 1e-9;
  if (!is_x)
    throw std::invalid_argument(
        "pulse phase is not 0 or pi: rotation mixes the two subspaces and has no "
        "rotation-vector form");
  const double signed_flip = p.flip * std::cos(p.phase);
  double f_i = 0.0, f_s = 0.0;
  if (p.channel == PulseChannel::I || p.channel == PulseChannel::Both) f_i = signed_flip;
  if (p.channel == PulseChannel::S || p.channel == PulseChannel::Both) f_s = signed_flip;
  return s == Subspace::minus ? (f_i - f_s) : (f_i + f_s);
}

namespace {

struct RotVecWalker {
  RotVec3 v{1.0, 0.0, 0.0};
  RotVec3 block_axis;  // (delta, k sign sin(gamma), k cos(gamma)) normalized later
  double block_rate = 0.0;
  double t_quarter = 0.0;
  Subspace subspace = Subspace::minus;

  RotVecWalker(const SequenceDescriptor& seq, const EffectiveParams& params, double kappa_scale) {
    require_compatible(seq, params);
    subspace = seq.subspace;
    t_quarter = 0.5 * kPi / std::abs(params.kappa);
    const double k = params.kappa * kappa_scale;
    const double delta =
        params.subspace == Subspace::minus ? params.delta_rf_minus : params.delta_rf_plus;
    block_axis = {delta, k * params.sign * std::sin(params.gamma_angle),
                  k * std::cos(params.gamma_angle)};
    block_rate = block_axis.norm();
  }

  void evolve(double dt) {
    if (block_rate > 0.0) v = rotate(v, block_axis, block_rate * dt);
  }
  void apply(const HardPulse& p) {
    v = rotate(v, RotVec3{1.0, 0.0, 0.0}, pulse_subspace_angle(p, subspace));
  }
};

std::string roman_numeral(int n) {
  static const char* ones[] = {"", "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX"};
  static const char* tens[] = {"", "X", "XX", "XXX", "XL", "L"};
  if (n <= 0 || n >= 60) return std::to_string(n);
  return std::string(tens[n / 10]) + ones[n % 10];
}

}  // namespace

RotVec3 rotvec_endpoint(const SequenceDescriptor& seq, const EffectiveParams& params,
                        double kappa_scale) {
  RotVecWalker w(seq, params, kappa_scale);
  for (const auto& seg : seq.segments) {
    if (const auto* b = std::get_if<DipolarBlock>(&seg))
      w.evolve(b->quarter_turns * w.t_quarter);
    else
      w.apply(std::get<HardPulse>(seg));
  }
  return w.v;
}

double rotvec_efficiency(const SequenceDescriptor& seq, const EffectiveParams& params,
                         double kappa_scale) {
  return 0.5 * (1.0 - rotvec_endpoint(seq, params, kappa_scale).x);
}

std::vector<TrajectoryPoint> trajectory_export(const SequenceDescriptor& seq,
                                               const EffectiveParams& params,
                                               int samples_per_quarter, double kappa_scale) {
  if (samples_per_quarter < 1)
    throw std::invalid_argument("samples_per_quarter must be >= 1");
  RotVecWalker w(seq, params, kappa_scale);
  const double c = kSubspaceProjectionConstant;
  std::vector<TrajectoryPoint> out;
  out.push_back({0, "start", 0.0, c * w.v});

  int phase = 0;
  bool in_pulse_run = false;
  for (const auto& seg : seq.segments) {
    if (const auto* b = std::get_if<DipolarBlock>(&seg)) {
      ++phase;
      in_pulse_run = false;
      const int nsub = samples_per_quarter * b->quarter_turns;
      const double dt = b->quarter_turns * w.t_quarter / nsub;
      for (int k = 1; k <= nsub; ++k) {
        w.evolve(dt);
        out.push_back({phase, roman_numeral(phase), double(k) / nsub, c * w.v});
      }
    } else {
      if (!in_pulse_run) {
        ++phase;
        in_pulse_run = true;
      }
      w.apply(std::get<HardPulse>(seg));
      // overwrite progress so consecutive pulses in one phase stay ordered
      out.push_back({phase, roman_numeral(phase), 1.0, c * w.v});
    }
  }
  return out;
}

}  // namespace combsim
