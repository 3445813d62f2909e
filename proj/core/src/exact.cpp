#include "combsim/exact.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace combsim {

namespace {

Operator4 slice_hamiltonian(const FourierHamiltonian& fh, double rf_I_rad, double phase_I,
                            double rf_S_rad, double phase_S, double off_I_rad, double off_S_rad,
                            double t_mid) {
  const Basis& bs = basis();
  const double w_i = std::real(fh.eval(Channel::I, t_mid)) + off_I_rad;
  const double w_s = std::real(fh.eval(Channel::S, t_mid)) + off_S_rad;
  const double w_is = std::real(fh.eval(Channel::IS, t_mid));
  Operator4 h = w_i * bs.Iz + w_s * bs.Sz + w_is * bs.IzSz;
  if (rf_I_rad != 0.0)
    h += rf_I_rad * (std::cos(phase_I) * bs.Ix + std::sin(phase_I) * bs.Iy);
  if (rf_S_rad != 0.0)
    h += rf_S_rad * (std::cos(phase_S) * bs.Sx + std::sin(phase_S) * bs.Sy);
  return h;
}

}  // namespace

Operator4 slice_propagator(const FourierHamiltonian& fh, double rf_I_rad, double phase_I,
                           double rf_S_rad, double phase_S, double off_I_rad, double off_S_rad,
                           double t0, double dt) {
  return expm_unitary(
      slice_hamiltonian(fh, rf_I_rad, phase_I, rf_S_rad, phase_S, off_I_rad, off_S_rad,
                        t0 + 0.5 * dt),
      dt);
}

SliceCache::SliceCache(const FourierHamiltonian& fh, double rf_I_rad, double phase_I,
                       double rf_S_rad, double phase_S, double off_I_rad, double off_S_rad,
                       int slices_per_rotor, long max_slice)
    : n_s_(slices_per_rotor) {
  if (n_s_ < 1) throw std::invalid_argument("SliceCache: slices_per_rotor must be >= 1");
  if (fh.omega_r <= 0.0) throw std::invalid_argument("SliceCache: rotor frequency must be > 0");
  dt_ = (2.0 * M_PI / fh.omega_r) / n_s_;
  prefix_.resize(n_s_ + 1);
  prefix_[0].setIdentity();
  for (int k = 0; k < n_s_; ++k)
    prefix_[k + 1] =
        slice_propagator(fh, rf_I_rad, phase_I, rf_S_rad, phase_S, off_I_rad, off_S_rad,
                         k * dt_, dt_) *
        prefix_[k];
  const long max_periods = std::max<long>(0, max_slice / n_s_ + 1);
  powers_.resize(max_periods + 1);
  powers_[0].setIdentity();
  for (long j = 0; j < max_periods; ++j) powers_[j + 1] = prefix_[n_s_] * powers_[j];
}

Operator4 SliceCache::cumulative(long k) const {
  if (k < 0) throw std::out_of_range("SliceCache::cumulative: negative slice");
  const long f = k / n_s_;
  const long r = k % n_s_;
  if (f >= static_cast<long>(powers_.size()))
    throw std::out_of_range("SliceCache::cumulative: slice beyond cached horizon");
  return prefix_[r] * powers_[f];
}

Operator4 SliceCache::span(long a, long b) const {
  if (b < a) throw std::invalid_argument("SliceCache::span: b < a");
  return cumulative(b) * cumulative(a).adjoint();
}

namespace {

// Finite-pulse realization: consecutive pulses on disjoint channels are
// played simultaneously; the group lasts as long as its longest pulse.
struct PulseGroup {
  double amp_flip_I = 0.0;  // total flip on each channel (rad, before mult)
  double amp_flip_S = 0.0;
  double phase_I = 0.0;
  double phase_S = 0.0;
  bool has_I = false, has_S = false;
  std::vector<const HardPulse*> members;
};

bool channels_conflict(const PulseGroup& g, const HardPulse& p) {
  const bool wants_i = p.channel != PulseChannel::S;
  const bool wants_s = p.channel != PulseChannel::I;
  return (wants_i && g.has_I) || (wants_s && g.has_S);
}

void add_to_group(PulseGroup& g, const HardPulse& p) {
  if (p.channel != PulseChannel::S) {
    g.has_I = true;
    g.amp_flip_I = p.flip;
    g.phase_I = p.phase;
  }
  if (p.channel != PulseChannel::I) {
    g.has_S = true;
    g.amp_flip_S = p.flip;
    g.phase_S = p.phase;
  }
  g.members.push_back(&p);
}

long group_slices(const PulseGroup& g, const PulseModel& pm, double dt) {
  const double flip = std::max(g.amp_flip_I, g.amp_flip_S);
  const double t_ideal = flip / (2.0 * M_PI * pm.amp_hz);
  return std::max<long>(1, std::lround(t_ideal / dt));
}

Operator4 instantaneous_pulse(const HardPulse& p, double mult_I, double mult_S) {
  const Basis& bs = basis();
  Operator4 g = Operator4::Zero();
  const double c = std::cos(p.phase), s = std::sin(p.phase);
  if (p.channel != PulseChannel::S) g += p.flip * mult_I * (c * bs.Ix + s * bs.Iy);
  if (p.channel != PulseChannel::I) g += p.flip * mult_S * (c * bs.Sx + s * bs.Sy);
  return expm_unitary(g, 1.0);
}

std::vector<PulseGroup> collect_groups(const std::vector<Segment>& segs, size_t& i) {
  // called with segs[i] a HardPulse; consumes the whole run
  std::vector<PulseGroup> groups;
  PulseGroup cur;
  while (i < segs.size()) {
    const auto* p = std::get_if<HardPulse>(&segs[i]);
    if (!p) break;
    if (!cur.members.empty() && channels_conflict(cur, *p)) {
      groups.push_back(cur);
      cur = PulseGroup{};
    }
    add_to_group(cur, *p);
    ++i;
  }
  if (!cur.members.empty()) groups.push_back(cur);
  return groups;
}

}  // namespace

ExactSequenceEvaluator::ExactSequenceEvaluator(const SpinSystem& sys,
                                               const CrystalliteOrientation& cr,
                                               const SequenceDescriptor& seq,
                                               const MatchSpec& match,
                                               const RfErrorSpec& rf_error,
                                               const ChannelMult& mult, const PulseModel& pulse,
                                               int max_slices_per_quarter, double dipole_scale,
                                               long origin_slice)
    : seq_(seq),
      fh_(fourier_coeffs(sys, cr, dipole_scale)),
      phase_I_(match.rf_phase_I),
      phase_S_(match.rf_phase_S),
      off_I_rad_(2.0 * M_PI * rf_error.offset_I_hz),
      off_S_rad_(2.0 * M_PI * rf_error.offset_S_hz),
      mult_I_(mult.mult_I * (1.0 + rf_error.delta_I)),
      mult_S_(mult.mult_S * (1.0 + rf_error.delta_S)),
      pulse_(pulse),
      origin_(origin_slice),
      cache_([&] {
        if (max_slices_per_quarter < 1)
          throw std::invalid_argument("ExactSequenceEvaluator: need >= 1 slice per quarter turn");
        if (origin_slice < 0)
          throw std::invalid_argument("ExactSequenceEvaluator: origin_slice must be >= 0");
        const double w_r = sys.omega_r();
        const double dt = (2.0 * M_PI / w_r) / match.slices_per_rotor;
        long total = origin_slice +
                     static_cast<long>(seq.total_quarter_turns()) * max_slices_per_quarter;
        if (!pulse.instantaneous) {
          size_t i = 0;
          const auto& segs = seq.segments;
          while (i < segs.size()) {
            if (std::holds_alternative<HardPulse>(segs[i])) {
              for (const auto& g : collect_groups(segs, i)) total += group_slices(g, pulse, dt);
            } else {
              ++i;
            }
          }
        }
        const double m_i = mult.mult_I * (1.0 + rf_error.delta_I);
        const double m_s = mult.mult_S * (1.0 + rf_error.delta_S);
        return SliceCache(fourier_coeffs(sys, cr, dipole_scale), match.p * w_r * m_i,
                          match.rf_phase_I, match.q * w_r * m_s, match.rf_phase_S,
                          2.0 * M_PI * rf_error.offset_I_hz, 2.0 * M_PI * rf_error.offset_S_hz,
                          match.slices_per_rotor, total);
      }()) {
  rf_I_rad_ = match.p * sys.omega_r() * mult_I_;
  rf_S_rad_ = match.q * sys.omega_r() * mult_S_;
}

Operator4 ExactSequenceEvaluator::propagator(int slices_per_quarter) const {
  if (slices_per_quarter < 1)
    throw std::invalid_argument("slices_per_quarter must be >= 1");
  const double dt = cache_.dt();
  long k = origin_;
  Operator4 u = Operator4::Identity();
  const auto& segs = seq_.segments;
  size_t i = 0;
  while (i < segs.size()) {
    if (const auto* b = std::get_if<DipolarBlock>(&segs[i])) {
      const long n = static_cast<long>(b->quarter_turns) * slices_per_quarter;
      u = cache_.span(k, k + n) * u;
      k += n;
      ++i;
    } else if (pulse_.instantaneous) {
      u = instantaneous_pulse(std::get<HardPulse>(segs[i]), mult_I_, mult_S_) * u;
      ++i;
    } else {
      for (const auto& g : collect_groups(segs, i)) {
        const long n_g = group_slices(g, pulse_, dt);
        const double amp_i = g.has_I ? g.amp_flip_I / (n_g * dt) * mult_I_ : 0.0;
        const double amp_s = g.has_S ? g.amp_flip_S / (n_g * dt) * mult_S_ : 0.0;
        for (long j = 0; j < n_g; ++j) {
          u = slice_propagator(fh_, amp_i, g.phase_I, amp_s, g.phase_S, off_I_rad_, off_S_rad_,
                               (k + j) * dt, dt) *
              u;
        }
        k += n_g;
      }
    }
  }
  return u;
}

double ExactSequenceEvaluator::efficiency(int slices_per_quarter) const {
  return transfer_efficiency(propagator(slices_per_quarter));
}

double simulate_sequence_exact(const SpinSystem& sys, const CrystalliteOrientation& cr,
                               const SequenceDescriptor& seq, const MatchSpec& match,
                               const RfErrorSpec& rf_error, int slices_per_quarter,
                               const PulseModel& pulse, double dipole_scale, long origin_slice) {
  ExactSequenceEvaluator ev(sys, cr, seq, match, rf_error, ChannelMult{}, pulse,
                            slices_per_quarter, dipole_scale, origin_slice);
  return ev.efficiency(slices_per_quarter);
}

double nominal_kappa_max(const SpinSystem& sys) {
  return std::abs(sys.b_IS_rad()) / (2.0 * std::sqrt(2.0));
}

TimeGrid mixing_time_grid(const SpinSystem& sys, const SequenceDescriptor& seq,
                          const MatchSpec& match, int n_points, double t_max_factor) {
  if (n_points < 2) throw std::invalid_argument("mixing_time_grid: need >= 2 points");
  const double kmax = nominal_kappa_max(sys);
  if (kmax <= 0.0) throw std::invalid_argument("mixing_time_grid: zero dipolar coupling");
  TimeGrid g;
  g.total_quarter_turns = seq.total_quarter_turns();
  g.dt = (2.0 * M_PI / sys.omega_r()) / match.slices_per_rotor;
  const double t_quarter_max = t_max_factor * 0.5 * M_PI / kmax;
  const long s_max = std::max<long>(1, std::lround(t_quarter_max / g.dt));
  long prev = 0;
  for (int k = 1; k < n_points; ++k) {
    long s = std::max<long>(1, std::lround(double(k) * s_max / (n_points - 1)));
    if (s == prev) continue;
    prev = s;
    g.slices_per_quarter.push_back(static_cast<int>(s));
    g.time_s.push_back(double(g.total_quarter_turns) * s * g.dt);
  }
  return g;
}

int slices_per_quarter_for_time(const SpinSystem& sys, const SequenceDescriptor& seq,
                                const MatchSpec& match, double t_mix_s, double tol_slices) {
  const double dt = (2.0 * M_PI / sys.omega_r()) / match.slices_per_rotor;
  const int nq = seq.total_quarter_turns();
  const double s = t_mix_s / (nq * dt);
  const long r = std::lround(s);
  if (r < 1 || std::abs(s - r) > tol_slices)
    throw std::invalid_argument(
        "mixing time does not land on a whole slice count per quarter turn; pick a multiple of "
        "total_quarter_turns*dt");
  return static_cast<int>(r);
}

EffectiveVsExactReport effective_vs_exact_report(const SpinSystem& sys,
                                                 const SequenceDescriptor& seq,
                                                 const std::vector<CrystalliteOrientation>& powder,
                                                 const MatchSpec& match,
                                                 int slices_per_quarter) {
  EffectiveVsExactReport rep;
  const double dt = (2.0 * M_PI / sys.omega_r()) / match.slices_per_rotor;
  const double t_quarter = slices_per_quarter * dt;
  auto near_int = [](double x, int& n) {
    n = static_cast<int>(std::lround(x));
    return std::abs(x - n) < 1e-9;
  };
  double wsum = 0.0, acc = 0.0;
  for (const auto& cr : powder) {
    const double exact = simulate_sequence_exact(sys, cr, seq, match, RfErrorSpec{},
                                                 slices_per_quarter);
    const FourierHamiltonian fh = fourier_coeffs(sys, cr);
    std::pair<Complex, Complex> a_sum{0.0, 0.0}, a_diff{0.0, 0.0};
    int n = 0;
    if (near_int(match.p + match.q, n)) a_sum = a_coefficients(fh, n);
    if (near_int(match.p - match.q, n)) a_diff = a_coefficients(fh, n);
    const Operator4 h_eff =
        effective_hamiltonian_general(a_sum.first, a_sum.second, a_diff.first, a_diff.second);
    const double eff =
        transfer_efficiency(sequence_propagator_general(seq, h_eff, t_quarter));
    rep.exact_eff.push_back(exact);
    rep.effective_eff.push_back(eff);
    const double d = std::abs(exact - eff);
    acc += cr.weight * d;
    wsum += cr.weight;
    rep.max_abs_delta = std::max(rep.max_abs_delta, d);
  }
  rep.mean_abs_delta = wsum > 0 ? acc / wsum : 0.0;
  return rep;
}

}  // namespace combsim
