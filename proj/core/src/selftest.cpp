#include "combsim/selftest.hpp"

#include <cmath>
#include <random>

#include "combsim/effective.hpp"
#include "combsim/ensemble.hpp"
#include "combsim/sequences.hpp"
#include "combsim/spinops.hpp"

namespace combsim {

namespace {

CheckResult check(const std::string& name, double measured, double bound,
                  const std::string& detail) {
  return CheckResult{name, measured <= bound, measured, bound, detail};
}

double frobenius(const Operator4& m) { return m.norm(); }

CheckResult expm_is_unitary() {
  std::mt19937 rng(20240817);
  std::normal_distribution<double> g(0.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    Operator4 m;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) m(r, c) = std::complex<double>(g(rng), g(rng));
    const Operator4 h = 0.5 * (m + m.adjoint());
    std::uniform_real_distribution<double> tdist(-3.0, 3.0);
    const Operator4 u = expm_unitary(h, tdist(rng));
    worst = std::max(worst, unitarity_defect(u));
  }
  return check("expm_unitary", worst, 1e-12, "50 seeded random Hermitian generators");
}

CheckResult difference_subspace_conserves_sum() {
  const Basis& b = basis();
  double worst = 0.0;
  for (double gamma : {0.0, 0.9, 2.4, 4.8}) {
    EffectiveParams p;
    p.kappa = 1.0;
    p.gamma_angle = gamma;
    p.subspace = Subspace::minus;
    worst = std::max(worst, frobenius(commutator(effective_hamiltonian(p), b.Xp)));
  }
  return check("difference_conserves_sum_x", worst, 1e-12,
               "[H(gamma), X+] over difference-condition generators");
}

CheckResult sum_subspace_conserves_difference() {
  const Basis& b = basis();
  double worst = 0.0;
  for (double gamma : {0.0, 1.3, 3.7}) {
    EffectiveParams p;
    p.kappa = 1.0;
    p.gamma_angle = gamma;
    p.subspace = Subspace::plus;
    worst = std::max(worst, frobenius(commutator(effective_hamiltonian(p), b.Xm)));
  }
  return check("sum_conserves_difference_x", worst, 1e-12,
               "[H(gamma), X-] over sum-condition generators");
}

CheckResult gamma_encoded_efficiency() {
  double worst = 0.0;
  for (const char* name : {"dcp", "comb3dcp", "comb6dcp", "horror", "comb3horror"}) {
    const SequenceDescriptor seq = sequence_by_name(name);
    EffectiveParams p;
    p.kappa = 2 * M_PI * 300.0;
    p.subspace = seq.subspace;
    p.gamma_angle = 0.0;
    const double ref = effective_efficiency(seq, p);
    for (double gamma : {0.4, 1.7, 2.9, 4.2, 5.6}) {
      p.gamma_angle = gamma;
      worst = std::max(worst, std::abs(effective_efficiency(seq, p) - ref));
    }
  }
  return check("gamma_encoding", worst, 1e-10,
               "transfer efficiency independent of rotor phase gamma");
}

CheckResult composite_nominal_efficiency() {
  double worst = 0.0;
  for (const char* name : {"comb3dcp", "comb6dcp", "comb3horror"}) {
    const SequenceDescriptor seq = sequence_by_name(name);
    EffectiveParams p;
    p.kappa = 2 * M_PI * 300.0;
    p.subspace = seq.subspace;
    p.gamma_angle = 0.8;
    worst = std::max(worst, 1.0 - effective_efficiency(seq, p));
  }
  return check("composite_nominal_unity", worst, 1e-10,
               "composite schedules reach full transfer on nominal settings");
}

CheckResult phase_advance_identity() {
  const Basis& b = basis();
  double worst = 0.0;
  for (double gamma : {0.0, 0.7, 2.1}) {
    for (double theta : {M_PI / 2, -M_PI / 2, M_PI / 4, 1.1}) {
      for (double sign : {1.0, -1.0}) {
        EffectiveParams p;
        p.kappa = 1.0;
        p.gamma_angle = gamma;
        p.sign = sign;
        p.subspace = Subspace::minus;
        const Operator4 u = expm_unitary(b.Xm, theta);  // exp(-i theta X-)
        const Operator4 lhs = u * effective_hamiltonian(p) * u.adjoint();
        EffectiveParams shifted = p;
        shifted.gamma_angle = gamma - sign * theta;
        worst = std::max(worst, frobenius(lhs - effective_hamiltonian(shifted)));
      }
    }
  }
  return check("pulse_phase_advance", worst, 1e-10,
               "x rotation by theta shifts the encoded rotor phase by -sign*theta");
}

CheckResult quadrature_moment() {
  // sin^2(2 beta) has powder average 8/15; degree-4 polynomial in cos(beta),
  // so Gauss-Legendre with >= 3 nodes integrates it exactly.
  double worst = 0.0;
  for (int n : {8, 16, 32}) {
    double acc = 0.0;
    for (const auto& cr : powder_scheme(PowderKind::beta_gauss_legendre, n)) {
      const double s = std::sin(2.0 * cr.beta);
      acc += cr.weight * s * s;
    }
    worst = std::max(worst, std::abs(acc - 8.0 / 15.0));
  }
  return check("powder_quadrature_moment", worst, 1e-10,
               "Gauss-Legendre beta average of sin^2(2 beta) equals 8/15");
}

CheckResult rf_nodes_normalized() {
  double worst = 0.0;
  for (const char* spec : {"lorentzian:5:correlated:21", "gaussian:8:correlated:21",
                           "lorentzian:10:product:11"}) {
    const auto nodes = rf_distribution(parse_rf_dist(spec));
    double wsum = 0.0, mean_I = 0.0, mean_S = 0.0;
    for (const auto& n : nodes) {
      wsum += n.weight;
      mean_I += n.weight * n.scale_I;
      mean_S += n.weight * n.scale_S;
    }
    worst = std::max({worst, std::abs(wsum - 1.0), std::abs(mean_I - 1.0),
                      std::abs(mean_S - 1.0)});
  }
  return check("rf_distribution_normalized", worst, 1e-12,
               "rf node weights sum to 1 with symmetric unit mean");
}

}  // namespace

std::vector<CheckResult> run_selftest() {
  return {expm_is_unitary(),
          difference_subspace_conserves_sum(),
          sum_subspace_conserves_difference(),
          gamma_encoded_efficiency(),
          composite_nominal_efficiency(),
          phase_advance_identity(),
          quadrature_moment(),
          rf_nodes_normalized()};
}

bool all_pass(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

}  // namespace combsim
