#include "combsim/effective.hpp"

#include <cmath>
#include <stdexcept>

namespace combsim {

double dcp_kappa(double b_rad, double beta) {
  return -b_rad * std::sin(2.0 * beta) / (2.0 * std::sqrt(2.0));
}

double horror_kappa(double b_rad, double beta) {
  return -3.0 * b_rad * std::sin(2.0 * beta) / (4.0 * std::sqrt(2.0));
}

Operator4 effective_hamiltonian_general(Complex a_sum_plus, Complex a_sum_minus,
                                        Complex a_diff_plus, Complex a_diff_minus) {
  const Basis& bs = basis();
  const Complex i(0.0, 1.0);
  Operator4 h = a_sum_plus * bs.Zp - i * a_sum_minus * bs.Yp + a_diff_plus * bs.Zm -
                i * a_diff_minus * bs.Ym;
  if (!is_hermitian(h, 1e-9 * (1.0 + h.cwiseAbs().maxCoeff())))
    throw std::invalid_argument(
        "effective_hamiltonian_general: amplitudes do not form a Hermitian operator");
  return 0.5 * (h + Operator4(h.adjoint()));  // strip roundoff asymmetry
}

Operator4 effective_hamiltonian(const EffectiveParams& p, double kappa_scale) {
  const Basis& bs = basis();
  const double k = p.kappa * kappa_scale;
  Operator4 h = k * (std::cos(p.gamma_angle) * bs.Z(p.subspace) +
                     p.sign * std::sin(p.gamma_angle) * bs.Y(p.subspace));
  h += p.delta_rf_minus * bs.Xm + p.delta_rf_plus * bs.Xp;
  return h;
}

double closed_form_transfer(double kappa, double t) {
  return 0.5 * (1.0 - std::cos(kappa * t));
}

double powder_closed_form_transfer(double b_rad, const std::vector<CrystalliteOrientation>& powder,
                                   double t) {
  double acc = 0.0, wsum = 0.0;
  for (const auto& cr : powder) {
    acc += cr.weight * closed_form_transfer(dcp_kappa(b_rad, cr.beta), t);
    wsum += cr.weight;
  }
  return acc / wsum;
}

PowderOptimum powder_optimal_dcp(double b_rad, const std::vector<CrystalliteOrientation>& powder) {
  if (powder.empty()) throw std::invalid_argument("powder_optimal_dcp: empty powder");
  const double kappa_max = std::abs(b_rad) / (2.0 * std::sqrt(2.0));
  if (kappa_max == 0.0) return {0.0, 0.0};
  auto f = [&](double t) { return powder_closed_form_transfer(b_rad, powder, t); };

  // Golden-section maximum on (0, 2 pi / kappa_max].
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = 2.0 * M_PI / kappa_max;
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  while ((b - a) > 1e-6 * b) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  const double t_opt = 0.5 * (a + b);
  return {t_opt, f(t_opt)};
}

}  // namespace combsim
