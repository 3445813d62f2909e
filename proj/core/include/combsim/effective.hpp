#pragma once
// First-order effective Hamiltonians on the matched recoupling conditions,
// the closed-form transfer curve, and the powder-optimal mixing time for
// gamma-encoded zero-quantum recoupling.

#include "combsim/interactions.hpp"
#include "combsim/spinops.hpp"

#include <vector>

namespace combsim {

// Heteronuclear zero-quantum recoupling scaling factor
// kappa(beta) = -(1/(2 sqrt(2))) b sin(2 beta), b in rad/s.
double dcp_kappa(double b_rad, double beta);

// Homonuclear double-quantum analogue, 3/2 times larger:
// kappa(beta) = -(3/(4 sqrt(2))) b sin(2 beta).
double horror_kappa(double b_rad, double beta);

// General first-order effective Hamiltonian from the A_n^+- amplitudes on a
// match with sum sideband n_sum = p+q and difference sideband n_diff = p-q:
//   H = (A_sum^+ Z+ - i A_sum^- Y+) + (A_diff^+ Z- - i A_diff^- Y-).
// The A arguments must make the result Hermitian (A^+ real, A^- imaginary
// up to roundoff); throws otherwise.
Operator4 effective_hamiltonian_general(Complex a_sum_plus, Complex a_sum_minus,
                                        Complex a_diff_plus, Complex a_diff_minus);

// Reduced single-subspace parameterization
//   H = kappa [cos(gamma) Z(sigma) + sign sin(gamma) Y(sigma)]
//       + delta_rf_minus X- + delta_rf_plus X+
// where the X terms are the rf amplitude-error fields (rad/s).
struct EffectiveParams {
  double kappa = 0.0;         // rad/s
  double gamma_angle = 0.0;   // crystallite gamma (rotor phase) in rad
  double sign = 1.0;          // +-1 branch of the difference condition
  Subspace subspace = Subspace::minus;
  double delta_rf_minus = 0.0;  // rad/s, (delta_I - delta_S)/2 type field
  double delta_rf_plus = 0.0;   // rad/s, (delta_I + delta_S)/2 type field
};

Operator4 effective_hamiltonian(const EffectiveParams& p, double kappa_scale = 1.0);

// (1 - cos(kappa t)) / 2
double closed_form_transfer(double kappa, double t);

// Powder-averaged closed-form transfer at time t for coupling b (rad/s).
double powder_closed_form_transfer(double b_rad, const std::vector<CrystalliteOrientation>& powder,
                                   double t);

// Golden-section maximum of the powder-averaged closed-form transfer over
// t in (0, 2 pi / |kappa_max|], relative tolerance 1e-6.
struct PowderOptimum {
  double t_opt = 0.0;    // seconds
  double eff_max = 0.0;  // transfer efficiency at t_opt
};
PowderOptimum powder_optimal_dcp(double b_rad, const std::vector<CrystalliteOrientation>& powder);

}  // namespace combsim
