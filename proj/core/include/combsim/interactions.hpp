#pragma once
// Rotating-frame Hamiltonian coefficients for a heteronuclear two-spin
// system under magic-angle spinning. Each interaction lambda in {I, S, IS}
// is a rank-2 tensor whose rotating-frame frequency is the Fourier series
//   omega_lambda(t) = sum_{m=-2..2} omega_lambda^(m) exp(i m omega_r t),
// acting on Iz, Sz and 2IzSz respectively.

#include "combsim/spinops.hpp"

#include <array>
#include <string>
#include <vector>

namespace combsim {

// arccos(1/sqrt(3)), the rotor axis tilt that nulls m = 0 of rank-2 tensors.
inline constexpr double kMagicAngle = 0.9553166181245092781638573;

// Chemical-shift anisotropy in the Haeberlen convention:
// principal values iso + delta*{ -(1+eta)/2, -(1-eta)/2, 1 }.
struct CsaTensor {
  double delta_aniso_ppm = 0.0;
  double eta = 0.0;                       // 0 <= eta <= 1
  std::array<double, 3> euler_pc = {0, 0, 0};  // principal axes -> crystal, rad
};

struct SpinSystem {
  double iso_shift_I_hz = 0.0;
  double iso_shift_S_hz = 0.0;
  CsaTensor csa_I;
  CsaTensor csa_S;
  double b_IS_over_2pi_hz = 0.0;          // dipolar coupling b/2pi
  std::array<double, 3> euler_pc_IS = {0, 0, 0};
  double j_IS_hz = 0.0;                   // isotropic J coupling
  double proton_larmor_mhz = 700.0;       // field expressed as 1H frequency
  double spin_rate_hz = 10000.0;          // rotor frequency
  double xi_I = 0.25145020;               // Larmor ratio vs 1H (13C default)
  double xi_S = 0.10136767;               // Larmor ratio vs 1H (15N default)

  double larmor_I_hz() const { return xi_I * proton_larmor_mhz * 1e6; }
  double larmor_S_hz() const { return xi_S * proton_larmor_mhz * 1e6; }
  double csa_delta_I_hz() const { return csa_I.delta_aniso_ppm * 1e-6 * larmor_I_hz(); }
  double csa_delta_S_hz() const { return csa_S.delta_aniso_ppm * 1e-6 * larmor_S_hz(); }
  double omega_r() const { return 2.0 * M_PI * spin_rate_hz; }
  double b_IS_rad() const { return 2.0 * M_PI * b_IS_over_2pi_hz; }

  void validate() const;  // throws std::invalid_argument on bad fields
};

struct CrystalliteOrientation {
  double alpha = 0.0, beta = 0.0, gamma = 0.0;  // crystal -> rotor, rad
  double weight = 1.0;
};

enum class Channel { I = 0, S = 1, IS = 2 };

struct FourierHamiltonian {
  // coeffs[channel][m+2], angular frequencies (rad/s)
  std::array<std::array<Complex, 5>, 3> coeffs{};
  double omega_r = 0.0;  // rotor angular frequency carried along (rad/s)

  Complex coeff(Channel c, int m) const { return coeffs[static_cast<int>(c)][m + 2]; }
  Complex& coeff(Channel c, int m) { return coeffs[static_cast<int>(c)][m + 2]; }

  // Instantaneous frequency; imaginary part must vanish for valid coeffs.
  Complex eval(Channel c, double t) const;

  // Advance the rotor phase by delta: coeffs[m] *= exp(+i m delta). This is
  // equivalent to replacing the crystallite gamma angle by gamma + delta.
  void advance_gamma(double delta);
};

// Reduced Wigner d^2(beta), indexed [m'+2][m+2], via exp(-i beta Jy) in the
// spin-2 irrep (J = 2).
Eigen::Matrix<double, 5, 5> wigner_d2(double beta);

// Full Wigner D^2(alpha,beta,gamma), D_{m'm} = e^{-i m' alpha} d_{m'm} e^{-i m gamma}.
Eigen::Matrix<Complex, 5, 5> wigner_D2(double alpha, double beta, double gamma);

// Build the five Fourier coefficients for each channel of `sys` at
// crystallite orientation `cr`. dipole_scale multiplies the dipolar coupling
// (used by robustness maps). J contributes pi*J to m = 0 of the IS channel;
// isotropic shifts contribute 2*pi*iso to m = 0 of I and S.
FourierHamiltonian fourier_coeffs(const SpinSystem& sys, const CrystalliteOrientation& cr,
                                  double dipole_scale = 1.0);

// First-order effective amplitudes A_n^+- = (omega_IS^(-n) +- omega_IS^(n))/2.
// Returns (A_n^+, A_n^-); (0,0) for |n| > 2.
std::pair<Complex, Complex> a_coefficients(const FourierHamiltonian& fh, int n);

// Flat key=value reference file (see data/glycine.sys for the key list).
SpinSystem load_spin_system(const std::string& path);
void save_spin_system(const SpinSystem& sys, const std::string& path);

// Built-in 13C-15N glycine-like reference system (same values as the data file).
SpinSystem glycine_reference();

}  // namespace combsim
