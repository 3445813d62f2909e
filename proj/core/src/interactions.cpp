#include "combsim/interactions.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace combsim {

void SpinSystem::validate() const {
  auto bad = [](const std::string& what) { throw std::invalid_argument("SpinSystem: " + what); };
  if (csa_I.eta < 0.0 || csa_I.eta > 1.0) bad("csa_I.eta outside [0,1]");
  if (csa_S.eta < 0.0 || csa_S.eta > 1.0) bad("csa_S.eta outside [0,1]");
  if (spin_rate_hz <= 0.0) bad("spin_rate_hz must be positive");
  if (proton_larmor_mhz <= 0.0) bad("proton_larmor_mhz must be positive");
  if (xi_I <= 0.0 || xi_S <= 0.0) bad("Larmor ratios must be positive");
}

Complex FourierHamiltonian::eval(Channel c, double t) const {
  Complex acc(0.0, 0.0);
  for (int m = -2; m <= 2; ++m)
    acc += coeff(c, m) * std::exp(Complex(0.0, m * omega_r * t));
  return acc;
}

void FourierHamiltonian::advance_gamma(double delta) {
  for (auto& ch : coeffs)
    for (int m = -2; m <= 2; ++m) ch[m + 2] *= std::exp(Complex(0.0, m * delta));
}

Eigen::Matrix<double, 5, 5> wigner_d2(double beta) {
  // Jy in the spin-2 irrep, basis |m>, m = -2..2.
  Eigen::Matrix<Complex, 5, 5> jy = Eigen::Matrix<Complex, 5, 5>::Zero();
  const double j = 2.0;
  for (int mi = 0; mi < 4; ++mi) {
    const double m = mi - 2.0;
    const double cp = std::sqrt(j * (j + 1.0) - m * (m + 1.0));  // <m+1|J+|m>
    jy(mi + 1, mi) += Complex(0.0, -0.5) * cp;                   // (J+ - J-)/(2i)
    jy(mi, mi + 1) += Complex(0.0, 0.5) * cp;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<Complex, 5, 5>> es(jy);
  Eigen::Matrix<Complex, 5, 1> ph;
  for (int k = 0; k < 5; ++k) ph(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * beta));
  Eigen::Matrix<Complex, 5, 5> d = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
  return d.real();
}

Eigen::Matrix<Complex, 5, 5> wigner_D2(double alpha, double beta, double gamma) {
  const Eigen::Matrix<double, 5, 5> d = wigner_d2(beta);
  Eigen::Matrix<Complex, 5, 5> out;
  for (int mp = -2; mp <= 2; ++mp)
    for (int m = -2; m <= 2; ++m)
      out(mp + 2, m + 2) = std::exp(Complex(0.0, -mp * alpha)) * d(mp + 2, m + 2) *
                           std::exp(Complex(0.0, -m * gamma));
  return out;
}

namespace {

// Rank-2 spherical components of an axially-referenced tensor in its own
// principal axes: R20 = sqrt(3/2) delta, R2+-2 = -delta*eta/2.
Eigen::Matrix<Complex, 1, 5> principal_components(double delta_rad, double eta) {
  Eigen::Matrix<Complex, 1, 5> r = Eigen::Matrix<Complex, 1, 5>::Zero();
  r(2) = std::sqrt(1.5) * delta_rad;
  r(0) = r(4) = -0.5 * delta_rad * eta;
  return r;
}

}  // namespace

FourierHamiltonian fourier_coeffs(const SpinSystem& sys, const CrystalliteOrientation& cr,
                                  double dipole_scale) {
  sys.validate();
  FourierHamiltonian fh;
  fh.omega_r = sys.omega_r();

  static const Eigen::Matrix<double, 5, 5> d_magic = wigner_d2(kMagicAngle);
  const Eigen::Matrix<Complex, 5, 5> d_cryst = wigner_D2(cr.alpha, cr.beta, cr.gamma);
  const double two_pi = 2.0 * M_PI;

  auto add_tensor = [&](Channel ch, double delta_rad, double eta,
                        const std::array<double, 3>& euler_pc, double iso_rad) {
    if (delta_rad != 0.0) {
      const Eigen::Matrix<Complex, 1, 5> rot =
          principal_components(delta_rad, eta) *
          wigner_D2(euler_pc[0], euler_pc[1], euler_pc[2]) * d_cryst;
      // Project onto the rotor axis: only the m' = 0 lab component survives
      // MAS averaging of each rotating term, giving the magic-angle weight
      // d^2_{m,0}(theta_m) for the coefficient of exp(-i m omega_r t).
      for (int m = -2; m <= 2; ++m)
        fh.coeff(ch, -m) += std::sqrt(2.0 / 3.0) * rot(m + 2) * d_magic(m + 2, 2);
    }
    fh.coeff(ch, 0) += iso_rad;
  };

  add_tensor(Channel::I, two_pi * sys.csa_delta_I_hz(), sys.csa_I.eta, sys.csa_I.euler_pc,
             two_pi * sys.iso_shift_I_hz);
  add_tensor(Channel::S, two_pi * sys.csa_delta_S_hz(), sys.csa_S.eta, sys.csa_S.euler_pc,
             two_pi * sys.iso_shift_S_hz);
  add_tensor(Channel::IS, two_pi * sys.b_IS_over_2pi_hz * dipole_scale, 0.0, sys.euler_pc_IS,
             M_PI * sys.j_IS_hz);
  return fh;
}

std::pair<Complex, Complex> a_coefficients(const FourierHamiltonian& fh, int n) {
  if (std::abs(n) > 2) return {Complex(0, 0), Complex(0, 0)};
  const Complex wm = fh.coeff(Channel::IS, -n);
  const Complex wp = fh.coeff(Channel::IS, n);
  return {0.5 * (wm + wp), 0.5 * (wm - wp)};
}

namespace {

constexpr double kDegToRad = M_PI / 180.0;

std::map<std::string, double> parse_kv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open reference file: " + path);
  std::map<std::string, double> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      if (line.find_first_not_of(" \t\r") != std::string::npos)
        throw std::runtime_error(path + ":" + std::to_string(lineno) + ": expected key=value");
      continue;
    }
    std::string key = line.substr(0, eq);
    std::string val = line.substr(eq + 1);
    auto trim = [](std::string& s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      s = (a == std::string::npos) ? "" : s.substr(a, b - a + 1);
    };
    trim(key);
    trim(val);
    try {
      size_t used = 0;
      const double x = std::stod(val, &used);
      if (used != val.size()) throw std::invalid_argument(val);
      kv[key] = x;
    } catch (const std::exception&) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": bad numeric value '" +
                               val + "' for key '" + key + "'");
    }
  }
  return kv;
}

}  // namespace

SpinSystem load_spin_system(const std::string& path) {
  auto kv = parse_kv_file(path);
  SpinSystem sys;
  auto take = [&](const char* key, double& dst) {
    auto it = kv.find(key);
    if (it != kv.end()) {
      dst = it->second;
      kv.erase(it);
    }
  };
  auto take_angle = [&](const char* key, double& dst) {
    auto it = kv.find(key);
    if (it != kv.end()) {
      dst = it->second * kDegToRad;
      kv.erase(it);
    }
  };
  take("iso_shift_I_hz", sys.iso_shift_I_hz);
  take("iso_shift_S_hz", sys.iso_shift_S_hz);
  take("csa_I_delta_ppm", sys.csa_I.delta_aniso_ppm);
  take("csa_I_eta", sys.csa_I.eta);
  take_angle("csa_I_alpha_deg", sys.csa_I.euler_pc[0]);
  take_angle("csa_I_beta_deg", sys.csa_I.euler_pc[1]);
  take_angle("csa_I_gamma_deg", sys.csa_I.euler_pc[2]);
  take("csa_S_delta_ppm", sys.csa_S.delta_aniso_ppm);
  take("csa_S_eta", sys.csa_S.eta);
  take_angle("csa_S_alpha_deg", sys.csa_S.euler_pc[0]);
  take_angle("csa_S_beta_deg", sys.csa_S.euler_pc[1]);
  take_angle("csa_S_gamma_deg", sys.csa_S.euler_pc[2]);
  take("b_IS_over_2pi_hz", sys.b_IS_over_2pi_hz);
  take_angle("dip_alpha_deg", sys.euler_pc_IS[0]);
  take_angle("dip_beta_deg", sys.euler_pc_IS[1]);
  take_angle("dip_gamma_deg", sys.euler_pc_IS[2]);
  take("j_IS_hz", sys.j_IS_hz);
  take("proton_larmor_mhz", sys.proton_larmor_mhz);
  take("spin_rate_hz", sys.spin_rate_hz);
  take("xi_I", sys.xi_I);
  take("xi_S", sys.xi_S);
  if (!kv.empty()) throw std::runtime_error(path + ": unknown key '" + kv.begin()->first + "'");
  sys.validate();
  return sys;
}

void save_spin_system(const SpinSystem& sys, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write reference file: " + path);
  auto ang = [](double rad) { return rad / kDegToRad; };
  out.precision(12);
  out << "iso_shift_I_hz = " << sys.iso_shift_I_hz << "\n"
      << "iso_shift_S_hz = " << sys.iso_shift_S_hz << "\n"
      << "csa_I_delta_ppm = " << sys.csa_I.delta_aniso_ppm << "\n"
      << "csa_I_eta = " << sys.csa_I.eta << "\n"
      << "csa_I_alpha_deg = " << ang(sys.csa_I.euler_pc[0]) << "\n"
      << "csa_I_beta_deg = " << ang(sys.csa_I.euler_pc[1]) << "\n"
      << "csa_I_gamma_deg = " << ang(sys.csa_I.euler_pc[2]) << "\n"
      << "csa_S_delta_ppm = " << sys.csa_S.delta_aniso_ppm << "\n"
      << "csa_S_eta = " << sys.csa_S.eta << "\n"
      << "csa_S_alpha_deg = " << ang(sys.csa_S.euler_pc[0]) << "\n"
      << "csa_S_beta_deg = " << ang(sys.csa_S.euler_pc[1]) << "\n"
      << "csa_S_gamma_deg = " << ang(sys.csa_S.euler_pc[2]) << "\n"
      << "b_IS_over_2pi_hz = " << sys.b_IS_over_2pi_hz << "\n"
      << "dip_alpha_deg = " << ang(sys.euler_pc_IS[0]) << "\n"
      << "dip_beta_deg = " << ang(sys.euler_pc_IS[1]) << "\n"
      << "dip_gamma_deg = " << ang(sys.euler_pc_IS[2]) << "\n"
      << "j_IS_hz = " << sys.j_IS_hz << "\n"
      << "proton_larmor_mhz = " << sys.proton_larmor_mhz << "\n"
      << "spin_rate_hz = " << sys.spin_rate_hz << "\n"
      << "xi_I = " << sys.xi_I << "\n"
      << "xi_S = " << sys.xi_S << "\n";
}

SpinSystem glycine_reference() {
  SpinSystem sys;
  sys.iso_shift_I_hz = 0.0;
  sys.iso_shift_S_hz = 0.0;
  sys.csa_I = {19.43, 0.98, {64.9 * kDegToRad, 37.3 * kDegToRad, -28.8 * kDegToRad}};
  sys.csa_S = {10.1, 0.17, {-83.8 * kDegToRad, -79.0 * kDegToRad, 0.0}};
  sys.b_IS_over_2pi_hz = -890.0;
  sys.euler_pc_IS = {0.0, 0.0, 0.0};
  sys.j_IS_hz = -11.0;
  sys.proton_larmor_mhz = 700.0;
  sys.spin_rate_hz = 10000.0;
  sys.xi_I = 0.25145020;
  sys.xi_S = 0.10136767;
  return sys;
}

}  // namespace combsim
