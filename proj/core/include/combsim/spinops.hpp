#pragma once
// Two-spin-1/2 product operators in the Zeeman basis |aa>,|ab>,|ba>,|bb>,
// unitary matrix exponentials, and the zero-quantum / double-quantum
// fictitious spin-1/2 subspaces used by the effective-Hamiltonian engine.

#include <Eigen/Dense>
#include <complex>
#include <cmath>

namespace combsim {

using Complex = std::complex<double>;
using Operator4 = Eigen::Matrix4cd;

// Which fictitious spin-1/2 subspace an operator triple (X,Y,Z) lives in.
//  minus: zero-quantum  {X- = (Ix-Sx)/2, Y- = IySz - IzSy, Z- = IzSz + IySy}
//  plus : double-quantum {X+ = (Ix+Sx)/2, Y+ = IySz + IzSy, Z+ = IzSz - IySy}
enum class Subspace { minus, plus };

struct RotVec3 {
  double x = 0.0, y = 0.0, z = 0.0;
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
};

RotVec3 operator+(const RotVec3& a, const RotVec3& b);
RotVec3 operator*(double s, const RotVec3& v);
double dot(const RotVec3& a, const RotVec3& b);
RotVec3 cross(const RotVec3& a, const RotVec3& b);

// Rotate v by `angle` about `axis` (right-handed; axis need not be unit).
RotVec3 rotate(const RotVec3& v, const RotVec3& axis, double angle);

// Single-spin and product operators. Single-spin operators use the
// spin-1/2 normalization Iz = diag(1,-1)/2 (x) 1, so tr(Iz^2) = 1 and
// tr((2IzSz)^2) = 1, tr(X+-^2) = 1/2, tr(Y^2) = tr(Z^2) = 1/2.
struct Basis {
  Operator4 Ix, Iy, Iz;
  Operator4 Sx, Sy, Sz;
  Operator4 IzSz;                // 2 Iz Sz
  Operator4 Xm, Ym, Zm;          // zero-quantum triple
  Operator4 Xp, Yp, Zp;          // double-quantum triple
  Operator4 IdotS;               // IxSx + IySy + IzSz (scalar coupling)
  Operator4 identity;

  const Operator4& X(Subspace s) const { return s == Subspace::minus ? Xm : Xp; }
  const Operator4& Y(Subspace s) const { return s == Subspace::minus ? Ym : Yp; }
  const Operator4& Z(Subspace s) const { return s == Subspace::minus ? Zm : Zp; }
};

const Basis& basis();

Operator4 commutator(const Operator4& a, const Operator4& b);

bool is_hermitian(const Operator4& h, double tol = 1e-12);

// max_ij |(U^dag U - 1)_ij|
double unitarity_defect(const Operator4& u);

// exp(-i h t) for Hermitian h via eigendecomposition; throws
// std::invalid_argument if h is not Hermitian within `herm_tol`.
Operator4 expm_unitary(const Operator4& h, double t = 1.0, double herm_tol = 1e-10);

// U rho U^dag
Operator4 conjugate_by(const Operator4& u, const Operator4& rho);

// Coherence-transfer figure of merit tr(Sx U Ix U^dag) / tr(Ix^2).
double transfer_efficiency(const Operator4& u);

// Projection of rho onto the orthonormalized (X,Y,Z) triple of a subspace.
// coords are the components along X^hat, Y^hat, Z^hat; residual is the
// Frobenius norm of the part of rho orthogonal to the triple (traceless part).
struct SubspaceProjection {
  RotVec3 coords;
  double residual = 0.0;
};
SubspaceProjection subspace_project(const Operator4& rho, Subspace s);

// Norm of the component of rho along X^hat of the given subspace.
double x_component(const Operator4& rho, Subspace s);

// Fixed normalization: tr(Ix * X^hat(sigma)) = 1/sqrt(2) for both subspaces,
// i.e. Ix projects onto (1,0,0)*kSubspaceProjectionConstant.
inline constexpr double kSubspaceProjectionConstant = 0.70710678118654752440;

}  // namespace combsim
