#include "combsim/spinops.hpp"

#include <stdexcept>

namespace combsim {

RotVec3 operator+(const RotVec3& a, const RotVec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
RotVec3 operator*(double s, const RotVec3& v) { return {s * v.x, s * v.y, s * v.z}; }
double dot(const RotVec3& a, const RotVec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
RotVec3 cross(const RotVec3& a, const RotVec3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

RotVec3 rotate(const RotVec3& v, const RotVec3& axis, double angle) {
  const double n = axis.norm();
  if (n == 0.0 || angle == 0.0) return v;
  Eigen::Vector3d u(axis.x / n, axis.y / n, axis.z / n);
  Eigen::Vector3d w(v.x, v.y, v.z);
  Eigen::Vector3d r = Eigen::AngleAxisd(angle, u) * w;
  return {r.x(), r.y(), r.z()};
}

namespace {

Basis make_basis() {
  const Complex i(0.0, 1.0);
  Eigen::Matrix2cd sx, sy, sz, id;
  sx << 0, 0.5, 0.5, 0;
  sy << 0, -0.5 * i, 0.5 * i, 0;
  sz << 0.5, 0, 0, -0.5;
  id.setIdentity();

  auto kron = [](const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
    Operator4 out;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c) out.block<2, 2>(2 * r, 2 * c) = a(r, c) * b;
    return out;
  };

  Basis bs;
  bs.Ix = kron(sx, id);
  bs.Iy = kron(sy, id);
  bs.Iz = kron(sz, id);
  bs.Sx = kron(id, sx);
  bs.Sy = kron(id, sy);
  bs.Sz = kron(id, sz);
  bs.IzSz = 2.0 * bs.Iz * bs.Sz;
  bs.Zm = bs.Iz * bs.Sz + bs.Iy * bs.Sy;
  bs.Zp = bs.Iz * bs.Sz - bs.Iy * bs.Sy;
  bs.Ym = bs.Iy * bs.Sz - bs.Iz * bs.Sy;
  bs.Yp = bs.Iy * bs.Sz + bs.Iz * bs.Sy;
  bs.Xm = 0.5 * (bs.Ix - bs.Sx);
  bs.Xp = 0.5 * (bs.Ix + bs.Sx);
  bs.IdotS = bs.Ix * bs.Sx + bs.Iy * bs.Sy + bs.Iz * bs.Sz;
  bs.identity.setIdentity();
  return bs;
}

}  // namespace

const Basis& basis() {
  static const Basis bs = make_basis();
  return bs;
}

Operator4 commutator(const Operator4& a, const Operator4& b) { return a * b - b * a; }

bool is_hermitian(const Operator4& h, double tol) {
  return (h - h.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

double unitarity_defect(const Operator4& u) {
  return (u.adjoint() * u - Operator4::Identity()).cwiseAbs().maxCoeff();
}

Operator4 expm_unitary(const Operator4& h, double t, double herm_tol) {
  if (!is_hermitian(h, herm_tol))
    throw std::invalid_argument("expm_unitary: generator is not Hermitian");
  Eigen::SelfAdjointEigenSolver<Operator4> es(h);
  const auto& v = es.eigenvectors();
  Eigen::Vector4cd phases;
  for (int k = 0; k < 4; ++k)
    phases(k) = std::exp(Complex(0.0, -es.eigenvalues()(k) * t));
  return v * phases.asDiagonal() * v.adjoint();
}

Operator4 conjugate_by(const Operator4& u, const Operator4& rho) {
  return u * rho * u.adjoint();
}

double transfer_efficiency(const Operator4& u) {
  const Basis& bs = basis();
  // tr(Ix^2) = 1 with this normalization.
  return std::real((bs.Sx * u * bs.Ix * u.adjoint()).trace());
}

SubspaceProjection subspace_project(const Operator4& rho, Subspace s) {
  const Basis& bs = basis();
  const double nx = std::sqrt(std::real((bs.X(s) * bs.X(s)).trace()));
  const double ny = std::sqrt(std::real((bs.Y(s) * bs.Y(s)).trace()));
  const double nz = std::sqrt(std::real((bs.Z(s) * bs.Z(s)).trace()));
  SubspaceProjection p;
  p.coords.x = std::real((bs.X(s) * rho).trace()) / nx;
  p.coords.y = std::real((bs.Y(s) * rho).trace()) / ny;
  p.coords.z = std::real((bs.Z(s) * rho).trace()) / nz;
  Operator4 rem = rho - (rho.trace() / 4.0) * Operator4::Identity() -
                  (p.coords.x / nx) * bs.X(s) - (p.coords.y / ny) * bs.Y(s) -
                  (p.coords.z / nz) * bs.Z(s);
  p.residual = std::sqrt(std::real((rem.adjoint() * rem).trace()));
  return p;
}

double x_component(const Operator4& rho, Subspace s) {
  return subspace_project(rho, s).coords.x;
}

}  // namespace combsim
