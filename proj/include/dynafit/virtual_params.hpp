// Unconstrained "virtual" parameters realizing guaranteed physically
// plausible kinematic transforms and spatial inertias.
//
// Any real-valued parameter vector realizes a nonnegative mass, a
// center-of-mass inertia satisfying all three triangle inequalities and
// a positive semi-definite generalized inertia. That guarantee is what
// makes plain gradient descent safe for identification.

#ifndef DYNAFIT_VIRTUAL_PARAMS_HPP
#define DYNAFIT_VIRTUAL_PARAMS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "dynafit/se3.hpp"

namespace dynafit {

template <class S>
struct VirtualKinematicParams {
  Vec3<S> rpy{};          // RPY Euler angles, radians
  Vec3<S> translation{};  // meters
};

template <class S>
struct VirtualInertiaParams {
  Vec3<S> sqrt_second_moments{};  // theta_sqrtL, sqrt(kg m^2)
  S sqrt_mass{};                  // theta_sqrtm, sqrt(kg)
  Vec3<S> principal_rpy{};        // orientation of principal axes
  Vec3<S> com{};                  // CoM offset from the link frame, m
};

// Inertial state of one link, expressed in the link frame.
template <class S>
struct SpatialInertia {
  Mat3<S> moment{};  // rotational inertia about the link frame origin
  S mass{};
  Vec3<S> com{};  // CoM offset

  // 6x6 generalized inertia, [angular; linear] ordering:
  //   [ J       m[c]  ]
  //   [ m[c]^T  m I   ]
  SpatialMatrix<S> to_matrix() const {
    SpatialMatrix<S> m;
    const Mat3<S> mc = mass * skew(com);
    detail::set_block(m, 0, 0, moment);
    detail::set_block(m, 0, 3, mc);
    detail::set_block(m, 3, 0, mc.transpose());
    detail::set_block(m, 3, 3, diag3(mass, mass, mass));
    return m;
  }

  // M v without forming the 6x6 matrix.
  SpatialVector<S> apply(const SpatialVector<S>& v) const {
    const Vec3<S> w = angular_part(v), u = linear_part(v);
    return spatial(moment * w + mass * cross(com, u), mass * (u - cross(com, w)));
  }
};

template <class S>
RigidTransform<S> realize_transform(const VirtualKinematicParams<S>& p) {
  RigidTransform<S> t;
  t.rotation = rpy_to_rotation(p.rpy);
  t.translation = p.translation;
  return t;
}

// J_p = diag(L2+L3, L1+L3, L1+L2) with L_i = theta_i^2, then rotated to the
// link frame and shifted off the CoM. The parallel-axis shift uses
// -m [c][c] (= m [c]^T [c]), which keeps the result PSD.
template <class S>
SpatialInertia<S> realize_inertia(const VirtualInertiaParams<S>& p) {
  const S l1 = p.sqrt_second_moments[0] * p.sqrt_second_moments[0];
  const S l2 = p.sqrt_second_moments[1] * p.sqrt_second_moments[1];
  const S l3 = p.sqrt_second_moments[2] * p.sqrt_second_moments[2];
  const Mat3<S> jp = diag3(l2 + l3, l1 + l3, l1 + l2);
  const Mat3<S> rj = rpy_to_rotation(p.principal_rpy);
  const Mat3<S> c = skew(p.com);

  SpatialInertia<S> out;
  out.mass = p.sqrt_mass * p.sqrt_mass;
  out.com = p.com;
  out.moment = rj * jp * rj.transpose() - out.mass * (c * c);
  return out;
}

struct ImplausibleInertiaError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Inverse map used to seed optimization from nominal CAD-style values.
// J_com is the CoM-frame inertia (3x3 symmetric); only its diagonal and the
// principal-axis rotation matter, so callers pass principal moments plus an
// RPY orientation. Nonnegative roots are chosen.
inline VirtualInertiaParams<double> virtual_from_physical(double mass,
                                                          const Vec3<double>& principal_moments,
                                                          const Vec3<double>& principal_rpy,
                                                          const Vec3<double>& com) {
  if (mass <= 0.0) throw ImplausibleInertiaError("mass must be positive, got " + std::to_string(mass));
  const double jx = principal_moments[0], jy = principal_moments[1], jz = principal_moments[2];
  const auto check = [](double a, double b, double c, const char* name) {
    if (a > b + c + 1e-12)
      throw ImplausibleInertiaError(std::string("triangle inequality violated: ") + name);
  };
  check(jx, jy, jz, "Jx <= Jy + Jz");
  check(jy, jx, jz, "Jy <= Jx + Jz");
  check(jz, jx, jy, "Jz <= Jx + Jy");

  // L1 = (Jy + Jz - Jx)/2 and permutations.
  const double l1 = 0.5 * (jy + jz - jx);
  const double l2 = 0.5 * (jx + jz - jy);
  const double l3 = 0.5 * (jx + jy - jz);

  VirtualInertiaParams<double> p;
  p.sqrt_second_moments = vec3(std::sqrt(std::max(l1, 0.0)), std::sqrt(std::max(l2, 0.0)),
                               std::sqrt(std::max(l3, 0.0)));
  p.sqrt_mass = std::sqrt(mass);
  p.principal_rpy = principal_rpy;
  p.com = com;
  return p;
}

// Full-matrix variant: eigendecomposes a symmetric CoM-frame inertia into
// principal moments and axes, then defers to the principal-moment form.
inline VirtualInertiaParams<double> virtual_from_physical(double mass, const Mat3<double>& j_com,
                                                          const Vec3<double>& com) {
  Eigen::Matrix3d j;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) j(r, c) = j_com(r, c);
  if ((j - j.transpose()).norm() > 1e-9 * (1.0 + j.norm()))
    throw ImplausibleInertiaError("CoM inertia must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(j);
  Eigen::Matrix3d axes = es.eigenvectors();
  if (axes.determinant() < 0.0) axes.col(2) *= -1.0;

  Mat3<double> r;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) r(a, b) = axes(a, b);
  const Eigen::Vector3d ev = es.eigenvalues();
  return virtual_from_physical(mass, vec3(ev(0), ev(1), ev(2)), rotation_to_rpy(r), com);
}

}  // namespace dynafit

#endif  // DYNAFIT_VIRTUAL_PARAMS_HPP
