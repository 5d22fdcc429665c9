// SE(3) spatial algebra: rotations, rigid transforms, adjoints and the
// small ad / ad* operators used by the Newton-Euler recursions.
//
// Convention (fixed repo-wide): spatial vectors are ordered
// [angular; linear]. With that ordering
//
//   Ad_T  = [ R        0 ]      ad_v  = [ [w]  0  ]
//           [ [p]R     R ],             [ [u]  [w] ],
//
// for T = (R, p) and v = [w; u]. Forces/momenta transport with the
// transpose: f_parent = Ad_T^T-inverse ... see coadjoint(). The dual
// operator entering the Newton-Euler equation is ad*_v = ad_v^T, so
// f_net = M a - ad*_v M v.

#ifndef DYNAFIT_SE3_HPP
#define DYNAFIT_SE3_HPP

#include "dynafit/linalg.hpp"

namespace dynafit {

template <class S>
using RotationMatrix = Mat3<S>;

// Rotation about a coordinate axis, right-hand rule.
template <class S>
RotationMatrix<S> rot_x(const S& t) {
  using std::cos;
  using std::sin;
  RotationMatrix<S> m = RotationMatrix<S>::identity();
  m(1, 1) = cos(t);
  m(1, 2) = -sin(t);
  m(2, 1) = sin(t);
  m(2, 2) = cos(t);
  return m;
}

template <class S>
RotationMatrix<S> rot_y(const S& t) {
  using std::cos;
  using std::sin;
  RotationMatrix<S> m = RotationMatrix<S>::identity();
  m(0, 0) = cos(t);
  m(0, 2) = sin(t);
  m(2, 0) = -sin(t);
  m(2, 2) = cos(t);
  return m;
}

template <class S>
RotationMatrix<S> rot_z(const S& t) {
  using std::cos;
  using std::sin;
  RotationMatrix<S> m = RotationMatrix<S>::identity();
  m(0, 0) = cos(t);
  m(0, 1) = -sin(t);
  m(1, 0) = sin(t);
  m(1, 1) = cos(t);
  return m;
}

// R_z(phi_z) R_y(phi_y) R_x(phi_x).
template <class S>
RotationMatrix<S> rpy_to_rotation(const S& phi_x, const S& phi_y, const S& phi_z) {
  return rot_z(phi_z) * rot_y(phi_y) * rot_x(phi_x);
}

template <class S>
RotationMatrix<S> rpy_to_rotation(const Vec3<S>& rpy) {
  return rpy_to_rotation(rpy[0], rpy[1], rpy[2]);
}

// Rotation about an arbitrary unit axis (Rodrigues).
template <class S>
RotationMatrix<S> axis_angle(const Vec3<S>& axis, const S& t) {
  using std::cos;
  using std::sin;
  const Mat3<S> k = skew(axis);
  return RotationMatrix<S>::identity() + sin(t) * k + (S(1.0) - cos(t)) * (k * k);
}

// Inverse of rpy_to_rotation (double-land; gimbal-locked poses resolve
// with phi_x = 0).
inline Vec3<double> rotation_to_rpy(const RotationMatrix<double>& r) {
  const double sy = -r(2, 0);
  if (std::abs(sy) > 1.0 - 1e-12) {
    const double phi_y = sy > 0 ? 1.5707963267948966 : -1.5707963267948966;
    return vec3(0.0, phi_y, std::atan2(-r(0, 1), r(1, 1)) * (sy > 0 ? 1.0 : -1.0));
  }
  return vec3(std::atan2(r(2, 1), r(2, 2)), std::asin(sy), std::atan2(r(1, 0), r(0, 0)));
}

template <class S>
struct RigidTransform {
  RotationMatrix<S> rotation = RotationMatrix<S>::identity();
  Vec3<S> translation{};

  static RigidTransform identity() { return RigidTransform{}; }

  RigidTransform inverse() const {
    RigidTransform r;
    r.rotation = rotation.transpose();
    r.translation = -(r.rotation * translation);
    return r;
  }

  Vec3<S> apply(const Vec3<S>& p) const { return rotation * p + translation; }

  friend RigidTransform operator*(const RigidTransform& a, const RigidTransform& b) {
    RigidTransform r;
    r.rotation = a.rotation * b.rotation;
    r.translation = a.rotation * b.translation + a.translation;
    return r;
  }
};

template <class S>
using SpatialVector = Vec6<S>;
template <class S>
using SpatialMatrix = Mat6<S>;

template <class S>
SpatialVector<S> spatial(const Vec3<S>& angular, const Vec3<S>& linear) {
  return SpatialVector<S>{{angular[0], angular[1], angular[2], linear[0], linear[1], linear[2]}};
}

template <class S>
Vec3<S> angular_part(const SpatialVector<S>& v) {
  return vec3(v[0], v[1], v[2]);
}

template <class S>
Vec3<S> linear_part(const SpatialVector<S>& v) {
  return vec3(v[3], v[4], v[5]);
}

namespace detail {
template <class S>
void set_block(SpatialMatrix<S>& m, int r0, int c0, const Mat3<S>& b) {
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r0 + r, c0 + c) = b(r, c);
}
}  // namespace detail

// Ad_T: transports spatial motion vectors expressed in the "source" frame
// of T into its "target" frame: v_target = Ad_T v_source for T = T_{target,source}.
template <class S>
SpatialMatrix<S> adjoint(const RigidTransform<S>& t) {
  SpatialMatrix<S> m;
  detail::set_block(m, 0, 0, t.rotation);
  detail::set_block(m, 3, 0, skew(t.translation) * t.rotation);
  detail::set_block(m, 3, 3, t.rotation);
  return m;
}

// Ad_T^T: transports forces/momenta in the opposite direction of Ad_T.
template <class S>
SpatialMatrix<S> coadjoint(const RigidTransform<S>& t) {
  return adjoint(t).transpose();
}

// Applies Ad_T without forming the 6x6 matrix.
template <class S>
SpatialVector<S> adjoint_apply(const RigidTransform<S>& t, const SpatialVector<S>& v) {
  const Vec3<S> w = t.rotation * angular_part(v);
  const Vec3<S> u = t.rotation * linear_part(v) + cross(t.translation, w);
  return spatial(w, u);
}

// Applies Ad_T^T without forming the 6x6 matrix.
template <class S>
SpatialVector<S> coadjoint_apply(const RigidTransform<S>& t, const SpatialVector<S>& f) {
  const Vec3<S> tau = angular_part(f);
  const Vec3<S> fl = linear_part(f);
  const Mat3<S> rt = t.rotation.transpose();
  // (Ad^T f)_ang = R^T tau + R^T [p]^T f = R^T (tau - p x f)
  return spatial<S>(rt * (tau + cross(fl, t.translation)), rt * fl);
}

template <class S>
SpatialMatrix<S> small_ad(const SpatialVector<S>& v) {
  SpatialMatrix<S> m;
  const Mat3<S> w = skew(angular_part(v));
  detail::set_block(m, 0, 0, w);
  detail::set_block(m, 3, 0, skew(linear_part(v)));
  detail::set_block(m, 3, 3, w);
  return m;
}

template <class S>
SpatialMatrix<S> small_ad_star(const SpatialVector<S>& v) {
  return small_ad(v).transpose();
}

// ad_v w, the se(3) Lie bracket [v, w].
template <class S>
SpatialVector<S> small_ad_apply(const SpatialVector<S>& v, const SpatialVector<S>& w) {
  const Vec3<S> va = angular_part(v), vl = linear_part(v);
  const Vec3<S> wa = angular_part(w), wl = linear_part(w);
  return spatial(cross(va, wa), cross(va, wl) + cross(vl, wa));
}

// ad_v^T f.
template <class S>
SpatialVector<S> small_ad_star_apply(const SpatialVector<S>& v, const SpatialVector<S>& f) {
  const Vec3<S> va = angular_part(v), vl = linear_part(v);
  const Vec3<S> tau = angular_part(f), fl = linear_part(f);
  // [ [w]^T  [u]^T ] [tau]   [ -w x tau - u x fl ]
  // [ 0      [w]^T ] [fl ] = [ -w x fl           ]
  return spatial(-cross(va, tau) - cross(vl, fl), -cross(va, fl));
}

}  // namespace dynafit

#endif  // DYNAFIT_SE3_HPP
