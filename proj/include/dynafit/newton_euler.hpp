// Kinematic-tree dynamics in Lie-algebra form: forward kinematics,
// recursive Newton-Euler inverse dynamics (RNEA) and articulated-body
// forward dynamics (ABA). Generic over the scalar type so that gradients
// w.r.t. virtual parameters propagate through the full recursion.

#ifndef DYNAFIT_NEWTON_EULER_HPP
#define DYNAFIT_NEWTON_EULER_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include "dynafit/tree.hpp"

namespace dynafit {

struct DimensionMismatchError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct DegenerateInertiaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void check_dims(const TreeTopology& topo, std::size_t n, const char* what) {
  if (n != static_cast<std::size_t>(topo.size()))
    throw DimensionMismatchError(std::string(what) + ": state dimension does not match tree");
}

template <class S>
struct LinkMotion {
  RigidTransform<S> pose;       // T_{0,i}
  SpatialVector<S> velocity;    // body twist v_i
  SpatialVector<S> accel;       // body twist derivative a_i
};

// World-frame motion of a frame rigidly attached to a link.
template <class S>
struct FrameMotion {
  RotationMatrix<S> rotation;
  Vec3<S> position;
  Vec3<S> velocity;
  Vec3<S> accel;
};

// Forward pass of Algorithm 2 with zero root acceleration (pure
// kinematics; gravity seeding belongs to the dynamics calls).
template <class S>
std::vector<LinkMotion<S>> forward_kinematics(const TreeTopology& topo,
                                              const std::vector<RealizedLink<S>>& links,
                                              std::span<const double> q, std::span<const double> qd,
                                              std::span<const double> qdd) {
  check_dims(topo, q.size(), "forward_kinematics q");
  check_dims(topo, qd.size(), "forward_kinematics qd");
  check_dims(topo, qdd.size(), "forward_kinematics qdd");

  std::vector<LinkMotion<S>> out(links.size());
  for (int i = 0; i < topo.size(); ++i) {
    const JointSpec& j = topo.joints[i];
    const RigidTransform<S> x = joint_transform(j, links[i].fixed, S(q[i]));
    const RigidTransform<S> x_inv = x.inverse();
    const SpatialVector<S> s = joint_screw<S>(j);

    const int p = j.parent;
    const RigidTransform<S> parent_pose = p < 0 ? RigidTransform<S>::identity() : out[p].pose;
    const SpatialVector<S> parent_v = p < 0 ? SpatialVector<S>::zero() : out[p].velocity;
    const SpatialVector<S> parent_a = p < 0 ? SpatialVector<S>::zero() : out[p].accel;

    out[i].pose = parent_pose * x;
    out[i].velocity = adjoint_apply(x_inv, parent_v) + s * S(qd[i]);
    out[i].accel = adjoint_apply(x_inv, parent_a) + small_ad_apply(out[i].velocity, s * S(qd[i])) +
                   s * S(qdd[i]);
  }
  return out;
}

// Motion of a frame at fixed offset `attachment` from link `link`.
// Velocity/acceleration are the classical world-frame derivatives of the
// frame origin, obtained from the body twist: xdot = R u, xddot = R (udot + w x u).
template <class S>
FrameMotion<S> frame_motion(const LinkMotion<S>& m, const RigidTransform<S>& attachment) {
  const SpatialVector<S> v = adjoint_apply(attachment.inverse(), m.velocity);
  const SpatialVector<S> a = adjoint_apply(attachment.inverse(), m.accel);
  const RigidTransform<S> pose = m.pose * attachment;

  FrameMotion<S> f;
  f.rotation = pose.rotation;
  f.position = pose.translation;
  f.velocity = pose.rotation * linear_part(v);
  f.accel = pose.rotation * (linear_part(a) + cross(angular_part(v), linear_part(v)));
  return f;
}

template <class S>
struct RneaResult {
  std::vector<S> torques;
  std::vector<SpatialVector<S>> accel;  // per-link body accel (gravity-seeded)
  std::vector<SpatialVector<S>> force;  // per-link spatial force
};

// Appendix-style RNEA: forward velocity/acceleration pass with the root
// acceleration seeded at -gravity, then leaf-to-root Newton-Euler.
template <class S>
RneaResult<S> rnea(const TreeTopology& topo, const std::vector<RealizedLink<S>>& links,
                   std::span<const double> q, std::span<const double> qd,
                   std::span<const double> qdd, bool with_gravity = true) {
  check_dims(topo, q.size(), "rnea q");
  check_dims(topo, qd.size(), "rnea qd");
  check_dims(topo, qdd.size(), "rnea qdd");
  const int n = topo.size();

  std::vector<RigidTransform<S>> x_inv(n);
  std::vector<SpatialVector<S>> s(n), v(n), a(n);
  const SpatialVector<S> a_root =
      with_gravity ? spatial(Vec3<S>::zero(), -to_scalar<S, 3>(topo.gravity)) : SpatialVector<S>::zero();

  for (int i = 0; i < n; ++i) {
    const JointSpec& j = topo.joints[i];
    x_inv[i] = joint_transform(j, links[i].fixed, S(q[i])).inverse();
    s[i] = joint_screw<S>(j);
    const int p = j.parent;
    const SpatialVector<S> vp = p < 0 ? SpatialVector<S>::zero() : v[p];
    const SpatialVector<S> ap = p < 0 ? a_root : a[p];
    v[i] = adjoint_apply(x_inv[i], vp) + s[i] * S(qd[i]);
    a[i] = adjoint_apply(x_inv[i], ap) + small_ad_apply(v[i], s[i] * S(qd[i])) + s[i] * S(qdd[i]);
  }

  RneaResult<S> r;
  r.torques.resize(n);
  r.accel = a;
  r.force.assign(n, SpatialVector<S>::zero());
  for (int i = n - 1; i >= 0; --i) {
    const SpatialInertia<S>& m = links[i].inertia;
    r.force[i] += m.apply(a[i]) - small_ad_star_apply(v[i], m.apply(v[i]));
    r.torques[i] = dot(s[i], r.force[i]) + links[i].damping * S(qd[i]);
    const int p = topo.joints[i].parent;
    if (p >= 0) r.force[p] += coadjoint_apply(x_inv[i], r.force[i]);
  }
  return r;
}

template <class S>
struct AbaResult {
  std::vector<S> qdd;
  std::vector<SpatialVector<S>> accel;
  std::vector<SpatialVector<S>> force;
};

// Articulated-body forward dynamics. Denominators s^T M s below the
// guard are reported as degenerate inertia.
template <class S>
AbaResult<S> aba(const TreeTopology& topo, const std::vector<RealizedLink<S>>& links,
                 std::span<const double> q, std::span<const double> qd, std::span<const S> u,
                 bool with_gravity = true) {
  check_dims(topo, q.size(), "aba q");
  check_dims(topo, qd.size(), "aba qd");
  check_dims(topo, u.size(), "aba u");
  constexpr double kDenomGuard = 1e-12;
  const int n = topo.size();

  std::vector<RigidTransform<S>> x_inv(n);
  std::vector<SpatialVector<S>> s(n), v(n), eta(n);
  for (int i = 0; i < n; ++i) {
    const JointSpec& j = topo.joints[i];
    x_inv[i] = joint_transform(j, links[i].fixed, S(q[i])).inverse();
    s[i] = joint_screw<S>(j);
    const int p = j.parent;
    const SpatialVector<S> vp = p < 0 ? SpatialVector<S>::zero() : v[p];
    v[i] = adjoint_apply(x_inv[i], vp) + s[i] * S(qd[i]);
    eta[i] = small_ad_apply(v[i], s[i] * S(qd[i]));
  }

  // Leaf-to-root: articulated inertias and bias forces.
  std::vector<SpatialMatrix<S>> m_art(n);
  std::vector<SpatialVector<S>> f_bias(n), beta(n);
  std::vector<S> psi(n), u_eff(n);
  for (int i = 0; i < n; ++i) {
    m_art[i] = links[i].inertia.to_matrix();
    f_bias[i] = -small_ad_star_apply(v[i], links[i].inertia.apply(v[i]));
    u_eff[i] = u[i] - links[i].damping * S(qd[i]);
  }
  for (int i = n - 1; i >= 0; --i) {
    const S denom = dot(s[i], m_art[i] * s[i]);
    if (value(denom) <= kDenomGuard)
      throw DegenerateInertiaError("aba: degenerate articulated inertia at link " + std::to_string(i));
    psi[i] = S(1.0) / denom;

    const int p = topo.joints[i].parent;
    if (p >= 0) {
      const SpatialMatrix<S> ad = adjoint(x_inv[i]);
      const SpatialMatrix<S> ad_t = ad.transpose();
      const SpatialVector<S> ms = m_art[i] * s[i];
      const SpatialMatrix<S> pi = m_art[i] - psi[i] * outer(ms, ms);
      beta[i] = m_art[i] * eta[i] +
                ms * (psi[i] * (u_eff[i] - dot(s[i], m_art[i] * eta[i] + f_bias[i])));
      m_art[p] += ad_t * pi * ad;
      f_bias[p] += coadjoint_apply(x_inv[i], f_bias[i] + beta[i]);
    }
  }

  // Root-to-leaf: accelerations.
  AbaResult<S> r;
  r.qdd.resize(n);
  r.accel.resize(n);
  r.force.resize(n);
  const SpatialVector<S> a_root =
      with_gravity ? spatial(Vec3<S>::zero(), -to_scalar<S, 3>(topo.gravity)) : SpatialVector<S>::zero();
  for (int i = 0; i < n; ++i) {
    const int p = topo.joints[i].parent;
    const SpatialVector<S> ap = p < 0 ? a_root : r.accel[p];
    const SpatialVector<S> a_in = adjoint_apply(x_inv[i], ap) + eta[i];
    r.qdd[i] = psi[i] * (u_eff[i] - dot(s[i], m_art[i] * a_in + f_bias[i]));
    r.accel[i] = a_in + s[i] * r.qdd[i];
    r.force[i] = m_art[i] * r.accel[i] + f_bias[i];
  }
  return r;
}

// Mass matrix by the unit-vector RNEA trick (gravity and velocity off).
inline std::vector<std::vector<double>> mass_matrix(const TreeTopology& topo,
                                                    const std::vector<RealizedLink<double>>& links,
                                                    std::span<const double> q) {
  const int n = topo.size();
  std::vector<double> zeros(n, 0.0), e(n, 0.0);
  std::vector<std::vector<double>> m(n, std::vector<double>(n, 0.0));
  for (int j = 0; j < n; ++j) {
    e[j] = 1.0;
    const auto r = rnea(topo, links, q, zeros, e, /*with_gravity=*/false);
    for (int i = 0; i < n; ++i) m[i][j] = r.torques[i];
    e[j] = 0.0;
  }
  return m;
}

}  // namespace dynafit

#endif  // DYNAFIT_NEWTON_EULER_HPP
