// Kinematic-tree description and its realization from virtual parameters.
//
// Topology (joint kinds, axes, parent indices) is fixed; everything a
// gradient may flow through lives in a flat parameter vector with a fixed
// per-link layout:
//
//   [rpy(3), p(3), sqrtL(3), sqrtm(1), rpyJ(3), com(3), theta_d(1)]
//
// 17 values per link; viscous friction is d = theta_d^2.

#ifndef DYNAFIT_TREE_HPP
#define DYNAFIT_TREE_HPP

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "dynafit/virtual_params.hpp"

namespace dynafit {

inline constexpr int kParamsPerLink = 17;

enum class JointKind { Revolute, Prismatic };

struct JointSpec {
  JointKind kind = JointKind::Revolute;
  Vec3<double> axis = vec3(0.0, 0.0, 1.0);  // unit, in the link frame
  int parent = -1;                          // -1 = root
};

struct TreeTopology {
  std::vector<JointSpec> joints;
  Vec3<double> gravity = vec3(0.0, 0.0, -9.81);

  int size() const { return static_cast<int>(joints.size()); }
  int param_count() const { return size() * kParamsPerLink; }

  void validate() const {
    if (joints.empty()) throw std::invalid_argument("tree must have at least one link");
    for (int i = 0; i < size(); ++i)
      if (joints[i].parent >= i)
        throw std::invalid_argument("links must be topologically ordered (parent < child)");
  }
};

// One link realized at a concrete parameter vector.
template <class S>
struct RealizedLink {
  RigidTransform<S> fixed;  // parent frame -> joint frame at q = 0
  SpatialInertia<S> inertia;
  S damping{};  // viscous joint friction, d = theta_d^2
};

template <class S>
VirtualKinematicParams<S> kinematic_slice(const S* p) {
  VirtualKinematicParams<S> k;
  k.rpy = vec3(p[0], p[1], p[2]);
  k.translation = vec3(p[3], p[4], p[5]);
  return k;
}

template <class S>
VirtualInertiaParams<S> inertia_slice(const S* p) {
  VirtualInertiaParams<S> v;
  v.sqrt_second_moments = vec3(p[6], p[7], p[8]);
  v.sqrt_mass = p[9];
  v.principal_rpy = vec3(p[10], p[11], p[12]);
  v.com = vec3(p[13], p[14], p[15]);
  return v;
}

template <class S>
std::vector<RealizedLink<S>> realize_tree(const TreeTopology& topo, const S* params) {
  std::vector<RealizedLink<S>> links(topo.joints.size());
  for (int i = 0; i < topo.size(); ++i) {
    const S* p = params + static_cast<std::size_t>(i) * kParamsPerLink;
    links[i].fixed = realize_transform(kinematic_slice(p));
    links[i].inertia = realize_inertia(inertia_slice(p));
    links[i].damping = p[16] * p[16];
  }
  return links;
}

// Convenience for building parameter vectors link by link.
struct LinkParams {
  VirtualKinematicParams<double> kinematic;
  VirtualInertiaParams<double> inertia;
  double theta_damping = 0.0;
};

inline std::vector<double> pack_params(const std::vector<LinkParams>& links) {
  std::vector<double> p;
  p.reserve(links.size() * kParamsPerLink);
  for (const auto& l : links) {
    for (int i = 0; i < 3; ++i) p.push_back(l.kinematic.rpy[i]);
    for (int i = 0; i < 3; ++i) p.push_back(l.kinematic.translation[i]);
    for (int i = 0; i < 3; ++i) p.push_back(l.inertia.sqrt_second_moments[i]);
    p.push_back(l.inertia.sqrt_mass);
    for (int i = 0; i < 3; ++i) p.push_back(l.inertia.principal_rpy[i]);
    for (int i = 0; i < 3; ++i) p.push_back(l.inertia.com[i]);
    p.push_back(l.theta_damping);
  }
  return p;
}

// Joint transform parent -> link-i frame at configuration q.
template <class S>
RigidTransform<S> joint_transform(const JointSpec& j, const RigidTransform<S>& fixed, const S& q) {
  RigidTransform<S> motion;
  if (j.kind == JointKind::Revolute) {
    motion.rotation = axis_angle(to_scalar<S, 3>(j.axis), q);
  } else {
    motion.translation = to_scalar<S, 3>(j.axis) * q;
  }
  return fixed * motion;
}

// Unit screw of joint i expressed in the link-i frame.
template <class S>
SpatialVector<S> joint_screw(const JointSpec& j) {
  const Vec3<S> axis = to_scalar<S, 3>(j.axis);
  if (j.kind == JointKind::Revolute) return spatial(axis, Vec3<S>::zero());
  return spatial(Vec3<S>::zero(), axis);
}

}  // namespace dynafit

#endif  // DYNAFIT_TREE_HPP
