// The desk-scale 4-DoF arm used throughout the experiments. True
// parameters are fabricated but plausible; the nominal variant perturbs
// them the way CAD values miss a real robot.

#ifndef DYNAFIT_MODELS_HPP
#define DYNAFIT_MODELS_HPP

#include <vector>

#include "dynafit/string_model.hpp"
#include "dynafit/tree.hpp"

namespace dynafit {

struct ArmModel {
  TreeTopology topo;
  std::vector<double> params;  // true virtual parameters
  std::vector<double> q_min, q_max;
  RigidTransform<double> cup_offset;  // last-joint frame -> cup frame
  std::vector<double> q_home;
};

// Barrett-WAM-like joint ordering: base yaw, shoulder pitch, wrist roll,
// elbow pitch. At q = 0 the arm points straight up and the cup opening
// normal is world +z.
inline ArmModel wam4() {
  ArmModel arm;
  const Vec3<double> z = vec3(0.0, 0.0, 1.0), y = vec3(0.0, 1.0, 0.0);
  const Vec3<double> axes[4] = {z, y, z, y};
  const double offsets[4] = {0.0, 0.22, 0.45, 0.35};  // stacking along +z
  const double masses[4] = {6.0, 3.2, 1.8, 0.9};
  const double lengths[4] = {0.22, 0.45, 0.35, 0.30};
  const double dampings[4] = {0.12, 0.10, 0.05, 0.03};

  std::vector<LinkParams> links(4);
  for (int i = 0; i < 4; ++i) {
    JointSpec j;
    j.axis = axes[i];
    j.parent = i - 1;
    arm.topo.joints.push_back(j);

    if (i > 0) links[i].kinematic.translation = vec3(0.0, 0.0, offsets[i]);
    // solid-cylinder-ish link along +z, slightly asymmetric
    const double l = lengths[i], m = masses[i];
    const double jt = m * l * l / 12.0 + 0.02 * m;  // transverse
    const double ja = 0.01 * m;                     // axial
    links[i].inertia = virtual_from_physical(m, vec3(jt, 1.08 * jt, ja),
                                             vec3(0.0, 0.0, 0.05 * i),
                                             vec3(0.01 * i, -0.005 * i, 0.5 * l));
    links[i].theta_damping = std::sqrt(dampings[i]);
  }
  arm.params = pack_params(links);

  arm.q_min = {-2.6, -2.0, -2.8, -0.9};
  arm.q_max = {2.6, 2.0, 2.8, 3.1};
  arm.cup_offset.translation = vec3(0.0, 0.0, 0.30);
  arm.q_home = {0.0, 0.0, 0.0, 0.0};
  return arm;
}

// CAD-style guess: same kinematics, inertials off by tens of percent.
inline std::vector<double> nominal_arm_params(const ArmModel& arm) {
  std::vector<double> p = arm.params;
  for (int i = 0; i < arm.topo.size(); ++i) {
    double* link = p.data() + i * kParamsPerLink;
    link[9] *= std::sqrt(1.25);  // masses +25%
    for (int k = 6; k < 9; ++k) link[k] *= 1.1;
    link[13] += 0.02;  // com shifts
    link[15] *= 0.9;
    link[16] = 0.0;  // no friction in CAD
  }
  return p;
}

// String truth used by the oracle; identification starts from a wrong
// guess and must find its way back.
struct StringTruth {
  double length = 0.40;
  double ball_mass = 0.05;
  Vec3<double> cup_shift = vec3(0.005, -0.003, 0.002);  // T_E mismatch
};

inline std::vector<double> string_truth_params(const StringTruth& t,
                                               const RigidTransform<double>& cup_offset) {
  std::vector<double> p(kStringParamCount, 0.0);
  const Vec3<double> trans = cup_offset.translation + t.cup_shift;
  p[3] = trans[0];
  p[4] = trans[1];
  p[5] = trans[2];
  p[6] = std::sqrt(t.length);
  p[7] = std::sqrt(t.ball_mass);
  p[8] = 0.0;
  return p;
}

}  // namespace dynafit

#endif  // DYNAFIT_MODELS_HPP
