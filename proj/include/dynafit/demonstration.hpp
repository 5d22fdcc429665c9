// Demonstration synthesis for ball-in-a-cup: a scripted resonant swing in
// the arm's sagittal plane, planned entirely inside the learned model and
// projected onto the policy's basis-function class.
//
// The swing is the physically meaningful demonstration for this task (a
// vertical toss cannot be transmitted through a string model whose taut
// constraint is inelastic along the string). The planner searches a small
// family of swing scripts: a chirped resonant drive that pumps the ball
// past horizontal, then a smooth cup placement move while the ball arcs
// over. Candidates are scored by the worst-case radial miss of the arc's
// downward crossing of the cup mouth plane over a small ensemble of
// perturbed models, computed for the *basis-fitted* trajectory rather than
// the raw script, so the plan optimizes exactly what the policy class can
// express. Only model rollouts are consumed: the oracle is never touched.

#ifndef DYNAFIT_DEMONSTRATION_HPP
#define DYNAFIT_DEMONSTRATION_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "dynafit/harness.hpp"

namespace dynafit {

// The sagittal-plane view of the 4-dof arm: joints 2 and 4 (the y-axis
// pair) form a planar 2R chain of lengths L1 (joint 2 to joint 4) and L2
// (joint 4 to the cup), mounted at height base_z.
struct PlanarArm {
  double L1 = 0.80;
  double L2 = 0.30;
  double base_z = 0.22;
  // swing center: cup position the demonstration oscillates around
  double x0 = 0.55;
  double z0 = 0.90;
};

// Elbow-down IK for the planar pair; false when (x, z) is out of reach.
inline bool planar_ik(const PlanarArm& arm, double x, double z, double& q1, double& q3) {
  const double dx = x, dz = z - arm.base_z;
  const double r2 = dx * dx + dz * dz;
  const double c3 = (r2 - arm.L1 * arm.L1 - arm.L2 * arm.L2) / (2.0 * arm.L1 * arm.L2);
  if (c3 < -1.0 || c3 > 1.0) return false;
  const double s3 = -std::sqrt(1.0 - c3 * c3);
  q3 = std::atan2(s3, c3);
  const double phi = std::atan2(dx, dz);  // measured from vertical
  q1 = phi - std::atan2(arm.L2 * s3, arm.L1 + arm.L2 * c3);
  return true;
}

// Posture holding the cup at the swing center; the episode starts and the
// reward's posture penalty is anchored here.
inline std::vector<double> ready_posture(const PlanarArm& arm = {}) {
  double q1 = 0.0, q3 = 0.0;
  planar_ik(arm, arm.x0, arm.z0, q1, q3);
  return {0.0, q1, 0.0, q3};
}

// One swing script: amplitude-ramped, frequency-chirped horizontal drive
// (the pendulum slows as the swing grows), frozen at t_stop, followed by a
// smoothstep cup placement of (dxc, dzc) over Tc seconds.
struct DemoScript {
  double A = 0.15;      // drive amplitude, m
  double w = 4.95;      // drive frequency, rad/s (~sqrt(g/r))
  double chirp = 0.05;  // fractional frequency droop with the ramp
  double t_stop = 2.4;  // drive freeze time, s
  double ramp = 1.0;    // amplitude ramp duration, s
  double dxc = 0.0;     // placement move, m
  double dzc = 0.0;
  double Tc = 0.4;      // placement duration, s
};

// Joint trajectory realizing a script; false when the script leaves the
// workspace. Velocities and accelerations come from central differences of
// the IK solution.
inline bool demo_trajectory(const DemoScript& sc, const PlanarArm& arm, double rate,
                            double duration, JointTrajectory& traj) {
  auto xz = [&](double t, double& x, double& z) {
    const double tp = std::min(t, sc.t_stop);
    const double af = std::min(1.0, tp / sc.ramp);
    const double phase = sc.w * (tp - sc.chirp * (tp > sc.ramp
        ? sc.ramp / 2.0 + (tp - sc.ramp) : tp * tp / (2.0 * sc.ramp)));
    x = arm.x0 + sc.A * af * std::sin(phase);
    z = arm.z0;
    if (t > sc.t_stop) {
      const double u = std::min(1.0, (t - sc.t_stop) / sc.Tc);
      const double sm = u * u * (3.0 - 2.0 * u);
      x += sc.dxc * sm;
      z += sc.dzc * sm;
    }
  };
  traj = JointTrajectory{};
  const std::size_t steps = static_cast<std::size_t>(duration * rate);
  for (std::size_t i = 0; i <= steps; ++i) {
    const double t = i / rate, h = 1e-4;
    double xa, za, xb, zb, xc, zc, q1, q3, q1p, q3p, q1m, q3m;
    xz(t, xa, za);
    xz(t + h, xb, zb);
    xz(t - h, xc, zc);
    if (!planar_ik(arm, xa, za, q1, q3) || !planar_ik(arm, xb, zb, q1p, q3p) ||
        !planar_ik(arm, xc, zc, q1m, q3m))
      return false;
    traj.t.push_back(t);
    traj.q.push_back({0.0, q1, 0.0, q3});
    traj.qd.push_back({0.0, (q1p - q1m) / (2.0 * h), 0.0, (q3p - q3m) / (2.0 * h)});
    traj.qdd.push_back(
        {0.0, (q1p - 2.0 * q1 + q1m) / (h * h), 0.0, (q3p - 2.0 * q3 + q3m) / (h * h)});
  }
  return true;
}

// Least-squares projection of a demonstration onto the generator's basis.
inline std::vector<double> fit_basis_weights(const TrajectoryGenerator& gen,
                                             const JointTrajectory& demo) {
  std::vector<double> w(gen.weight_count(), 0.0);
  for (int j = 0; j < gen.n_joints; ++j) {
    Eigen::MatrixXd A(demo.size(), gen.n_basis);
    Eigen::VectorXd y(demo.size());
    for (std::size_t i = 0; i < demo.size(); ++i) {
      const double s = demo.t[i] / gen.duration;
      for (int b = 0; b < gen.n_basis; ++b) {
        double bb, db, ddb;
        gen.basis(b, s, bb, db, ddb);
        A(i, b) = bb;
      }
      y(i) = demo.q[i][j] - (gen.q0.empty() ? 0.0 : gen.q0[j]);
    }
    const Eigen::MatrixXd ata =
        A.transpose() * A + 1e-9 * Eigen::MatrixXd::Identity(gen.n_basis, gen.n_basis);
    const Eigen::VectorXd sol = ata.ldlt().solve(A.transpose() * y);
    for (int b = 0; b < gen.n_basis; ++b) w[j * gen.n_basis + b] = sol(b);
  }
  return w;
}

// Perturbed copies of the learned model (string length and drag): a plan
// that only works at the point estimate does not survive the oracle.
inline std::vector<LearnedModel> demo_ensemble(const LearnedModel& model, double d_length = 0.01,
                                               double d_drag = 0.02) {
  std::vector<LearnedModel> out;
  for (double dr : {-d_length, 0.0, d_length}) {
    LearnedModel m = model;
    const double r0 = m.string_params[6] * m.string_params[6];
    m.string_params[6] = std::sqrt(std::max(1e-6, r0 + dr));
    out.push_back(m);
  }
  for (double dd : {-d_drag, d_drag}) {
    LearnedModel m = model;
    const double cd = m.string_params[8] * m.string_params[8] + dd;
    m.string_params[8] = std::sqrt(std::max(0.0, cd));
    out.push_back(m);
  }
  return out;
}

// Radial miss of the ball's downward crossing of the cup mouth plane in
// one model; a trajectory whose ball never rises above the mouth scores by
// its closest approach instead, offset so any crossing beats any
// non-crossing. Returns +inf on divergence.
inline double crossing_miss(const LearnedModel& model, const JointTrajectory& traj, double rate) {
  RolloutStates st;
  try {
    st = rollout_model(model, traj, rate);
  } catch (const DivergenceError&) {
    return 1e18;
  }
  double best_cross = 1e9, closest = 1e9;
  for (std::size_t i = 1; i < st.delta.size(); ++i) {
    const double a0 = dot(st.delta[i - 1], st.normal[i - 1]);
    const double a1 = dot(st.delta[i], st.normal[i]);
    const double rad = norm(st.delta[i] - a1 * st.normal[i]);
    if (a0 > 0.0 && a1 <= 0.0) best_cross = std::min(best_cross, rad);
    if (a1 > 0.0) closest = std::min(closest, std::sqrt(a1 * a1 + rad * rad));
  }
  return best_cross < 1e8 ? best_cross : 1.0 + closest;
}

inline double worst_case_miss(const std::vector<LearnedModel>& ensemble,
                              const JointTrajectory& traj, double rate) {
  double worst = 0.0;
  for (const auto& m : ensemble) worst = std::max(worst, crossing_miss(m, traj, rate));
  return worst;
}

struct DemoPlan {
  DemoScript script;
  std::vector<double> weights;  // basis weights of the fitted demonstration
  double miss = 1e18;           // worst-case crossing miss of the fit, m
};

struct DemoPlanConfig {
  int n_trials = 2000;     // script search budget
  int refine_iters = 600;  // weight-space polish budget
  double d_length = 0.01;  // ensemble string-length spread, m
  double d_drag = 0.02;    // ensemble drag spread, 1/s
};

// Random search over scripts (half global, half around the incumbent),
// then a stochastic polish directly in weight space.
inline DemoPlan plan_demonstration(const LearnedModel& model, const TrajectoryGenerator& gen,
                                   double rate, std::uint64_t seed,
                                   const DemoPlanConfig& cfg = {}, const PlanarArm& arm = {}) {
  const auto ensemble = demo_ensemble(model, cfg.d_length, cfg.d_drag);
  const double dur = gen.duration;
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto U = [&](double lo, double hi) { return lo + (hi - lo) * u01(g); };
  auto clamp = [](double v, double lo, double hi) { return v < lo ? lo : (v > hi ? hi : v); };

  auto score = [&](const DemoScript& sc, double& out_miss, std::vector<double>& out_w) {
    JointTrajectory traj;
    if (!demo_trajectory(sc, arm, rate, dur, traj)) return false;
    out_w = fit_basis_weights(gen, traj);
    out_miss = worst_case_miss(ensemble, gen.trajectory(out_w, rate), rate);
    return true;
  };

  DemoPlan plan;
  score(plan.script, plan.miss, plan.weights);
  for (int i = 0; i < cfg.n_trials; ++i) {
    DemoScript sc;
    if (i < cfg.n_trials / 2) {
      sc = {U(0.08, 0.20), U(4.4, 5.5),   U(0.0, 0.25),   U(1.8, dur - 0.7),
            U(0.6, 1.6),   U(-0.10, 0.10), U(-0.06, 0.06), U(0.30, 0.60)};
    } else {
      const DemoScript& b = plan.script;
      sc = {clamp(b.A + 0.01 * nd(g), 0.08, 0.20),
            clamp(b.w + 0.05 * nd(g), 4.4, 5.5),
            clamp(b.chirp + 0.02 * nd(g), 0.0, 0.25),
            clamp(b.t_stop + 0.03 * nd(g), 1.8, dur - 0.7),
            clamp(b.ramp + 0.05 * nd(g), 0.6, 1.6),
            clamp(b.dxc + 0.02 * nd(g), -0.10, 0.10),
            clamp(b.dzc + 0.02 * nd(g), -0.06, 0.06),
            clamp(b.Tc + 0.03 * nd(g), 0.30, 0.60)};
    }
    double miss;
    std::vector<double> w;
    if (score(sc, miss, w) && miss < plan.miss) plan = {sc, std::move(w), miss};
  }

  for (int it = 0; it < cfg.refine_iters; ++it) {
    const double step = it < cfg.refine_iters / 2 ? 0.02 : 0.005;
    std::vector<double> cand = plan.weights;
    for (auto& c : cand) c += step * nd(g);
    const double miss = worst_case_miss(ensemble, gen.trajectory(cand, rate), rate);
    if (miss < plan.miss) {
      plan.weights = std::move(cand);
      plan.miss = miss;
    }
  }
  return plan;
}

}  // namespace dynafit

#endif  // DYNAFIT_DEMONSTRATION_HPP
