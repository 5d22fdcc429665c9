// Dataset generation against the true arm and the chain oracle, the
// persistent-excitation check, rollouts inside the learned model, and
// policy evaluation on the oracle.

#ifndef DYNAFIT_HARNESS_HPP
#define DYNAFIT_HARNESS_HPP

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "dynafit/dataset.hpp"
#include "dynafit/models.hpp"
#include "dynafit/oracle.hpp"
#include "dynafit/policy.hpp"
#include "dynafit/string_model.hpp"

namespace dynafit {

struct ArmExcitationConfig {
  double duration = 40.0;
  double rate = 500.0;
  int n_harmonics = 3;
  double base_freq = 0.25;     // Hz
  double limit_margin = 0.6;   // fraction of the joint range used
  double torque_noise = 0.0;   // std, N m
};

// Multi-sine excitation centered in each joint's range, torques from the
// true model (optionally noisy), accelerations stored exactly.
inline TrajectoryDataset generate_arm_excitation(const ArmModel& arm,
                                                 const ArmExcitationConfig& cfg,
                                                 std::uint64_t seed) {
  const int n = arm.topo.size();
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  std::normal_distribution<double> noise(0.0, 1.0);

  // Per-joint centers and harmonic amplitudes that respect the limits by
  // construction: sum of amplitudes <= margin * half-range.
  std::vector<double> center(n), amp0(n);
  double harmonic_sum = 0.0;
  for (int k = 0; k < cfg.n_harmonics; ++k) harmonic_sum += 1.0 / (k + 1);
  for (int j = 0; j < n; ++j) {
    center[j] = 0.5 * (arm.q_min[j] + arm.q_max[j]);
    amp0[j] = cfg.limit_margin * 0.5 * (arm.q_max[j] - arm.q_min[j]) / harmonic_sum;
  }
  std::vector<std::vector<double>> phases(n, std::vector<double>(cfg.n_harmonics));
  std::vector<std::vector<double>> freqs(n, std::vector<double>(cfg.n_harmonics));
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < cfg.n_harmonics; ++k) {
      phases[j][k] = phase(gen);
      freqs[j][k] = cfg.base_freq * (k + 1) * (1.0 + 0.13 * j);
    }

  TrajectoryDataset ds;
  ds.kind = DatasetKind::ArmExcitation;
  ds.rate = cfg.rate;
  ds.n_joints = n;
  const auto links = realize_tree(arm.topo, arm.params.data());
  const std::size_t steps = static_cast<std::size_t>(cfg.duration * cfg.rate);
  for (std::size_t s = 0; s < steps; ++s) {
    const double t = s / cfg.rate;
    std::vector<double> q(n), qd(n), qdd(n);
    for (int j = 0; j < n; ++j) {
      double vq = center[j], vqd = 0.0, vqdd = 0.0;
      for (int k = 0; k < cfg.n_harmonics; ++k) {
        const double w = 6.283185307179586 * freqs[j][k];
        const double a = amp0[j] / (k + 1);
        vq += a * std::sin(w * t + phases[j][k]);
        vqd += a * w * std::cos(w * t + phases[j][k]);
        vqdd -= a * w * w * std::sin(w * t + phases[j][k]);
      }
      q[j] = vq;
      qd[j] = vqd;
      qdd[j] = vqdd;
      if (vq < arm.q_min[j] || vq > arm.q_max[j])
        throw std::invalid_argument("arm excitation violates joint limits");
    }
    auto u = rnea(arm.topo, links, q, qd, qdd).torques;
    if (cfg.torque_noise > 0.0)
      for (double& x : u) x += cfg.torque_noise * noise(gen);
    ds.t.push_back(t);
    ds.q.push_back(std::move(q));
    ds.qd.push_back(std::move(qd));
    ds.qdd.push_back(std::move(qdd));
    ds.u.push_back(std::move(u));
  }
  return ds;
}

// Condition number of the base-parameter regression matrix. Torques are
// linear in the standard inertial parameters (J about the frame origin,
// h = m c, m) plus viscous friction, so exact columns come from single
// differences of RNEA. Rank-deficient directions (non-identifiable
// combinations) are dropped at a relative singular-value gap of 1e-10.
inline double excitation_condition(const ArmModel& arm, const TrajectoryDataset& ds,
                                   int stride = 50) {
  const int n = arm.topo.size();
  const int n_pi = 10 * n + n;  // 10 inertial params per link + damping

  // Representable baseline: unit mass, unit moment, zero h.
  auto base_links = [&]() {
    std::vector<RealizedLink<double>> links(n);
    for (int i = 0; i < n; ++i) {
      links[i].fixed = realize_transform(kinematic_slice(arm.params.data() + i * kParamsPerLink));
      links[i].inertia.mass = 1.0;
      links[i].inertia.com = Vec3<double>::zero();
      links[i].inertia.moment = diag3(1.0, 1.0, 1.0);
      links[i].damping = 0.0;
    }
    return links;
  };

  // Apply +1 along inertial basis direction k of link i.
  auto bump = [&](std::vector<RealizedLink<double>>& links, int i, int k) {
    auto& in = links[i].inertia;
    if (k < 6) {  // symmetric moment: xx, yy, zz, xy, xz, yz
      const int r[6] = {0, 1, 2, 0, 0, 1}, c[6] = {0, 1, 2, 1, 2, 2};
      in.moment(r[k], c[k]) += 1.0;
      if (r[k] != c[k]) in.moment(c[k], r[k]) += 1.0;
    } else if (k < 9) {  // h = m c with m fixed at 1
      in.com[k - 6] += 1.0;
    } else {  // mass, com rescaled to keep h fixed
      in.com = in.com * (in.mass / (in.mass + 1.0));
      in.mass += 1.0;
    }
  };

  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < ds.size(); r += stride) rows.push_back(r);
  const auto links0 = base_links();
  std::vector<std::vector<double>> tau0(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    tau0[r] = rnea(arm.topo, links0, ds.q[rows[r]], ds.qd[rows[r]], ds.qdd[rows[r]]).torques;

  Eigen::MatrixXd regressor(static_cast<long>(rows.size()) * n, n_pi);
  int col = 0;
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < 10; ++k, ++col) {
      auto links = base_links();
      bump(links, i, k);
      for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto tau =
            rnea(arm.topo, links, ds.q[rows[r]], ds.qd[rows[r]], ds.qdd[rows[r]]).torques;
        for (int j = 0; j < n; ++j)
          regressor(static_cast<long>(r) * n + j, col) = tau[j] - tau0[r][j];
      }
    }
  for (int i = 0; i < n; ++i, ++col)  // damping columns: tau_i = d_i qd_i
    for (std::size_t r = 0; r < rows.size(); ++r)
      for (int j = 0; j < n; ++j)
        regressor(static_cast<long>(r) * n + j, col) = (j == i) ? ds.qd[rows[r]][j] : 0.0;

  Eigen::BDCSVD<Eigen::MatrixXd> svd(regressor);
  const auto& sv = svd.singularValues();
  const double cutoff = sv(0) * 1e-10;
  double smallest = sv(0);
  for (int i = 0; i < sv.size(); ++i)
    if (sv(i) > cutoff) smallest = sv(i);
  return sv(0) / smallest;
}

struct BallExcitationConfig {
  double duration = 40.0;
  double rate = 100.0;
  int n_repeats = 5;
  double noise_std = 0.0;   // ball position observation noise, m
  double amplitude = 1.0;   // rad, cosine sweep on the shoulder
  double freq = 0.7;        // Hz; fast enough that the string goes slack part of the time
  int filter_window = 5;
  int substeps = 10;
  int max_regen = 6;
};

// Slow cosine sweep on the shoulder joint; ball observed in the chain
// oracle, noise averaged across repeats, derivatives by filtered numerical
// differentiation. If the swing throws the ball against the cup plane
// (stand-in for arm contact) the amplitude is reduced and the schedule
// regenerated.
inline TrajectoryDataset generate_ball_excitation(const OracleEnvironment& env,
                                                  const ArmModel& arm,
                                                  const BallExcitationConfig& cfg,
                                                  std::uint64_t seed) {
  const int n = arm.topo.size();
  double amplitude = cfg.amplitude;

  for (int attempt = 0;; ++attempt) {
    JointTrajectory traj;
    const std::size_t steps = static_cast<std::size_t>(cfg.duration * cfg.rate);
    for (std::size_t s = 0; s < steps; ++s) {
      const double t = s / cfg.rate;
      const double w = 6.283185307179586 * cfg.freq;
      std::vector<double> q = arm.q_home, qd(n, 0.0), qdd(n, 0.0);
      q[1] += amplitude * 0.5 * (1.0 - std::cos(w * t));
      qd[1] = amplitude * 0.5 * w * std::sin(w * t);
      qdd[1] = amplitude * 0.5 * w * w * std::cos(w * t);
      traj.t.push_back(t);
      traj.q.push_back(std::move(q));
      traj.qd.push_back(std::move(qd));
      traj.qdd.push_back(std::move(qdd));
    }

    const auto roll = rollout_oracle(env, traj, cfg.rate, cfg.substeps, 0.0);

    // Contact proxy: ball entering the cup cylinder during excitation
    // means the swing is violent enough to hit the hardware.
    bool contact = false;
    for (std::size_t i = 0; i < roll.t.size() && !contact; ++i)
      contact = ball_in_cup(roll.ball_pos[i], roll.cup_pos[i], roll.cup_normal[i], env.cup);
    if (contact) {
      if (attempt + 1 >= cfg.max_regen)
        throw std::runtime_error("ball excitation keeps hitting the cup");
      amplitude *= 0.7;
      continue;
    }

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<std::vector<double>> mean_pos(roll.t.size(), std::vector<double>(3, 0.0));
    for (int rep = 0; rep < cfg.n_repeats; ++rep)
      for (std::size_t i = 0; i < roll.t.size(); ++i)
        for (int k = 0; k < 3; ++k)
          mean_pos[i][k] += (roll.ball_pos[i][k] + cfg.noise_std * noise(gen)) / cfg.n_repeats;

    const auto vel = differentiate(mean_pos, cfg.rate, cfg.filter_window);
    const auto acc = differentiate(vel, cfg.rate, cfg.filter_window);

    TrajectoryDataset ds;
    ds.kind = DatasetKind::BallExcitation;
    ds.rate = cfg.rate;
    ds.n_joints = n;
    for (std::size_t i = 0; i < roll.t.size(); ++i) {
      ds.t.push_back(roll.t[i]);
      ds.q.push_back(traj.q[i]);
      ds.qd.push_back(traj.qd[i]);
      ds.qdd.push_back(traj.qdd[i]);
      ds.ball_pos.push_back(vec3(mean_pos[i][0], mean_pos[i][1], mean_pos[i][2]));
      ds.ball_vel.push_back(vec3(vel[i][0], vel[i][1], vel[i][2]));
      ds.ball_acc.push_back(vec3(acc[i][0], acc[i][1], acc[i][2]));
    }
    return ds;
  }
}

// Fraction of samples with the string taut (within tol of full length).
inline double taut_fraction(const TrajectoryDataset& ds, const ArmModel& arm,
                            const std::vector<double>& string_params, double tol = 0.01) {
  const auto links = realize_tree(arm.topo, arm.params.data());
  const auto model = realize_string(string_params.data(), StringConfig{});
  std::size_t taut = 0;
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const auto fk = forward_kinematics(arm.topo, links, ds.q[i], ds.qd[i], ds.qdd[i]);
    const auto cup = cup_motion(fk.back(), model.cup_offset);
    if (norm(ds.ball_pos[i] - cup.position) >= value(model.string_length) - tol) ++taut;
  }
  return static_cast<double>(taut) / ds.size();
}

// Everything policy training sees: fixed kinematics plus the identified
// string parameters, simulated in hard mode.
struct LearnedModel {
  TreeTopology topo;
  std::vector<double> arm_params;
  std::vector<double> string_params;
  StringConfig string_cfg;
};

// Ball rollout inside the learned model along a commanded trajectory.
inline RolloutStates rollout_model(const LearnedModel& model, const JointTrajectory& traj,
                                   double rate, int substeps = 10) {
  if (traj.size() == 0) throw std::invalid_argument("rollout_model: empty trajectory");
  const auto links = realize_tree(model.topo, model.arm_params.data());
  const auto string = realize_string(model.string_params.data(), model.string_cfg);
  const double dt = 1.0 / (rate * substeps);

  auto cup_at = [&](std::size_t i) {
    const auto fk = forward_kinematics(model.topo, links, traj.q[i], traj.qd[i], traj.qdd[i]);
    return cup_motion(fk.back(), string.cup_offset);
  };

  auto cup = cup_at(0);
  BallState<double> ball{cup.position + vec3(0.0, 0.0, -value(string.string_length)),
                         Vec3<double>::zero()};

  RolloutStates out;
  int step_index = 0;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto cup_now = cup_at(i);
    out.delta.push_back(ball.position - cup_now.position);
    out.normal.push_back(cup_now.normal);
    if (i + 1 == traj.size()) break;
    const auto cup_next = cup_at(i + 1);
    for (int s = 0; s < substeps; ++s) {
      const double a = (s + 0.5) / substeps;
      CupMotion<double> cup_mid;
      cup_mid.position = cup_now.position * (1.0 - a) + cup_next.position * a;
      cup_mid.velocity = cup_now.velocity * (1.0 - a) + cup_next.velocity * a;
      cup_mid.accel = cup_now.accel * (1.0 - a) + cup_next.accel * a;
      cup_mid.normal = cup_now.normal;
      ball = step(ball, cup_mid, string, dt, step_index++);
    }
  }
  return out;
}

struct EvalReport {
  double expected_reward = 0.0;  // mean policy scored inside the model
  double actual_reward = 0.0;    // mean policy scored on the oracle
  bool success = false;
  double max_hold = 0.0;
  double repeatability = 0.0;
};

inline EvalReport evaluate_policy(const PolicyDistribution& policy, const TrajectoryGenerator& gen,
                                  const LearnedModel& model, const OracleEnvironment& env,
                                  const RewardConfig& reward_cfg, double rate,
                                  int n_repeat_runs = 5) {
  const auto traj = gen.trajectory(policy.mean, rate);
  EvalReport rep;
  try {
    rep.expected_reward = episode_reward(traj, rollout_model(model, traj, rate), reward_cfg);
  } catch (const DivergenceError&) {
    rep.expected_reward = 0.0;
  }

  // Hold the final posture long enough for a catch at the end of the
  // motion to accumulate the required in-cup time on the oracle.
  JointTrajectory held = traj;
  const std::size_t tail = static_cast<std::size_t>((env.cup.hold_time + 0.5) * rate);
  const std::vector<double> zeros(held.q.back().size(), 0.0);
  for (std::size_t i = 1; i <= tail; ++i) {
    held.t.push_back(traj.t.back() + i / rate);
    held.q.push_back(traj.q.back());
    held.qd.push_back(zeros);
    held.qdd.push_back(zeros);
  }

  int successes = 0;
  for (int r = 0; r < n_repeat_runs; ++r) {
    const auto roll = rollout_oracle(env, held, rate, 10, 0.0);
    if (r == 0) {
      rep.actual_reward = episode_reward(traj, rollout_states(roll), reward_cfg);
      rep.success = roll.success;
      rep.max_hold = roll.max_hold;
    }
    if (roll.success) ++successes;
  }
  rep.repeatability = static_cast<double>(successes) / n_repeat_runs;
  return rep;
}

}  // namespace dynafit

#endif  // DYNAFIT_HARNESS_HPP
