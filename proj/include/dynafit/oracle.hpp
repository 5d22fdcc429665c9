// Ground-truth environment: the true arm plus a string modeled as a chain
// of point masses with inextensible distance constraints, integrated with
// position-based projection. Plays the role the real system / MuJoCo plays
// for the paper: models are fit to its data and policies are judged on it.

#ifndef DYNAFIT_ORACLE_HPP
#define DYNAFIT_ORACLE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynafit/newton_euler.hpp"
#include "dynafit/policy.hpp"
#include "dynafit/string_model.hpp"

namespace dynafit {

struct CatchGeometry {
  double radius = 0.04;    // cup mouth radius, m
  double depth = 0.08;     // cup depth below the mouth, m
  double hold_time = 0.5;  // s the ball must stay inside
};

struct ChainConfig {
  int n_seg = 10;
  double length = 0.40;    // total string length r, m
  double ball_mass = 0.05; // kg, last particle
  double link_mass = 5e-5;  // light string: total ~1% of the ball mass
  double damping = 0.05;   // velocity drag, 1/s
  int iterations = 8;      // Newton passes of the constraint solve per step
  Vec3<double> gravity = vec3(0.0, 0.0, -9.81);
};

struct OracleEnvironment {
  TreeTopology topo;
  std::vector<double> arm_params;  // true virtual parameters
  RigidTransform<double> cup_offset;
  ChainConfig chain;
  CatchGeometry cup;
  mutable std::uint64_t access_count = 0;  // every query bumps this
};

// Particle chain state; particle n_seg - 1 is the ball, the anchor is the
// cup position and is not stored.
struct ChainState {
  std::vector<Vec3<double>> pos, vel;
};

inline ChainState hanging_chain(const ChainConfig& cfg, const Vec3<double>& anchor) {
  ChainState s;
  const double seg = cfg.length / cfg.n_seg;
  for (int i = 1; i <= cfg.n_seg; ++i) {
    s.pos.push_back(anchor + vec3(0.0, 0.0, -seg * i));
    s.vel.push_back(Vec3<double>::zero());
  }
  return s;
}

// One position-based step: integrate under gravity and drag, then project
// the segment length constraints. The constraints are tension-only
// (|segment| <= seg): a slack string transmits nothing, so a tossed ball
// flies free instead of being pushed by a rigid rod. Each projection pass
// linearizes the active constraints and solves the tridiagonal system
// J M^-1 J^T lambda = C directly, dropping constraints whose multiplier
// comes out compressive; Gauss-Seidel sweeps stall badly at the string's
// link/ball mass ratio. A final clamp keeps no segment stretched.
inline void chain_step(const OracleEnvironment& env, ChainState& state,
                       const Vec3<double>& anchor, double dt, int step_index = 0,
                       const Vec3<double>& cup_normal = vec3(0.0, 0.0, 1.0)) {
  ++env.access_count;
  const ChainConfig& cfg = env.chain;
  const double seg = cfg.length / cfg.n_seg;
  const int n = cfg.n_seg;

  std::vector<Vec3<double>> prev = state.pos;
  for (int i = 0; i < n; ++i) {
    state.vel[i] += (cfg.gravity - cfg.damping * state.vel[i]) * dt;
    state.pos[i] += state.vel[i] * dt;
  }

  std::vector<double> w(n, 1.0 / cfg.link_mass);
  w[n - 1] = 1.0 / cfg.ball_mass;
  std::vector<Vec3<double>> u(n);
  std::vector<double> C(n), a(n), b(n), c(n), rhs(n), lam(n);
  std::vector<char> active(n);

  for (int it = 0; it < cfg.iterations; ++it) {
    double max_violation = 0.0;
    for (int i = 0; i < n; ++i) {
      const Vec3<double> inner = i == 0 ? anchor : state.pos[i - 1];
      const Vec3<double> d = state.pos[i] - inner;
      const double len = norm(d);
      u[i] = len < 1e-12 ? vec3(0.0, 0.0, -1.0) : d * (1.0 / len);
      C[i] = len - seg;
      active[i] = C[i] > -1e-9;  // at or past the limit: candidate for tension
      max_violation = std::max(max_violation, C[i]);
    }
    if (max_violation < 1e-14) break;

    // Active-set passes: solve, then drop constraints that wanted to push.
    for (int pass = 0; pass < 6; ++pass) {
      for (int i = 0; i < n; ++i) {
        if (!active[i]) { a[i] = 0.0; b[i] = 1.0; c[i] = 0.0; rhs[i] = 0.0; continue; }
        b[i] = (i == 0 ? 0.0 : w[i - 1]) + w[i];  // anchor is immovable
        a[i] = (i > 0 && active[i - 1]) ? -w[i - 1] * dot(u[i - 1], u[i]) : 0.0;
        c[i] = (i + 1 < n && active[i + 1]) ? -w[i] * dot(u[i], u[i + 1]) : 0.0;
        rhs[i] = C[i];
      }
      for (int i = 1; i < n; ++i) {  // Thomas elimination
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        rhs[i] -= m * rhs[i - 1];
      }
      lam[n - 1] = rhs[n - 1] / b[n - 1];
      for (int i = n - 2; i >= 0; --i) lam[i] = (rhs[i] - c[i] * lam[i + 1]) / b[i];

      bool changed = false;
      for (int i = 0; i < n; ++i) {
        if (!active[i]) { lam[i] = 0.0; continue; }
        if (lam[i] < 0.0) { active[i] = 0; lam[i] = 0.0; changed = true; }
      }
      if (!changed) break;
    }
    for (int i = 0; i < n; ++i) {
      Vec3<double> dp = u[i] * (-lam[i] * w[i]);
      if (i + 1 < n) dp = dp + u[i + 1] * (lam[i + 1] * w[i]);
      state.pos[i] += dp;
    }
  }
  // Clamp pass: no segment may end the step stretched.
  for (int i = 0; i < n; ++i) {
    const Vec3<double> inner = i == 0 ? anchor : state.pos[i - 1];
    const Vec3<double> d = state.pos[i] - inner;
    const double len = norm(d);
    if (len > seg) state.pos[i] = inner + d * (seg / len);
  }

  // Cup contact for the ball: the cup bottom is a solid disk, so a ball
  // that drops in comes to rest instead of falling through. The axial
  // position is projected back onto the bottom and tangential sliding is
  // damped hard (a felt-lined cup, not an ice rink).
  {
    Vec3<double>& ball = state.pos[n - 1];
    const Vec3<double> rel_prev = prev[n - 1] - anchor;
    const double ax_prev = dot(rel_prev, cup_normal);
    const double rad_prev = norm(rel_prev - ax_prev * cup_normal);

    Vec3<double> rel = ball - anchor;
    double ax = dot(rel, cup_normal);
    Vec3<double> rad = rel - ax * cup_normal;
    if (ax < -env.cup.depth && ax_prev > -env.cup.depth - 0.5 * env.cup.radius &&
        norm(rad) <= env.cup.radius) {
      const Vec3<double> slide = rad - (rel_prev - ax_prev * cup_normal);
      // rest a hair above the bottom so a settled ball is strictly inside
      const double floor_ax = -env.cup.depth * (1.0 - 1e-6);
      ball = ball - (ax - floor_ax) * cup_normal - 0.8 * slide;
    }
    // walls, one-sided from the inside: a ball that dropped in cannot slide
    // out sideways (entering through the wall from outside stays possible;
    // bouncing a swinging ball off the outside would only add violence)
    rel = ball - anchor;
    ax = dot(rel, cup_normal);
    rad = rel - ax * cup_normal;
    const double r_now = norm(rad);
    const double r_wall = 0.995 * env.cup.radius;
    if (ax < 0.0 && ax > -env.cup.depth - 1e-9 && r_now > r_wall &&
        rad_prev <= env.cup.radius + 1e-9 && ax_prev < 0.0)
      ball = ball - rad * ((r_now - r_wall) / r_now);
  }

  for (int i = 0; i < n; ++i) {
    state.vel[i] = (state.pos[i] - prev[i]) * (1.0 / dt);
    for (int k = 0; k < 3; ++k)
      if (!std::isfinite(state.pos[i][k])) throw DivergenceError(step_index, "chain diverged");
  }
}

inline double chain_length(const ChainState& state, const Vec3<double>& anchor) {
  double total = 0.0;
  Vec3<double> prev = anchor;
  for (const auto& p : state.pos) {
    total += norm(p - prev);
    prev = p;
  }
  return total;
}

// Everything the reward and the success test need from one oracle episode.
struct OracleRollout {
  std::vector<double> t;
  std::vector<Vec3<double>> ball_pos, ball_vel;
  std::vector<Vec3<double>> cup_pos, cup_vel, cup_acc, cup_normal;
  bool success = false;
  double max_hold = 0.0;  // longest stretch inside the cup, s
};

inline bool ball_in_cup(const Vec3<double>& ball, const Vec3<double>& cup_pos,
                        const Vec3<double>& normal, const CatchGeometry& geom) {
  const Vec3<double> rel = ball - cup_pos;
  const double axial = dot(rel, normal);
  if (axial > 0.0 || axial < -geom.depth) return false;
  const Vec3<double> radial = rel - axial * normal;
  return norm(radial) <= geom.radius;
}

// Execute a joint trajectory kinematically on the true arm and integrate
// the chain against the moving cup. `substeps` chain steps are taken per
// trajectory sample; `settle` seconds of hold at the start posture let the
// chain reach rest before the motion begins.
inline OracleRollout rollout_oracle(const OracleEnvironment& env, const JointTrajectory& traj,
                                    double rate, int substeps = 4, double settle = 2.0) {
  ++env.access_count;
  if (traj.size() == 0) throw std::invalid_argument("rollout_oracle: empty trajectory");
  const auto links = realize_tree(env.topo, env.arm_params.data());
  const double dt = 1.0 / (rate * substeps);

  auto cup_at = [&](const std::vector<double>& q, const std::vector<double>& qd,
                    const std::vector<double>& qdd) {
    const auto fk = forward_kinematics(env.topo, links, q, qd, qdd);
    return cup_motion(fk.back(), env.cup_offset);
  };

  const std::vector<double> zeros(traj.q[0].size(), 0.0);
  const auto cup0 = cup_at(traj.q[0], zeros, zeros);
  ChainState chain = hanging_chain(env.chain, cup0.position);
  const int settle_steps = static_cast<int>(settle / dt);
  for (int s = 0; s < settle_steps; ++s) chain_step(env, chain, cup0.position, dt, -1);

  OracleRollout out;
  double hold = 0.0;
  int step_index = 0;
  Vec3<double> prev_anchor = cup0.position;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const auto cup = cup_at(traj.q[i], traj.qd[i], traj.qdd[i]);
    // linear anchor interpolation across substeps, ending exactly at the
    // cup position of this sample so state and cup stay aligned in time
    for (int s = 0; s < substeps; ++s) {
      const double a = static_cast<double>(s + 1) / substeps;
      const Vec3<double> anchor = prev_anchor * (1.0 - a) + cup.position * a;
      chain_step(env, chain, anchor, dt, step_index++, cup.normal);
    }
    prev_anchor = cup.position;

    out.t.push_back(traj.t[i]);
    out.ball_pos.push_back(chain.pos.back());
    out.ball_vel.push_back(chain.vel.back());
    out.cup_pos.push_back(cup.position);
    out.cup_vel.push_back(cup.velocity);
    out.cup_acc.push_back(cup.accel);
    out.cup_normal.push_back(cup.normal);

    if (ball_in_cup(chain.pos.back(), cup.position, cup.normal, env.cup))
      hold += 1.0 / rate;
    else
      hold = 0.0;
    out.max_hold = std::max(out.max_hold, hold);
  }
  out.success = out.max_hold >= env.cup.hold_time;
  return out;
}

// Reward-facing view of an oracle rollout.
inline RolloutStates rollout_states(const OracleRollout& r) {
  RolloutStates s;
  for (std::size_t i = 0; i < r.t.size(); ++i) {
    s.delta.push_back(r.ball_pos[i] - r.cup_pos[i]);
    s.normal.push_back(r.cup_normal[i]);
  }
  return s;
}

}  // namespace dynafit

#endif  // DYNAFIT_ORACLE_HPP
