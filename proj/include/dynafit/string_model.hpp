// Maximal-coordinate ball-on-string model: inequality constraint through
// ReLU / softplus, analytic constraint force, Baumgarte stabilization and
// semi-implicit time stepping.
//
// Constraint bookkeeping uses h = |d|^2 - r^2 with d = x_B - x_C (squared
// form, used by the penalty losses); the force magnitude gates on
// z = |d| - r. Both vanish on the same manifold. The force is lambda * d:
// the string acts only along itself, and lambda is clamped so it can only
// pull.
//
// Parameter vector layout (what identification differentiates through):
//   [rpy_E(3), p_E(3), theta_r, theta_sqrt_mB, theta_cd]   (9 entries)
// with r = theta_r^2, m_B = theta_sqrt_mB^2, c_d = theta_cd^2.

#ifndef DYNAFIT_STRING_MODEL_HPP
#define DYNAFIT_STRING_MODEL_HPP

#include <stdexcept>
#include <string>

#include "dynafit/newton_euler.hpp"

namespace dynafit {

inline constexpr int kStringParamCount = 9;

// Fixed (non-identified) constants of the string model.
struct StringConfig {
  double delta = 1e-6;  // denominator regularizer, m^2
  double beta = 200.0;  // softplus sharpness
  double kp = 100.0;    // Baumgarte position gain, 1/s^2
  double kd = 20.0;     // Baumgarte velocity gain, 1/s
  Vec3<double> gravity = vec3(0.0, 0.0, -9.81);
};

enum class ConstraintMode { Hard, Soft };

template <class S>
struct StringModel {
  RigidTransform<S> cup_offset;  // T_E: last-joint frame -> cup frame
  S string_length{};             // r, m
  S ball_mass{};                 // m_B, kg
  S drag{};                      // c_d, 1/s
  StringConfig cfg;
};

template <class S>
StringModel<S> realize_string(const S* p, const StringConfig& cfg = {}) {
  StringModel<S> m;
  VirtualKinematicParams<S> k;
  k.rpy = vec3(p[0], p[1], p[2]);
  k.translation = vec3(p[3], p[4], p[5]);
  m.cup_offset = realize_transform(k);
  m.string_length = p[6] * p[6];
  m.ball_mass = p[7] * p[7];
  m.drag = p[8] * p[8];
  m.cfg = cfg;
  return m;
}

template <class S>
struct BallState {
  Vec3<S> position{};
  Vec3<S> velocity{};
};

template <class S>
struct CupMotion {
  Vec3<S> position{};
  Vec3<S> velocity{};
  Vec3<S> accel{};
  Vec3<S> normal = vec3(S(0.0), S(0.0), S(1.0));  // outward opening normal, world frame
};

// Cup-frame motion from the last-joint frame motion and T_E.
template <class S>
CupMotion<S> cup_motion(const LinkMotion<S>& joint_frame, const RigidTransform<S>& cup_offset) {
  const auto f = frame_motion(joint_frame, cup_offset);
  CupMotion<S> c;
  c.position = f.position;
  c.velocity = f.velocity;
  c.accel = f.accel;
  c.normal = f.rotation * vec3(S(0.0), S(0.0), S(1.0));
  return c;
}

namespace stringdetail {

template <class S>
S softplus(const S& x, double beta) {
  using std::exp;
  using std::log;
  // log(1 + exp(beta x)) / beta, overflow-safe
  if (value(x) * beta > 30.0) return x;
  return log(S(1.0) + exp(x * S(beta))) * S(1.0 / beta);
}

template <class S>
S sigmoid(const S& x, double beta) {
  using std::exp;
  if (value(x) * beta > 30.0) return S(1.0);
  if (value(x) * beta < -30.0) return S(0.0);
  return S(1.0) / (S(1.0) + exp(-x * S(beta)));
}

}  // namespace stringdetail

// g = sigma(h), h = |d|^2 - r^2. Hard mode: ReLU; soft mode: softplus.
template <class S>
S constraint_value(const BallState<S>& ball, const CupMotion<S>& cup, const StringModel<S>& m,
                   ConstraintMode mode) {
  const Vec3<S> d = ball.position - cup.position;
  const S h = squared_norm(d) - m.string_length * m.string_length;
  if (mode == ConstraintMode::Hard) return value(h) > 0.0 ? h : S(0.0);
  return stringdetail::softplus(h, m.cfg.beta);
}

template <class S>
struct ConstraintDerivatives {
  S g{};
  S gdot{};
  // gddot = free_term + force_coeff * lambda  with f_c = lambda * d
  S free_term{};
  S force_coeff{};
  bool taut = false;
};

template <class S>
ConstraintDerivatives<S> constraint_derivatives(const BallState<S>& ball, const CupMotion<S>& cup,
                                                const StringModel<S>& m,
                                                ConstraintMode mode = ConstraintMode::Hard) {
  const Vec3<S> d = ball.position - cup.position;
  const Vec3<S> dd = ball.velocity - cup.velocity;
  const S h = squared_norm(d) - m.string_length * m.string_length;
  const S hdot = S(2.0) * dot(d, dd);

  ConstraintDerivatives<S> out;
  out.taut = value(h) >= 0.0;
  if (mode == ConstraintMode::Hard) {
    const S gate = out.taut ? S(1.0) : S(0.0);
    out.g = gate * h;
    out.gdot = gate * hdot;
  } else {
    out.g = stringdetail::softplus(h, m.cfg.beta);
    out.gdot = stringdetail::sigmoid(h, m.cfg.beta) * hdot;
  }

  // hddot = 2 (|dd|^2 + d . (a_free + f_c/m_B - a_C)), a_free = g - c_d v_B
  const Vec3<S> a_free = to_scalar<S, 3>(m.cfg.gravity) - m.drag * ball.velocity;
  const S hddot_free = S(2.0) * (squared_norm(dd) + dot(d, a_free - cup.accel));
  const S hddot_coeff = S(2.0) * squared_norm(d) / m.ball_mass;
  if (mode == ConstraintMode::Hard) {
    const S gate = out.taut ? S(1.0) : S(0.0);
    out.free_term = gate * hddot_free;
    out.force_coeff = gate * hddot_coeff;
  } else {
    const S sp = stringdetail::sigmoid(h, m.cfg.beta);
    // second derivative of softplus contributes sigma'' hdot^2
    const S spp = S(m.cfg.beta) * sp * (S(1.0) - sp);
    out.free_term = spp * hdot * hdot + sp * hddot_free;
    out.force_coeff = sp * hddot_coeff;
  }
  return out;
}

// f_c = lambda d. Solves the Baumgarte-stabilized constraint
// gddot = -kp g - kd gdot for lambda when taut; lambda is clamped to pull
// only. Slack string (sigma'(z) = 0 in hard mode) gives exactly zero.
template <class S>
Vec3<S> constraint_force(const BallState<S>& ball, const CupMotion<S>& cup, const StringModel<S>& m,
                         ConstraintMode mode = ConstraintMode::Hard) {
  using std::sqrt;
  const Vec3<S> d = ball.position - cup.position;
  const Vec3<S> dd = ball.velocity - cup.velocity;
  const S dist2 = squared_norm(d);
  const S z = sqrt(dist2 + S(1e-18)) - m.string_length;

  S gate;
  if (mode == ConstraintMode::Hard) {
    if (value(z) < 0.0) return Vec3<S>::zero();
    gate = S(1.0);
  } else {
    gate = stringdetail::sigmoid(z, m.cfg.beta);
  }

  const Vec3<S> a_free = to_scalar<S, 3>(m.cfg.gravity) - m.drag * ball.velocity;
  // gddot target: -kp g - kd gdot (0 without Baumgarte)
  const S target = -S(m.cfg.kp) * (dist2 - m.string_length * m.string_length) - S(m.cfg.kd) * S(2.0) * dot(d, dd);
  // 2 (|dd|^2 + d.(a_free - a_C)) + 2 |d|^2 lambda / m_B = target
  S lambda = m.ball_mass * (S(0.5) * target - squared_norm(dd) - dot(d, a_free - cup.accel)) /
             (dist2 + S(m.cfg.delta));
  // tension only: the string cannot push
  if (value(lambda) > 0.0) lambda = S(0.0);
  return gate * lambda * d;
}

// xddot_B = gravity + f_c / m_B - c_d * xdot_B
template <class S>
Vec3<S> ball_acceleration(const BallState<S>& ball, const CupMotion<S>& cup,
                          const StringModel<S>& m, ConstraintMode mode = ConstraintMode::Hard) {
  const Vec3<S> fc = constraint_force(ball, cup, m, mode);
  return to_scalar<S, 3>(m.cfg.gravity) + fc * (S(1.0) / m.ball_mass) - m.drag * ball.velocity;
}

struct DivergenceError : std::runtime_error {
  int step_index;
  DivergenceError(int step, const std::string& what)
      : std::runtime_error(what + " at step " + std::to_string(step)), step_index(step) {}
};

// One semi-implicit Euler step.
template <class S>
BallState<S> step(const BallState<S>& ball, const CupMotion<S>& cup, const StringModel<S>& m,
                  double dt, int step_index = 0, ConstraintMode mode = ConstraintMode::Hard) {
  if (dt <= 0.0) throw std::invalid_argument("step: dt must be positive");
  const Vec3<S> a = ball_acceleration(ball, cup, m, mode);
  BallState<S> next;
  next.velocity = ball.velocity + a * S(dt);
  next.position = ball.position + next.velocity * S(dt);
  for (int i = 0; i < 3; ++i)
    if (!isfinite(next.position[i]) || !isfinite(next.velocity[i]))
      throw DivergenceError(step_index, "ball state diverged");
  return next;
}

}  // namespace dynafit

#endif  // DYNAFIT_STRING_MODEL_HPP
