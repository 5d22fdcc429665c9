// Episodic policy search: a radial-basis trajectory generator with
// weight-space exploration, the dipole episode reward, and eREPS updates
// under a KL trust region.

#ifndef DYNAFIT_POLICY_HPP
#define DYNAFIT_POLICY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <stdexcept>
#include <vector>

#include "dynafit/linalg.hpp"

namespace dynafit {

struct JointTrajectory {
  std::vector<double> t;
  std::vector<std::vector<double>> q, qd, qdd;
  std::size_t size() const { return t.size(); }
};

// q_j(t) = q0_j + s^2 sum_k w_jk phi_k(s), s = t / duration. The s^2
// factor pins q(0) = q0 and qd(0) = 0 exactly; Gaussian bases have fixed
// centers on [0, 1].
struct TrajectoryGenerator {
  int n_joints = 0;
  int n_basis = 10;
  double duration = 3.0;  // s
  double width = 0.12;    // basis std in normalized time
  std::vector<double> q0;

  int weight_count() const { return n_joints * n_basis; }

  double center(int k) const { return static_cast<double>(k) / (n_basis - 1); }

  // b(s), b'(s), b''(s) for basis k, including the s^2 prefactor.
  void basis(int k, double s, double& b, double& db, double& ddb) const {
    const double c = center(k);
    const double inv_h2 = 1.0 / (width * width);
    const double phi = std::exp(-0.5 * (s - c) * (s - c) * inv_h2);
    const double dphi = -(s - c) * inv_h2 * phi;
    const double ddphi = ((s - c) * (s - c) * inv_h2 - 1.0) * inv_h2 * phi;
    b = s * s * phi;
    db = 2.0 * s * phi + s * s * dphi;
    ddb = 2.0 * phi + 4.0 * s * dphi + s * s * ddphi;
  }

  JointTrajectory trajectory(const std::vector<double>& w, double rate) const {
    if (static_cast<int>(w.size()) != weight_count())
      throw std::invalid_argument("trajectory: weight vector has wrong dimension");
    if (static_cast<int>(q0.size()) != n_joints)
      throw std::invalid_argument("trajectory: q0 has wrong dimension");

    JointTrajectory traj;
    const std::size_t steps = static_cast<std::size_t>(duration * rate);
    const double inv_t = 1.0 / duration;
    for (std::size_t i = 0; i <= steps; ++i) {
      const double t = i / rate;
      const double s = t * inv_t;
      std::vector<double> q(n_joints), qd(n_joints), qdd(n_joints);
      for (int j = 0; j < n_joints; ++j) {
        double vq = q0[j], vqd = 0.0, vqdd = 0.0;
        for (int k = 0; k < n_basis; ++k) {
          double b, db, ddb;
          basis(k, s, b, db, ddb);
          const double wk = w[j * n_basis + k];
          vq += wk * b;
          vqd += wk * db * inv_t;
          vqdd += wk * ddb * inv_t * inv_t;
        }
        q[j] = vq;
        qd[j] = vqd;
        qdd[j] = vqdd;
      }
      traj.t.push_back(t);
      traj.q.push_back(std::move(q));
      traj.qd.push_back(std::move(qd));
      traj.qdd.push_back(std::move(qdd));
    }
    return traj;
  }
};

// Diagonal Gaussian over generator weights.
struct PolicyDistribution {
  std::vector<double> mean;
  std::vector<double> var;  // diagonal of Sigma
  double var_floor = 1e-6;

  int dim() const { return static_cast<int>(mean.size()); }

  static PolicyDistribution isotropic(int dim, double variance, double floor = 1e-6) {
    PolicyDistribution p;
    p.mean.assign(dim, 0.0);
    p.var.assign(dim, variance);
    p.var_floor = floor;
    return p;
  }

  void apply_floor() {
    for (double& v : var) v = std::max(v, var_floor);
  }
};

inline std::vector<double> sample_weights(const PolicyDistribution& policy, std::mt19937_64& gen) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> w(policy.mean.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = policy.mean[i] + std::sqrt(policy.var[i]) * nd(gen);
  return w;
}

inline JointTrajectory sample_trajectory(const PolicyDistribution& policy,
                                         const TrajectoryGenerator& gen, double rate,
                                         std::uint64_t seed) {
  std::mt19937_64 g(seed);
  return gen.trajectory(sample_weights(policy, g), rate);
}

struct RewardConfig {
  double eps = 1e-4;      // dipole regularizer, m^2
  double lambda_q = 0.0;  // posture penalty weight
  double lambda_qd = 0.0;
  std::vector<double> q0;
  bool flip_normal = false;
};

// States the reward needs from a rollout: ball-to-cup displacement and the
// cup opening normal per sample, plus the joint trajectory.
struct RolloutStates {
  std::vector<Vec3<double>> delta;   // x_B - x_C, world frame
  std::vector<Vec3<double>> normal;  // cup opening direction m_hat, world frame
};

// R = exp(0.5 max_t psi_t + 0.5 psi_N) - motion penalties, with
// psi = delta . m_hat / (|delta|^2 + eps).
inline double episode_reward(const JointTrajectory& traj, const RolloutStates& states,
                             const RewardConfig& cfg) {
  const std::size_t n = states.delta.size();
  if (n == 0) throw std::invalid_argument("episode_reward: empty rollout");
  if (states.normal.size() != n)
    throw std::invalid_argument("episode_reward: delta/normal length mismatch");

  const double sign = cfg.flip_normal ? -1.0 : 1.0;
  double psi_max = -1e300, psi_last = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double psi =
        sign * dot(states.delta[i], states.normal[i]) / (squared_norm(states.delta[i]) + cfg.eps);
    psi_max = std::max(psi_max, psi);
    psi_last = psi;
  }

  double penalty = 0.0;
  if ((cfg.lambda_q > 0.0 || cfg.lambda_qd > 0.0) && traj.size() > 0) {
    for (std::size_t i = 0; i < traj.size(); ++i) {
      for (int j = 0; j < static_cast<int>(traj.q[i].size()); ++j) {
        const double dq = traj.q[i][j] - (cfg.q0.empty() ? 0.0 : cfg.q0[j]);
        penalty += cfg.lambda_q * dq * dq + cfg.lambda_qd * traj.qd[i][j] * traj.qd[i][j];
      }
    }
    penalty /= static_cast<double>(traj.size());
  }
  return std::exp(0.5 * psi_max + 0.5 * psi_last) - penalty;
}

namespace erepsdetail {

// Normalized exponential weights d_i ~ exp(A_i / eta).
inline std::vector<double> reps_weights(const std::vector<double>& adv, double eta) {
  std::vector<double> d(adv.size());
  double s = 0.0;
  for (std::size_t i = 0; i < adv.size(); ++i) s += (d[i] = std::exp(adv[i] / eta));
  for (double& x : d) x /= s;
  return d;
}

inline double kl_to_uniform(const std::vector<double>& d) {
  const double n = static_cast<double>(d.size());
  double kl = 0.0;
  for (double x : d)
    if (x > 0.0) kl += x * std::log(x * n);
  return kl;
}

// Diagonal Gaussian KL(new || old).
inline double gaussian_kl(const std::vector<double>& mu_n, const std::vector<double>& var_n,
                          const std::vector<double>& mu_o, const std::vector<double>& var_o) {
  double kl = 0.0;
  for (std::size_t i = 0; i < mu_n.size(); ++i) {
    const double dm = mu_n[i] - mu_o[i];
    kl += var_n[i] / var_o[i] + dm * dm / var_o[i] - 1.0 + std::log(var_o[i] / var_n[i]);
  }
  return 0.5 * kl;
}

}  // namespace erepsdetail

// eREPS update: temperature from the sample-weight KL budget, weighted ML
// refit, then a KL trust region on the Gaussian update itself.
inline PolicyDistribution ereps_update(const std::vector<std::vector<double>>& samples,
                                       const std::vector<double>& rewards, double eps_kl,
                                       const PolicyDistribution& old_policy) {
  const std::size_t n = samples.size();
  if (n < 2) throw std::invalid_argument("ereps_update: need at least 2 samples");
  if (rewards.size() != n) throw std::invalid_argument("ereps_update: rewards size mismatch");
  for (double r : rewards)
    if (!std::isfinite(r)) throw std::invalid_argument("ereps_update: non-finite reward");
  const int dim = old_policy.dim();

  // Advantages make the weights invariant to constant reward shifts.
  const double rmax = *std::max_element(rewards.begin(), rewards.end());
  const double rmin = *std::min_element(rewards.begin(), rewards.end());
  std::vector<double> d(n, 1.0 / n);
  if (rmax - rmin > 1e-12 * std::max(1.0, std::abs(rmax))) {
    std::vector<double> adv(n);
    for (std::size_t i = 0; i < n; ++i) adv[i] = rewards[i] - rmax;
    // KL(d || uniform) decreases monotonically in eta; bisect to the budget.
    double lo = 1e-9, hi = 1e9;
    if (erepsdetail::kl_to_uniform(erepsdetail::reps_weights(adv, lo)) <= eps_kl) {
      d = erepsdetail::reps_weights(adv, lo);
    } else {
      for (int it = 0; it < 200; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (erepsdetail::kl_to_uniform(erepsdetail::reps_weights(adv, mid)) > eps_kl)
          lo = mid;
        else
          hi = mid;
      }
      d = erepsdetail::reps_weights(adv, hi);
    }
  }

  // Weighted maximum likelihood fit.
  std::vector<double> mu(dim, 0.0), var(dim, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) mu[j] += d[i] * samples[i][j];
  for (std::size_t i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) {
      const double dv = samples[i][j] - mu[j];
      var[j] += d[i] * dv * dv;
    }
  // Degenerate all-equal rewards keep the mean where it was.
  if (rmax - rmin <= 1e-12 * std::max(1.0, std::abs(rmax))) mu = old_policy.mean;

  PolicyDistribution next = old_policy;
  next.mean = mu;
  next.var = var;
  next.apply_floor();

  // Trust region on the parametric update: shrink toward the old policy
  // until KL(new || old) fits the budget.
  if (erepsdetail::gaussian_kl(next.mean, next.var, old_policy.mean, old_policy.var) > eps_kl) {
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 60; ++it) {
      const double a = 0.5 * (lo + hi);
      std::vector<double> m(dim), v(dim);
      for (int j = 0; j < dim; ++j) {
        m[j] = old_policy.mean[j] + a * (mu[j] - old_policy.mean[j]);
        v[j] = std::max(old_policy.var[j] + a * (next.var[j] - old_policy.var[j]),
                        old_policy.var_floor);
      }
      if (erepsdetail::gaussian_kl(m, v, old_policy.mean, old_policy.var) > eps_kl)
        hi = a;
      else
        lo = a;
    }
    for (int j = 0; j < dim; ++j) {
      next.mean[j] = old_policy.mean[j] + lo * (mu[j] - old_policy.mean[j]);
      next.var[j] = std::max(old_policy.var[j] + lo * (next.var[j] - old_policy.var[j]),
                             old_policy.var_floor);
    }
  }
  return next;
}

struct TrainConfig {
  int n_iters = 100;
  int n_samples = 32;
  double eps_kl = 0.5;
  double floor_reward = 0.0;  // assigned on rollout divergence
  std::uint64_t seed = 0;
};

struct TrainResult {
  PolicyDistribution policy;
  std::vector<double> curve;  // reward of the policy mean after each update
};

// The evaluator scores one weight sample inside the learned model; it may
// throw on divergence, which maps to the floor reward. Training never
// touches the oracle: whatever model the evaluator closes over is all it
// ever sees.
using EpisodeEvaluator = std::function<double(const std::vector<double>& weights)>;

inline TrainResult train_offline(const EpisodeEvaluator& evaluate, PolicyDistribution policy,
                                 const TrainConfig& cfg = {}) {
  TrainResult out;
  std::mt19937_64 gen(cfg.seed);
  for (int it = 0; it < cfg.n_iters; ++it) {
    std::vector<std::vector<double>> samples(cfg.n_samples);
    std::vector<double> rewards(cfg.n_samples);
    for (int i = 0; i < cfg.n_samples; ++i) {
      samples[i] = sample_weights(policy, gen);
      try {
        rewards[i] = evaluate(samples[i]);
        if (!std::isfinite(rewards[i])) rewards[i] = cfg.floor_reward;
      } catch (const std::exception&) {
        rewards[i] = cfg.floor_reward;
      }
    }
    policy = ereps_update(samples, rewards, cfg.eps_kl, policy);
    double mean_r;
    try {
      mean_r = evaluate(policy.mean);
      if (!std::isfinite(mean_r)) mean_r = cfg.floor_reward;
    } catch (const std::exception&) {
      mean_r = cfg.floor_reward;
    }
    out.curve.push_back(mean_r);
  }
  out.policy = std::move(policy);
  return out;
}

}  // namespace dynafit

#endif  // DYNAFIT_POLICY_HPP
