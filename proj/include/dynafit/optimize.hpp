// Deterministic optimizers for LeastSquaresProblem: gradient descent with
// momentum and backtracking, Adam, and Levenberg-Marquardt. All methods
// produce the same result for the same seed and budget.

#ifndef DYNAFIT_OPTIMIZE_HPP
#define DYNAFIT_OPTIMIZE_HPP

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "dynafit/loss.hpp"

namespace dynafit {

enum class OptMethod { GradientDescent, Adam, LevenbergMarquardt };

inline OptMethod parse_method(const std::string& s) {
  if (s == "gd") return OptMethod::GradientDescent;
  if (s == "adam") return OptMethod::Adam;
  if (s == "lm") return OptMethod::LevenbergMarquardt;
  throw std::invalid_argument("unknown optimizer method: " + s);
}

struct OptimizerConfig {
  OptMethod method = OptMethod::GradientDescent;
  int max_iters = 200;
  double step = 1e-2;       // initial learning rate / trust parameter
  double momentum = 0.9;    // gd only
  double tol = 1e-14;       // stop when relative loss decrease falls below
  double grad_clip = 0.0;   // 0 disables gradient norm clipping
  int restarts = 0;         // extra randomized starts, best result wins
  double restart_scale = 0.1;
  std::uint64_t seed = 0;
};

struct FitReport {
  std::vector<double> params;
  double initial_loss = 0.0;
  double final_loss = 0.0;
  std::vector<std::pair<std::string, double>> term_losses;
  int iterations = 0;
  bool converged = false;
};

namespace optdetail {

inline double norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline void clip(std::vector<double>& g, double max_norm) {
  if (max_norm <= 0.0) return;
  const double n = norm(g);
  if (n > max_norm)
    for (double& x : g) x *= max_norm / n;
}

inline FitReport run_gd(const LeastSquaresProblem& prob, std::vector<double> p,
                        const OptimizerConfig& cfg) {
  FitReport rep;
  const int np = prob.param_count();
  std::vector<double> vel(np, 0.0);
  double loss = 0.0;
  std::vector<double> g = prob.loss_gradient(p, &loss);
  rep.initial_loss = loss;
  double lr = cfg.step;

  for (int it = 0; it < cfg.max_iters; ++it) {
    clip(g, cfg.grad_clip);
    // backtrack by scaling the whole step; if the momentum direction cannot
    // make progress, drop it and backtrack along the pure gradient
    std::vector<double> dir(np), trial(np);
    for (int i = 0; i < np; ++i) dir[i] = cfg.momentum * vel[i] - lr * g[i];
    double trial_loss = loss;
    bool accepted = false;
    for (int phase = 0; phase < 2 && !accepted; ++phase) {
      double t = 1.0;
      for (int bt = 0; bt < 30; ++bt) {
        for (int i = 0; i < np; ++i) trial[i] = p[i] + t * dir[i];
        trial_loss = prob.loss(trial);
        if (std::isfinite(trial_loss) && trial_loss <= loss) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted)
        for (int i = 0; i < np; ++i) dir[i] = -lr * g[i];
    }
    if (!accepted) {
      rep.iterations = it;
      break;
    }
    for (int i = 0; i < np; ++i) vel[i] = trial[i] - p[i];
    p = trial;
    const double drop = loss - trial_loss;
    loss = trial_loss;
    rep.iterations = it + 1;
    lr = std::min(lr * 1.25, cfg.step * 10.0);
    if (drop <= cfg.tol * std::max(loss, 1.0)) {
      rep.converged = true;
      break;
    }
    g = prob.loss_gradient(p, &loss);
  }
  rep.params = std::move(p);
  rep.final_loss = loss;
  return rep;
}

inline FitReport run_adam(const LeastSquaresProblem& prob, std::vector<double> p,
                          const OptimizerConfig& cfg) {
  constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
  FitReport rep;
  const int np = prob.param_count();
  std::vector<double> m(np, 0.0), v(np, 0.0);
  double loss = 0.0;
  std::vector<double> g = prob.loss_gradient(p, &loss);
  rep.initial_loss = loss;
  double prev = loss;

  for (int it = 0; it < cfg.max_iters; ++it) {
    clip(g, cfg.grad_clip);
    const double c1 = 1.0 - std::pow(b1, it + 1);
    const double c2 = 1.0 - std::pow(b2, it + 1);
    for (int i = 0; i < np; ++i) {
      m[i] = b1 * m[i] + (1.0 - b1) * g[i];
      v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
      p[i] -= cfg.step * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
    }
    g = prob.loss_gradient(p, &loss);
    rep.iterations = it + 1;
    if (std::abs(prev - loss) <= cfg.tol * std::max(loss, 1.0)) {
      rep.converged = true;
      break;
    }
    prev = loss;
  }
  rep.params = std::move(p);
  rep.final_loss = loss;
  return rep;
}

inline FitReport run_lm(const LeastSquaresProblem& prob, std::vector<double> p,
                        const OptimizerConfig& cfg) {
  FitReport rep;
  const int np = prob.param_count();
  const int nr = prob.residual_count();
  std::vector<double> r, jac;
  prob.residuals_and_jacobian(p, r, jac);

  auto sq = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return s;
  };
  double loss = sq(r);
  rep.initial_loss = loss;
  double mu = cfg.step > 0.0 ? cfg.step : 1e-3;

  for (int it = 0; it < cfg.max_iters; ++it) {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> J(
        jac.data(), nr, np);
    Eigen::Map<const Eigen::VectorXd> rv(r.data(), nr);
    const Eigen::MatrixXd jtj = J.transpose() * J;
    const Eigen::VectorXd jtr = J.transpose() * rv;
    if (jtr.lpNorm<Eigen::Infinity>() < 1e-16) {
      rep.converged = true;
      rep.iterations = it;
      break;
    }

    Eigen::MatrixXd a = jtj;
    for (int i = 0; i < np; ++i) a(i, i) += mu * std::max(jtj(i, i), 1e-12);
    const Eigen::VectorXd delta = a.ldlt().solve(-jtr);

    std::vector<double> trial(np);
    for (int i = 0; i < np; ++i) trial[i] = p[i] + delta[i];
    std::vector<double> rt(nr);
    prob.residuals(std::span<const double>(trial), std::span<double>(rt));
    const double trial_loss = sq(rt);
    rep.iterations = it + 1;

    if (std::isfinite(trial_loss) && trial_loss < loss) {
      const double drop = loss - trial_loss;
      p = std::move(trial);
      loss = trial_loss;
      mu = std::max(mu / 3.0, 1e-14);
      prob.residuals_and_jacobian(p, r, jac);
      if (drop <= cfg.tol * std::max(loss, 1.0)) {
        rep.converged = true;
        break;
      }
    } else {
      mu *= 4.0;
      if (mu > 1e14) {
        rep.converged = true;
        break;
      }
    }
  }
  rep.params = std::move(p);
  rep.final_loss = loss;
  return rep;
}

inline FitReport run_single(const LeastSquaresProblem& prob, std::vector<double> p,
                            const OptimizerConfig& cfg) {
  switch (cfg.method) {
    case OptMethod::GradientDescent:
      return run_gd(prob, std::move(p), cfg);
    case OptMethod::Adam:
      return run_adam(prob, std::move(p), cfg);
    case OptMethod::LevenbergMarquardt:
      return run_lm(prob, std::move(p), cfg);
  }
  throw std::logic_error("unreachable optimizer method");
}

}  // namespace optdetail

inline FitReport identify(const LeastSquaresProblem& prob, std::vector<double> p0,
                          const OptimizerConfig& cfg = {}) {
  if (static_cast<int>(p0.size()) != prob.param_count())
    throw std::invalid_argument("identify: initial guess has wrong dimension");

  if (cfg.max_iters == 0) {
    FitReport rep;
    rep.final_loss = rep.initial_loss = prob.loss(p0);
    rep.params = std::move(p0);
    rep.term_losses = prob.term_breakdown(rep.params);
    return rep;
  }

  FitReport best = optdetail::run_single(prob, p0, cfg);
  std::mt19937_64 gen(cfg.seed);
  std::normal_distribution<double> nd(0.0, cfg.restart_scale);
  for (int k = 0; k < cfg.restarts; ++k) {
    std::vector<double> p = p0;
    for (double& x : p) x += nd(gen);
    FitReport rep = optdetail::run_single(prob, std::move(p), cfg);
    if (rep.final_loss < best.final_loss) best = std::move(rep);
  }
  best.term_losses = prob.term_breakdown(best.params);
  return best;
}

// String identification with softplus-sharpness continuation. At the
// final beta the constraint gate is nearly a step function, so a badly
// wrong initial length sits on a plateau with no gradient; fitting through
// a schedule of increasing beta keeps the basin wide early and tightens it
// late. Returns a report whose params are the full string parameter vector.
inline FitReport identify_string(const std::vector<StringConstrainedLoss::Row>& rows,
                                 StringConfig cfg, PenaltyWeights weights,
                                 std::vector<double> init, const std::vector<int>& free_indices,
                                 const OptimizerConfig& ocfg,
                                 std::vector<double> beta_schedule = {}) {
  if (beta_schedule.empty()) beta_schedule = {5.0, 20.0, 80.0, cfg.beta};
  FitReport rep;
  for (double beta : beta_schedule) {
    StringConfig stage = cfg;
    stage.beta = beta;
    StringConstrainedLoss loss(rows, stage, weights);
    SubsetProblem sub(loss, init, free_indices);
    rep = identify(sub, sub.restrict(init), ocfg);
    init = sub.expand(rep.params);
  }
  rep.params = std::move(init);
  return rep;
}

struct GradientCheckReport {
  double max_rel_err = 0.0;
  int worst_direction = -1;
  bool pass = false;
};

// Directional derivatives of the loss against central finite differences.
inline GradientCheckReport gradient_check(const LeastSquaresProblem& prob,
                                          std::span<const double> p, int n_directions = 8,
                                          double tol = 1e-5, std::uint64_t seed = 0,
                                          double fd_step = 1e-6) {
  const int np = prob.param_count();
  double loss = 0.0;
  const std::vector<double> g = prob.loss_gradient(p, &loss);

  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  GradientCheckReport rep;
  for (int k = 0; k < n_directions; ++k) {
    std::vector<double> dir(np);
    double n2 = 0.0;
    for (double& x : dir) {
      x = nd(gen);
      n2 += x * x;
    }
    const double inv = 1.0 / std::sqrt(n2);
    std::vector<double> pp(p.begin(), p.end()), pm(p.begin(), p.end());
    double analytic = 0.0;
    for (int i = 0; i < np; ++i) {
      pp[i] += fd_step * dir[i] * inv;
      pm[i] -= fd_step * dir[i] * inv;
      analytic += g[i] * dir[i] * inv;
    }
    const double fd = (prob.loss(pp) - prob.loss(pm)) / (2.0 * fd_step);
    const double err = std::abs(fd - analytic) / std::max({std::abs(fd), std::abs(analytic), 1e-8});
    if (err > rep.max_rel_err) {
      rep.max_rel_err = err;
      rep.worst_direction = k;
    }
  }
  rep.pass = rep.max_rel_err < tol;
  return rep;
}

}  // namespace dynafit

#endif  // DYNAFIT_OPTIMIZE_HPP
