// End-to-end offline MBRL experiment: generate identification data against
// the chain oracle, identify the arm and the string, train eREPS policies
// entirely inside the identified model, then score them on the oracle.

#ifndef DYNAFIT_EXPERIMENT_HPP
#define DYNAFIT_EXPERIMENT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dynafit/demonstration.hpp"
#include "dynafit/harness.hpp"
#include "dynafit/io.hpp"
#include "dynafit/loss.hpp"
#include "dynafit/models.hpp"
#include "dynafit/optimize.hpp"

namespace dynafit {

struct ExperimentConfig {
  double string_length = 0.40;  // oracle truth, m
  bool nominal_model = false;   // skip identification, use CAD-style params
  bool train_policy = true;     // identification-only runs leave this off
  int n_rl_seeds = 10;
  int best_k = 10;  // report averages over the best k seeds
  std::uint64_t seed = 0;
  std::string out_dir;  // empty: keep everything in memory

  ArmExcitationConfig arm_exc;
  BallExcitationConfig ball_exc;
  int arm_stride = 50;   // identification subsampling
  int ball_stride = 2;
  double string_r_init = 0.50;   // deliberately wrong initial length, m
  double string_cd_init = 0.02;  // small positive drag guess, 1/s

  OptimizerConfig arm_opt;
  OptimizerConfig string_opt;
  PenaltyWeights string_weights;
  StringConfig string_cfg;

  TrainConfig train;
  RewardConfig reward;  // q0 defaults to the demonstration's ready posture
  double control_rate = 125.0;
  int n_basis = 10;
  double episode_duration = 3.5;
  double basis_width = 0.12;
  double init_variance = 0.002;  // exploration around the demonstration
  DemoPlanConfig demo;           // model-based demonstration planning

  ExperimentConfig() {
    // gentler sweep than the harness default: mostly-taut data with short
    // slack episodes identifies the length far better, and the sharper
    // gate keeps the soft-model bias below the hard-polish basin width
    ball_exc.freq = 0.5;
    string_cfg.beta = 800.0;
    arm_opt.method = OptMethod::LevenbergMarquardt;
    arm_opt.max_iters = 100;
    arm_opt.tol = 1e-16;
    arm_opt.restarts = 8;  // the CAD init sits in a local minimum's basin
    arm_opt.restart_scale = 0.05;
    string_opt.method = OptMethod::LevenbergMarquardt;
    string_opt.max_iters = 100;
    string_opt.tol = 1e-16;
    // widen the reward basin to the scale of the model's rollout accuracy:
    // sharper peaks reward knife-edge flybys that do not survive the oracle
    reward.eps = 4e-4;
  }
};

struct SeedResult {
  std::uint64_t seed = 0;
  PolicyDistribution policy;
  std::vector<double> curve;
  EvalReport eval;
};

struct ExperimentReport {
  double string_length = 0.0;
  bool nominal_model = false;
  double data_budget_s = 0.0;  // identification data consumed
  FitReport arm_fit, string_fit;
  double identified_r = 0.0;
  std::uint64_t oracle_queries_during_training = 0;
  std::vector<SeedResult> seeds;
  // Table-style summary over the best k seeds by oracle reward.
  double avg_reward = 0.0, std_reward = 0.0;
  double transferability = 0.0;  // fraction of seeds whose policy succeeds
  double repeatability = 0.0;    // re-run success rate of the best policy
};

// Arm identification: inertial + damping parameters free, kinematics fixed.
inline FitReport identify_arm(const TreeTopology& topo, const std::vector<double>& init,
                              const TrajectoryDataset& ds, int stride,
                              const OptimizerConfig& ocfg) {
  InverseDynamicsLoss loss(topo, ds, stride);
  std::vector<int> free;
  for (int i = 0; i < topo.size(); ++i)
    for (int k = 6; k < kParamsPerLink; ++k) free.push_back(i * kParamsPerLink + k);
  SubsetProblem sub(loss, init, free);
  auto rep = identify(sub, sub.restrict(init), ocfg);
  rep.params = sub.expand(rep.params);
  return rep;
}

// String identification against ball data: cup translation, length and
// damping free; rotation about the string axis and the ball mass are not
// identifiable and stay at their initial values.
inline FitReport identify_string_stage(const TreeTopology& topo,
                                       const std::vector<double>& arm_params,
                                       const TrajectoryDataset& ds, int stride,
                                       const std::vector<double>& init, const StringConfig& scfg,
                                       const PenaltyWeights& weights, const OptimizerConfig& ocfg,
                                       double trim_frac = 0.1) {
  const auto links = realize_tree(topo, arm_params.data());
  auto rows = StringConstrainedLoss::make_rows(topo, links, ds, stride);
  auto rep = identify_string(rows, scfg, weights, init, {3, 4, 5, 6, 8}, ocfg);
  if (trim_frac <= 0.0 || rows.size() < 20) return rep;

  // The differentiated ball accelerations are corrupted around slack/taut
  // transitions; trim the worst-fitting rows and refit at the final beta.
  StringConstrainedLoss full(rows, scfg, weights);
  std::vector<double> res(full.residual_count());
  full.residuals(std::span<const double>(rep.params), std::span<double>(res));
  std::vector<double> score(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    score[i] = res[3 * i] * res[3 * i] + res[3 * i + 1] * res[3 * i + 1] +
               res[3 * i + 2] * res[3 * i + 2];
  auto sorted = score;
  std::sort(sorted.begin(), sorted.end());
  const double cut = sorted[static_cast<std::size_t>((1.0 - trim_frac) * (sorted.size() - 1))];
  std::vector<StringConstrainedLoss::Row> kept;
  for (std::size_t i = 0; i < rows.size(); ++i)
    if (score[i] <= cut) kept.push_back(rows[i]);
  rep = identify_string(kept, scfg, weights, rep.params, {3, 4, 5, 6, 8}, ocfg, {scfg.beta});

  // The sigmoid gate only reaches 1/2 at |d| = r, which biases the soft fit
  // short by a few mm. Polish with the exact hard gate from the soft basin.
  StringConstrainedLoss hard(kept, scfg, weights, false);
  SubsetProblem sub(hard, rep.params, {3, 4, 5, 6, 8});
  auto polished = identify(sub, sub.restrict(rep.params), ocfg);
  polished.params = sub.expand(polished.params);
  return polished.final_loss < rep.final_loss ? polished : rep;
}

inline double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

inline Json experiment_report_to_json(const ExperimentReport& rep) {
  Json seeds = Json::array();
  for (const auto& s : rep.seeds)
    seeds.push_back(Json{{"seed", s.seed},
                         {"curve", s.curve},
                         {"eval", eval_report_to_json(s.eval)}});
  return Json{{"version", 1},
              {"string_length", rep.string_length},
              {"nominal_model", rep.nominal_model},
              {"data_budget_s", rep.data_budget_s},
              {"identified_r", rep.identified_r},
              {"oracle_queries_during_training", rep.oracle_queries_during_training},
              {"avg_reward", rep.avg_reward},
              {"std_reward", rep.std_reward},
              {"transferability", rep.transferability},
              {"repeatability", rep.repeatability},
              {"arm_fit", fit_report_to_json(rep.arm_fit)},
              {"string_fit", fit_report_to_json(rep.string_fit)},
              {"seeds", seeds}};
}

inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  const auto arm = wam4();
  const StringTruth truth{cfg.string_length, 0.05, vec3(0.005, -0.003, 0.002)};

  OracleEnvironment env;
  env.topo = arm.topo;
  env.arm_params = arm.params;
  env.cup_offset = arm.cup_offset;
  env.chain.length = cfg.string_length;

  const bool emit = !cfg.out_dir.empty();
  if (emit) std::filesystem::create_directories(cfg.out_dir);
  auto artifact = [&](const std::string& name) { return cfg.out_dir + "/" + name; };

  ExperimentReport rep;
  rep.string_length = cfg.string_length;
  rep.nominal_model = cfg.nominal_model;

  // --- datasets -----------------------------------------------------------
  const auto arm_ds = generate_arm_excitation(arm, cfg.arm_exc, cfg.seed * 1000 + 1);
  const auto ball_ds = generate_ball_excitation(env, arm, cfg.ball_exc, cfg.seed * 1000 + 2);
  rep.data_budget_s = cfg.arm_exc.duration + cfg.ball_exc.duration * cfg.ball_exc.n_repeats;
  if (emit) {
    write_dataset(arm_ds, artifact("arm_excitation"));
    write_dataset(ball_ds, artifact("ball_excitation"));
  }

  // --- identification -----------------------------------------------------
  LearnedModel model;
  model.topo = arm.topo;
  model.string_cfg = cfg.string_cfg;
  const auto nominal_string =
      string_truth_params(truth, arm.cup_offset);  // CAD guess: true-but-mismatched
  if (cfg.nominal_model) {
    model.arm_params = nominal_arm_params(arm);
    model.string_params = nominal_string;
    rep.identified_r = truth.length;
  } else {
    rep.arm_fit =
        identify_arm(arm.topo, nominal_arm_params(arm), arm_ds, cfg.arm_stride, cfg.arm_opt);
    model.arm_params = rep.arm_fit.params;

    auto string_init = nominal_string;
    string_init[3] = arm.cup_offset.translation[0];  // CAD cup frame, no shift
    string_init[4] = arm.cup_offset.translation[1];
    string_init[5] = arm.cup_offset.translation[2];
    string_init[6] = std::sqrt(cfg.string_r_init);
    // Drag is absent from the nominal model and parametrized as theta^2, so
    // an init of exactly zero would have zero gradient; start slightly off.
    string_init[8] = std::sqrt(cfg.string_cd_init);
    rep.string_fit =
        identify_string_stage(arm.topo, model.arm_params, ball_ds, cfg.ball_stride, string_init,
                              cfg.string_cfg, cfg.string_weights, cfg.string_opt);
    model.string_params = rep.string_fit.params;
    rep.identified_r = rep.string_fit.params[6] * rep.string_fit.params[6];
  }
  if (emit) {
    save_json(fit_report_to_json(rep.arm_fit), artifact("arm_fit.json"));
    save_json(fit_report_to_json(rep.string_fit), artifact("string_fit.json"));
  }

  if (!cfg.train_policy) {
    if (emit) save_json(experiment_report_to_json(rep), artifact("report.json"));
    return rep;
  }

  // --- policy training (model only; the counter proves it) ----------------
  TrajectoryGenerator gen;
  gen.n_joints = arm.topo.size();
  gen.n_basis = cfg.n_basis;
  gen.duration = cfg.episode_duration;
  gen.width = cfg.basis_width;
  gen.q0 = ready_posture();

  RewardConfig reward = cfg.reward;
  if (reward.q0.empty()) reward.q0 = gen.q0;

  // Pessimistic training objective: the episode is scored in every member
  // of the perturbed-model ensemble and the worst reward counts, so eREPS
  // cannot converge onto flybys that only exist at the point estimate.
  const auto ensemble = demo_ensemble(model, cfg.demo.d_length, cfg.demo.d_drag);

  const std::uint64_t queries_before = env.access_count;
  std::vector<SeedResult> seeds(cfg.n_rl_seeds);
  for (int k = 0; k < cfg.n_rl_seeds; ++k) {
    auto& sr = seeds[k];
    sr.seed = cfg.seed * 100 + k;

    EpisodeEvaluator evaluate = [&](const std::vector<double>& w) {
      const auto traj = gen.trajectory(w, cfg.control_rate);
      double worst = 1e300;
      for (const auto& m : ensemble) {
        double r;
        try {
          r = episode_reward(traj, rollout_model(m, traj, cfg.control_rate), reward);
        } catch (const DivergenceError&) {
          return 0.0;
        }
        worst = std::min(worst, r);
      }
      return worst;
    };

    // Demonstration-initialized mean: a swing-and-catch planned inside the
    // learned model, projected onto the policy basis.
    const auto plan = plan_demonstration(model, gen, cfg.control_rate, sr.seed, cfg.demo);

    TrainConfig tcfg = cfg.train;
    tcfg.seed = sr.seed;
    auto policy = PolicyDistribution::isotropic(gen.weight_count(), cfg.init_variance);
    policy.mean = plan.weights;
    const auto result = train_offline(evaluate, policy, tcfg);
    sr.policy = result.policy;
    sr.curve = result.curve;
  }
  rep.oracle_queries_during_training = env.access_count - queries_before;

  // --- oracle evaluation --------------------------------------------------
  for (auto& sr : seeds)
    sr.eval = evaluate_policy(sr.policy, gen, model, env, reward, cfg.control_rate);
  rep.seeds = seeds;

  std::vector<double> rewards;
  int successes = 0;
  for (const auto& sr : seeds) {
    rewards.push_back(sr.eval.actual_reward);
    if (sr.eval.success) ++successes;
  }
  std::sort(rewards.rbegin(), rewards.rend());
  const int k = std::min<int>(cfg.best_k, static_cast<int>(rewards.size()));
  rewards.resize(k);
  rep.avg_reward = mean_of(rewards);
  double var = 0.0;
  for (double r : rewards) var += (r - rep.avg_reward) * (r - rep.avg_reward);
  rep.std_reward = k > 1 ? std::sqrt(var / (k - 1)) : 0.0;
  rep.transferability = seeds.empty() ? 0.0 : static_cast<double>(successes) / seeds.size();

  const auto best = std::max_element(seeds.begin(), seeds.end(), [](const auto& a, const auto& b) {
    return a.eval.actual_reward < b.eval.actual_reward;
  });
  if (best != seeds.end()) rep.repeatability = best->eval.repeatability;

  if (emit) {
    for (std::size_t i = 0; i < seeds.size(); ++i)
      save_json(policy_to_json(seeds[i].policy, gen),
                artifact("policy_" + std::to_string(i) + ".json"));
    save_json(experiment_report_to_json(rep), artifact("report.json"));
  }
  return rep;
}

}  // namespace dynafit

#endif  // DYNAFIT_EXPERIMENT_HPP
