// Command-line front end. Exit codes: 0 success, 2 validation error,
// 3 numerical divergence.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dynafit/experiment.hpp"
#include "dynafit/io.hpp"

using namespace dynafit;

namespace {

// Optional config keys are applied on top of the defaults; unknown keys are
// rejected so typos do not silently fall back to defaults.
void apply_config(ExperimentConfig& cfg, const Json& j) {
  for (const auto& [key, val] : j.items()) {
    if (key == "string_length") cfg.string_length = val.get<double>();
    else if (key == "nominal_model") cfg.nominal_model = val.get<bool>();
    else if (key == "train_policy") cfg.train_policy = val.get<bool>();
    else if (key == "n_rl_seeds") cfg.n_rl_seeds = val.get<int>();
    else if (key == "best_k") cfg.best_k = val.get<int>();
    else if (key == "arm_duration") cfg.arm_exc.duration = val.get<double>();
    else if (key == "arm_rate") cfg.arm_exc.rate = val.get<double>();
    else if (key == "arm_torque_noise") cfg.arm_exc.torque_noise = val.get<double>();
    else if (key == "ball_duration") cfg.ball_exc.duration = val.get<double>();
    else if (key == "ball_rate") cfg.ball_exc.rate = val.get<double>();
    else if (key == "ball_repeats") cfg.ball_exc.n_repeats = val.get<int>();
    else if (key == "ball_noise") cfg.ball_exc.noise_std = val.get<double>();
    else if (key == "arm_stride") cfg.arm_stride = val.get<int>();
    else if (key == "ball_stride") cfg.ball_stride = val.get<int>();
    else if (key == "string_r_init") cfg.string_r_init = val.get<double>();
    else if (key == "arm_opt_method") cfg.arm_opt.method = parse_method(val.get<std::string>());
    else if (key == "arm_opt_iters") cfg.arm_opt.max_iters = val.get<int>();
    else if (key == "string_opt_method")
      cfg.string_opt.method = parse_method(val.get<std::string>());
    else if (key == "string_opt_iters") cfg.string_opt.max_iters = val.get<int>();
    else if (key == "train_iters") cfg.train.n_iters = val.get<int>();
    else if (key == "train_samples") cfg.train.n_samples = val.get<int>();
    else if (key == "eps_kl") cfg.train.eps_kl = val.get<double>();
    else if (key == "floor_reward") cfg.train.floor_reward = val.get<double>();
    else if (key == "reward_eps") cfg.reward.eps = val.get<double>();
    else if (key == "lambda_q") cfg.reward.lambda_q = val.get<double>();
    else if (key == "lambda_qd") cfg.reward.lambda_qd = val.get<double>();
    else if (key == "control_rate") cfg.control_rate = val.get<double>();
    else if (key == "episode_duration") cfg.episode_duration = val.get<double>();
    else if (key == "n_basis") cfg.n_basis = val.get<int>();
    else if (key == "basis_width") cfg.basis_width = val.get<double>();
    else if (key == "init_variance") cfg.init_variance = val.get<double>();
    else throw std::invalid_argument("unknown config key: " + key);
  }
}

struct Global {
  std::string config, out;
  std::uint64_t seed = 0;
};

ExperimentConfig load_config(const Global& g) {
  ExperimentConfig cfg;
  if (!g.config.empty()) apply_config(cfg, load_json(g.config));
  cfg.seed = g.seed;
  if (!g.out.empty()) cfg.out_dir = g.out;
  return cfg;
}

void require_out(const Global& g) {
  if (g.out.empty()) throw std::invalid_argument("--out is required for this command");
}

OracleEnvironment make_env(const ArmModel& arm, const ExperimentConfig& cfg) {
  OracleEnvironment env;
  env.topo = arm.topo;
  env.arm_params = arm.params;
  env.cup_offset = arm.cup_offset;
  env.chain.length = cfg.string_length;
  return env;
}

LearnedModel load_model(const ExperimentConfig& cfg, const std::string& arm_fit,
                        const std::string& string_fit) {
  const auto arm = wam4();
  LearnedModel model;
  model.topo = arm.topo;
  model.string_cfg = cfg.string_cfg;
  model.arm_params = fit_report_from_json(load_json(arm_fit)).params;
  model.string_params = fit_report_from_json(load_json(string_fit)).params;
  return model;
}

int cmd_gen_data(const Global& g) {
  require_out(g);
  const auto cfg = load_config(g);
  const auto arm = wam4();
  const auto env = make_env(arm, cfg);
  std::filesystem::create_directories(g.out);
  const auto arm_ds = generate_arm_excitation(arm, cfg.arm_exc, cfg.seed * 1000 + 1);
  const auto ball_ds = generate_ball_excitation(env, arm, cfg.ball_exc, cfg.seed * 1000 + 2);
  write_dataset(arm_ds, g.out + "/arm_excitation");
  write_dataset(ball_ds, g.out + "/ball_excitation");
  std::printf("wrote %zu arm rows, %zu ball rows to %s\n", arm_ds.size(), ball_ds.size(),
              g.out.c_str());
  return 0;
}

int cmd_identify_arm(const Global& g, const std::string& data) {
  require_out(g);
  const auto cfg = load_config(g);
  const auto arm = wam4();
  const auto ds = read_dataset(data);
  const auto rep = identify_arm(arm.topo, nominal_arm_params(arm), ds, cfg.arm_stride,
                                cfg.arm_opt);
  save_json(fit_report_to_json(rep), g.out);
  std::printf("arm fit: loss %.3e -> %.3e in %d iterations\n", rep.initial_loss, rep.final_loss,
              rep.iterations);
  return 0;
}

int cmd_identify_string(const Global& g, const std::string& data, const std::string& arm_fit) {
  require_out(g);
  const auto cfg = load_config(g);
  const auto arm = wam4();
  const auto ds = read_dataset(data);
  const auto arm_params =
      arm_fit.empty() ? nominal_arm_params(arm) : fit_report_from_json(load_json(arm_fit)).params;

  auto init = string_truth_params(StringTruth{cfg.string_length, 0.05, Vec3<double>::zero()},
                                  arm.cup_offset);
  init[6] = std::sqrt(cfg.string_r_init);
  const auto rep = identify_string_stage(arm.topo, arm_params, ds, cfg.ball_stride, init,
                                         cfg.string_cfg, cfg.string_weights, cfg.string_opt);
  save_json(fit_report_to_json(rep), g.out);
  std::printf("string fit: r = %.4f m, loss %.3e -> %.3e\n", rep.params[6] * rep.params[6],
              rep.initial_loss, rep.final_loss);
  return 0;
}

int cmd_train(const Global& g, const std::string& arm_fit, const std::string& string_fit) {
  require_out(g);
  const auto cfg = load_config(g);
  const auto arm = wam4();
  const auto model = load_model(cfg, arm_fit, string_fit);

  TrajectoryGenerator gen;
  gen.n_joints = arm.topo.size();
  gen.n_basis = cfg.n_basis;
  gen.duration = cfg.episode_duration;
  gen.width = cfg.basis_width;
  gen.q0 = arm.q_home;
  RewardConfig reward = cfg.reward;
  if (reward.q0.empty()) reward.q0 = arm.q_home;

  EpisodeEvaluator evaluate = [&](const std::vector<double>& w) {
    const auto traj = gen.trajectory(w, cfg.control_rate);
    return episode_reward(traj, rollout_model(model, traj, cfg.control_rate), reward);
  };
  TrainConfig tcfg = cfg.train;
  tcfg.seed = cfg.seed;
  const auto result =
      train_offline(evaluate, PolicyDistribution::isotropic(gen.weight_count(),
                                                            cfg.init_variance), tcfg);
  auto j = policy_to_json(result.policy, gen);
  j["curve"] = result.curve;
  save_json(j, g.out);
  std::printf("trained %d iterations, final model reward %.4f\n", tcfg.n_iters,
              result.curve.empty() ? 0.0 : result.curve.back());
  return 0;
}

int cmd_evaluate(const Global& g, const std::string& policy_path, const std::string& arm_fit,
                 const std::string& string_fit) {
  require_out(g);
  const auto cfg = load_config(g);
  const auto arm = wam4();
  const auto model = load_model(cfg, arm_fit, string_fit);
  const auto env = make_env(arm, cfg);
  const auto [policy, gen] = policy_from_json(load_json(policy_path));
  RewardConfig reward = cfg.reward;
  if (reward.q0.empty()) reward.q0 = arm.q_home;

  const auto rep = evaluate_policy(policy, gen, model, env, reward, cfg.control_rate);
  save_json(eval_report_to_json(rep), g.out);
  std::printf("expected %.4f, actual %.4f, success %s, hold %.2f s\n", rep.expected_reward,
              rep.actual_reward, rep.success ? "yes" : "no", rep.max_hold);
  return 0;
}

int cmd_experiment(const Global& g) {
  require_out(g);
  const auto cfg = load_config(g);
  const auto rep = run_experiment(cfg);
  std::printf("r = %.3f m: avg reward %.3f +- %.3f, transferability %.2f, repeatability %.2f\n",
              rep.string_length, rep.avg_reward, rep.std_reward, rep.transferability,
              rep.repeatability);
  return 0;
}

int cmd_gradcheck(const Global& g) {
  const auto cfg = load_config(g);
  const auto arm = wam4();
  auto env = make_env(arm, cfg);

  ArmExcitationConfig aex = cfg.arm_exc;
  aex.duration = 1.0;
  const auto arm_ds = generate_arm_excitation(arm, aex, cfg.seed * 1000 + 1);
  BallExcitationConfig bex = cfg.ball_exc;
  bex.duration = 2.0;
  bex.n_repeats = 1;
  const auto ball_ds = generate_ball_excitation(env, arm, bex, cfg.seed * 1000 + 2);

  const auto p0 = nominal_arm_params(arm);
  Json out = Json::object();
  bool all_pass = true;
  {
    InverseDynamicsLoss loss(arm.topo, arm_ds, 25);
    const auto rep = gradient_check(loss, p0, 8, 1e-5, cfg.seed);
    out["inverse_dynamics"] = gradient_check_to_json(rep);
    all_pass = all_pass && rep.pass;
  }
  {
    ForwardDynamicsLoss loss(arm.topo, arm_ds, 25);
    const auto rep = gradient_check(loss, p0, 8, 1e-5, cfg.seed);
    out["forward_dynamics"] = gradient_check_to_json(rep);
    all_pass = all_pass && rep.pass;
  }
  {
    const auto links = realize_tree(arm.topo, arm.params.data());
    const auto rows = StringConstrainedLoss::make_rows(arm.topo, links, ball_ds, 4);
    StringConfig scfg = cfg.string_cfg;
    scfg.beta = 20.0;
    StringConstrainedLoss loss(rows, scfg, cfg.string_weights, true);
    const auto sp = string_truth_params(StringTruth{cfg.string_length, 0.05, Vec3<double>::zero()},
                                        arm.cup_offset);
    const auto rep = gradient_check(loss, sp, 8, 1e-5, cfg.seed);
    out["string_constrained"] = gradient_check_to_json(rep);
    all_pass = all_pass && rep.pass;
  }
  if (!g.out.empty()) save_json(out, g.out);
  std::printf("gradient checks: %s\n", all_pass ? "pass" : "FAIL");
  return all_pass ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"differentiable dynamics identification and offline MBRL"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Global g;
  app.add_option("--config", g.config, "JSON config file");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--out", g.out, "output file or directory");

  auto* gen_data = app.add_subcommand("gen-data", "generate identification datasets");
  auto* id_arm = app.add_subcommand("identify-arm", "fit arm parameters to a dataset");
  auto* id_string = app.add_subcommand("identify-string", "fit string parameters to ball data");
  auto* train = app.add_subcommand("train", "train a policy inside the learned model");
  auto* evaluate = app.add_subcommand("evaluate", "score a policy on the chain oracle");
  auto* experiment = app.add_subcommand("experiment", "run the full offline MBRL pipeline");
  auto* gradcheck = app.add_subcommand("gradcheck", "verify loss gradients against FD");

  std::string data, arm_fit, string_fit, policy_path;
  id_arm->add_option("--data", data, "dataset stem (without .csv/.json)")->required();
  id_string->add_option("--data", data, "dataset stem")->required();
  id_string->add_option("--arm-fit", arm_fit, "arm fit report (defaults to nominal params)");
  train->add_option("--arm-fit", arm_fit, "arm fit report")->required();
  train->add_option("--string-fit", string_fit, "string fit report")->required();
  evaluate->add_option("--policy", policy_path, "policy file")->required();
  evaluate->add_option("--arm-fit", arm_fit, "arm fit report")->required();
  evaluate->add_option("--string-fit", string_fit, "string fit report")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_data->parsed()) return cmd_gen_data(g);
    if (id_arm->parsed()) return cmd_identify_arm(g, data);
    if (id_string->parsed()) return cmd_identify_string(g, data, arm_fit);
    if (train->parsed()) return cmd_train(g, arm_fit, string_fit);
    if (evaluate->parsed()) return cmd_evaluate(g, policy_path, arm_fit, string_fit);
    if (experiment->parsed()) return cmd_experiment(g);
    if (gradcheck->parsed()) return cmd_gradcheck(g);
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "numerical divergence: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}
