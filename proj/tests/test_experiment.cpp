#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "dynafit/experiment.hpp"
#include "test_util.hpp"

using namespace dynafit;
using namespace testutil;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in.good());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path temp_dir(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

// A config small enough for unit tests: short data, tiny training budget.
ExperimentConfig tiny_config() {
  ExperimentConfig cfg;
  cfg.arm_exc.duration = 2.0;
  cfg.ball_exc.duration = 4.0;
  cfg.ball_exc.n_repeats = 1;
  cfg.arm_stride = 20;
  cfg.ball_stride = 4;
  cfg.arm_opt.max_iters = 15;
  cfg.string_opt.max_iters = 15;
  cfg.n_rl_seeds = 2;
  cfg.train.n_iters = 2;
  cfg.train.n_samples = 6;
  cfg.episode_duration = 1.0;
  cfg.control_rate = 25.0;
  return cfg;
}

}  // namespace

TEST_CASE("dataset files round-trip byte-identically with a manifest") {
  const auto arm = wam4();
  ArmExcitationConfig cfg;
  cfg.duration = 0.5;
  const auto ds = generate_arm_excitation(arm, cfg, 3);

  const auto dir = temp_dir("dynafit_io_test");
  const std::string stem = (dir / "arm").string();
  write_dataset(ds, stem);

  const auto back = read_dataset(stem);
  CHECK(back.kind == ds.kind);
  CHECK(back.rate == ds.rate);
  CHECK(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.t[i] == ds.t[i]);
    for (int j = 0; j < ds.n_joints; ++j) {
      CHECK(back.q[i][j] == ds.q[i][j]);
      CHECK(back.u[i][j] == ds.u[i][j]);
    }
  }

  // write -> read -> write is byte-identical
  const std::string stem2 = (dir / "arm2").string();
  write_dataset(back, stem2);
  CHECK(slurp(stem + ".csv") == slurp(stem2 + ".csv"));
}

TEST_CASE("ball dataset manifest describes the ball columns") {
  TrajectoryDataset ds;
  ds.kind = DatasetKind::BallExcitation;
  ds.rate = 100.0;
  ds.n_joints = 2;
  for (int i = 0; i < 5; ++i) {
    ds.t.push_back(i / 100.0);
    ds.q.push_back({0.1 * i, -0.1 * i});
    ds.qd.push_back({1.0, 2.0});
    ds.ball_pos.push_back(vec3(0.1, 0.2, 0.3 + i));
    ds.ball_vel.push_back(vec3(0.0, 0.0, 1.0));
    ds.ball_acc.push_back(vec3(0.0, 0.0, -9.81));
  }
  const auto m = dataset_manifest(ds, "x.csv");
  CHECK(m.at("kind") == "ball-excitation");
  CHECK(m.at("rows") == 5);
  bool has_xb = false, has_ab = false;
  for (const auto& c : m.at("columns")) {
    if (c.at("name") == "xb0") { has_xb = true; CHECK(c.at("unit") == "m"); }
    if (c.at("name") == "ab2") { has_ab = true; CHECK(c.at("unit") == "m/s^2"); }
  }
  CHECK(has_xb);
  CHECK(has_ab);
}

TEST_CASE("fit report json round-trips losslessly") {
  FitReport rep;
  rep.params = {0.1, -2.5e-17, 3.0e300, 1.0 / 3.0};
  rep.initial_loss = 12.75;
  rep.final_loss = 1.2345678901234567e-9;
  rep.iterations = 42;
  rep.converged = true;
  rep.term_losses = {{"torque", 1e-9}, {"penalty", 0.0}};

  const auto j = fit_report_to_json(rep);
  const auto back = fit_report_from_json(Json::parse(j.dump()));
  CHECK(back.params == rep.params);
  CHECK(back.initial_loss == rep.initial_loss);
  CHECK(back.final_loss == rep.final_loss);
  CHECK(back.iterations == rep.iterations);
  CHECK(back.converged == rep.converged);
  CHECK(back.term_losses == rep.term_losses);
}

TEST_CASE("policy json round-trips losslessly") {
  TrajectoryGenerator gen;
  gen.n_joints = 4;
  gen.q0 = {0.0, 0.1, -0.2, 0.3};
  PolicyDistribution policy = PolicyDistribution::isotropic(gen.weight_count(), 0.04);
  policy.mean[3] = 1.0 / 7.0;

  const auto j = policy_to_json(policy, gen);
  const auto [p2, g2] = policy_from_json(Json::parse(j.dump()));
  CHECK(p2.mean == policy.mean);
  CHECK(p2.var == policy.var);
  CHECK(p2.var_floor == policy.var_floor);
  CHECK(g2.n_joints == gen.n_joints);
  CHECK(g2.q0 == gen.q0);
}

TEST_CASE("unsupported schema versions are rejected") {
  Json j = fit_report_to_json(FitReport{});
  j["version"] = 99;
  CHECK_THROWS_AS(fit_report_from_json(j), std::invalid_argument);
  CHECK_THROWS_AS(kind_from_name("bogus"), std::invalid_argument);
}

TEST_CASE("run_experiment pipeline emits artifacts and stays offline") {
  auto cfg = tiny_config();
  const auto dir = temp_dir("dynafit_exp_test");
  cfg.out_dir = dir.string();

  const auto rep = run_experiment(cfg);

  CHECK(rep.oracle_queries_during_training == 0);
  CHECK(rep.data_budget_s == doctest::Approx(2.0 + 4.0));
  CHECK(rep.seeds.size() == 2);
  for (const auto& s : rep.seeds) {
    CHECK(s.curve.size() == 2);
    CHECK(std::isfinite(s.eval.expected_reward));
    CHECK(std::isfinite(s.eval.actual_reward));
  }
  CHECK(rep.identified_r > 0.2);
  CHECK(rep.identified_r < 0.8);

  for (const char* f : {"arm_excitation.csv", "arm_excitation.json", "ball_excitation.csv",
                        "arm_fit.json", "string_fit.json", "policy_0.json", "report.json"})
    CHECK(std::filesystem::exists(dir / f));

  // the report parses and matches the in-memory numbers
  const auto j = load_json((dir / "report.json").string());
  CHECK(j.at("version") == 1);
  CHECK(j.at("avg_reward").get<double>() == rep.avg_reward);
  CHECK(j.at("transferability").get<double>() == rep.transferability);
}

TEST_CASE("run_experiment is deterministic: same seed, byte-identical reports") {
  auto cfg = tiny_config();
  const auto dir1 = temp_dir("dynafit_det_1");
  const auto dir2 = temp_dir("dynafit_det_2");

  cfg.out_dir = dir1.string();
  run_experiment(cfg);
  cfg.out_dir = dir2.string();
  run_experiment(cfg);

  for (const char* f : {"report.json", "arm_fit.json", "string_fit.json", "policy_0.json",
                        "arm_excitation.csv", "ball_excitation.csv"})
    CHECK(slurp((dir1 / f).string()) == slurp((dir2 / f).string()));
}

TEST_CASE("nominal-model ablation skips identification") {
  auto cfg = tiny_config();
  cfg.nominal_model = true;
  cfg.train_policy = false;
  const auto rep = run_experiment(cfg);
  CHECK(rep.nominal_model);
  CHECK(rep.arm_fit.params.empty());
  CHECK(rep.identified_r == doctest::Approx(0.40));
}
