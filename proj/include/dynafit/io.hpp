// JSON file formats: dataset manifests next to the CSVs, fit reports,
// policies, evaluation reports. Every schema carries a version field and
// round-trips losslessly.

#ifndef DYNAFIT_IO_HPP
#define DYNAFIT_IO_HPP

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "dynafit/dataset.hpp"
#include "dynafit/harness.hpp"
#include "dynafit/optimize.hpp"
#include "dynafit/policy.hpp"

namespace dynafit {

using Json = nlohmann::ordered_json;

inline void save_json(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
}

inline Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return Json::parse(in);
}

// ---------------------------------------------------------------- datasets

inline std::string kind_name(DatasetKind k) {
  return k == DatasetKind::ArmExcitation ? "arm-excitation" : "ball-excitation";
}

inline DatasetKind kind_from_name(const std::string& s) {
  if (s == "arm-excitation") return DatasetKind::ArmExcitation;
  if (s == "ball-excitation") return DatasetKind::BallExcitation;
  throw std::invalid_argument("unknown dataset kind: " + s);
}

inline Json dataset_manifest(const TrajectoryDataset& ds, const std::string& csv_name) {
  Json cols = Json::array();
  auto add = [&](const std::string& name, const std::string& unit) {
    cols.push_back(Json{{"name", name}, {"unit", unit}});
  };
  add("t", "s");
  for (int j = 0; j < ds.n_joints; ++j) add("q" + std::to_string(j), "rad");
  for (int j = 0; j < ds.n_joints; ++j) add("qd" + std::to_string(j), "rad/s");
  if (ds.has_qdd())
    for (int j = 0; j < ds.n_joints; ++j) add("qdd" + std::to_string(j), "rad/s^2");
  if (ds.has_u())
    for (int j = 0; j < ds.n_joints; ++j) add("u" + std::to_string(j), "N*m");
  if (ds.has_ball()) {
    for (int k = 0; k < 3; ++k) add("xb" + std::to_string(k), "m");
    for (int k = 0; k < 3; ++k) add("vb" + std::to_string(k), "m/s");
    if (!ds.ball_acc.empty())
      for (int k = 0; k < 3; ++k) add("ab" + std::to_string(k), "m/s^2");
  }
  return Json{{"version", 1},
              {"kind", kind_name(ds.kind)},
              {"csv", csv_name},
              {"rate", ds.rate},
              {"n_joints", ds.n_joints},
              {"rows", ds.size()},
              {"duration", ds.duration()},
              {"columns", cols}};
}

// Writes <stem>.csv and <stem>.json.
inline void write_dataset(const TrajectoryDataset& ds, const std::string& stem) {
  const std::filesystem::path csv = stem + ".csv";
  write_csv(ds, csv.string());
  save_json(dataset_manifest(ds, csv.filename().string()), stem + ".json");
}

// Reads the pair written by write_dataset.
inline TrajectoryDataset read_dataset(const std::string& stem) {
  const Json m = load_json(stem + ".json");
  if (m.at("version").get<int>() != 1)
    throw std::invalid_argument("unsupported dataset manifest version");
  const std::filesystem::path dir = std::filesystem::path(stem).parent_path();
  const auto csv = (dir / m.at("csv").get<std::string>()).string();
  auto ds = read_csv(csv, kind_from_name(m.at("kind").get<std::string>()),
                     m.at("rate").get<double>(), m.at("n_joints").get<int>());
  ds.validate();
  return ds;
}

// ----------------------------------------------------------------- reports

inline Json fit_report_to_json(const FitReport& rep) {
  Json terms = Json::array();
  for (const auto& [name, loss] : rep.term_losses)
    terms.push_back(Json{{"name", name}, {"loss", loss}});
  return Json{{"version", 1},        {"params", rep.params},
              {"initial_loss", rep.initial_loss}, {"final_loss", rep.final_loss},
              {"iterations", rep.iterations},     {"converged", rep.converged},
              {"terms", terms}};
}

inline FitReport fit_report_from_json(const Json& j) {
  if (j.at("version").get<int>() != 1)
    throw std::invalid_argument("unsupported fit report version");
  FitReport rep;
  rep.params = j.at("params").get<std::vector<double>>();
  rep.initial_loss = j.at("initial_loss").get<double>();
  rep.final_loss = j.at("final_loss").get<double>();
  rep.iterations = j.at("iterations").get<int>();
  rep.converged = j.at("converged").get<bool>();
  for (const auto& t : j.at("terms"))
    rep.term_losses.emplace_back(t.at("name").get<std::string>(), t.at("loss").get<double>());
  return rep;
}

inline Json policy_to_json(const PolicyDistribution& policy, const TrajectoryGenerator& gen) {
  return Json{{"version", 1},
              {"n_joints", gen.n_joints},
              {"n_basis", gen.n_basis},
              {"duration", gen.duration},
              {"width", gen.width},
              {"q0", gen.q0},
              {"mean", policy.mean},
              {"var", policy.var},
              {"var_floor", policy.var_floor}};
}

inline std::pair<PolicyDistribution, TrajectoryGenerator> policy_from_json(const Json& j) {
  if (j.at("version").get<int>() != 1)
    throw std::invalid_argument("unsupported policy version");
  TrajectoryGenerator gen;
  gen.n_joints = j.at("n_joints").get<int>();
  gen.n_basis = j.at("n_basis").get<int>();
  gen.duration = j.at("duration").get<double>();
  gen.width = j.at("width").get<double>();
  gen.q0 = j.at("q0").get<std::vector<double>>();
  PolicyDistribution policy;
  policy.mean = j.at("mean").get<std::vector<double>>();
  policy.var = j.at("var").get<std::vector<double>>();
  policy.var_floor = j.at("var_floor").get<double>();
  return {policy, gen};
}

inline Json eval_report_to_json(const EvalReport& rep) {
  return Json{{"version", 1},
              {"expected_reward", rep.expected_reward},
              {"actual_reward", rep.actual_reward},
              {"success", rep.success},
              {"max_hold", rep.max_hold},
              {"repeatability", rep.repeatability}};
}

inline EvalReport eval_report_from_json(const Json& j) {
  if (j.at("version").get<int>() != 1)
    throw std::invalid_argument("unsupported eval report version");
  EvalReport rep;
  rep.expected_reward = j.at("expected_reward").get<double>();
  rep.actual_reward = j.at("actual_reward").get<double>();
  rep.success = j.at("success").get<bool>();
  rep.max_hold = j.at("max_hold").get<double>();
  rep.repeatability = j.at("repeatability").get<double>();
  return rep;
}

inline Json gradient_check_to_json(const GradientCheckReport& rep) {
  return Json{{"version", 1},
              {"max_rel_err", rep.max_rel_err},
              {"worst_direction", rep.worst_direction},
              {"pass", rep.pass}};
}

}  // namespace dynafit

#endif  // DYNAFIT_IO_HPP
