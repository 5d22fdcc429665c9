// Identification losses as least-squares problems over virtual parameter
// vectors. Residuals are pre-scaled so the sum of squares is the mean
// squared residual per sample (penalty weights stay dataset-size
// independent); named slices support per-term reporting.

#ifndef DYNAFIT_LOSS_HPP
#define DYNAFIT_LOSS_HPP

#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "dynafit/dataset.hpp"
#include "dynafit/newton_euler.hpp"
#include "dynafit/string_model.hpp"

namespace dynafit {

struct TermSlice {
  std::string name;
  int begin = 0;
  int end = 0;
};

class LeastSquaresProblem {
 public:
  virtual ~LeastSquaresProblem() = default;
  virtual int param_count() const = 0;
  virtual int residual_count() const = 0;
  virtual void residuals(std::span<const double> p, std::span<double> out) const = 0;
  virtual void residuals(std::span<const Dual> p, std::span<Dual> out) const = 0;
  virtual std::vector<TermSlice> terms() const {
    return {{"residual", 0, residual_count()}};
  }

  double loss(std::span<const double> p) const {
    std::vector<double> r(residual_count());
    residuals(p, r);
    double s = 0.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (!std::isfinite(r[i]))
        throw std::runtime_error("non-finite loss at residual index " + std::to_string(i));
      s += r[i] * r[i];
    }
    return s;
  }

  // Gradient of the sum-of-squares loss by forward-mode propagation.
  std::vector<double> loss_gradient(std::span<const double> p, double* loss_out = nullptr) const {
    const int np = param_count();
    std::vector<Dual> dp(np);
    for (int i = 0; i < np; ++i) dp[i] = Dual::seed(p[i], i, np);
    std::vector<Dual> r(residual_count());
    residuals(std::span<const Dual>(dp), std::span<Dual>(r));
    std::vector<double> g(np, 0.0);
    double l = 0.0;
    for (const Dual& ri : r) {
      l += ri.value() * ri.value();
      if (ri.has_grad())
        for (int j = 0; j < np; ++j) g[j] += 2.0 * ri.value() * ri.grad()[j];
    }
    if (loss_out) *loss_out = l;
    return g;
  }

  // Residuals and dense row-major Jacobian (residual_count x param_count).
  void residuals_and_jacobian(std::span<const double> p, std::vector<double>& r,
                              std::vector<double>& jac) const {
    const int np = param_count();
    const int nr = residual_count();
    std::vector<Dual> dp(np);
    for (int i = 0; i < np; ++i) dp[i] = Dual::seed(p[i], i, np);
    std::vector<Dual> dr(nr);
    residuals(std::span<const Dual>(dp), std::span<Dual>(dr));
    r.assign(nr, 0.0);
    jac.assign(static_cast<std::size_t>(nr) * np, 0.0);
    for (int i = 0; i < nr; ++i) {
      r[i] = dr[i].value();
      if (dr[i].has_grad())
        for (int j = 0; j < np; ++j) jac[static_cast<std::size_t>(i) * np + j] = dr[i].grad()[j];
    }
  }

  std::vector<std::pair<std::string, double>> term_breakdown(std::span<const double> p) const {
    std::vector<double> r(residual_count());
    residuals(p, r);
    std::vector<std::pair<std::string, double>> out;
    for (const auto& t : terms()) {
      double s = 0.0;
      for (int i = t.begin; i < t.end; ++i) s += r[i] * r[i];
      out.emplace_back(t.name, s);
    }
    return out;
  }
};

// Optimize a subset of a problem's parameters, the rest pinned.
class SubsetProblem : public LeastSquaresProblem {
 public:
  SubsetProblem(const LeastSquaresProblem& base, std::vector<double> full,
                std::vector<int> free_indices)
      : base_(base), full_(std::move(full)), free_(std::move(free_indices)) {}

  int param_count() const override { return static_cast<int>(free_.size()); }
  int residual_count() const override { return base_.residual_count(); }
  std::vector<TermSlice> terms() const override { return base_.terms(); }

  void residuals(std::span<const double> p, std::span<double> out) const override {
    std::vector<double> full = full_;
    for (std::size_t i = 0; i < free_.size(); ++i) full[free_[i]] = p[i];
    base_.residuals(std::span<const double>(full), out);
  }
  void residuals(std::span<const Dual> p, std::span<Dual> out) const override {
    std::vector<Dual> full(full_.begin(), full_.end());
    for (std::size_t i = 0; i < free_.size(); ++i) full[free_[i]] = p[i];
    base_.residuals(std::span<const Dual>(full), out);
  }

  std::vector<double> expand(std::span<const double> p) const {
    std::vector<double> full = full_;
    for (std::size_t i = 0; i < free_.size(); ++i) full[free_[i]] = p[i];
    return full;
  }
  std::vector<double> restrict(std::span<const double> full) const {
    std::vector<double> p(free_.size());
    for (std::size_t i = 0; i < free_.size(); ++i) p[i] = full[free_[i]];
    return p;
  }

 private:
  const LeastSquaresProblem& base_;
  std::vector<double> full_;
  std::vector<int> free_;
};

// Mean squared torque residual via RNEA: rows must carry q, qd, qdd, u.
class InverseDynamicsLoss : public LeastSquaresProblem {
 public:
  InverseDynamicsLoss(TreeTopology topo, const TrajectoryDataset& ds, int stride = 1)
      : topo_(std::move(topo)), ds_(ds), stride_(stride) {
    if (!ds.has_qdd()) throw std::invalid_argument("inverse dynamics loss needs qdd");
    if (!ds.has_u()) throw std::invalid_argument("inverse dynamics loss needs u");
    for (std::size_t i = 0; i < ds.size(); i += stride_) rows_.push_back(i);
  }

  int param_count() const override { return topo_.param_count(); }
  int residual_count() const override {
    return static_cast<int>(rows_.size()) * topo_.size();
  }
  void residuals(std::span<const double> p, std::span<double> out) const override {
    eval(p, out);
  }
  void residuals(std::span<const Dual> p, std::span<Dual> out) const override { eval(p, out); }

 private:
  template <class S>
  void eval(std::span<const S> p, std::span<S> out) const {
    const auto links = realize_tree(topo_, p.data());
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows_.size()));
    const int n = topo_.size();
    std::size_t k = 0;
    for (std::size_t row : rows_) {
      const auto r = rnea(topo_, links, ds_.q[row], ds_.qd[row], ds_.qdd[row]);
      for (int j = 0; j < n; ++j) out[k++] = (r.torques[j] - S(ds_.u[row][j])) * S(scale);
    }
  }

  TreeTopology topo_;
  const TrajectoryDataset& ds_;
  std::size_t stride_;
  std::vector<std::size_t> rows_;
};

// Mean squared joint-acceleration residual via ABA.
class ForwardDynamicsLoss : public LeastSquaresProblem {
 public:
  ForwardDynamicsLoss(TreeTopology topo, const TrajectoryDataset& ds, int stride = 1)
      : topo_(std::move(topo)), ds_(ds), stride_(stride) {
    if (!ds.has_qdd()) throw std::invalid_argument("forward dynamics loss needs qdd");
    if (!ds.has_u()) throw std::invalid_argument("forward dynamics loss needs u");
    for (std::size_t i = 0; i < ds.size(); i += stride_) rows_.push_back(i);
  }

  int param_count() const override { return topo_.param_count(); }
  int residual_count() const override {
    return static_cast<int>(rows_.size()) * topo_.size();
  }
  void residuals(std::span<const double> p, std::span<double> out) const override {
    eval(p, out);
  }
  void residuals(std::span<const Dual> p, std::span<Dual> out) const override { eval(p, out); }

 private:
  template <class S>
  void eval(std::span<const S> p, std::span<S> out) const {
    const auto links = realize_tree(topo_, p.data());
    const double scale = 1.0 / std::sqrt(static_cast<double>(rows_.size()));
    const int n = topo_.size();
    std::size_t k = 0;
    std::vector<S> u(n);
    for (std::size_t row : rows_) {
      for (int j = 0; j < n; ++j) u[j] = S(ds_.u[row][j]);
      const auto r = aba(topo_, links, ds_.q[row], ds_.qd[row], std::span<const S>(u));
      for (int j = 0; j < n; ++j) out[k++] = (r.qdd[j] - S(ds_.qdd[row][j])) * S(scale);
    }
  }

  TreeTopology topo_;
  const TrajectoryDataset& ds_;
  std::size_t stride_;
  std::vector<std::size_t> rows_;
};

struct PenaltyWeights {
  double g = 1.0;
  double gdot = 1.0;
  double gddot = 1.0;
};

// Ball-acceleration residual plus the g / gdot / gddot penalties, in soft
// mode so gradients stay smooth. The last-joint frame motion per row is
// precomputed from the (fixed) arm model; only string parameters are free.
class StringConstrainedLoss : public LeastSquaresProblem {
 public:
  struct Row {
    LinkMotion<double> joint_frame;  // last-joint frame motion (world)
    Vec3<double> ball_pos, ball_vel, ball_acc;
  };

  StringConstrainedLoss(std::vector<Row> rows, StringConfig cfg, PenaltyWeights weights,
                        bool soft = true)
      : rows_(std::move(rows)), cfg_(cfg), w_(weights), soft_(soft) {
    if (rows_.empty()) throw std::invalid_argument("string loss needs data");
  }

  // Build rows from a ball-excitation dataset and a realized arm model.
  static std::vector<Row> make_rows(const TreeTopology& topo,
                                    const std::vector<RealizedLink<double>>& links,
                                    const TrajectoryDataset& ds, int stride = 1) {
    if (!ds.has_ball() || ds.ball_acc.empty())
      throw std::invalid_argument("string loss needs ball position/velocity/acceleration");
    if (!ds.has_qdd()) throw std::invalid_argument("string loss needs qdd for the cup motion");
    std::vector<Row> rows;
    for (std::size_t i = 0; i < ds.size(); i += stride) {
      const auto fk = forward_kinematics(topo, links, ds.q[i], ds.qd[i], ds.qdd[i]);
      rows.push_back({fk.back(), ds.ball_pos[i], ds.ball_vel[i], ds.ball_acc[i]});
    }
    return rows;
  }

  int param_count() const override { return kStringParamCount; }
  int residual_count() const override { return static_cast<int>(rows_.size()) * 6; }
  void residuals(std::span<const double> p, std::span<double> out) const override {
    eval(p, out);
  }
  void residuals(std::span<const Dual> p, std::span<Dual> out) const override { eval(p, out); }

  std::vector<TermSlice> terms() const override {
    const int n = static_cast<int>(rows_.size());
    return {{"accel", 0, 3 * n},
            {"g", 3 * n, 4 * n},
            {"gdot", 4 * n, 5 * n},
            {"gddot", 5 * n, 6 * n}};
  }

 private:
  template <class S>
  void eval(std::span<const S> p, std::span<S> out) const {
    const auto model = realize_string(p.data(), cfg_);
    const auto mode = soft_ ? ConstraintMode::Soft : ConstraintMode::Hard;
    const std::size_t n = rows_.size();
    const double sn = 1.0 / std::sqrt(static_cast<double>(n));
    const double wg = std::sqrt(w_.g) * sn;
    const double wgd = std::sqrt(w_.gdot) * sn;
    const double wgdd = std::sqrt(w_.gddot) * sn;

    for (std::size_t i = 0; i < n; ++i) {
      const Row& row = rows_[i];
      LinkMotion<S> jf;
      jf.pose.rotation = to_mat<S>(row.joint_frame.pose.rotation);
      jf.pose.translation = to_scalar<S, 3>(row.joint_frame.pose.translation);
      jf.velocity = to_scalar<S, 6>(row.joint_frame.velocity);
      jf.accel = to_scalar<S, 6>(row.joint_frame.accel);
      const auto cup = cup_motion(jf, model.cup_offset);

      BallState<S> ball{to_scalar<S, 3>(row.ball_pos), to_scalar<S, 3>(row.ball_vel)};
      const auto acc = ball_acceleration(ball, cup, model, mode);
      for (int k = 0; k < 3; ++k) out[3 * i + k] = (acc[k] - S(row.ball_acc[k])) * S(sn);

      const auto cd = constraint_derivatives(ball, cup, model,
                                             soft_ ? ConstraintMode::Soft : ConstraintMode::Hard);
      // gddot along the measured motion: free part + coeff * lambda, with
      // lambda recovered from the model's own constraint force.
      const auto fc = constraint_force(ball, cup, model, mode);
      const Vec3<S> d = ball.position - cup.position;
      const S lambda = dot(fc, d) / (squared_norm(d) + S(cfg_.delta));
      const S gddot = cd.free_term + cd.force_coeff * lambda;

      out[3 * n + i] = cd.g * S(wg);
      out[4 * n + i] = cd.gdot * S(wgd);
      out[5 * n + i] = gddot * S(wgdd);
    }
  }

  template <class S>
  static Mat3<S> to_mat(const Mat3<double>& m) {
    Mat3<S> r;
    for (int i = 0; i < 9; ++i) r.a[i] = S(m.a[i]);
    return r;
  }

  std::vector<Row> rows_;
  StringConfig cfg_;
  PenaltyWeights w_;
  bool soft_;
};

}  // namespace dynafit

#endif  // DYNAFIT_LOSS_HPP
