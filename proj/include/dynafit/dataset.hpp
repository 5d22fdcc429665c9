// Time-stamped trajectory records used for identification, with CSV
// serialization and filtered numerical differentiation for signals that
// are not measured directly.

#ifndef DYNAFIT_DATASET_HPP
#define DYNAFIT_DATASET_HPP

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "dynafit/linalg.hpp"

namespace dynafit {

enum class DatasetKind { ArmExcitation, BallExcitation };

// Columnar storage; joint signals are row-major [sample][joint].
struct TrajectoryDataset {
  DatasetKind kind = DatasetKind::ArmExcitation;
  double rate = 0.0;  // Hz
  int n_joints = 0;

  std::vector<double> t;
  std::vector<std::vector<double>> q, qd, qdd, u;  // qdd/u may be empty
  std::vector<Vec3<double>> ball_pos, ball_vel, ball_acc;

  std::size_t size() const { return t.size(); }
  bool has_qdd() const { return !qdd.empty(); }
  bool has_u() const { return !u.empty(); }
  bool has_ball() const { return !ball_pos.empty(); }

  double duration() const { return t.empty() ? 0.0 : t.back() - t.front(); }

  void validate() const {
    for (std::size_t i = 1; i < t.size(); ++i)
      if (t[i] <= t[i - 1]) throw std::invalid_argument("dataset timestamps must increase");
    if (rate > 0.0) {
      const double dt = 1.0 / rate;
      for (std::size_t i = 1; i < t.size(); ++i)
        if (std::abs((t[i] - t[i - 1]) - dt) > 1e-9)
          throw std::invalid_argument("dataset sampling must be uniform");
    }
    auto finite = [](double x) { return std::isfinite(x); };
    for (const auto& row : q)
      for (double x : row)
        if (!finite(x)) throw std::invalid_argument("dataset contains non-finite values");
  }
};

// Differentiation with an optional Savitzky-Golay (quadratic) pre-filter
// (window = odd sample count; 1 disables filtering). The SG filter keeps a
// flat passband, so oscillatory signals are not attenuated the way a plain
// moving average attenuates them. The interior uses fourth-order central
// differences; the edges fall back to lower order.
inline std::vector<std::vector<double>> differentiate(const std::vector<std::vector<double>>& x,
                                                      double rate, int filter_window = 1) {
  const std::size_t n = x.size();
  if (n < 3) throw std::invalid_argument("differentiate: need at least 3 samples");
  const std::size_t cols = x[0].size();

  std::vector<std::vector<double>> f = x;
  if (filter_window > 1) {
    const int hw = filter_window / 2;
    const int w = 2 * hw + 1;
    // quadratic least-squares smoothing weights: c_k = A - B k^2
    const double m = hw;
    const double denom = w * (4.0 * m * m + 4.0 * m - 3.0);
    const double A = 3.0 * (3.0 * m * m + 3.0 * m - 1.0) / denom;
    const double B = 15.0 / denom;
    for (std::size_t i = 0; i < n; ++i) {
      if (i < static_cast<std::size_t>(hw) || i + hw >= n) continue;  // keep edges unfiltered
      for (std::size_t c = 0; c < cols; ++c) {
        double s = 0.0;
        for (int k = -hw; k <= hw; ++k) s += (A - B * k * k) * x[i + k][c];
        f[i][c] = s;
      }
    }
  }

  std::vector<std::vector<double>> d(n, std::vector<double>(cols));
  const double dt = 1.0 / rate;
  for (std::size_t c = 0; c < cols; ++c) {
    for (std::size_t i = 2; i + 2 < n; ++i)
      d[i][c] = (-f[i + 2][c] + 8.0 * f[i + 1][c] - 8.0 * f[i - 1][c] + f[i - 2][c]) / (12.0 * dt);
    if (n >= 3) {
      d[1][c] = (f[2][c] - f[0][c]) / (2.0 * dt);
      d[n - 2][c] = (f[n - 1][c] - f[n - 3][c]) / (2.0 * dt);
    }
    d[0][c] = (f[1][c] - f[0][c]) / dt;
    d[n - 1][c] = (f[n - 1][c] - f[n - 2][c]) / dt;
  }
  return d;
}

namespace csvdetail {

inline std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

}  // namespace csvdetail

// CSV with a fixed header; 17 significant digits so write/read/write is
// byte identical.
inline void write_csv(const TrajectoryDataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");

  out << "t";
  for (int j = 0; j < ds.n_joints; ++j) out << ",q" << j;
  for (int j = 0; j < ds.n_joints; ++j) out << ",qd" << j;
  if (ds.has_qdd())
    for (int j = 0; j < ds.n_joints; ++j) out << ",qdd" << j;
  if (ds.has_u())
    for (int j = 0; j < ds.n_joints; ++j) out << ",u" << j;
  if (ds.has_ball()) {
    out << ",xb0,xb1,xb2,vb0,vb1,vb2";
    if (!ds.ball_acc.empty()) out << ",ab0,ab1,ab2";
  }
  out << "\n";

  for (std::size_t i = 0; i < ds.size(); ++i) {
    out << csvdetail::fmt(ds.t[i]);
    for (int j = 0; j < ds.n_joints; ++j) out << "," << csvdetail::fmt(ds.q[i][j]);
    for (int j = 0; j < ds.n_joints; ++j) out << "," << csvdetail::fmt(ds.qd[i][j]);
    if (ds.has_qdd())
      for (int j = 0; j < ds.n_joints; ++j) out << "," << csvdetail::fmt(ds.qdd[i][j]);
    if (ds.has_u())
      for (int j = 0; j < ds.n_joints; ++j) out << "," << csvdetail::fmt(ds.u[i][j]);
    if (ds.has_ball()) {
      for (int k = 0; k < 3; ++k) out << "," << csvdetail::fmt(ds.ball_pos[i][k]);
      for (int k = 0; k < 3; ++k) out << "," << csvdetail::fmt(ds.ball_vel[i][k]);
      if (!ds.ball_acc.empty())
        for (int k = 0; k < 3; ++k) out << "," << csvdetail::fmt(ds.ball_acc[i][k]);
    }
    out << "\n";
  }
}

inline TrajectoryDataset read_csv(const std::string& path, DatasetKind kind, double rate,
                                  int n_joints) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  TrajectoryDataset ds;
  ds.kind = kind;
  ds.rate = rate;
  ds.n_joints = n_joints;

  std::string header;
  std::getline(in, header);
  const bool has_qdd = header.find(",qdd0") != std::string::npos;
  const bool has_u = header.find(",u0") != std::string::npos;
  const bool has_ball = header.find(",xb0") != std::string::npos;
  const bool has_ball_acc = header.find(",ab0") != std::string::npos;

  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));

    std::size_t k = 0;
    ds.t.push_back(vals.at(k++));
    auto take = [&](int n) {
      std::vector<double> row(vals.begin() + k, vals.begin() + k + n);
      k += n;
      return row;
    };
    ds.q.push_back(take(n_joints));
    ds.qd.push_back(take(n_joints));
    if (has_qdd) ds.qdd.push_back(take(n_joints));
    if (has_u) ds.u.push_back(take(n_joints));
    if (has_ball) {
      const auto xb = take(3), vb = take(3);
      ds.ball_pos.push_back(vec3(xb[0], xb[1], xb[2]));
      ds.ball_vel.push_back(vec3(vb[0], vb[1], vb[2]));
      if (has_ball_acc) {
        const auto ab = take(3);
        ds.ball_acc.push_back(vec3(ab[0], ab[1], ab[2]));
      }
    }
  }
  return ds;
}

}  // namespace dynafit

#endif  // DYNAFIT_DATASET_HPP
