// Forward-mode derivative-propagating scalar.
//
// A Dual carries a value and a gradient w.r.t. a set of seed directions.
// An empty gradient vector means "identically zero gradient"; constants
// stay cheap no matter how many seed directions are active.

#ifndef DYNAFIT_DUAL_HPP
#define DYNAFIT_DUAL_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace dynafit {

class Dual {
 public:
  Dual() = default;
  Dual(double v) : v_(v) {}  // NOLINT: implicit by design, constants promote
  Dual(double v, std::vector<double> g) : v_(v), g_(std::move(g)) {}

  // Seed direction i of n: value v, gradient e_i.
  static Dual seed(double v, std::size_t i, std::size_t n) {
    std::vector<double> g(n, 0.0);
    g[i] = 1.0;
    return Dual(v, std::move(g));
  }

  double value() const { return v_; }
  const std::vector<double>& grad() const { return g_; }
  bool has_grad() const { return !g_.empty(); }

  double deriv(std::size_t i) const { return g_.empty() ? 0.0 : g_[i]; }

  Dual operator-() const {
    Dual r(-v_, g_);
    for (double& x : r.g_) x = -x;
    return r;
  }

  Dual& operator+=(const Dual& o) {
    v_ += o.v_;
    axpy(1.0, o.g_);
    return *this;
  }
  Dual& operator-=(const Dual& o) {
    v_ -= o.v_;
    axpy(-1.0, o.g_);
    return *this;
  }
  Dual& operator*=(const Dual& o) { return *this = *this * o; }
  Dual& operator/=(const Dual& o) { return *this = *this / o; }

  friend Dual operator+(const Dual& a, const Dual& b) {
    Dual r(a.v_ + b.v_, combine(a.g_, 1.0, b.g_, 1.0));
    return r;
  }
  friend Dual operator-(const Dual& a, const Dual& b) {
    return Dual(a.v_ - b.v_, combine(a.g_, 1.0, b.g_, -1.0));
  }
  friend Dual operator*(const Dual& a, const Dual& b) {
    return Dual(a.v_ * b.v_, combine(a.g_, b.v_, b.g_, a.v_));
  }
  friend Dual operator/(const Dual& a, const Dual& b) {
    const double inv = 1.0 / b.v_;
    return Dual(a.v_ * inv, combine(a.g_, inv, b.g_, -a.v_ * inv * inv));
  }

  friend bool operator<(const Dual& a, const Dual& b) { return a.v_ < b.v_; }
  friend bool operator>(const Dual& a, const Dual& b) { return a.v_ > b.v_; }
  friend bool operator<=(const Dual& a, const Dual& b) { return a.v_ <= b.v_; }
  friend bool operator>=(const Dual& a, const Dual& b) { return a.v_ >= b.v_; }
  friend bool operator==(const Dual& a, const Dual& b) { return a.v_ == b.v_; }
  friend bool operator!=(const Dual& a, const Dual& b) { return a.v_ != b.v_; }

 private:
  // g += s * og, growing g if needed.
  void axpy(double s, const std::vector<double>& og) {
    if (og.empty()) return;
    if (g_.empty()) g_.assign(og.size(), 0.0);
    for (std::size_t i = 0; i < og.size(); ++i) g_[i] += s * og[i];
  }
  static std::vector<double> combine(const std::vector<double>& a, double sa,
                                     const std::vector<double>& b, double sb) {
    if (a.empty() && b.empty()) return {};
    std::vector<double> r(a.empty() ? b.size() : a.size(), 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = sa * a[i];
    for (std::size_t i = 0; i < b.size(); ++i) r[i] += sb * b[i];
    return r;
  }

  double v_ = 0.0;
  std::vector<double> g_;
};

// Chain rule helper: f(x) with value fv and derivative dfdx.
inline Dual chain(const Dual& x, double fv, double dfdx) {
  std::vector<double> g(x.grad());
  for (double& e : g) e *= dfdx;
  return Dual(fv, std::move(g));
}

inline Dual sin(const Dual& x) { return chain(x, std::sin(x.value()), std::cos(x.value())); }
inline Dual cos(const Dual& x) { return chain(x, std::cos(x.value()), -std::sin(x.value())); }
inline Dual tan(const Dual& x) {
  const double c = std::cos(x.value());
  return chain(x, std::tan(x.value()), 1.0 / (c * c));
}
inline Dual exp(const Dual& x) {
  const double e = std::exp(x.value());
  return chain(x, e, e);
}
inline Dual log(const Dual& x) { return chain(x, std::log(x.value()), 1.0 / x.value()); }
inline Dual sqrt(const Dual& x) {
  const double s = std::sqrt(x.value());
  return chain(x, s, 0.5 / s);
}
inline Dual abs(const Dual& x) { return chain(x, std::abs(x.value()), x.value() >= 0.0 ? 1.0 : -1.0); }
inline Dual atan2(const Dual& y, const Dual& x) {
  const double d = x.value() * x.value() + y.value() * y.value();
  Dual r(std::atan2(y.value(), x.value()));
  r += chain(y, 0.0, x.value() / d);
  r += chain(x, 0.0, -y.value() / d);
  return r;
}
inline Dual tanh(const Dual& x) {
  const double t = std::tanh(x.value());
  return chain(x, t, 1.0 - t * t);
}

inline double value(double x) { return x; }
inline double value(const Dual& x) { return x.value(); }

inline bool isfinite(double x) { return std::isfinite(x); }
inline bool isfinite(const Dual& x) { return std::isfinite(x.value()); }

}  // namespace dynafit

#endif  // DYNAFIT_DUAL_HPP
