// Small fixed-size vectors and matrices, generic over the scalar type.
//
// Deliberately minimal: only the operations the spatial algebra and the
// constrained-particle model need. Dense solves and eigen-decompositions
// live in double-land (tests, optimizers) and use Eigen there.

#ifndef DYNAFIT_LINALG_HPP
#define DYNAFIT_LINALG_HPP

#include <array>
#include <cstddef>
#include <initializer_list>

#include "dynafit/dual.hpp"

namespace dynafit {

template <class S, int N>
struct Vec {
  std::array<S, N> a{};

  S& operator[](int i) { return a[i]; }
  const S& operator[](int i) const { return a[i]; }

  static Vec zero() { return Vec{}; }

  Vec& operator+=(const Vec& o) {
    for (int i = 0; i < N; ++i) a[i] += o.a[i];
    return *this;
  }
  Vec& operator-=(const Vec& o) {
    for (int i = 0; i < N; ++i) a[i] -= o.a[i];
    return *this;
  }
  Vec& operator*=(const S& s) {
    for (int i = 0; i < N; ++i) a[i] *= s;
    return *this;
  }

  friend Vec operator+(Vec x, const Vec& y) { return x += y; }
  friend Vec operator-(Vec x, const Vec& y) { return x -= y; }
  friend Vec operator*(Vec x, const S& s) { return x *= s; }
  friend Vec operator*(const S& s, Vec x) { return x *= s; }
  friend Vec operator-(const Vec& x) {
    Vec r;
    for (int i = 0; i < N; ++i) r.a[i] = -x.a[i];
    return r;
  }
};

template <class S, int N>
S dot(const Vec<S, N>& x, const Vec<S, N>& y) {
  S r{};
  for (int i = 0; i < N; ++i) r += x.a[i] * y.a[i];
  return r;
}

template <class S, int N>
S squared_norm(const Vec<S, N>& x) {
  return dot(x, x);
}

template <class S, int N>
S norm(const Vec<S, N>& x) {
  using std::sqrt;
  return sqrt(squared_norm(x));
}

// Row-major R x C matrix.
template <class S, int R, int C>
struct Mat {
  std::array<S, static_cast<std::size_t>(R) * C> a{};

  S& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * C + c]; }
  const S& operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * C + c]; }

  static Mat zero() { return Mat{}; }
  static Mat identity() {
    static_assert(R == C);
    Mat m;
    for (int i = 0; i < R; ++i) m(i, i) = S(1.0);
    return m;
  }

  Mat& operator+=(const Mat& o) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] += o.a[i];
    return *this;
  }
  Mat& operator-=(const Mat& o) {
    for (std::size_t i = 0; i < a.size(); ++i) a[i] -= o.a[i];
    return *this;
  }
  Mat& operator*=(const S& s) {
    for (auto& x : a) x *= s;
    return *this;
  }
  friend Mat operator+(Mat x, const Mat& y) { return x += y; }
  friend Mat operator-(Mat x, const Mat& y) { return x -= y; }
  friend Mat operator*(Mat x, const S& s) { return x *= s; }
  friend Mat operator*(const S& s, Mat x) { return x *= s; }
  friend Mat operator-(const Mat& x) {
    Mat r;
    for (std::size_t i = 0; i < x.a.size(); ++i) r.a[i] = -x.a[i];
    return r;
  }

  Mat<S, C, R> transpose() const {
    Mat<S, C, R> t;
    for (int r = 0; r < R; ++r)
      for (int c = 0; c < C; ++c) t(c, r) = (*this)(r, c);
    return t;
  }
};

template <class S, int R, int K, int C>
Mat<S, R, C> operator*(const Mat<S, R, K>& x, const Mat<S, K, C>& y) {
  Mat<S, R, C> m;
  for (int r = 0; r < R; ++r)
    for (int k = 0; k < K; ++k) {
      const S& xr = x(r, k);
      for (int c = 0; c < C; ++c) m(r, c) += xr * y(k, c);
    }
  return m;
}

template <class S, int R, int C>
Vec<S, R> operator*(const Mat<S, R, C>& m, const Vec<S, C>& v) {
  Vec<S, R> r;
  for (int i = 0; i < R; ++i)
    for (int j = 0; j < C; ++j) r[i] += m(i, j) * v[j];
  return r;
}

// v * w^T
template <class S, int R, int C>
Mat<S, R, C> outer(const Vec<S, R>& v, const Vec<S, C>& w) {
  Mat<S, R, C> m;
  for (int r = 0; r < R; ++r)
    for (int c = 0; c < C; ++c) m(r, c) = v[r] * w[c];
  return m;
}

template <class S>
using Vec3 = Vec<S, 3>;
template <class S>
using Vec6 = Vec<S, 6>;
template <class S>
using Mat3 = Mat<S, 3, 3>;
template <class S>
using Mat6 = Mat<S, 6, 6>;

template <class S>
Vec3<S> vec3(const S& x, const S& y, const S& z) {
  return Vec3<S>{{x, y, z}};
}

template <class S>
Vec3<S> cross(const Vec3<S>& a, const Vec3<S>& b) {
  return vec3<S>(a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]);
}

template <class S>
Mat3<S> skew(const Vec3<S>& v) {
  Mat3<S> m;
  m(0, 1) = -v[2];
  m(0, 2) = v[1];
  m(1, 0) = v[2];
  m(1, 2) = -v[0];
  m(2, 0) = -v[1];
  m(2, 1) = v[0];
  return m;
}

template <class S>
Mat3<S> diag3(const S& x, const S& y, const S& z) {
  Mat3<S> m;
  m(0, 0) = x;
  m(1, 1) = y;
  m(2, 2) = z;
  return m;
}

// Conversions between plain-double containers and generic scalars.
template <class S, int N>
Vec<S, N> to_scalar(const Vec<double, N>& v) {
  Vec<S, N> r;
  for (int i = 0; i < N; ++i) r[i] = S(v[i]);
  return r;
}

template <int N>
Vec<double, N> values_of(const Vec<Dual, N>& v) {
  Vec<double, N> r;
  for (int i = 0; i < N; ++i) r[i] = v[i].value();
  return r;
}
template <int N>
Vec<double, N> values_of(const Vec<double, N>& v) {
  return v;
}

}  // namespace dynafit

#endif  // DYNAFIT_LINALG_HPP
