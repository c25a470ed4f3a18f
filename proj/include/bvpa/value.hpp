#pragma once

#include <algorithm>
#include <array>
#include <cassert>
#include <cmath>
#include <initializer_list>

#include "bvpa/error.hpp"

namespace bvpa {

inline constexpr int kMaxComponents = 4;

/// Small fixed-capacity vector in R^m, m <= kMaxComponents. Field values live here.
class Value {
 public:
  Value() = default;
  explicit Value(int m, double fill = 0.0) : m_(m) {
    if (m < 0 || m > kMaxComponents) throw PreconditionError("components", "m out of range");
    c_.fill(0.0);
    for (int i = 0; i < m; ++i) c_[i] = fill;
  }
  Value(std::initializer_list<double> xs) : m_(static_cast<int>(xs.size())) {
    if (m_ > kMaxComponents) throw PreconditionError("components", "m out of range");
    int i = 0;
    for (double x : xs) c_[i++] = x;
  }

  int size() const noexcept { return m_; }
  double& operator[](int i) noexcept { return c_[i]; }
  double operator[](int i) const noexcept { return c_[i]; }

  Value& operator+=(const Value& o) noexcept {
    for (int i = 0; i < m_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Value& operator-=(const Value& o) noexcept {
    for (int i = 0; i < m_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Value& operator*=(double s) noexcept {
    for (int i = 0; i < m_; ++i) c_[i] *= s;
    return *this;
  }
  friend Value operator+(Value a, const Value& b) noexcept { return a += b; }
  friend Value operator-(Value a, const Value& b) noexcept { return a -= b; }
  friend Value operator*(double s, Value a) noexcept { return a *= s; }
  friend Value operator*(Value a, double s) noexcept { return a *= s; }

  double norm() const noexcept {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) s += c_[i] * c_[i];
    return std::sqrt(s);
  }
  double max_abs() const noexcept {
    double s = 0.0;
    for (int i = 0; i < m_; ++i) s = std::max(s, std::abs(c_[i]));
    return s;
  }

 private:
  std::array<double, kMaxComponents> c_{};
  int m_ = 0;
};

}  // namespace bvpa
