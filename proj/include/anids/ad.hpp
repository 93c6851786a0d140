#pragma once

// Reverse-mode automatic differentiation over scalar expressions.
//
// A Tape is an append-only list of nodes (parent indices + local
// partials); insertion order is topological order, and a backward pass
// visits each node exactly once in reverse. Scalars are small value
// types: either a tape node or a free constant (node < 0). Arithmetic
// between constants folds without touching any tape, which lets the same
// templated numeric code run on doubles and on tape scalars.
//
// One tape per thread; tapes are never shared across threads.

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "anids/errors.hpp"

namespace anids {

// Plain-double fallbacks for ops that have no std:: counterpart, so
// templated code can use them unqualified for both scalar types.
inline constexpr double relu(double x) { return x > 0.0 ? x : 0.0; }
inline constexpr double pow2(double x) { return x * x; }

namespace ad {

class Tape;

class Scalar {
 public:
  Scalar() = default;
  Scalar(double v) : v_(v) {}  // implicit: doubles act as constants

  double value() const { return v_; }
  int32_t node() const { return node_; }
  Tape* tape() const { return tape_; }
  bool is_constant() const { return node_ < 0; }

  Scalar& operator+=(const Scalar& o);
  Scalar& operator-=(const Scalar& o);

 private:
  friend class Tape;
  Scalar(double v, int32_t node, Tape* tape) : v_(v), node_(node), tape_(tape) {}

  double v_ = 0.0;
  int32_t node_ = -1;
  Tape* tape_ = nullptr;
};

inline double value_of(const Scalar& s) { return s.value(); }

class Tape {
 public:
  struct Node {
    int32_t a = -1, b = -1;
    double wa = 0.0, wb = 0.0;
  };

  Scalar leaf(double v) {
    int32_t id = push(v, -1, 0.0, -1, 0.0);
    return Scalar(v, id, this);
  }

  int32_t push(double v, int32_t a, double wa, int32_t b, double wb) {
    nodes_.push_back(Node{a, b, wa, wb});
    vals_.push_back(v);
    return static_cast<int32_t>(nodes_.size()) - 1;
  }

  Scalar emit(double v, int32_t a, double wa) { return Scalar(v, push(v, a, wa, -1, 0.0), this); }
  Scalar emit(double v, int32_t a, double wa, int32_t b, double wb) {
    return Scalar(v, push(v, a, wa, b, wb), this);
  }

  std::size_t size() const { return nodes_.size(); }
  double value(int32_t i) const { return vals_[i]; }

  void clear() {
    nodes_.clear();
    vals_.clear();
  }

  void reserve(std::size_t n) {
    nodes_.reserve(n);
    vals_.reserve(n);
  }

  // Adjoint of every node with respect to root; gradients accumulate
  // additively across fan-out.
  void backward(const Scalar& root, std::vector<double>& adjoint) const {
    adjoint.assign(nodes_.size(), 0.0);
    if (root.is_constant()) return;  // constant root: all gradients zero
    adjoint[root.node()] = 1.0;
    for (int32_t k = root.node(); k >= 0; --k) {
      double g = adjoint[k];
      if (g == 0.0) continue;
      const Node& n = nodes_[k];
      if (n.a >= 0) adjoint[n.a] += g * n.wa;
      if (n.b >= 0) adjoint[n.b] += g * n.wb;
    }
  }

  std::vector<double> backward(const Scalar& root) const {
    std::vector<double> adj;
    backward(root, adj);
    return adj;
  }

 private:
  std::vector<Node> nodes_;
  std::vector<double> vals_;
};

namespace detail {
inline Tape* owner(const Scalar& a, const Scalar& b) { return a.tape() ? a.tape() : b.tape(); }
}  // namespace detail

inline Scalar operator+(const Scalar& a, const Scalar& b) {
  double v = a.value() + b.value();
  if (a.is_constant() && b.is_constant()) return Scalar(v);
  if (a.is_constant()) {
    if (a.value() == 0.0) return b;
    return b.tape()->emit(v, b.node(), 1.0);
  }
  if (b.is_constant()) {
    if (b.value() == 0.0) return a;
    return a.tape()->emit(v, a.node(), 1.0);
  }
  return a.tape()->emit(v, a.node(), 1.0, b.node(), 1.0);
}

inline Scalar operator-(const Scalar& a, const Scalar& b) {
  double v = a.value() - b.value();
  if (a.is_constant() && b.is_constant()) return Scalar(v);
  if (a.is_constant()) return b.tape()->emit(v, b.node(), -1.0);
  if (b.is_constant()) {
    if (b.value() == 0.0) return a;
    return a.tape()->emit(v, a.node(), 1.0);
  }
  return a.tape()->emit(v, a.node(), 1.0, b.node(), -1.0);
}

inline Scalar operator-(const Scalar& a) {
  if (a.is_constant()) return Scalar(-a.value());
  return a.tape()->emit(-a.value(), a.node(), -1.0);
}

inline Scalar operator*(const Scalar& a, const Scalar& b) {
  double v = a.value() * b.value();
  if (a.is_constant() && b.is_constant()) return Scalar(v);
  if (a.is_constant()) {
    if (a.value() == 0.0) return Scalar(0.0);
    if (a.value() == 1.0) return b;
    return b.tape()->emit(v, b.node(), a.value());
  }
  if (b.is_constant()) {
    if (b.value() == 0.0) return Scalar(0.0);
    if (b.value() == 1.0) return a;
    return a.tape()->emit(v, a.node(), b.value());
  }
  return a.tape()->emit(v, a.node(), b.value(), b.node(), a.value());
}

inline Scalar operator/(const Scalar& a, const Scalar& b) {
  if (b.value() == 0.0) throw DomainError("ad: division by zero");
  double v = a.value() / b.value();
  if (a.is_constant() && b.is_constant()) return Scalar(v);
  double inv = 1.0 / b.value();
  if (a.is_constant()) return b.tape()->emit(v, b.node(), -v * inv);
  if (b.is_constant()) return a.tape()->emit(v, a.node(), inv);
  return a.tape()->emit(v, a.node(), inv, b.node(), -v * inv);
}

inline Scalar& Scalar::operator+=(const Scalar& o) { return *this = *this + o; }
inline Scalar& Scalar::operator-=(const Scalar& o) { return *this = *this - o; }

inline Scalar exp(const Scalar& a) {
  double v = std::exp(a.value());
  if (a.is_constant()) return Scalar(v);
  return a.tape()->emit(v, a.node(), v);
}

inline Scalar log(const Scalar& a) {
  if (!(a.value() > 0.0)) throw DomainError("ad: log of non-positive value");
  double v = std::log(a.value());
  if (a.is_constant()) return Scalar(v);
  return a.tape()->emit(v, a.node(), 1.0 / a.value());
}

inline Scalar sqrt(const Scalar& a) {
  if (!(a.value() > 0.0)) throw DomainError("ad: sqrt of non-positive value");
  double v = std::sqrt(a.value());
  if (a.is_constant()) return Scalar(v);
  return a.tape()->emit(v, a.node(), 0.5 / v);
}

inline Scalar tanh(const Scalar& a) {
  double v = std::tanh(a.value());
  if (a.is_constant()) return Scalar(v);
  return a.tape()->emit(v, a.node(), 1.0 - v * v);
}

// Subgradient at 0 is 0.
inline Scalar relu(const Scalar& a) {
  if (a.is_constant()) return Scalar(anids::relu(a.value()));
  if (a.value() > 0.0) return a.tape()->emit(a.value(), a.node(), 1.0);
  return Scalar(0.0);
}

inline Scalar pow2(const Scalar& a) {
  double v = a.value() * a.value();
  if (a.is_constant()) return Scalar(v);
  return a.tape()->emit(v, a.node(), 2.0 * a.value());
}

// |x| built from the core op set; subgradient at 0 is 0.
inline Scalar abs(const Scalar& a) { return relu(a) + relu(-a); }

}  // namespace ad

using ad::Scalar;

}  // namespace anids
