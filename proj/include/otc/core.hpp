#pragma once

#include <gmpxx.h>

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace otc {

using Q = mpq_class;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInstance : public Error {
 public:
  using Error::Error;
};

class InvalidParameter : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

class FrameError : public Error {
 public:
  using Error::Error;
};

class InfeasibleError : public Error {
 public:
  using Error::Error;
};

class BudgetError : public Error {
 public:
  using Error::Error;
};

class ContractError : public Error {
 public:
  using Error::Error;
};

struct Cell {
  std::size_t i = 0;
  std::size_t j = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Pairs of the support are cells of the cost matrix: source x, target y.
using Pair = Cell;

class StructureError : public Error {
 public:
  StructureError(const std::string& what, std::string lemma, std::vector<Pair> witness)
      : Error(what), lemma_(std::move(lemma)), witness_(std::move(witness)) {}
  const std::string& lemma() const { return lemma_; }
  const std::vector<Pair>& witness() const { return witness_; }

 private:
  std::string lemma_;
  std::vector<Pair> witness_;
};

template <class T>
struct Dense {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> a;

  Dense() = default;
  Dense(std::size_t r, std::size_t c, const T& v = T()) : rows(r), cols(c), a(r * c, v) {}

  T& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }
};

template <class T>
struct Arith;

template <>
struct Arith<Q> {
  static constexpr bool exact = true;
  static bool neg(const Q& x) { return sgn(x) < 0; }
  static bool pos(const Q& x) { return sgn(x) > 0; }
  static bool zero(const Q& x) { return sgn(x) == 0; }
  static bool eq(const Q& a, const Q& b) { return a == b; }
  static double to_double(const Q& x) { return x.get_d(); }
  static Q from_double(double d) { return Q(d); }
};

// Tolerances for double mode; reduced costs and flows are compared at these scales.
template <>
struct Arith<double> {
  static constexpr bool exact = false;
  static constexpr double eps = 1e-10;
  static bool neg(double x) { return x < -eps; }
  static bool pos(double x) { return x > eps; }
  static bool zero(double x) { return std::abs(x) <= eps; }
  static bool eq(double a, double b) { return std::abs(a - b) <= eps; }
  static double to_double(double x) { return x; }
  static double from_double(double d) { return d; }
};

inline Dense<Q> to_exact(const Dense<double>& c) {
  Dense<Q> q(c.rows, c.cols);
  for (std::size_t k = 0; k < c.a.size(); ++k) q.a[k] = Q(c.a[k]);
  return q;
}

inline Dense<double> to_double(const Dense<Q>& c) {
  Dense<double> d(c.rows, c.cols);
  for (std::size_t k = 0; k < c.a.size(); ++k) d.a[k] = c.a[k].get_d();
  return d;
}

inline std::vector<double> to_double(const std::vector<Q>& v) {
  std::vector<double> d(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) d[k] = v[k].get_d();
  return d;
}

inline std::vector<Q> to_exact(const std::vector<double>& v) {
  std::vector<Q> q(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) q[k] = Q(v[k]);
  return q;
}

}  // namespace otc
