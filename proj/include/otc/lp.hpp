#pragma once

#include <optional>
#include <vector>

#include "otc/core.hpp"

namespace otc {

enum class LpStatus { optimal, infeasible, unbounded };

template <class T>
struct LpResult {
  LpStatus status = LpStatus::infeasible;
  T value{};
  std::vector<T> x;
};

// maximize obj.x subject to A_eq x = b_eq, A_le x <= b_le, x >= 0.
// Dense two-phase tableau with Bland's rule; meant for small instances.
template <class T>
class DenseLP {
 public:
  explicit DenseLP(std::size_t num_vars) : nv_(num_vars), obj_(num_vars, T(0)) {}

  void set_objective(std::vector<T> obj) { obj_ = std::move(obj); }
  void add_eq(std::vector<T> row, T rhs) { rows_.push_back({std::move(row), std::move(rhs), false}); }
  void add_le(std::vector<T> row, T rhs) { rows_.push_back({std::move(row), std::move(rhs), true}); }

  LpResult<T> maximize() const;

 private:
  struct Row {
    std::vector<T> a;
    T b;
    bool le;
  };
  std::size_t nv_;
  std::vector<T> obj_;
  std::vector<Row> rows_;
};

template <class T>
LpResult<T> DenseLP<T>::maximize() const {
  using A = Arith<T>;
  const std::size_t mrows = rows_.size();
  std::size_t nslack = 0;
  for (const auto& r : rows_) nslack += r.le ? 1 : 0;
  const std::size_t ncols = nv_ + nslack + mrows;  // structural, slack, artificial
  const std::size_t art0 = nv_ + nslack;
  // Tableau rows 0..mrows-1, last column is the rhs.
  std::vector<std::vector<T>> tab(mrows, std::vector<T>(ncols + 1, T(0)));
  std::vector<std::size_t> basis(mrows);
  std::size_t s = nv_;
  for (std::size_t r = 0; r < mrows; ++r) {
    const auto& row = rows_[r];
    for (std::size_t k = 0; k < nv_; ++k) tab[r][k] = row.a[k];
    if (row.le) tab[r][s++] = T(1);
    tab[r][ncols] = row.b;
    if (A::neg(row.b)) {
      for (auto& v : tab[r]) v = -v;
    }
    tab[r][art0 + r] = T(1);
    basis[r] = art0 + r;
  }

  auto pivot = [&](std::size_t pr, std::size_t pc) {
    T p = tab[pr][pc];
    for (auto& v : tab[pr]) v /= p;
    for (std::size_t r = 0; r < mrows; ++r) {
      if (r == pr || A::zero(tab[r][pc])) continue;
      T f = tab[r][pc];
      for (std::size_t k = 0; k <= ncols; ++k) tab[r][k] -= f * tab[pr][k];
    }
    basis[pr] = pc;
  };

  // Runs the simplex for the profit vector over the allowed columns; false when unbounded.
  auto run = [&](const std::vector<T>& profit, std::size_t allowed_cols) -> bool {
    for (;;) {
      std::optional<std::size_t> enter;
      for (std::size_t k = 0; k < allowed_cols && !enter; ++k) {
        T red = profit[k];
        for (std::size_t r = 0; r < mrows; ++r) red -= profit[basis[r]] * tab[r][k];
        if (A::pos(red)) enter = k;
      }
      if (!enter) return true;
      std::optional<std::size_t> leave;
      T best{};
      for (std::size_t r = 0; r < mrows; ++r) {
        if (!A::pos(tab[r][*enter])) continue;
        T ratio = tab[r][ncols] / tab[r][*enter];
        bool take = !leave;
        if (!take) take = A::eq(ratio, best) ? basis[r] < basis[*leave] : ratio < best;
        if (take) {
          leave = r;
          best = ratio;
        }
      }
      if (!leave) return false;
      pivot(*leave, *enter);
    }
  };

  std::vector<T> phase1(ncols, T(0));
  for (std::size_t k = art0; k < ncols; ++k) phase1[k] = T(-1);
  run(phase1, ncols);
  T infeas(0);
  for (std::size_t r = 0; r < mrows; ++r)
    if (basis[r] >= art0) infeas += tab[r][ncols];
  LpResult<T> res;
  if (A::pos(infeas)) {
    res.status = LpStatus::infeasible;
    return res;
  }
  // Drive zero-level artificials out of the basis; rows that cannot pivot are redundant.
  std::vector<bool> dead(mrows, false);
  for (std::size_t r = 0; r < mrows; ++r) {
    if (basis[r] < art0) continue;
    std::optional<std::size_t> col;
    for (std::size_t k = 0; k < art0 && !col; ++k)
      if (!A::zero(tab[r][k])) col = k;
    if (col)
      pivot(r, *col);
    else
      dead[r] = true;
  }
  for (std::size_t r = 0; r < mrows; ++r)
    if (dead[r])
      for (auto& v : tab[r]) v = T(0);

  std::vector<T> phase2(ncols, T(0));
  for (std::size_t k = 0; k < nv_; ++k) phase2[k] = obj_[k];
  if (!run(phase2, art0)) {
    res.status = LpStatus::unbounded;
    return res;
  }
  res.status = LpStatus::optimal;
  res.x.assign(nv_, T(0));
  for (std::size_t r = 0; r < mrows; ++r)
    if (!dead[r] && basis[r] < nv_) res.x[basis[r]] = tab[r][ncols];
  res.value = T(0);
  for (std::size_t k = 0; k < nv_; ++k) res.value += obj_[k] * res.x[k];
  return res;
}

}  // namespace otc
