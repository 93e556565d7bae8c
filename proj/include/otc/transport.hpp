#pragma once

#include <optional>
#include <string>
#include <vector>

#include "otc/core.hpp"

namespace otc {

template <class T>
struct DiscreteMeasure {
  std::vector<std::size_t> support_ids;
  std::vector<T> weights;
};

// Throws InvalidInstance unless weights are >= 0 and sum to 1 (exactly, or within 1e-12).
template <class T>
void validate_measure(const std::vector<T>& w);

template <class T>
struct PlanEntry {
  std::size_t i = 0;
  std::size_t j = 0;
  T mass{};
};

template <class T>
struct TransportPlan {
  std::size_t m = 0;
  std::size_t n = 0;
  std::vector<PlanEntry<T>> entries;  // positive masses, sorted by (i, j)
  T value{};

  std::vector<Pair> support() const;
  std::vector<T> row_sums() const;
  std::vector<T> col_sums() const;
};

template <class T>
struct DualPotentials {
  std::vector<T> psi;  // per source
  std::vector<T> phi;  // per target; phi_j - psi_i <= c_ij
};

template <class T>
struct Solution {
  TransportPlan<T> plan;
  DualPotentials<T> duals;
  std::vector<Cell> basis;  // spanning tree of the final vertex, |M|+|N|-1 cells
  std::size_t pivots = 0;
};

struct SolveOptions {
  bool warm_start_double = true;  // exact mode only: seed the rational run with a double-precision basis
  std::size_t max_pivots = 0;     // 0 means unlimited
};

// Transportation simplex on the spanning-tree basis. Dantzig pricing, with Bland's rule during
// long runs of degenerate pivots. When `allowed` is given, only those cells may enter.
template <class T>
class NetworkSimplex {
 public:
  NetworkSimplex(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                 const std::vector<char>* allowed = nullptr);

  void northwest_corner();
  bool set_basis(const std::vector<Cell>& cells);
  void run(std::size_t max_pivots = 0);

  const std::vector<Cell>& basis() const { return basis_; }
  const std::vector<T>& flows() const { return flow_; }
  std::vector<T> psi() const;
  std::vector<T> phi() const;
  std::size_t pivots() const { return pivots_; }

 private:
  bool build_tree();
  void compute_potentials();
  bool compute_flows();

  const Dense<T>& c_;
  const std::vector<T>& mu_;
  const std::vector<T>& nu_;
  const std::vector<char>* allowed_;
  std::size_t m_, n_;
  std::vector<Cell> basis_;
  std::vector<T> flow_;
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj_;
  std::vector<long> parent_, parent_edge_;
  std::vector<std::size_t> depth_, order_;
  std::vector<T> pot_;
  std::size_t pivots_ = 0;
};

template <class T>
Solution<T> solve_kantorovich(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                              const SolveOptions& opts = {});

// Network simplex restricted to `allowed` cells, started from a feasible basis inside them.
template <class T>
Solution<T> solve_restricted(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                             const std::vector<char>& allowed, const std::vector<Cell>& start_basis);

enum class TransformDirection { to_target, to_source };

// to_target: phi(y) = min_x psi(x) + c(x,y);  to_source: psi(x) = max_y phi(y) - c(x,y).
template <class T>
std::vector<T> c_transform(const std::vector<T>& potential, const Dense<T>& cost, TransformDirection dir);

template <class T>
struct MonotoneVerdict {
  bool monotone = true;
  std::vector<std::size_t> cycle;  // indices into S, in cycle order
  T sum{};
};

// All cycles of distinct pairs of length <= max_len; sum_i c(x_{i+1}, y_i) - c(x_i, y_i) must be >= 0.
template <class T>
MonotoneVerdict<T> check_cyclical_monotone(const std::vector<Pair>& S, const Dense<T>& cost, int max_len = 6);

bool is_graph(const std::vector<Pair>& S);
bool is_antigraph(const std::vector<Pair>& S);
bool is_forest(const std::vector<Pair>& S, std::size_t m, std::size_t n);

template <class T>
bool is_graph(const TransportPlan<T>& p) {
  return is_graph(p.support());
}
template <class T>
bool is_antigraph(const TransportPlan<T>& p) {
  return is_antigraph(p.support());
}

template <class T>
std::vector<char> tight_set(const Dense<T>& cost, const DualPotentials<T>& duals, const T& tol);

// Pairs carried by at least one optimal plan.
template <class T>
std::vector<Pair> optimal_support_union(const Dense<T>& cost, const Solution<T>& sol);

template <class T>
std::vector<Dense<T>> default_probes(std::size_t m, std::size_t n);

template <class T>
T default_face_tol() {
  if constexpr (Arith<T>::exact)
    return T(0);
  else
    return T(1e-9);
}

// Max or min of <f, gamma> over plans with <c, gamma> <= v* + tol.
template <class T>
T face_extreme(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu, const Solution<T>& sol,
               const Dense<T>& objective, bool maximize, const T& tol);

template <class T>
struct FaceDiameter {
  T diameter{};
  std::vector<T> max_l, min_l;
  bool singleton_by_forest = false;
};

template <class T>
FaceDiameter<T> optimal_face_diameter(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                                      const std::vector<Dense<T>>* probes, const T& tol,
                                      const Solution<T>* sol = nullptr);

bool plans_equal(const TransportPlan<Q>& a, const TransportPlan<Q>& b);

std::string to_string(const Q& q);
Q parse_rational(const std::string& s);

}  // namespace otc
