#include "otc/transport.hpp"

#include <algorithm>
#include <deque>
#include <numeric>

#include "otc/lp.hpp"

namespace otc {

namespace {

constexpr std::size_t kDegenerateSwitch = 50;

template <class T>
bool positive_mass(const T& x) {
  if constexpr (Arith<T>::exact)
    return sgn(x) > 0;
  else
    return x > 1e-13;
}

template <class T>
T sum_of(const std::vector<T>& v) {
  T s(0);
  for (const auto& x : v) s += x;
  return s;
}

template <class T>
T pow2_neg(std::size_t l) {
  if constexpr (Arith<T>::exact) {
    mpz_class den;
    mpz_ui_pow_ui(den.get_mpz_t(), 2, static_cast<unsigned long>(l));
    return Q(mpz_class(1), den);
  } else {
    return std::ldexp(1.0, -static_cast<int>(l));
  }
}

template <class T>
void validate_problem(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu) {
  if (mu.empty() || nu.empty()) throw InvalidInstance("measures must be nonempty");
  if (cost.rows != mu.size() || cost.cols != nu.size())
    throw InvalidInstance("cost matrix dimensions do not match the measures");
  if constexpr (!Arith<T>::exact) {
    for (double v : cost.a)
      if (!std::isfinite(v)) throw InvalidInstance("cost matrix has a non-finite entry");
  }
  for (const auto& w : mu)
    if (w < 0) throw InvalidInstance("negative source weight");
  for (const auto& w : nu)
    if (w < 0) throw InvalidInstance("negative target weight");
  T sm = sum_of(mu), sn = sum_of(nu);
  if constexpr (Arith<T>::exact) {
    if (sm != sn) throw InfeasibleError("marginal masses differ: " + sm.get_str() + " vs " + sn.get_str());
  } else {
    if (std::abs(sm - sn) > 1e-12) throw InfeasibleError("marginal masses differ");
  }
}

template <class T>
Solution<T> assemble(const Dense<T>& cost, std::size_t m, std::size_t n, const NetworkSimplex<T>& ns) {
  Solution<T> s;
  s.plan.m = m;
  s.plan.n = n;
  s.basis = ns.basis();
  s.pivots = ns.pivots();
  for (std::size_t k = 0; k < s.basis.size(); ++k)
    if (positive_mass(ns.flows()[k])) s.plan.entries.push_back({s.basis[k].i, s.basis[k].j, ns.flows()[k]});
  std::sort(s.plan.entries.begin(), s.plan.entries.end(),
            [](const auto& a, const auto& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  s.plan.value = T(0);
  for (const auto& e : s.plan.entries) s.plan.value += cost(e.i, e.j) * e.mass;
  s.duals.psi = ns.psi();
  s.duals.phi = ns.phi();
  return s;
}

}  // namespace

template <class T>
void validate_measure(const std::vector<T>& w) {
  if (w.empty()) throw InvalidInstance("measure has no atoms");
  for (const auto& v : w)
    if (v < 0) throw InvalidInstance("measure has a negative weight");
  T s = sum_of(w);
  if constexpr (Arith<T>::exact) {
    if (s != 1) throw InvalidInstance("measure weights must sum to 1 exactly");
  } else {
    if (std::abs(s - 1.0) > 1e-12) throw InvalidInstance("measure weights must sum to 1");
  }
}

template <class T>
std::vector<Pair> TransportPlan<T>::support() const {
  std::vector<Pair> s;
  for (const auto& e : entries) s.push_back({e.i, e.j});
  return s;
}

template <class T>
std::vector<T> TransportPlan<T>::row_sums() const {
  std::vector<T> r(m, T(0));
  for (const auto& e : entries) r[e.i] += e.mass;
  return r;
}

template <class T>
std::vector<T> TransportPlan<T>::col_sums() const {
  std::vector<T> c(n, T(0));
  for (const auto& e : entries) c[e.j] += e.mass;
  return c;
}

template <class T>
NetworkSimplex<T>::NetworkSimplex(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                                  const std::vector<char>* allowed)
    : c_(cost), mu_(mu), nu_(nu), allowed_(allowed), m_(mu.size()), n_(nu.size()) {
  if (cost.rows != m_ || cost.cols != n_) throw InvalidInstance("cost matrix dimensions do not match the measures");
  if (allowed_ && allowed_->size() != m_ * n_) throw InvalidParameter("allowed mask has the wrong size");
}

template <class T>
void NetworkSimplex<T>::northwest_corner() {
  basis_.clear();
  std::vector<T> r = mu_, c = nu_;
  std::size_t i = 0, j = 0;
  for (;;) {
    T x = r[i] < c[j] ? r[i] : c[j];
    basis_.push_back({i, j});
    r[i] -= x;
    c[j] -= x;
    if (i == m_ - 1 && j == n_ - 1) break;
    if (i < m_ - 1 && (Arith<T>::zero(r[i]) || j == n_ - 1))
      ++i;
    else
      ++j;
  }
  flow_.assign(basis_.size(), T(0));
  build_tree();
  compute_flows();
  compute_potentials();
}

template <class T>
bool NetworkSimplex<T>::set_basis(const std::vector<Cell>& cells) {
  if (cells.size() != m_ + n_ - 1) return false;
  for (const auto& c : cells)
    if (c.i >= m_ || c.j >= n_) return false;
  basis_ = cells;
  flow_.assign(basis_.size(), T(0));
  if (!build_tree()) return false;
  if (!compute_flows()) return false;
  compute_potentials();
  return true;
}

template <class T>
bool NetworkSimplex<T>::build_tree() {
  const std::size_t N = m_ + n_;
  adj_.assign(N, {});
  for (std::size_t k = 0; k < basis_.size(); ++k) {
    adj_[basis_[k].i].push_back({m_ + basis_[k].j, k});
    adj_[m_ + basis_[k].j].push_back({basis_[k].i, k});
  }
  parent_.assign(N, -1);
  parent_edge_.assign(N, -1);
  depth_.assign(N, 0);
  order_.clear();
  std::vector<char> seen(N, 0);
  std::deque<std::size_t> q{0};
  seen[0] = 1;
  while (!q.empty()) {
    std::size_t v = q.front();
    q.pop_front();
    order_.push_back(v);
    for (auto [w, k] : adj_[v]) {
      if (seen[w]) continue;
      seen[w] = 1;
      parent_[w] = static_cast<long>(v);
      parent_edge_[w] = static_cast<long>(k);
      depth_[w] = depth_[v] + 1;
      q.push_back(w);
    }
  }
  return order_.size() == N;
}

template <class T>
void NetworkSimplex<T>::compute_potentials() {
  pot_.assign(m_ + n_, T(0));
  for (std::size_t v : order_) {
    if (parent_[v] < 0) continue;
    const Cell& e = basis_[static_cast<std::size_t>(parent_edge_[v])];
    if (v >= m_)
      pot_[v] = pot_[e.i] + c_(e.i, e.j);
    else
      pot_[v] = pot_[m_ + e.j] - c_(e.i, e.j);
  }
}

template <class T>
bool NetworkSimplex<T>::compute_flows() {
  std::vector<T> rem(m_ + n_);
  for (std::size_t i = 0; i < m_; ++i) rem[i] = mu_[i];
  for (std::size_t j = 0; j < n_; ++j) rem[m_ + j] = nu_[j];
  bool ok = true;
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    std::size_t v = *it;
    if (parent_[v] < 0) continue;
    auto k = static_cast<std::size_t>(parent_edge_[v]);
    flow_[k] = rem[v];
    rem[static_cast<std::size_t>(parent_[v])] -= rem[v];
    if constexpr (Arith<T>::exact) {
      if (sgn(flow_[k]) < 0) ok = false;
    } else {
      if (flow_[k] < -1e-12) ok = false;
      if (flow_[k] < 0) flow_[k] = 0;
    }
  }
  return ok;
}

template <class T>
std::vector<T> NetworkSimplex<T>::psi() const {
  return std::vector<T>(pot_.begin(), pot_.begin() + static_cast<long>(m_));
}

template <class T>
std::vector<T> NetworkSimplex<T>::phi() const {
  return std::vector<T>(pot_.begin() + static_cast<long>(m_), pot_.end());
}

template <class T>
void NetworkSimplex<T>::run(std::size_t max_pivots) {
  std::size_t degenerate = 0;
  T r, best;
  std::vector<std::size_t> pa, pb;
  for (;;) {
    if (max_pivots && pivots_ >= max_pivots) throw BudgetError("network simplex pivot budget exhausted");
    const bool bland = degenerate > kDegenerateSwitch;
    long ei = -1, ej = -1;
    for (std::size_t i = 0; i < m_ && !(bland && ei >= 0); ++i) {
      for (std::size_t j = 0; j < n_; ++j) {
        if (allowed_ && !(*allowed_)[i * n_ + j]) continue;
        r = c_(i, j);
        r -= pot_[m_ + j];
        r += pot_[i];
        if (!Arith<T>::neg(r)) continue;
        if (ei < 0 || r < best) {
          best = r;
          ei = static_cast<long>(i);
          ej = static_cast<long>(j);
          if (bland) break;
        }
      }
    }
    if (ei < 0) break;

    // Tree path from the entering target back to the entering source.
    std::size_t a = m_ + static_cast<std::size_t>(ej), b = static_cast<std::size_t>(ei);
    pa.clear();
    pb.clear();
    while (depth_[a] > depth_[b]) {
      pa.push_back(static_cast<std::size_t>(parent_edge_[a]));
      a = static_cast<std::size_t>(parent_[a]);
    }
    while (depth_[b] > depth_[a]) {
      pb.push_back(static_cast<std::size_t>(parent_edge_[b]));
      b = static_cast<std::size_t>(parent_[b]);
    }
    while (a != b) {
      pa.push_back(static_cast<std::size_t>(parent_edge_[a]));
      a = static_cast<std::size_t>(parent_[a]);
      pb.push_back(static_cast<std::size_t>(parent_edge_[b]));
      b = static_cast<std::size_t>(parent_[b]);
    }
    pa.insert(pa.end(), pb.rbegin(), pb.rend());

    std::size_t leave = pa[0];
    for (std::size_t p = 0; p < pa.size(); p += 2) {
      std::size_t k = pa[p];
      const auto key = basis_[k].i * n_ + basis_[k].j;
      const auto lkey = basis_[leave].i * n_ + basis_[leave].j;
      if (flow_[k] < flow_[leave] || (flow_[k] == flow_[leave] && key < lkey)) leave = k;
    }
    T theta = flow_[leave];
    for (std::size_t p = 0; p < pa.size(); ++p) {
      if (p % 2 == 0)
        flow_[pa[p]] -= theta;
      else
        flow_[pa[p]] += theta;
    }
    basis_[leave] = {static_cast<std::size_t>(ei), static_cast<std::size_t>(ej)};
    flow_[leave] = theta;
    degenerate = Arith<T>::zero(theta) ? degenerate + 1 : 0;
    ++pivots_;
    build_tree();
    compute_potentials();
  }
  if constexpr (!Arith<T>::exact) compute_flows();
}

template <class T>
Solution<T> solve_kantorovich(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                              const SolveOptions& opts) {
  validate_problem(cost, mu, nu);
  NetworkSimplex<T> ns(cost, mu, nu);
  bool warm = false;
  std::size_t warm_pivots = 0;
  if constexpr (Arith<T>::exact) {
    if (opts.warm_start_double) {
      Dense<double> dc = to_double(cost);
      std::vector<double> dm = to_double(mu), dn = to_double(nu);
      NetworkSimplex<double> nd(dc, dm, dn);
      nd.northwest_corner();
      nd.run(opts.max_pivots);
      warm_pivots = nd.pivots();
      warm = ns.set_basis(nd.basis());
    }
  }
  if (!warm) ns.northwest_corner();
  ns.run(opts.max_pivots);
  Solution<T> s = assemble(cost, mu.size(), nu.size(), ns);
  s.pivots += warm_pivots;
  return s;
}

template <class T>
Solution<T> solve_restricted(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                             const std::vector<char>& allowed, const std::vector<Cell>& start_basis) {
  validate_problem(cost, mu, nu);
  NetworkSimplex<T> ns(cost, mu, nu, &allowed);
  if (!ns.set_basis(start_basis)) throw ContractError("start basis is not a feasible spanning tree");
  ns.run();
  return assemble(cost, mu.size(), nu.size(), ns);
}

template <class T>
std::vector<T> c_transform(const std::vector<T>& potential, const Dense<T>& cost, TransformDirection dir) {
  if (dir == TransformDirection::to_target) {
    if (potential.size() != cost.rows) throw InvalidInstance("potential size does not match cost rows");
    std::vector<T> out(cost.cols);
    for (std::size_t j = 0; j < cost.cols; ++j) {
      T best = potential[0] + cost(0, j);
      for (std::size_t i = 1; i < cost.rows; ++i) {
        T v = potential[i] + cost(i, j);
        if (v < best) best = v;
      }
      out[j] = best;
    }
    return out;
  }
  if (potential.size() != cost.cols) throw InvalidInstance("potential size does not match cost columns");
  std::vector<T> out(cost.rows);
  for (std::size_t i = 0; i < cost.rows; ++i) {
    T best = potential[0] - cost(i, 0);
    for (std::size_t j = 1; j < cost.cols; ++j) {
      T v = potential[j] - cost(i, j);
      if (v > best) best = v;
    }
    out[i] = best;
  }
  return out;
}

template <class T>
MonotoneVerdict<T> check_cyclical_monotone(const std::vector<Pair>& S, const Dense<T>& cost, int max_len) {
  if (max_len < 2) throw InvalidParameter("cycle length bound must be at least 2");
  const std::size_t P = S.size();
  MonotoneVerdict<T> out;
  if (P < 2) return out;
  // Edge a -> b moves target y_a onto source x_b.
  Dense<T> W(P, P);
  for (std::size_t a = 0; a < P; ++a)
    for (std::size_t b = 0; b < P; ++b) W(a, b) = cost(S[b].i, S[a].j) - cost(S[a].i, S[a].j);

  auto cycle_sum = [&](const std::vector<std::size_t>& cyc) {
    T s(0);
    for (std::size_t k = 0; k < cyc.size(); ++k) s += W(cyc[k], cyc[(k + 1) % cyc.size()]);
    return s;
  };
  // A negative closed walk splits at a repeated vertex into two closed walks, one negative.
  std::function<std::vector<std::size_t>(std::vector<std::size_t>)> simple = [&](std::vector<std::size_t> walk) {
    for (std::size_t p = 0; p < walk.size(); ++p) {
      for (std::size_t q = p + 1; q < walk.size(); ++q) {
        if (walk[p] != walk[q]) continue;
        std::vector<std::size_t> A(walk.begin() + static_cast<long>(p), walk.begin() + static_cast<long>(q));
        std::vector<std::size_t> B(walk.begin(), walk.begin() + static_cast<long>(p));
        B.insert(B.end(), walk.begin() + static_cast<long>(q), walk.end());
        return Arith<T>::neg(cycle_sum(A)) ? simple(A) : simple(B);
      }
    }
    return walk;
  };

  const auto L = static_cast<std::size_t>(max_len);
  std::vector<std::vector<T>> dist(L + 1, std::vector<T>(P));
  std::vector<std::vector<long>> pred(L + 1, std::vector<long>(P, -1));
  for (std::size_t s = 0; s < P; ++s) {
    for (auto& p : pred) std::fill(p.begin(), p.end(), -1);
    for (std::size_t v = 0; v < P; ++v) {
      if (v == s) continue;
      dist[1][v] = W(s, v);
      pred[1][v] = static_cast<long>(s);
    }
    for (std::size_t h = 2; h <= L; ++h) {
      // Close the walk back at s.
      long bu = -1;
      T bv{};
      for (std::size_t u = 0; u < P; ++u) {
        if (u == s || pred[h - 1][u] < 0) continue;
        T v = dist[h - 1][u] + W(u, s);
        if (bu < 0 || v < bv) {
          bu = static_cast<long>(u);
          bv = v;
        }
      }
      if (bu >= 0 && Arith<T>::neg(bv)) {
        std::vector<std::size_t> walk;
        std::size_t cur = static_cast<std::size_t>(bu);
        for (std::size_t k = h - 1; k >= 1; --k) {
          walk.push_back(cur);
          cur = static_cast<std::size_t>(pred[k][cur]);
        }
        walk.push_back(s);
        std::reverse(walk.begin(), walk.end());
        out.monotone = false;
        out.cycle = simple(walk);
        out.sum = cycle_sum(out.cycle);
        return out;
      }
      if (h == L) break;
      for (std::size_t v = 0; v < P; ++v) {
        if (v == s) continue;
        long bp = -1;
        T best{};
        for (std::size_t u = 0; u < P; ++u) {
          if (u == s || u == v || pred[h - 1][u] < 0) continue;
          T val = dist[h - 1][u] + W(u, v);
          if (bp < 0 || val < best) {
            bp = static_cast<long>(u);
            best = val;
          }
        }
        pred[h][v] = bp;
        if (bp >= 0) dist[h][v] = best;
      }
    }
  }
  return out;
}

bool is_graph(const std::vector<Pair>& S) {
  std::vector<std::size_t> xs;
  for (const auto& p : S) xs.push_back(p.i);
  std::sort(xs.begin(), xs.end());
  return std::adjacent_find(xs.begin(), xs.end()) == xs.end();
}

bool is_antigraph(const std::vector<Pair>& S) {
  std::vector<std::size_t> ys;
  for (const auto& p : S) ys.push_back(p.j);
  std::sort(ys.begin(), ys.end());
  return std::adjacent_find(ys.begin(), ys.end()) == ys.end();
}

bool is_forest(const std::vector<Pair>& S, std::size_t m, std::size_t n) {
  std::vector<std::size_t> parent(m + n);
  std::iota(parent.begin(), parent.end(), 0);
  std::function<std::size_t(std::size_t)> find = [&](std::size_t v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  for (const auto& p : S) {
    std::size_t a = find(p.i), b = find(m + p.j);
    if (a == b) return false;
    parent[a] = b;
  }
  return true;
}

template <class T>
std::vector<char> tight_set(const Dense<T>& cost, const DualPotentials<T>& duals, const T& tol) {
  std::vector<char> mask(cost.rows * cost.cols, 0);
  for (std::size_t i = 0; i < cost.rows; ++i)
    for (std::size_t j = 0; j < cost.cols; ++j) {
      T r = cost(i, j) - duals.phi[j] + duals.psi[i];
      mask[i * cost.cols + j] = (r <= tol) ? 1 : 0;
    }
  return mask;
}

template <class T>
std::vector<Pair> optimal_support_union(const Dense<T>& cost, const Solution<T>& sol) {
  const std::size_t m = cost.rows, n = cost.cols;
  const std::vector<char> tight = tight_set(cost, sol.duals, default_face_tol<T>());
  std::vector<std::vector<std::size_t>> supp_by_target(n), tight_by_source(m);
  std::vector<char> in_supp(m * n, 0);
  for (const auto& e : sol.plan.entries) {
    supp_by_target[e.j].push_back(e.i);
    in_supp[e.i * n + e.j] = 1;
  }
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (tight[i * n + j]) tight_by_source[i].push_back(j);

  std::vector<char> in_union = in_supp;
  std::vector<char> seen_s(m), seen_t(n);
  std::vector<std::size_t> stack;
  for (std::size_t j = 0; j < n; ++j) {
    bool any = false;
    for (std::size_t i = 0; i < m && !any; ++i) any = tight[i * n + j] && !in_supp[i * n + j];
    if (!any) continue;
    // Sources reachable from target j by alternating removal (support) and addition (tight) steps.
    std::fill(seen_s.begin(), seen_s.end(), 0);
    std::fill(seen_t.begin(), seen_t.end(), 0);
    seen_t[j] = 1;
    stack.assign(1, m + j);
    while (!stack.empty()) {
      std::size_t v = stack.back();
      stack.pop_back();
      if (v >= m) {
        for (std::size_t i : supp_by_target[v - m])
          if (!seen_s[i]) {
            seen_s[i] = 1;
            stack.push_back(i);
          }
      } else {
        for (std::size_t t : tight_by_source[v])
          if (!seen_t[t]) {
            seen_t[t] = 1;
            stack.push_back(m + t);
          }
      }
    }
    for (std::size_t i = 0; i < m; ++i)
      if (tight[i * n + j] && seen_s[i]) in_union[i * n + j] = 1;
  }
  std::vector<Pair> out;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (in_union[i * n + j]) out.push_back({i, j});
  return out;
}

template <class T>
std::vector<Dense<T>> default_probes(std::size_t m, std::size_t n) {
  std::vector<Dense<T>> probes;
  const std::size_t L = std::min<std::size_t>(m * n, 31);
  for (std::size_t l = 0; l < L; ++l) {
    Dense<T> f(m, n, T(0));
    f.a[l] = T(1);
    probes.push_back(std::move(f));
  }
  return probes;
}

template <class T>
T face_extreme(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu, const Solution<T>& sol,
               const Dense<T>& objective, bool maximize, const T& tol) {
  const std::size_t m = cost.rows, n = cost.cols;
  if (objective.rows != m || objective.cols != n) throw InvalidParameter("probe shape does not match the cost");
  if (tol == T(0)) {
    // With zero slack the face is exactly the set of plans on the tight set of an optimal dual.
    std::vector<char> allowed = tight_set(cost, sol.duals, default_face_tol<T>());
    Dense<T> obj = objective;
    if (maximize)
      for (auto& v : obj.a) v = -v;
    Solution<T> r = solve_restricted(obj, mu, nu, allowed, sol.basis);
    T val(0);
    for (const auto& e : r.plan.entries) val += objective(e.i, e.j) * e.mass;
    return val;
  }
  DenseLP<T> lp(m * n);
  std::vector<T> obj(m * n);
  for (std::size_t k = 0; k < m * n; ++k) obj[k] = maximize ? objective.a[k] : T(-objective.a[k]);
  lp.set_objective(obj);
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<T> row(m * n, T(0));
    for (std::size_t j = 0; j < n; ++j) row[i * n + j] = T(1);
    lp.add_eq(row, mu[i]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<T> row(m * n, T(0));
    for (std::size_t i = 0; i < m; ++i) row[i * n + j] = T(1);
    lp.add_eq(row, nu[j]);
  }
  lp.add_le(cost.a, sol.plan.value + tol);
  LpResult<T> r = lp.maximize();
  if (r.status != LpStatus::optimal) throw InfeasibleError("optimal-face program is infeasible");
  return maximize ? r.value : T(-r.value);
}

template <class T>
FaceDiameter<T> optimal_face_diameter(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                                      const std::vector<Dense<T>>* probes, const T& tol, const Solution<T>* sol) {
  if (tol < 0) throw InvalidParameter("face tolerance must be >= 0");
  Solution<T> own;
  if (!sol) {
    own = solve_kantorovich(cost, mu, nu);
    sol = &own;
  }
  std::vector<Dense<T>> defaults;
  if (!probes) {
    defaults = default_probes<T>(cost.rows, cost.cols);
    probes = &defaults;
  }
  FaceDiameter<T> fd;
  fd.diameter = T(0);
  bool singleton = false;
  if (tol == T(0)) {
    std::vector<char> tight = tight_set(cost, sol->duals, default_face_tol<T>());
    std::vector<Pair> cells;
    for (std::size_t k = 0; k < tight.size(); ++k)
      if (tight[k]) cells.push_back({k / cost.cols, k % cost.cols});
    singleton = is_forest(cells, cost.rows, cost.cols);
  }
  fd.singleton_by_forest = singleton;
  for (std::size_t l = 0; l < probes->size(); ++l) {
    const Dense<T>& f = (*probes)[l];
    T hi, lo;
    if (singleton) {
      hi = T(0);
      for (const auto& e : sol->plan.entries) hi += f(e.i, e.j) * e.mass;
      lo = hi;
    } else {
      hi = face_extreme(cost, mu, nu, *sol, f, true, tol);
      lo = face_extreme(cost, mu, nu, *sol, f, false, tol);
    }
    fd.max_l.push_back(hi);
    fd.min_l.push_back(lo);
    fd.diameter += pow2_neg<T>(l) * (hi - lo);
  }
  return fd;
}

bool plans_equal(const TransportPlan<Q>& a, const TransportPlan<Q>& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    const auto& x = a.entries[k];
    const auto& y = b.entries[k];
    if (x.i != y.i || x.j != y.j || x.mass != y.mass) return false;
  }
  return true;
}

std::string to_string(const Q& q) {
  Q c = q;
  c.canonicalize();
  return c.get_str();
}

Q parse_rational(const std::string& s) {
  if (s.empty()) throw InvalidInstance("empty rational literal");
  if (s.find('/') != std::string::npos || s.find_first_of(".eE") == std::string::npos) {
    Q q;
    if (q.set_str(s, 10) != 0) throw InvalidInstance("bad rational literal: " + s);
    q.canonicalize();
    return q;
  }
  // Exact decimal: [sign] digits [. digits] [e exp]
  std::size_t p = 0;
  bool neg = false;
  if (s[p] == '+' || s[p] == '-') neg = s[p++] == '-';
  std::string digits;
  long exp10 = 0;
  bool seen_digit = false;
  for (; p < s.size() && (std::isdigit(static_cast<unsigned char>(s[p])) || s[p] == '.'); ++p) {
    if (s[p] == '.') {
      for (++p; p < s.size() && std::isdigit(static_cast<unsigned char>(s[p])); ++p) {
        digits += s[p];
        --exp10;
        seen_digit = true;
      }
      break;
    }
    digits += s[p];
    seen_digit = true;
  }
  if (!seen_digit) throw InvalidInstance("bad decimal literal: " + s);
  if (p < s.size()) {
    if (s[p] != 'e' && s[p] != 'E') throw InvalidInstance("bad decimal literal: " + s);
    try {
      exp10 += std::stol(s.substr(p + 1));
    } catch (const std::exception&) {
      throw InvalidInstance("bad decimal exponent: " + s);
    }
  }
  mpz_class num(digits, 10), scale;
  mpz_ui_pow_ui(scale.get_mpz_t(), 10, static_cast<unsigned long>(std::labs(exp10)));
  Q q = exp10 >= 0 ? Q(num * scale) : Q(num, scale);
  q.canonicalize();
  return neg ? Q(-q) : q;
}

#define OTC_INSTANTIATE(T)                                                                                        \
  template void validate_measure<T>(const std::vector<T>&);                                                       \
  template struct TransportPlan<T>;                                                                               \
  template class NetworkSimplex<T>;                                                                               \
  template Solution<T> solve_kantorovich<T>(const Dense<T>&, const std::vector<T>&, const std::vector<T>&,        \
                                            const SolveOptions&);                                                 \
  template Solution<T> solve_restricted<T>(const Dense<T>&, const std::vector<T>&, const std::vector<T>&,         \
                                           const std::vector<char>&, const std::vector<Cell>&);                   \
  template std::vector<T> c_transform<T>(const std::vector<T>&, const Dense<T>&, TransformDirection);             \
  template MonotoneVerdict<T> check_cyclical_monotone<T>(const std::vector<Pair>&, const Dense<T>&, int);         \
  template std::vector<char> tight_set<T>(const Dense<T>&, const DualPotentials<T>&, const T&);                   \
  template std::vector<Pair> optimal_support_union<T>(const Dense<T>&, const Solution<T>&);                       \
  template std::vector<Dense<T>> default_probes<T>(std::size_t, std::size_t);                                     \
  template T face_extreme<T>(const Dense<T>&, const std::vector<T>&, const std::vector<T>&, const Solution<T>&,   \
                             const Dense<T>&, bool, const T&);                                                    \
  template FaceDiameter<T> optimal_face_diameter<T>(const Dense<T>&, const std::vector<T>&, const std::vector<T>&, \
                                                    const std::vector<Dense<T>>*, const T&, const Solution<T>*);

OTC_INSTANTIATE(Q)
OTC_INSTANTIATE(double)

}  // namespace otc
