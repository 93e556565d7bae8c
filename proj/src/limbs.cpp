#include "otc/limbs.hpp"

#include <algorithm>
#include <set>

namespace otc {

namespace {

const std::vector<std::size_t> kEmpty;

std::vector<std::size_t> unite(std::initializer_list<const std::vector<std::size_t>*> parts) {
  std::vector<std::size_t> out;
  for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

template <class T>
bool mass_negative(const T& x) {
  if constexpr (Arith<T>::exact)
    return sgn(x) < 0;
  else
    return x < -1e-12;
}

template <class T>
bool mass_positive(const T& x) {
  if constexpr (Arith<T>::exact)
    return sgn(x) > 0;
  else
    return x > 1e-13;
}

template <class T>
bool marginals_equal(const std::vector<T>& a, const std::vector<T>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if constexpr (Arith<T>::exact) {
      if (a[k] != b[k]) return false;
    } else {
      if (std::abs(a[k] - b[k]) > 1e-9) return false;
    }
  }
  return true;
}

template <class T>
bool face_is_point(const T& d) {
  if constexpr (Arith<T>::exact)
    return sgn(d) == 0;
  else
    return d <= 1e-9;
}

}  // namespace

const std::vector<std::size_t>& LevelClasses::at(const std::vector<std::vector<std::size_t>>& v,
                                                 std::size_t k) const {
  return k < v.size() ? v[k] : kEmpty;
}

LevelClasses decompose_levels(const LevelAssignment& la) {
  const std::size_t P = la.level.size();
  if (la.infinite.size() != P || la.h_flag.size() != P || la.v_flag.size() != P)
    throw InvalidParameter("level assignment fields have inconsistent sizes");
  LevelClasses c;
  c.num_pairs = P;
  c.K = la.max_finite();
  const std::size_t sz = c.K + 1;
  for (auto* v : {&c.E, &c.Eh, &c.Ev, &c.Ehm, &c.Evm, &c.Ehv}) v->assign(sz, {});
  for (std::size_t p = 0; p < P; ++p) {
    if (la.infinite[p]) {
      c.E_inf.push_back(p);
      continue;
    }
    const std::size_t k = la.level[p];
    if (k < 1) throw InvalidParameter("finite levels must be at least 1");
    c.E[k].push_back(p);
    if (k < 2) continue;
    const bool h = la.h_flag[p], v = la.v_flag[p];
    if (!h && !v) throw InvalidParameter("a pair at level >= 2 must be a horizontal or a vertical end");
    if (h) c.Eh[k].push_back(p);
    if (v) c.Ev[k].push_back(p);
    if (!v) c.Ehm[k].push_back(p);
    if (!h) c.Evm[k].push_back(p);
    if (h && v) c.Ehv[k].push_back(p);
  }
  return c;
}

LimbSystem build_limb_system(const std::vector<Pair>& pairs, const LevelClasses& c, std::size_t m, std::size_t n) {
  if (c.num_pairs != pairs.size()) throw InvalidParameter("level classes do not belong to this support");
  for (const auto& p : pairs)
    if (p.i >= m || p.j >= n) throw IndexError("support pair outside the ground sets");

  std::vector<std::size_t> level(pairs.size(), 0);
  std::vector<char> hf(pairs.size(), 0), vf(pairs.size(), 0), inf(pairs.size(), 0);
  for (std::size_t k = 1; k < c.E.size(); ++k)
    for (std::size_t p : c.E[k]) level[p] = k;
  for (std::size_t k = 2; k < c.E.size(); ++k) {
    for (std::size_t p : c.Eh[k]) hf[p] = 1;
    for (std::size_t p : c.Ev[k]) vf[p] = 1;
  }
  for (std::size_t p : c.E_inf) inf[p] = 1;
  const auto h_minus = [&](std::size_t p) { return hf[p] && !vf[p]; };
  const auto v_minus = [&](std::size_t p) { return vf[p] && !hf[p]; };

  // Pairs sharing a coordinate sit at adjacent levels with opposite end types, or at a common
  // level as pure ends of one type.
  auto check_shared = [&](bool by_source) {
    std::map<std::size_t, std::vector<std::size_t>> groups;
    for (std::size_t p = 0; p < pairs.size(); ++p)
      if (!inf[p]) groups[by_source ? pairs[p].i : pairs[p].j].push_back(p);
    const char* lemma = by_source ? "shared-source-levels" : "shared-target-levels";
    for (const auto& [key, members] : groups) {
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          std::size_t p = members[a], q = members[b];
          if (level[p] > level[q]) std::swap(p, q);
          const std::size_t i = level[p], j = level[q];
          bool ok = i >= 2;
          if (ok) {
            if (j > i)
              ok = j == i + 1 && (by_source ? (hf[p] && v_minus(q)) : (vf[p] && h_minus(q)));
            else
              ok = by_source ? (v_minus(p) && v_minus(q)) : (h_minus(p) && h_minus(q));
          }
          if (!ok) {
            throw StructureError(std::string("pairs sharing a ") + (by_source ? "source" : "target") +
                                     " have incompatible levels " + std::to_string(i) + " and " +
                                     std::to_string(j),
                                 lemma, {pairs[p], pairs[q]});
          }
        }
      }
    }
  };
  check_shared(true);
  check_shared(false);

  LimbSystem sys;
  sys.m = m;
  sys.n = n;
  sys.pairs = pairs;
  const std::size_t top = c.K + 2;
  sys.G.assign(top + 1, {});
  sys.G[1] = unite({&c.at(c.E, 1), &c.at(c.Ehm, 2)});
  for (std::size_t k = 2; k <= top; ++k) {
    if (k % 2 == 0)
      sys.G[k] = unite({&c.at(c.Evm, k), &c.at(c.Ehv, k), &c.at(c.Evm, k + 1)});
    else
      sys.G[k] = unite({&c.at(c.Ehm, k + 1), &c.at(c.Ehv, k), &c.at(c.Ehm, k)});
  }
  sys.N = 0;
  for (std::size_t k = 1; k <= top; ++k)
    if (!sys.G[k].empty()) sys.N = k;
  sys.G.resize(sys.N + 2);  // G[N+1] stays empty

  // Cover: the limbs partition the finite-level part of the support.
  {
    std::vector<int> hits(pairs.size(), 0);
    for (std::size_t k = 1; k < sys.G.size(); ++k)
      for (std::size_t p : sys.G[k]) ++hits[p];
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      if (hits[p] != (inf[p] ? 0 : 1))
        throw StructureError("limbs do not partition the finite-level support", "limb-cover", {pairs[p]});
    }
  }

  sys.f.assign(sys.N + 2, {});
  for (std::size_t k = 1; k <= sys.N; ++k) {
    const bool graph = sys.is_graph_limb(k);
    for (std::size_t p : sys.G[k]) {
      const std::size_t dom = graph ? pairs[p].i : pairs[p].j;
      const std::size_t ran = graph ? pairs[p].j : pairs[p].i;
      auto [it, fresh] = sys.f[k].emplace(dom, ran);
      if (!fresh) {
        const Pair other = graph ? Pair{dom, it->second} : Pair{it->second, dom};
        throw StructureError("limb " + std::to_string(k) + " is not " + (graph ? "a graph" : "an antigraph"),
                             graph ? "limb-graph" : "limb-antigraph", {other, pairs[p]});
      }
    }
  }

  sys.I.assign(sys.N + 2, {});
  for (std::size_t k = 0; k <= sys.N + 1; ++k) {
    std::set<std::size_t> s;
    for (std::size_t kk : {k, k + 1}) {
      if (kk >= sys.G.size()) continue;
      for (std::size_t p : sys.G[kk]) s.insert(k % 2 == 1 ? pairs[p].i : pairs[p].j);
    }
    sys.I[k].assign(s.begin(), s.end());
  }
  // Disjointness among odd (source) and among even (target) index sets, then absorb the rest.
  for (int parity : {1, 0}) {
    const std::size_t ground = parity == 1 ? m : n;
    std::vector<long> owner(ground, -1);
    for (std::size_t k = static_cast<std::size_t>(parity); k < sys.I.size(); k += 2) {
      for (std::size_t e : sys.I[k]) {
        if (owner[e] >= 0) {
          std::vector<Pair> witness;
          for (std::size_t kk : {static_cast<std::size_t>(owner[e]), k})
            for (std::size_t w = (kk == 0 ? 1 : kk - 1); w <= kk + 1 && w < sys.G.size(); ++w)
              for (std::size_t p : sys.G[w])
                if ((parity == 1 ? pairs[p].i : pairs[p].j) == e) witness.push_back(pairs[p]);
          throw StructureError("index sets " + std::to_string(owner[e]) + " and " + std::to_string(k) +
                                   " overlap",
                               "index-disjointness", witness);
        }
        owner[e] = static_cast<long>(k);
      }
    }
    std::vector<std::size_t>& absorb = sys.I[static_cast<std::size_t>(parity)];
    for (std::size_t e = 0; e < ground; ++e)
      if (owner[e] < 0) absorb.push_back(e);
    std::sort(absorb.begin(), absorb.end());
  }

  for (std::size_t k = 0; k <= sys.N; ++k) {
    const auto& Ik = sys.I[k];
    auto inside = [&](std::size_t e) { return std::binary_search(Ik.begin(), Ik.end(), e); };
    if (k >= 1)
      for (const auto& [d, r] : sys.f[k])
        if (!inside(d))
          throw StructureError("domain of limb " + std::to_string(k) + " escapes its index set", "domain-containment",
                               {sys.is_graph_limb(k) ? Pair{d, r} : Pair{r, d}});
    if (k + 1 <= sys.N)
      for (const auto& [d, r] : sys.f[k + 1])
        if (!inside(r))
          throw StructureError("range of limb " + std::to_string(k + 1) + " escapes index set " + std::to_string(k),
                               "domain-containment", {sys.is_graph_limb(k + 1) ? Pair{d, r} : Pair{r, d}});
  }
  return sys;
}

template <class T>
DescentResult<T> descent_reconstruct(const LimbSystem& sys, const std::vector<T>& mu, const std::vector<T>& nu) {
  if (mu.size() != sys.m || nu.size() != sys.n) throw InvalidInstance("measures do not match the limb system");
  DescentResult<T> r;
  r.gamma.assign(sys.N + 1, {});
  r.eta.assign(sys.N + 1, {});
  std::vector<T> used_x(sys.m, T(0)), used_y(sys.n, T(0));
  r.total.m = sys.m;
  r.total.n = sys.n;
  for (std::size_t k = sys.N; k >= 1; --k) {
    const bool graph = sys.is_graph_limb(k);
    for (const auto& [d, ran] : sys.f[k]) {
      T e = graph ? T(mu[d] - used_x[d]) : T(nu[d] - used_y[d]);
      if constexpr (!Arith<T>::exact) {
        if (std::abs(e) <= 1e-13) e = 0;
      }
      r.eta[k].push_back({d, e});
      if (mass_negative(e)) {
        r.feasible = false;
        r.failed_limb = k;
        r.message = "intermediate measure of limb " + std::to_string(k) + " is negative";
        return r;
      }
      const std::size_t x = graph ? d : ran, y = graph ? ran : d;
      used_x[x] += e;
      used_y[y] += e;
      if (mass_positive(e)) r.gamma[k].push_back({x, y, e});
    }
  }
  for (std::size_t k = 1; k <= sys.N; ++k)
    r.total.entries.insert(r.total.entries.end(), r.gamma[k].begin(), r.gamma[k].end());
  std::sort(r.total.entries.begin(), r.total.entries.end(),
            [](const auto& a, const auto& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  r.feasible = marginals_equal(r.total.row_sums(), mu) && marginals_equal(r.total.col_sums(), nu);
  if (!r.feasible) r.message = "reconstructed plan misses the prescribed marginals";
  return r;
}

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::unique_by_limbs: return "unique-by-limbs";
    case Verdict::unique_and_verified: return "unique-and-verified";
    case Verdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

template <class T>
bool plans_match(const TransportPlan<T>& a, const TransportPlan<T>& b) {
  if (a.entries.size() != b.entries.size()) return false;
  for (std::size_t k = 0; k < a.entries.size(); ++k) {
    const auto& x = a.entries[k];
    const auto& y = b.entries[k];
    if (x.i != y.i || x.j != y.j) return false;
    if constexpr (Arith<T>::exact) {
      if (x.mass != y.mass) return false;
    } else {
      if (std::abs(x.mass - y.mass) > 1e-9) return false;
    }
  }
  return true;
}

template <class T>
UniquenessReport<T> uniqueness_verdict(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                                       const VerdictOptions& opts) {
  return uniqueness_verdict(cost, mu, nu, solve_kantorovich(cost, mu, nu), opts);
}

template <class T>
UniquenessReport<T> uniqueness_verdict(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                                       const Solution<T>& sol, const VerdictOptions& opts) {
  UniquenessReport<T> rep;
  rep.solution = sol;
  rep.support = optimal_support_union(cost, sol);
  SupportSet S;
  if (opts.mode == LinkMode::gradient) {
    if (!opts.field) throw InvalidParameter("gradient link mode needs a cost field");
    S = SupportSet::with_gradients(rep.support, *opts.field, opts.tol_grad);
  } else {
    S = SupportSet::from_pairs(rep.support);
  }
  const MatchGraph g = build_match_graph(S, opts.mode);
  rep.levels = compute_levels(g);
  rep.max_len = max_chain_length(rep.levels);
  rep.classes = decompose_levels(rep.levels);

  rep.e_inf_max_mass = T(0);
  if (!rep.classes.E_inf.empty()) {
    Dense<T> indicator(cost.rows, cost.cols, T(0));
    for (std::size_t p : rep.classes.E_inf) indicator(S.pairs[p].i, S.pairs[p].j) = T(1);
    rep.e_inf_max_mass = face_extreme(cost, mu, nu, sol, indicator, true, T(0));
  }
  if (opts.compute_face) rep.face = optimal_face_diameter<T>(cost, mu, nu, nullptr, T(0), &sol);

  if (mass_positive(rep.e_inf_max_mass)) {
    rep.verdict = Verdict::inconclusive;
    rep.note = "pairs of unbounded level can carry optimal mass";
    return rep;
  }
  rep.limbs = build_limb_system(S.pairs, rep.classes, cost.rows, cost.cols);
  rep.descent = descent_reconstruct(*rep.limbs, mu, nu);
  if (!rep.descent->feasible) {
    rep.verdict = Verdict::inconclusive;
    rep.note = "descent failed: " + rep.descent->message;
    return rep;
  }
  rep.reconstruction_matches = plans_match(rep.descent->total, sol.plan);
  const bool face_point = rep.face && (rep.face->singleton_by_forest || face_is_point(rep.face->diameter));
  if (rep.reconstruction_matches && face_point) {
    rep.verdict = Verdict::unique_and_verified;
  } else {
    rep.verdict = Verdict::unique_by_limbs;
    if (!rep.reconstruction_matches) rep.note = "descent plan differs from the solver plan";
  }
  return rep;
}

#define OTC_INSTANTIATE(T)                                                                                          \
  template DescentResult<T> descent_reconstruct<T>(const LimbSystem&, const std::vector<T>&, const std::vector<T>&); \
  template bool plans_match<T>(const TransportPlan<T>&, const TransportPlan<T>&);                                   \
  template UniquenessReport<T> uniqueness_verdict<T>(const Dense<T>&, const std::vector<T>&, const std::vector<T>&,  \
                                                     const VerdictOptions&);                                        \
  template UniquenessReport<T> uniqueness_verdict<T>(const Dense<T>&, const std::vector<T>&, const std::vector<T>&,  \
                                                     const Solution<T>&, const VerdictOptions&);

OTC_INSTANTIATE(Q)
OTC_INSTANTIATE(double)

}  // namespace otc
