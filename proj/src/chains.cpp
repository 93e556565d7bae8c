#include "otc/chains.hpp"

#include <algorithm>
#include <map>
#include <set>

namespace otc {

SupportSet SupportSet::from_pairs(std::vector<Pair> pairs) {
  std::vector<Pair> sorted = pairs;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw InvalidInstance("support contains a duplicate pair");
  SupportSet s;
  s.pairs = std::move(pairs);
  return s;
}

SupportSet SupportSet::with_gradients(std::vector<Pair> pairs, const CostField& cost, double tol_grad) {
  if (!(tol_grad > 0.0)) throw InvalidParameter("gradient tolerance must be positive");
  SupportSet s = from_pairs(std::move(pairs));
  s.tol_grad = tol_grad;
  for (const auto& p : s.pairs) {
    s.gx.push_back(cost.grad_x(p.i, p.j));
    s.gy.push_back(cost.grad_y(p.i, p.j));
    if (!s.gx.back().allFinite() || !s.gy.back().allFinite()) throw InvalidInstance("non-finite gradient");
  }
  return s;
}

std::size_t MatchGraph::num_links() const {
  std::size_t n = 0;
  for (const auto& a : xadj) n += a.size();
  for (const auto& a : yadj) n += a.size();
  return n / 2;
}

MatchGraph build_match_graph(const SupportSet& S, LinkMode mode) {
  const std::size_t P = S.size();
  if (mode == LinkMode::gradient && (S.gx.size() != P || S.gy.size() != P))
    throw InvalidParameter("gradient link mode needs gradients for every pair");
  MatchGraph g;
  g.xadj.assign(P, {});
  g.yadj.assign(P, {});
  std::map<std::size_t, std::vector<std::size_t>> by_x, by_y;
  for (std::size_t k = 0; k < P; ++k) {
    by_x[S.pairs[k].i].push_back(k);
    by_y[S.pairs[k].j].push_back(k);
  }
  auto link = [&](const std::map<std::size_t, std::vector<std::size_t>>& groups,
                  const std::vector<Eigen::VectorXd>& grads, std::vector<std::vector<std::size_t>>& adj) {
    for (const auto& [key, members] : groups) {
      for (std::size_t a = 0; a < members.size(); ++a) {
        for (std::size_t b = a + 1; b < members.size(); ++b) {
          std::size_t p = members[a], q = members[b];
          if (mode == LinkMode::gradient && (grads[p] - grads[q]).norm() > S.tol_grad) continue;
          adj[p].push_back(q);
          adj[q].push_back(p);
        }
      }
    }
  };
  link(by_x, S.gx, g.xadj);
  link(by_y, S.gy, g.yadj);
  for (auto& a : g.xadj) std::sort(a.begin(), a.end());
  for (auto& a : g.yadj) std::sort(a.begin(), a.end());
  return g;
}

const char* end_kind_name(EndKind k) {
  switch (k) {
    case EndKind::trivial: return "trivial";
    case EndKind::horizontal: return "horizontal";
    case EndKind::vertical: return "vertical";
  }
  return "unknown";
}

std::size_t LevelAssignment::max_finite() const {
  std::size_t m = 0;
  for (std::size_t p = 0; p < level.size(); ++p)
    if (!infinite[p]) m = std::max(m, level[p]);
  return m;
}

bool LevelAssignment::any_infinite() const {
  return std::any_of(infinite.begin(), infinite.end(), [](char c) { return c != 0; });
}

LevelAssignment compute_levels(const MatchGraph& g) {
  const std::size_t P = g.xadj.size();
  // State 2p: chain ends at p through an x-link; 2p+1: through a y-link.
  // The value of (p, x) depends on (q, y) for every x-neighbour q, and symmetrically.
  const std::size_t V = 2 * P;
  auto preds = [&](std::size_t v) -> const std::vector<std::size_t>& {
    return (v % 2 == 0) ? g.xadj[v / 2] : g.yadj[v / 2];
  };
  // Successor lists: from (q, y) to (p, x) when q and p are x-linked.
  std::vector<std::vector<std::size_t>> succ(V);
  for (std::size_t v = 0; v < V; ++v)
    for (std::size_t q : preds(v)) succ[2 * q + (v % 2 == 0 ? 1 : 0)].push_back(v);

  // Iterative Tarjan.
  std::vector<long> index(V, -1), low(V, 0), comp(V, -1);
  std::vector<char> on_stack(V, 0);
  std::vector<std::size_t> stack;
  std::vector<std::vector<std::size_t>> sccs;
  long counter = 0;
  std::vector<std::pair<std::size_t, std::size_t>> call;
  for (std::size_t root = 0; root < V; ++root) {
    if (index[root] >= 0) continue;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, it] = call.back();
      if (it < succ[v].size()) {
        std::size_t w = succ[v][it++];
        if (index[w] < 0) {
          index[w] = low[w] = counter++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        std::vector<std::size_t> c;
        std::size_t w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = static_cast<long>(sccs.size());
          c.push_back(w);
        } while (w != v);
        sccs.push_back(std::move(c));
      }
      std::size_t done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }

  // Tarjan emits components sinks first; walk them sources first.
  std::vector<std::size_t> val(V, 0);
  std::vector<char> inf(V, 0);
  for (auto c = sccs.rbegin(); c != sccs.rend(); ++c) {
    if (c->size() > 1)
      for (std::size_t v : *c) inf[v] = 1;
    for (std::size_t v : *c) {
      const auto& pr = preds(v);
      if (pr.empty()) continue;
      std::size_t best = 1;
      for (std::size_t q : pr) {
        std::size_t u = 2 * q + (v % 2 == 0 ? 1 : 0);
        if (inf[u]) inf[v] = 1;
        best = std::max(best, val[u]);
      }
      val[v] = 1 + best;
    }
  }

  LevelAssignment la;
  la.level.assign(P, 0);
  la.infinite.assign(P, 0);
  la.h_flag.assign(P, 0);
  la.v_flag.assign(P, 0);
  for (std::size_t p = 0; p < P; ++p) {
    if (inf[2 * p] || inf[2 * p + 1]) {
      la.infinite[p] = 1;
      continue;
    }
    const std::size_t lx = val[2 * p], ly = val[2 * p + 1];
    la.level[p] = std::max<std::size_t>({1, lx, ly});
    if (la.level[p] >= 2) {
      la.v_flag[p] = lx == la.level[p];
      la.h_flag[p] = ly == la.level[p];
    }
  }
  return la;
}

namespace {

struct Walker {
  const MatchGraph& g;
  std::size_t budget;
  std::size_t states = 0;

  void tick() {
    if (++states > budget) throw BudgetError("chain enumeration exceeded its state budget");
  }
  const std::vector<std::size_t>& adj(std::size_t p, LinkType t) const {
    return t == LinkType::x ? g.xadj[p] : g.yadj[p];
  }
};

LinkType other(LinkType t) { return t == LinkType::x ? LinkType::y : LinkType::x; }

EndKind end_of(LinkType last) { return last == LinkType::x ? EndKind::vertical : EndKind::horizontal; }

}  // namespace

ChainEnumeration enumerate_chains(const SupportSet& S, const MatchGraph& g, std::size_t L_max, std::size_t budget) {
  if (L_max < 1) throw InvalidParameter("L_max must be at least 1");
  if (g.xadj.size() != S.size()) throw InvalidParameter("match graph does not belong to this support");
  ChainEnumeration out;
  out.levels = compute_levels(g);
  Walker w{g, budget};
  std::vector<std::size_t> path;
  std::function<void(LinkType)> dfs = [&](LinkType next) {
    w.tick();
    const std::size_t p = path.back();
    const auto& nb = w.adj(p, next);
    if (path.size() == L_max || nb.empty()) {
      out.chains.push_back({path, end_of(other(next))});
      return;
    }
    for (std::size_t q : nb) {
      path.push_back(q);
      dfs(other(next));
      path.pop_back();
    }
  };
  for (std::size_t p = 0; p < S.size(); ++p) {
    w.tick();
    if (g.xadj[p].empty() && g.yadj[p].empty()) {
      out.chains.push_back({{p}, EndKind::trivial});
      continue;
    }
    if (L_max == 1) {
      out.chains.push_back({{p}, EndKind::trivial});
      continue;
    }
    for (LinkType t : {LinkType::x, LinkType::y}) {
      if (w.adj(p, t).empty()) continue;
      // A chain starting p --t--> ... extends backwards through a link of the other type.
      if (!w.adj(p, other(t)).empty() && !out.levels.infinite[p]) continue;
      for (std::size_t q : w.adj(p, t)) {
        path = {p, q};
        dfs(other(t));
      }
    }
  }
  out.states = w.states;
  return out;
}

std::vector<Chain> chains_of_length(const MatchGraph& g, std::size_t L, std::size_t budget) {
  if (L < 1) throw InvalidParameter("chain length must be at least 1");
  std::vector<Chain> out;
  Walker w{g, budget};
  std::vector<std::size_t> path;
  std::function<void(LinkType)> dfs = [&](LinkType next) {
    w.tick();
    if (path.size() == L) {
      out.push_back({path, end_of(other(next))});
      return;
    }
    for (std::size_t q : w.adj(path.back(), next)) {
      path.push_back(q);
      dfs(other(next));
      path.pop_back();
    }
  };
  const std::size_t P = g.xadj.size();
  for (std::size_t p = 0; p < P; ++p) {
    if (L == 1) {
      out.push_back({{p}, EndKind::trivial});
      continue;
    }
    for (LinkType t : {LinkType::x, LinkType::y}) {
      for (std::size_t q : w.adj(p, t)) {
        path = {p, q};
        dfs(other(t));
      }
    }
  }
  return out;
}

std::vector<Chain> detect_cyclic(const SupportSet& S, const MatchGraph& g, std::size_t budget) {
  std::vector<Chain> out;
  Walker w{g, budget};
  const std::size_t P = S.size();
  std::vector<std::size_t> path;
  std::set<std::size_t> used_x, used_y;
  std::function<void(std::size_t)> dfs = [&](std::size_t s) {
    w.tick();
    const std::size_t p = path.back();
    if (path.size() % 2 == 0) {
      for (std::size_t q : g.yadj[p]) {
        if (q <= s || used_x.count(S.pairs[q].i)) continue;
        path.push_back(q);
        used_x.insert(S.pairs[q].i);
        dfs(s);
        used_x.erase(S.pairs[q].i);
        path.pop_back();
      }
    } else {
      for (std::size_t q : g.xadj[p]) {
        if (q <= s) continue;
        if (S.pairs[q].j == S.pairs[s].j) {
          // q shares the start's target, so the y-link q -> s closes the cycle.
          if (path.size() >= 3) {
            path.push_back(q);
            out.push_back({path, EndKind::vertical});
            path.pop_back();
          }
          continue;
        }
        if (used_y.count(S.pairs[q].j)) continue;
        path.push_back(q);
        used_y.insert(S.pairs[q].j);
        dfs(s);
        used_y.erase(S.pairs[q].j);
        path.pop_back();
      }
    }
  };
  for (std::size_t s = 0; s < P; ++s) {
    path = {s};
    used_x = {S.pairs[s].i};
    used_y = {S.pairs[s].j};
    dfs(s);
  }
  return out;
}

bool is_cyclic_chain(const SupportSet& S, const Chain& c) {
  const std::size_t L = c.links.size();
  if (L < 4 || L % 2 != 0) return false;
  std::set<std::size_t> xs, ys;
  for (std::size_t k = 0; k < L; ++k) {
    const Pair& a = S.pairs.at(c.links[k]);
    const Pair& b = S.pairs.at(c.links[(k + 1) % L]);
    // Positions 0-1, 2-3, ... share the source; 1-2, 3-4, ..., (L-1)-0 share the target.
    if (k % 2 == 0) {
      if (a.i != b.i || a.j == b.j) return false;
    } else {
      if (a.j != b.j || a.i == b.i) return false;
    }
    xs.insert(a.i);
    ys.insert(a.j);
  }
  return xs.size() == L / 2 && ys.size() == L / 2;
}

template <class T>
T verify_cycle_identity(const SupportSet& S, const Chain& c, const Dense<T>& cost) {
  if (!is_cyclic_chain(S, c)) throw ContractError("chain is not cyclic in the required indexing");
  T odd(0), even(0);
  for (std::size_t k = 0; k < c.links.size(); ++k) {
    const Pair& p = S.pairs[c.links[k]];
    if (k % 2 == 0)
      odd += cost(p.i, p.j);
    else
      even += cost(p.i, p.j);
  }
  T r = odd - even;
  return r < 0 ? T(-r) : r;
}

template Q verify_cycle_identity<Q>(const SupportSet&, const Chain&, const Dense<Q>&);
template double verify_cycle_identity<double>(const SupportSet&, const Chain&, const Dense<double>&);

ChainLength max_chain_length(const LevelAssignment& levels) {
  ChainLength r;
  r.infinite = levels.any_infinite();
  r.value = std::max<std::size_t>(1, levels.max_finite());
  return r;
}

ChainLength max_chain_length(const SupportSet& S, LinkMode mode) {
  return max_chain_length(compute_levels(build_match_graph(S, mode)));
}

bool is_valid_chain(const SupportSet& S, const MatchGraph& g, const Chain& c) {
  if (c.links.empty()) return false;
  for (std::size_t k : c.links)
    if (k >= S.size()) return false;
  std::optional<LinkType> prev;
  for (std::size_t k = 0; k + 1 < c.links.size(); ++k) {
    const std::size_t p = c.links[k], q = c.links[k + 1];
    LinkType t;
    if (std::binary_search(g.xadj[p].begin(), g.xadj[p].end(), q))
      t = LinkType::x;
    else if (std::binary_search(g.yadj[p].begin(), g.yadj[p].end(), q))
      t = LinkType::y;
    else
      return false;
    if (prev && *prev == t) return false;
    prev = t;
  }
  return true;
}

std::size_t distinct_sources(const SupportSet& S, const Chain& c) {
  std::set<std::size_t> xs;
  for (std::size_t k : c.links) xs.insert(S.pairs[k].i);
  return xs.size();
}

std::size_t distinct_targets(const SupportSet& S, const Chain& c) {
  std::set<std::size_t> ys;
  for (std::size_t k : c.links) ys.insert(S.pairs[k].j);
  return ys.size();
}

}  // namespace otc
