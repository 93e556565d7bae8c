#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "otc/json_io.hpp"

using namespace otc;

namespace {

constexpr double kC1Budget = 60.0;
constexpr double kC2Budget = 120.0;
constexpr double kC3Budget = 30.0;
constexpr double kC4Budget = 600.0;
constexpr double kLakeFaceTol = 1e-9;
constexpr double kCycleTol = 1e-9;
constexpr double kFaceTol = 1e-9;
constexpr double kGradTol = 1e-6;
constexpr double kHessTol = 1e-6;
constexpr std::size_t kVertexBasisCap = 2'000'000;

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      if (pass) detail << "first failure: " << what << "; ";
      pass = false;
    }
  }
};

int failures = 0;

void report(int id, const std::string& name, Outcome& o, double secs) {
  char t[32];
  std::snprintf(t, sizeof t, "%.1fs", secs);
  std::cout << "criterion " << id << " [" << name << "]: " << (o.pass ? "PASS" : "FAIL") << "  (" << t << ") "
            << o.detail.str() << std::endl;
  if (!o.pass) ++failures;
}

LevelAssignment levels_of(const std::vector<Pair>& pairs) {
  return compute_levels(build_match_graph(SupportSet::from_pairs(pairs), LinkMode::exact));
}

std::string len_str(const ChainLength& c) { return c.infinite ? "inf" : std::to_string(c.value); }

// ---------------- 1: circle bound ----------------

void criterion_1() {
  Stopwatch sw;
  Outcome o;
  const std::size_t sizes[] = {60, 120, 360};
  int uni_ok = 0, uni_n = 0, dir_ok = 0, dir_n = 0, fours = 0, bad_fours = 0;
  std::size_t dir_worst = 0, grad_worst = 0;
  std::mt19937_64 phase_rng(2024);
  std::uniform_real_distribution<double> phase(0.0, 6.283185307179586);
  for (int k = 0; k < 50; ++k) {
    const std::size_t n = sizes[k % 3];
    const bool dirichlet = k % 2 == 1;
    const double ph = phase(phase_rng);
    Instance in = circle_instance(n, dirichlet ? WeightKind::dirichlet : WeightKind::uniform, 100 + k, dirichlet ? 0.0 : ph);
    Solution<Q> s = solve_kantorovich(in.cost, in.mu, in.nu);
    std::vector<Pair> U = optimal_support_union(in.cost, s);
    SupportSet S = SupportSet::from_pairs(U);
    MatchGraph g = build_match_graph(S, LinkMode::exact);
    ChainLength L = max_chain_length(compute_levels(g));
    bool ok = !L.infinite && L.value <= 4;
    if (ok && L.value == 4) {
      for (const Chain& c : chains_of_length(g, 4)) {
        ++fours;
        if (distinct_sources(S, c) != 2 || distinct_targets(S, c) != 3) {
          ok = false;
          ++bad_fours;
        }
      }
    }
    if (dirichlet) {
      ++dir_n;
      dir_ok += ok;
      dir_worst = std::max(dir_worst, L.infinite ? SIZE_MAX : L.value);
      SupportSet G = SupportSet::with_gradients(U, in.field());
      ChainLength lg = max_chain_length(compute_levels(build_match_graph(G, LinkMode::gradient)));
      grad_worst = std::max(grad_worst, lg.infinite ? SIZE_MAX : lg.value);
    } else {
      ++uni_n;
      uni_ok += ok;
    }
    o.require(ok, "instance " + std::to_string(k) + " (n=" + std::to_string(n) + ", " +
                      (dirichlet ? "dirichlet" : "uniform") + ") max chain " + len_str(L));
  }
  const double secs = sw.seconds();
  o.require(secs <= kC1Budget, "runtime over budget");
  o.detail << "uniform " << uni_ok << "/" << uni_n << ", dirichlet " << dir_ok << "/" << dir_n
           << " within bound; dirichlet exact-link max chain " << dir_worst << "; 4-chains checked " << fours
           << " (bad " << bad_fours << "); supplementary gradient-link max on dirichlet " << grad_worst;
  report(1, "circle bound", o, secs);
}

// ---------------- 2: nested bound ----------------

void criterion_2() {
  Stopwatch sw;
  Outcome o;
  std::ostringstream diag;
  for (std::size_t m : {1u, 2u}) {
    for (std::size_t L = 1; L <= 3; ++L) {
      Instance in = nested_instance(L, m, 120, WeightKind::uniform, L);
      Solution<Q> s = solve_kantorovich(in.cost, in.mu, in.nu);
      ChainLength len = max_chain_length(levels_of(optimal_support_union(in.cost, s)));
      o.require(!len.infinite && len.value <= 4 * L,
                "m=" + std::to_string(m) + " L=" + std::to_string(L) + " max chain " + len_str(len));
      o.detail << "m=" << m << ",L=" << L << ": " << len_str(len) << "<=" << 4 * L << "; ";
      if (m == 1) {
        Instance d = nested_instance(L, m, 120, WeightKind::dirichlet, L);
        Solution<Q> sd = solve_kantorovich(d.cost, d.mu, d.nu);
        diag << len_str(max_chain_length(levels_of(optimal_support_union(d.cost, sd)))) << " ";
      }
    }
  }
  const double secs = sw.seconds();
  o.require(secs <= kC2Budget, "runtime over budget");
  o.detail << "uniform weights; dirichlet diagnostic (m=1, L=1..3): " << diag.str();
  report(2, "nested bound", o, secs);
}

// ---------------- 3: lake end-to-end ----------------

void criterion_3() {
  Stopwatch sw;
  Outcome o;
  Instance in = lake_instance(360);
  const TransportPlan<Q>& ref = *in.reference_plan;
  UniquenessReport<Q> r = uniqueness_verdict(in.cost, in.mu, in.nu);
  o.require(ref.value == r.solution.plan.value, "reference value differs from the optimum");
  o.require(plans_equal(ref, r.solution.plan), "reference plan differs from the solver plan");
  o.require(!is_graph(ref), "reference plan is a graph");
  o.require(r.verdict == Verdict::unique_and_verified, std::string("verdict ") + verdict_name(r.verdict));
  const double diam = r.face ? r.face->diameter.get_d() : 1.0;
  o.require(r.face && diam <= kLakeFaceTol, "face diameter " + std::to_string(diam));
  const double secs = sw.seconds();
  o.require(secs <= kC3Budget, "runtime over budget");
  o.detail << "targets " << in.nu.size() << ", support " << ref.entries.size() << ", verdict "
           << verdict_name(r.verdict) << ", max chain " << len_str(r.max_len) << ", diameter " << diam;
  report(3, "lake end-to-end", o, secs);
}

// ---------------- 4: descent vs vertex enumeration ----------------

// Vertices of {gamma >= 0 : row sums a, column sums b} with integer a, b, reached by BFS over feasible
// spanning-tree bases with all tie-breaking choices in the ratio test.
struct VertexOracle {
  std::size_t m, n;
  std::vector<long long> a, b;
  bool truncated = false;
  std::size_t bases = 0;

  using Basis = std::uint64_t;

  bool flows(Basis B, std::vector<long long>& f) const {
    f.assign(m * n, 0);
    std::vector<long long> ra = a, rb = b;
    std::vector<int> deg(m + n, 0);
    std::vector<char> live(m * n, 0);
    for (std::size_t e = 0; e < m * n; ++e)
      if (B >> e & 1) {
        live[e] = 1;
        ++deg[e / n];
        ++deg[m + e % n];
      }
    for (std::size_t left = m + n - 1; left > 0; --left) {
      std::size_t pick = SIZE_MAX;
      for (std::size_t e = 0; e < m * n && pick == SIZE_MAX; ++e)
        if (live[e] && (deg[e / n] == 1 || deg[m + e % n] == 1)) pick = e;
      if (pick == SIZE_MAX) return false;
      const std::size_t i = pick / n, j = pick % n;
      const long long v = deg[i] == 1 ? ra[i] : rb[j];
      f[pick] = v;
      ra[i] -= v;
      rb[j] -= v;
      live[pick] = 0;
      --deg[i];
      --deg[m + j];
    }
    for (std::size_t i = 0; i < m; ++i)
      if (ra[i] != 0) return false;
    for (std::size_t j = 0; j < n; ++j)
      if (rb[j] != 0) return false;
    for (long long v : f)
      if (v < 0) return false;
    return true;
  }

  Basis northwest() const {
    std::vector<long long> ra = a, rb = b;
    Basis B = 0;
    std::size_t i = 0, j = 0;
    while (true) {
      B |= Basis{1} << (i * n + j);
      if (i == m - 1 && j == n - 1) break;
      const long long v = std::min(ra[i], rb[j]);
      ra[i] -= v;
      rb[j] -= v;
      if (j == n - 1 || (i < m - 1 && ra[i] == 0))
        ++i;
      else
        ++j;
    }
    return B;
  }

  // Cells on the tree path from row i to column j, alternating from the column end.
  std::vector<std::size_t> path(Basis B, std::size_t i, std::size_t j) const {
    const std::size_t V = m + n;
    std::vector<long> parent(V, -1), via(V, -1);
    std::deque<std::size_t> q{i};
    parent[i] = static_cast<long>(i);
    while (!q.empty()) {
      std::size_t u = q.front();
      q.pop_front();
      for (std::size_t e = 0; e < m * n; ++e) {
        if (!(B >> e & 1)) continue;
        const std::size_t r = e / n, c = m + e % n;
        std::size_t w;
        if (u == r)
          w = c;
        else if (u == c)
          w = r;
        else
          continue;
        if (parent[w] >= 0) continue;
        parent[w] = static_cast<long>(u);
        via[w] = static_cast<long>(e);
        q.push_back(w);
      }
    }
    std::vector<std::size_t> cells;
    for (std::size_t w = m + j; w != i; w = static_cast<std::size_t>(parent[w])) cells.push_back(static_cast<std::size_t>(via[w]));
    return cells;
  }

  std::set<std::vector<long long>> enumerate() {
    std::set<std::vector<long long>> verts;
    std::unordered_set<Basis> seen;
    std::deque<Basis> q;
    Basis start = northwest();
    std::vector<long long> f;
    if (!flows(start, f)) throw ContractError("northwest basis is infeasible");
    seen.insert(start);
    q.push_back(start);
    while (!q.empty()) {
      if (seen.size() > kVertexBasisCap) {
        truncated = true;
        break;
      }
      Basis B = q.front();
      q.pop_front();
      flows(B, f);
      verts.insert(f);
      for (std::size_t e = 0; e < m * n; ++e) {
        if (B >> e & 1) continue;
        // entering e = (i, j) gets +; the path from column j back to row i alternates -, +, -, ...
        std::vector<std::size_t> cyc = path(B, e / n, e % n);
        long long theta = -1;
        for (std::size_t k = 0; k < cyc.size(); k += 2)
          if (theta < 0 || f[cyc[k]] < theta) theta = f[cyc[k]];
        for (std::size_t k = 0; k < cyc.size(); k += 2) {
          if (f[cyc[k]] != theta) continue;
          Basis nb = (B | (Basis{1} << e)) & ~(Basis{1} << cyc[k]);
          if (seen.insert(nb).second) q.push_back(nb);
        }
      }
    }
    bases = seen.size();
    return verts;
  }
};

void criterion_4() {
  Stopwatch sw;
  Outcome o;
  int claimed = 0, verified = 0, by_limbs = 0, inconclusive = 0, oracle_unique = 0, truncated = 0, value_ok = 0;
  std::mt19937_64 rng(4040);
  std::uniform_int_distribution<int> size(1, 6);
  const int costs[] = {1, 3, 9};
  for (int t = 0; t < 500; ++t) {
    const std::size_t m = size(rng), n = size(rng);
    Instance in = random_cost_instance(m, n, costs[t % 3], 5000 + t, 1000);
    UniquenessReport<Q> r = uniqueness_verdict(in.cost, in.mu, in.nu);

    mpz_class D = 1;
    for (const Q& w : in.mu) mpz_lcm(D.get_mpz_t(), D.get_mpz_t(), w.get_den_mpz_t());
    for (const Q& w : in.nu) mpz_lcm(D.get_mpz_t(), D.get_mpz_t(), w.get_den_mpz_t());
    VertexOracle vo{m, n, {}, {}};
    for (const Q& w : in.mu) vo.a.push_back(static_cast<long long>(mpz_class(w * D).get_si()));
    for (const Q& w : in.nu) vo.b.push_back(static_cast<long long>(mpz_class(w * D).get_si()));
    auto verts = vo.enumerate();
    if (vo.truncated) ++truncated;

    Q best = -1;
    std::vector<const std::vector<long long>*> argmin;
    for (const auto& v : verts) {
      Q c = 0;
      for (std::size_t e = 0; e < m * n; ++e) c += in.cost.a[e] * static_cast<long>(v[e]);
      c /= D;
      if (best < 0 || c < best) {
        best = c;
        argmin.clear();
      }
      if (c == best) argmin.push_back(&v);
    }
    value_ok += best == r.solution.plan.value;
    o.require(best == r.solution.plan.value, "trial " + std::to_string(t) + ": solver value differs from enumeration");
    const bool unique = argmin.size() == 1 && !vo.truncated;
    oracle_unique += unique;

    switch (r.verdict) {
      case Verdict::inconclusive: ++inconclusive; continue;
      case Verdict::unique_and_verified: ++verified; break;
      case Verdict::unique_by_limbs: ++by_limbs; break;
    }
    ++claimed;
    o.require(unique, "trial " + std::to_string(t) + ": uniqueness claimed but enumeration finds " +
                          std::to_string(argmin.size()) + " optimal vertices");
    if (!unique) continue;
    TransportPlan<Q> want;
    want.m = m;
    want.n = n;
    for (std::size_t e = 0; e < m * n; ++e)
      if ((*argmin[0])[e] != 0) want.entries.push_back({e / n, e % n, Q(static_cast<long>((*argmin[0])[e])) / D});
    for (auto& e : want.entries) e.mass.canonicalize();
    TransportPlan<Q> got = r.descent->total;
    bool same = got.entries.size() == want.entries.size();
    for (std::size_t k = 0; same && k < got.entries.size(); ++k)
      same = got.entries[k].i == want.entries[k].i && got.entries[k].j == want.entries[k].j &&
             got.entries[k].mass == want.entries[k].mass;
    o.require(same, "trial " + std::to_string(t) + ": descent differs from the enumerated optimizer");
  }
  const double secs = sw.seconds();
  o.require(truncated == 0, "vertex enumeration truncated");
  o.require(secs <= kC4Budget, "runtime over budget");
  o.detail << "500 instances: unique-and-verified " << verified << ", unique-by-limbs " << by_limbs
           << ", inconclusive " << inconclusive << "; enumeration-unique " << oracle_unique << "; optimum values agree "
           << value_ok << "/500";
  report(4, "descent vs enumeration", o, secs);
}

// ---------------- 5: cyclic identity ----------------

void criterion_5() {
  Stopwatch sw;
  Outcome o;
  std::mt19937_64 rng(5050);
  std::uniform_int_distribution<int> size(2, 5);
  std::uniform_real_distribution<double> real(-1.0, 1.0);
  std::uniform_int_distribution<int> bit(0, 1);
  std::size_t cycles = 0, violations = 0, with_cycles = 0;
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const std::size_t m = size(rng), n = size(rng);
    Dense<double> c(m, n);
    std::vector<double> a(m), b(n);
    for (auto& v : a) v = real(rng);
    for (auto& v : b) v = real(rng);
    // Separable costs tie every plan; 0/1 costs tie many.
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < n; ++j) c(i, j) = t % 2 == 0 ? a[i] + b[j] : static_cast<double>(bit(rng));
    std::vector<Q> mu(m, Q(1, static_cast<unsigned long>(m))), nu(n, Q(1, static_cast<unsigned long>(n)));
    Dense<Q> cq = to_exact(c);
    Solution<Q> s = solve_kantorovich(cq, mu, nu);
    SupportSet S = SupportSet::from_pairs(optimal_support_union(cq, s));
    auto cyc = detect_cyclic(S, build_match_graph(S, LinkMode::exact));
    with_cycles += !cyc.empty();
    for (const Chain& ch : cyc) {
      ++cycles;
      const double r = verify_cycle_identity(S, ch, c);
      worst = std::max(worst, r);
      if (!(r <= kCycleTol)) ++violations;
    }
  }
  o.require(violations == 0, std::to_string(violations) + " violations");
  o.require(cycles > 0, "no cyclic chains detected");
  o.detail << cycles << " cyclic chains over " << with_cycles << "/200 instances, worst residual " << worst;
  report(5, "cyclic identity", o, sw.seconds());
}

// ---------------- 6: limb structure ----------------

bool limbs_valid(const std::vector<Pair>& U, std::size_t m, std::size_t n, std::string* why) {
  try {
    LevelClasses cls = decompose_levels(levels_of(U));
    LimbSystem sys = build_limb_system(U, cls, m, n);
    for (std::size_t k = 1; k <= sys.N; ++k) {
      std::vector<Pair> limb;
      for (std::size_t p : sys.G[k]) limb.push_back(U[p]);
      if (sys.is_graph_limb(k) ? !is_graph(limb) : !is_antigraph(limb)) {
        *why = "limb " + std::to_string(k) + " has the wrong shape";
        return false;
      }
    }
    return true;
  } catch (const StructureError& e) {
    *why = e.lemma() + ": " + e.what();
    return false;
  }
}

void criterion_6() {
  Stopwatch sw;
  Outcome o;
  std::vector<Instance> gen;
  for (int k = 0; k < 10; ++k) gen.push_back(circle_instance(k % 2 ? 120 : 60, k % 2 ? WeightKind::dirichlet : WeightKind::uniform, 600 + k, 0.1 * k));
  for (std::size_t L = 1; L <= 3; ++L) {
    gen.push_back(nested_instance(L, 1, 60, WeightKind::uniform, L));
    gen.push_back(nested_instance(L, 1, 60, WeightKind::dirichlet, L));
  }
  gen.push_back(lake_instance(120));
  gen.push_back(bouquet_instance(2, 1, 15, WeightKind::dirichlet, 1));
  gen.push_back(bouquet_instance(3, 2, 10, WeightKind::uniform, 2));
  for (int k = 0; k < 150; ++k) gen.push_back(random_cost_instance(1 + k % 6, 1 + (k / 6) % 6, 1 + k % 9, 6000 + k));
  std::size_t ok = 0;
  for (std::size_t k = 0; k < gen.size(); ++k) {
    const Instance& in = gen[k];
    Solution<Q> s = solve_kantorovich(in.cost, in.mu, in.nu);
    std::string why;
    const bool v = limbs_valid(optimal_support_union(in.cost, s), in.cost.rows, in.cost.cols, &why);
    ok += v;
    o.require(v, in.kind + " instance " + std::to_string(k) + ": " + why);
  }

  struct Fixture {
    std::string expect;
    std::vector<Pair> pairs;
    LevelAssignment levels;
    std::size_t m, n;
    bool extra_cover = false;
  };
  auto la = [](std::vector<std::size_t> l, std::vector<char> h, std::vector<char> v) {
    LevelAssignment a;
    a.infinite.assign(l.size(), 0);
    a.level = std::move(l);
    a.h_flag = std::move(h);
    a.v_flag = std::move(v);
    return a;
  };
  std::vector<Fixture> fixtures = {
      {"shared-source-levels", {{0, 0}, {0, 1}}, la({1, 1}, {0, 0}, {0, 0}), 1, 2},
      {"shared-source-levels", {{0, 0}, {0, 1}}, la({2, 4}, {1, 0}, {0, 1}), 1, 2},
      {"shared-target-levels", {{0, 0}, {1, 0}}, la({2, 3}, {1, 0}, {1, 1}), 2, 1},
      {"shared-target-levels", {{0, 0}, {1, 0}}, la({3, 3}, {0, 0}, {1, 1}), 2, 1},
      {"limb-cover", {{0, 0}}, la({1}, {0}, {0}), 1, 1, true},
  };
  std::size_t caught = 0;
  for (const Fixture& f : fixtures) {
    LevelClasses c = decompose_levels(f.levels);
    if (f.extra_cover) {
      c.Evm.resize(4);
      c.Evm[3].push_back(0);
    }
    try {
      build_limb_system(f.pairs, c, f.m, f.n);
      o.require(false, "fixture " + f.expect + " passed validation");
    } catch (const StructureError& e) {
      const bool good = e.lemma() == f.expect && !e.witness().empty();
      caught += good;
      o.require(good, "fixture " + f.expect + " raised " + e.lemma());
    }
  }
  o.detail << "generated instances valid " << ok << "/" << gen.size() << "; adversarial fixtures caught " << caught
           << "/" << fixtures.size();
  report(6, "limb structure", o, sw.seconds());
}

// ---------------- 7: generic uniqueness probe ----------------

void criterion_7() {
  Stopwatch sw;
  Outcome o;
  Instance in = constant_cost_instance(2, 2, Q(1));
  const Q d_default = optimal_face_diameter<Q>(in.cost, in.mu, in.nu, nullptr, Q(0)).diameter;
  std::vector<Dense<Q>> first{default_probes<Q>(2, 2)[0]};
  const Q d_first = optimal_face_diameter<Q>(in.cost, in.mu, in.nu, &first, Q(0)).diameter;
  o.require(d_default == Q(1, 2), "default-probe diameter " + d_default.get_str() + ", expected 1/2");
  int unique = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    Dense<Q> pc = to_exact(perturb_matrix(in.cost_double(), 1e-3, seed));
    unique += optimal_face_diameter<Q>(pc, in.mu, in.nu, nullptr, Q(0)).diameter.get_d() <= kFaceTol;
  }
  o.require(unique >= 99, std::to_string(unique) + "/100 perturbed seeds unique");
  o.detail << "default-probe diameter " << d_default.get_str() << " (first probe alone " << d_first.get_str()
           << "); perturbed unique " << unique << "/100";
  report(7, "generic uniqueness", o, sw.seconds());
}

// ---------------- 8: gradients ----------------

void criterion_8() {
  Stopwatch sw;
  Outcome o;
  const double h = 1e-5;
  double worst_q = 0.0, worst_b = 0.0, worst_h = 0.0, worst_b_fine = 0.0;
  {
    Instance in = circle_instance(360, WeightKind::uniform, 0, 0.37);
    CostField f = in.field();
    std::mt19937_64 rng(8);
    std::uniform_int_distribution<std::size_t> u(0, 359);
    auto on_circle = [](const Eigen::VectorXd& p, double s) {
      const double th = std::atan2(p(1), p(0)) + s;
      Eigen::VectorXd q(2);
      q << std::cos(th), std::sin(th);
      return q;
    };
    for (int t = 0; t < 100; ++t) {
      const std::size_t i = u(rng), j = u(rng);
      const auto& x = in.M->points[i];
      const auto& y = in.N->points[j];
      const double fx = (quadratic_cost(on_circle(x, h), y) - quadratic_cost(on_circle(x, -h), y)) / (2 * h);
      const double fy = (quadratic_cost(x, on_circle(y, h)) - quadratic_cost(x, on_circle(y, -h))) / (2 * h);
      worst_q = std::max({worst_q, std::abs(f.grad_x(i, j)(0) - fx), std::abs(f.grad_y(i, j)(0) - fy)});
    }
    for (std::size_t i = 0; i < 360; ++i)
      for (std::size_t j = 0; j < 360; ++j) {
        const double closed = -in.M->tangents[i].col(0).dot(in.N->tangents[j].col(0));
        worst_h = std::max(worst_h, std::abs(f.mixed_hessian(i, j)(0, 0) - closed));
      }
  }
  {
    Instance in = bouquet_instance(3, 2, 20, WeightKind::uniform, 8);
    CostField f = in.field();
    std::mt19937_64 rng(9);
    std::uniform_int_distribution<std::size_t> u(0, in.BM.size() - 1);
    for (int t = 0; t < 100; ++t) {
      const std::size_t i = u(rng), j = u(rng);
      const Eigen::VectorXd gx = f.grad_x(i, j), gy = f.grad_y(i, j);
      for (Eigen::Index a = 0; a < gx.size(); ++a) {
        const Eigen::VectorXd e = Eigen::VectorXd::Unit(gx.size(), a);
        auto err = [&](double step) {
          const double fx = (bouquet_cost(simplex_shift(in.BM[i], e, step), in.BN[j]) -
                             bouquet_cost(simplex_shift(in.BM[i], e, -step), in.BN[j])) /
                            (2 * step);
          const double fy = (bouquet_cost(in.BM[i], simplex_shift(in.BN[j], e, step)) -
                             bouquet_cost(in.BM[i], simplex_shift(in.BN[j], e, -step))) /
                            (2 * step);
          return std::max(std::abs(gx(a) - fx), std::abs(gy(a) - fy));
        };
        worst_b = std::max(worst_b, err(h));
        // diagnostic only: separates truncation from a wrong Jacobian
        worst_b_fine = std::max(worst_b_fine, err(h / 10));
      }
    }
  }
  o.require(worst_q <= kGradTol, "quadratic gradient error " + std::to_string(worst_q));
  o.require(worst_b <= kGradTol, "bouquet gradient error " + std::to_string(worst_b));
  o.require(worst_h <= kHessTol, "mixed Hessian error " + std::to_string(worst_h));
  o.detail << "max |analytic - central difference|: quadratic " << worst_q << ", bouquet " << worst_b
           << " (" << worst_b_fine << " at h/10)"
           << "; mixed Hessian vs -<t_x,t_y> on 360x360: " << worst_h;
  report(8, "gradient correctness", o, sw.seconds());
}

// ---------------- 9: maps ----------------

void criterion_9() {
  Stopwatch sw;
  Outcome o;
  std::mt19937_64 rng(99);
  std::normal_distribution<double> n01;
  std::gamma_distribution<double> gam(1.0, 1.0);
  std::size_t pole_checks = 0, origin_checks = 0, rays = 0, ray_fail = 0;
  for (Eigen::Index m = 1; m <= 3; ++m) {
    Eigen::VectorXd north = Eigen::VectorXd::Zero(m + 1), south = north;
    north(m) = 1.0;
    south(m) = -1.0;
    o.require(disc_to_sphere(Eigen::VectorXd::Zero(m)) == north, "0 does not map to the north pole");
    for (int k = 0; k < 1000; ++k) {
      Eigen::VectorXd v(m);
      for (Eigen::Index a = 0; a < m; ++a) v(a) = n01(rng);
      v.normalize();
      ++pole_checks;
      o.require(disc_to_sphere(v) == south, "a boundary point misses the south pole");
    }
    const Eigen::Index d = m + 1;
    for (int id = 1; id <= 3; ++id) {
      for (int k = 0; k < 300; ++k) {
        SimplexPoint t;
        t.simplex_id = id;
        t.barycentric.resize(d);
        for (Eigen::Index a = 0; a < d; ++a) t.barycentric(a) = gam(rng);
        const Eigen::Index zeros = 1 + k % m;
        for (Eigen::Index z = 0; z < zeros; ++z) t.barycentric((k + z) % d) = 0.0;
        t.barycentric /= t.barycentric.sum();
        ++origin_checks;
        o.require(bouquet_embed(t) == Eigen::VectorXd::Zero(d), "a simplex boundary point misses the origin");
      }
    }
  }
  for (std::size_t m = 1; m <= 3; ++m) {
    const Eigen::Index d = static_cast<Eigen::Index>(m + 1);
    const Eigen::VectorXd centroid = Eigen::VectorXd::Constant(d, 1.0 / static_cast<double>(d));
    for (int k = 0; k < 3334; ++k) {
      Eigen::VectorXd end(d);
      for (Eigen::Index a = 0; a < d; ++a) end(a) = gam(rng);
      end((k) % d) = 0.0;
      end /= end.sum();
      ++rays;
      double prev = 0.0;
      bool mono = true;
      for (int s = 1; s <= 40; ++s) {
        SimplexPoint t;
        t.barycentric = centroid + (s / 40.0) * (end - centroid);
        if (s == 40) t.barycentric = end;
        const double r = simplex_to_disc(t).norm();
        if (!(r > prev)) mono = false;
        prev = r;
      }
      ray_fail += !mono;
    }
  }
  o.require(ray_fail == 0, std::to_string(ray_fail) + " non-monotone rays");
  o.detail << "boundary->south " << pole_checks << ", simplex boundary->origin " << origin_checks
           << ", monotone rays " << rays - ray_fail << "/" << rays;
  report(9, "map correctness", o, sw.seconds());
}

}  // namespace

int main() {
  std::cout.setf(std::ios::fmtflags(0), std::ios::floatfield);
  std::cout.precision(3);
  try {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
  } catch (const std::exception& e) {
    std::cout << "acceptance aborted: " << e.what() << std::endl;
    return 2;
  }
  std::cout << (failures == 0 ? "all criteria PASS" : std::to_string(failures) + " criteria FAIL") << std::endl;
  return failures == 0 ? 0 : 1;
}
