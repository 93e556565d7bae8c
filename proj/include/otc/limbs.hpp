#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "otc/chains.hpp"
#include "otc/core.hpp"
#include "otc/transport.hpp"

namespace otc {

// Index k of each vector is the level; entries are pair indices into the support.
struct LevelClasses {
  std::size_t K = 0;  // largest finite level present
  std::vector<std::vector<std::size_t>> E, Eh, Ev, Ehm, Evm, Ehv;
  std::vector<std::size_t> E_inf;
  std::size_t num_pairs = 0;

  const std::vector<std::size_t>& at(const std::vector<std::vector<std::size_t>>& v, std::size_t k) const;
};

LevelClasses decompose_levels(const LevelAssignment& levels);

struct LimbSystem {
  std::size_t m = 0, n = 0;
  std::vector<Pair> pairs;                   // the support the indices refer to
  std::vector<std::vector<std::size_t>> G;   // G[0] is empty; odd k graphs, even k antigraphs
  std::vector<std::vector<std::size_t>> I;   // I[k], k = 0..N+1: sources for odd k, targets for even k
  std::vector<std::map<std::size_t, std::size_t>> f;  // odd k: source -> target; even k: target -> source
  std::size_t N = 0;                         // largest nonempty limb index

  bool is_graph_limb(std::size_t k) const { return k % 2 == 1; }
};

// Structure errors report the violated property through lemma():
//   "shared-source-levels", "shared-target-levels", "limb-graph", "limb-antigraph",
//   "index-disjointness", "domain-containment", "limb-cover".
LimbSystem build_limb_system(const std::vector<Pair>& pairs, const LevelClasses& classes, std::size_t m,
                             std::size_t n);

template <class T>
struct DescentResult {
  std::vector<std::vector<PlanEntry<T>>> gamma;            // gamma[k]
  std::vector<std::vector<std::pair<std::size_t, T>>> eta;  // eta[k] over Dom f_k
  TransportPlan<T> total;
  bool feasible = false;
  std::size_t failed_limb = 0;  // limb whose intermediate measure went negative, 0 if none
  std::string message;
};

template <class T>
DescentResult<T> descent_reconstruct(const LimbSystem& sys, const std::vector<T>& mu, const std::vector<T>& nu);

enum class Verdict { unique_by_limbs, unique_and_verified, inconclusive };

const char* verdict_name(Verdict v);

struct VerdictOptions {
  LinkMode mode = LinkMode::exact;
  const CostField* field = nullptr;  // gradient mode: source of the pair gradients
  double tol_grad = kDefaultTolGrad;
  bool compute_face = true;
  std::size_t chain_budget = kDefaultChainBudget;
};

template <class T>
struct UniquenessReport {
  Solution<T> solution;
  std::vector<Pair> support;  // pairs carried by some optimal plan
  LevelAssignment levels;
  ChainLength max_len;
  LevelClasses classes;
  T e_inf_max_mass{};
  std::optional<LimbSystem> limbs;
  std::optional<DescentResult<T>> descent;
  bool reconstruction_matches = false;
  std::optional<FaceDiameter<T>> face;
  Verdict verdict = Verdict::inconclusive;
  std::string note;
};

template <class T>
UniquenessReport<T> uniqueness_verdict(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                                       const VerdictOptions& opts = {});

template <class T>
UniquenessReport<T> uniqueness_verdict(const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu,
                                       const Solution<T>& sol, const VerdictOptions& opts = {});

template <class T>
bool plans_match(const TransportPlan<T>& a, const TransportPlan<T>& b);

}  // namespace otc
