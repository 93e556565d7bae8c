#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "otc/core.hpp"
#include "otc/costs.hpp"

namespace otc {

constexpr double kDefaultTolGrad = 1e-7;
constexpr std::size_t kDefaultChainBudget = 10'000'000;

enum class LinkMode { exact, gradient };

struct SupportSet {
  std::vector<Pair> pairs;
  // Gradient mode only: per pair, grad_x c(x, y) and grad_y c(x, y) in the sample frames.
  std::vector<Eigen::VectorXd> gx, gy;
  double tol_grad = kDefaultTolGrad;

  static SupportSet from_pairs(std::vector<Pair> pairs);
  static SupportSet with_gradients(std::vector<Pair> pairs, const CostField& cost, double tol_grad = kDefaultTolGrad);
  std::size_t size() const { return pairs.size(); }
};

enum class LinkType { x, y };

struct MatchGraph {
  // Adjacency by pair index; x-links share the source, y-links share the target.
  std::vector<std::vector<std::size_t>> xadj, yadj;
  std::size_t num_links() const;
};

MatchGraph build_match_graph(const SupportSet& S, LinkMode mode);

enum class EndKind { trivial, horizontal, vertical };

const char* end_kind_name(EndKind k);

struct Chain {
  std::vector<std::size_t> links;  // pair indices into the support
  EndKind end = EndKind::trivial;
};

struct LevelAssignment {
  std::vector<std::size_t> level;  // meaningful where !infinite
  std::vector<char> infinite;
  std::vector<char> h_flag, v_flag;  // a chain of length `level` ending horizontally / vertically
  std::size_t max_finite() const;
  bool any_infinite() const;
};

// Longest chains ending at each pair, by dynamic programming over (pair, last link type) states.
LevelAssignment compute_levels(const MatchGraph& g);

struct ChainEnumeration {
  std::vector<Chain> chains;  // maximal chains, both orientations; capped at L_max
  LevelAssignment levels;
  std::size_t states = 0;
};

ChainEnumeration enumerate_chains(const SupportSet& S, const MatchGraph& g, std::size_t L_max,
                                  std::size_t budget = kDefaultChainBudget);

// Every chain of exactly length L, both orientations.
std::vector<Chain> chains_of_length(const MatchGraph& g, std::size_t L, std::size_t budget = kDefaultChainBudget);

// Cyclic chains, each reported once: starts at its smallest pair index, first link of x type.
std::vector<Chain> detect_cyclic(const SupportSet& S, const MatchGraph& g, std::size_t budget = kDefaultChainBudget);

bool is_cyclic_chain(const SupportSet& S, const Chain& c);

template <class T>
T verify_cycle_identity(const SupportSet& S, const Chain& c, const Dense<T>& cost);

struct ChainLength {
  bool infinite = false;
  std::size_t value = 1;
};

ChainLength max_chain_length(const LevelAssignment& levels);
ChainLength max_chain_length(const SupportSet& S, LinkMode mode);

// Checks alternation and the shared-coordinate pattern of a chain against the support.
bool is_valid_chain(const SupportSet& S, const MatchGraph& g, const Chain& c);

std::size_t distinct_sources(const SupportSet& S, const Chain& c);
std::size_t distinct_targets(const SupportSet& S, const Chain& c);

}  // namespace otc
