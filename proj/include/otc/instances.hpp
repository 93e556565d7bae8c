#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "otc/costs.hpp"
#include "otc/geometry.hpp"
#include "otc/transport.hpp"

namespace otc {

enum class WeightKind { uniform, dirichlet };

WeightKind parse_weight_kind(const std::string& s);
const char* weight_kind_name(WeightKind w);

// Uniform weights are exactly 1/n. Dirichlet(1,...,1) draws are rounded to integer masses
// a_i = max(1, round(10^6 d_i)) and normalized, so every atom is charged.
std::vector<Q> make_weights(std::size_t n, WeightKind kind, std::mt19937_64& rng);

// Integer weights drawn uniformly from 1..max_int, normalized.
std::vector<Q> random_rational_weights(std::size_t n, int max_int, std::mt19937_64& rng);

struct Instance {
  std::string kind;
  nlohmann::json params = nlohmann::json::object();
  Dense<Q> cost;
  std::vector<Q> mu, nu;
  std::shared_ptr<const EmbeddedSample> M, N;
  std::vector<SimplexPoint> BM, BN;
  std::optional<Disc> disc;
  std::optional<TransportPlan<Q>> reference_plan;

  // Analytic cost evaluator when the instance carries geometry; tabulated otherwise.
  CostField field() const;
  Dense<double> cost_double() const { return to_double(cost); }
};

EmbeddedSample rotate_sample(const EmbeddedSample& s, double angle);

// Quadratic cost between two unit-circle samples; N is M rotated by `phase`.
Instance circle_instance(std::size_t n, WeightKind w, std::uint64_t seed, double phase = 0.0);
Instance nested_instance(std::size_t L, std::size_t m, std::size_t n_per, WeightKind w, std::uint64_t seed);
// Sources: n circle samples with uniform mu. Targets: the points ybar(x) and yhat(x).
// reference_plan is half of mu sent to each of ybar(x) and yhat(x).
Instance lake_instance(std::size_t n);
Instance bouquet_instance(std::size_t simplices, std::size_t m, std::size_t per_simplex, WeightKind w,
                          std::uint64_t seed);
Instance random_cost_instance(std::size_t m, std::size_t n, int max_cost, std::uint64_t seed,
                              int max_weight = 1000);
Instance constant_cost_instance(std::size_t m, std::size_t n, const Q& value);

}  // namespace otc
