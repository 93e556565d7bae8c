#include "otc/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace otc {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<Q> normalize(const std::vector<long>& a) {
  const long total = std::accumulate(a.begin(), a.end(), 0L);
  std::vector<Q> w(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    w[k] = Q(a[k], total);
    w[k].canonicalize();
  }
  return w;
}

Dense<Q> exact_matrix(const CostField& c) { return to_exact(c.matrix()); }

double angle_of(const Eigen::VectorXd& p) {
  double a = std::atan2(p(1), p(0));
  return a < 0 ? a + kTwoPi : a;
}

}  // namespace

WeightKind parse_weight_kind(const std::string& s) {
  if (s == "uniform") return WeightKind::uniform;
  if (s == "dirichlet") return WeightKind::dirichlet;
  throw InvalidParameter("unknown weight kind: " + s);
}

const char* weight_kind_name(WeightKind w) { return w == WeightKind::uniform ? "uniform" : "dirichlet"; }

std::vector<Q> make_weights(std::size_t n, WeightKind kind, std::mt19937_64& rng) {
  if (n == 0) throw InvalidInstance("weights need at least one atom");
  if (kind == WeightKind::uniform) return std::vector<Q>(n, Q(1, static_cast<unsigned long>(n)));
  std::gamma_distribution<double> gamma(1.0, 1.0);
  std::vector<double> d(n);
  for (auto& v : d) v = gamma(rng);
  const double s = std::accumulate(d.begin(), d.end(), 0.0);
  std::vector<long> a(n);
  for (std::size_t k = 0; k < n; ++k) a[k] = std::max(1L, std::lround(d[k] / s * 1e6));
  return normalize(a);
}

std::vector<Q> random_rational_weights(std::size_t n, int max_int, std::mt19937_64& rng) {
  if (max_int < 1) throw InvalidParameter("weight range must be positive");
  std::uniform_int_distribution<long> u(1, max_int);
  std::vector<long> a(n);
  for (auto& v : a) v = u(rng);
  return normalize(a);
}

CostField Instance::field() const {
  if (M && N) return CostField::quadratic(M, N);
  if (!BM.empty() && !BN.empty()) return CostField::bouquet(BM, BN);
  return CostField::tabulated(to_double(cost));
}

EmbeddedSample rotate_sample(const EmbeddedSample& s, double angle) {
  if (s.dim != 2) throw InvalidParameter("only planar samples can be rotated");
  Eigen::Matrix2d R;
  R << std::cos(angle), -std::sin(angle), std::sin(angle), std::cos(angle);
  EmbeddedSample r = s;
  for (auto& b : r.bodies) b.center = R * b.center;
  for (std::size_t k = 0; k < r.size(); ++k) {
    r.points[k] = R * r.points[k];
    r.normals[k] = R * r.normals[k];
    if (r.has_frames()) r.tangents[k] = R * r.tangents[k];
  }
  return r;
}

Instance circle_instance(std::size_t n, WeightKind w, std::uint64_t seed, double phase) {
  std::mt19937_64 rng(seed);
  Instance in;
  in.kind = "circle";
  in.params = {{"n", n}, {"weights", weight_kind_name(w)}, {"seed", seed}, {"phase", phase}};
  auto M = std::make_shared<EmbeddedSample>(sample_circle(n, 1.0, Eigen::Vector2d::Zero()));
  in.M = M;
  in.N = phase == 0.0 ? in.M : std::make_shared<EmbeddedSample>(rotate_sample(*M, phase));
  in.mu = make_weights(n, w, rng);
  in.nu = make_weights(n, w, rng);
  in.cost = exact_matrix(in.field());
  return in;
}

Instance nested_instance(std::size_t L, std::size_t m, std::size_t n_per, WeightKind w, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Instance in;
  in.kind = "nested";
  in.params = {{"L", L}, {"m", m}, {"n_per", n_per}, {"weights", weight_kind_name(w)}, {"seed", seed}};
  in.M = std::make_shared<EmbeddedSample>(nested_boundaries(L, m, n_per));
  in.N = in.M;
  in.mu = make_weights(in.M->size(), w, rng);
  in.nu = make_weights(in.N->size(), w, rng);
  in.cost = exact_matrix(in.field());
  return in;
}

Instance lake_instance(std::size_t n) {
  const LakeScene scene = lake_scene(n);
  const LakePotentials pot = lake_potentials(scene);
  const Sphere& circle = scene.circle.bodies[0];

  std::vector<Eigen::VectorXd> ybar(n), yhat(n);
  std::vector<Eigen::VectorXd> raw;
  for (std::size_t k = 0; k < n; ++k) {
    ybar[k] = pot.ybar[k];
    yhat[k] = normal_conjugate(circle, scene.circle.points[k], ybar[k]);
    raw.push_back(ybar[k]);
    raw.push_back(yhat[k]);
  }
  std::sort(raw.begin(), raw.end(), [](const auto& a, const auto& b) { return angle_of(a) < angle_of(b); });
  std::vector<Eigen::VectorXd> targets;
  for (const auto& p : raw)
    if (std::none_of(targets.begin(), targets.end(), [&](const auto& q) { return (p - q).norm() <= 1e-9; }))
      targets.push_back(p);
  auto index_of = [&](const Eigen::VectorXd& p) {
    for (std::size_t t = 0; t < targets.size(); ++t)
      if ((p - targets[t]).norm() <= 1e-9) return t;
    throw ContractError("lake target lost during deduplication");
  };

  auto N = std::make_shared<EmbeddedSample>();
  N->dim = 2;
  N->bodies.push_back(circle);
  for (const auto& p : targets) {
    Eigen::VectorXd nrm = p / p.norm();
    N->points.push_back(p);
    N->normals.push_back(nrm);
    N->tangents.push_back(tangent_frame(nrm));
    N->body_index.push_back(0);
  }

  Instance in;
  in.kind = "lake";
  in.params = {{"n", n}};
  in.M = std::make_shared<EmbeddedSample>(scene.circle);
  in.N = N;
  in.disc = scene.disc;
  in.mu.assign(n, Q(1, static_cast<unsigned long>(n)));
  in.nu.assign(targets.size(), Q(0));
  TransportPlan<Q> ref;
  ref.m = n;
  ref.n = targets.size();
  const Q half = Q(1, static_cast<unsigned long>(2 * n));
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t a = index_of(ybar[k]), b = index_of(yhat[k]);
    if (a == b) {
      ref.entries.push_back({k, a, in.mu[k]});
    } else {
      ref.entries.push_back({k, a, half});
      ref.entries.push_back({k, b, half});
    }
  }
  std::sort(ref.entries.begin(), ref.entries.end(),
            [](const auto& x, const auto& y) { return std::tie(x.i, x.j) < std::tie(y.i, y.j); });
  for (const auto& e : ref.entries) in.nu[e.j] += e.mass;
  in.cost = exact_matrix(in.field());
  ref.value = Q(0);
  for (const auto& e : ref.entries) ref.value += in.cost(e.i, e.j) * e.mass;
  in.reference_plan = ref;
  return in;
}

Instance bouquet_instance(std::size_t simplices, std::size_t m, std::size_t per_simplex, WeightKind w,
                          std::uint64_t seed) {
  if (simplices < 1 || m < 1 || per_simplex < 1) throw InvalidParameter("bouquet parameters must be positive");
  std::mt19937_64 rng(seed);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  auto draw = [&](int id) {
    SimplexPoint t;
    t.simplex_id = id;
    t.barycentric.resize(static_cast<Eigen::Index>(m + 1));
    for (Eigen::Index a = 0; a <= static_cast<Eigen::Index>(m); ++a) t.barycentric(a) = gamma(rng);
    t.barycentric /= t.barycentric.sum();
    return t;
  };
  Instance in;
  in.kind = "bouquet";
  in.params = {{"simplices", simplices}, {"m", m}, {"per_simplex", per_simplex},
               {"weights", weight_kind_name(w)}, {"seed", seed}};
  for (std::size_t s = 1; s <= simplices; ++s)
    for (std::size_t k = 0; k < per_simplex; ++k) in.BM.push_back(draw(static_cast<int>(s)));
  for (std::size_t s = 1; s <= simplices; ++s)
    for (std::size_t k = 0; k < per_simplex; ++k) in.BN.push_back(draw(static_cast<int>(s)));
  in.mu = make_weights(in.BM.size(), w, rng);
  in.nu = make_weights(in.BN.size(), w, rng);
  in.cost = exact_matrix(in.field());
  return in;
}

Instance random_cost_instance(std::size_t m, std::size_t n, int max_cost, std::uint64_t seed, int max_weight) {
  if (m < 1 || n < 1 || max_cost < 0) throw InvalidParameter("random cost parameters out of range");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> u(0, max_cost);
  Instance in;
  in.kind = "random-cost";
  in.params = {{"m", m}, {"n", n}, {"max_cost", max_cost}, {"max_weight", max_weight}, {"seed", seed}};
  in.cost = Dense<Q>(m, n);
  for (auto& v : in.cost.a) v = u(rng);
  in.mu = random_rational_weights(m, max_weight, rng);
  in.nu = random_rational_weights(n, max_weight, rng);
  return in;
}

Instance constant_cost_instance(std::size_t m, std::size_t n, const Q& value) {
  Instance in;
  in.kind = "constant";
  in.params = {{"m", m}, {"n", n}, {"value", value.get_str()}};
  in.cost = Dense<Q>(m, n, value);
  in.mu.assign(m, Q(1, static_cast<unsigned long>(m)));
  in.nu.assign(n, Q(1, static_cast<unsigned long>(n)));
  return in;
}

}  // namespace otc
