#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <numeric>
#include <thread>

#include "otc/json_io.hpp"

using namespace otc;

namespace {

constexpr int kExitUnique = 0;
constexpr int kExitError = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInconclusive = 3;

struct Config {
  std::string subcommand;
  bool exact = true;
  bool force_double = false;
  double fd_step = kDefaultFdStep;
  double sv_tol = kDefaultSvTol;
  double tol_grad = kDefaultTolGrad;
  std::uint64_t seed = 0;
  std::string out;
  std::string weights = "uniform";
  int jobs = 1;

  // generate
  std::string kind;
  std::size_t n = 360, L = 1, m = 1, n_per = 120, simplices = 2, per_simplex = 20, rows = 2, cols = 2;
  int max_cost = 9;
  std::string value = "1";
  double phase = 0.0;
  std::string parts_dir;

  // inputs
  std::string instance, cost, mu, nu, support;
  std::string mode = "exact";
  std::size_t lmax = 64;
  bool monotone_check = false;
  bool no_face = false;
  bool twist = false;

  // perturb
  double eps = 1e-3;
  std::size_t trials = 100;

  json to_json() const {
    json j = {{"subcommand", subcommand}, {"arithmetic", exact ? "exact" : "double"}, {"fd_step", fd_step},
              {"sv_tol", sv_tol},         {"tol_grad", tol_grad},                     {"seed", seed},
              {"weights", weights},       {"jobs", jobs}};
    if (subcommand == "generate") {
      j["kind"] = kind;
      j["phase"] = phase;
      if (kind == "circle" || kind == "lake") j["n"] = n;
      if (kind == "nested") j.update({{"L", L}, {"m", m}, {"n_per", n_per}});
      if (kind == "bouquet") j.update({{"simplices", simplices}, {"m", m}, {"per_simplex", per_simplex}});
      if (kind == "random-cost") j.update({{"rows", rows}, {"cols", cols}, {"max_cost", max_cost}});
      if (kind == "constant") j.update({{"rows", rows}, {"cols", cols}, {"value", value}});
    }
    for (const auto& [k, v] : {std::pair{"instance", instance}, {"cost", cost}, {"mu", mu}, {"nu", nu},
                               {"support", support}})
      if (!v.empty()) j[k] = v;
    if (subcommand == "chains" || subcommand == "limbs" || subcommand == "analyze") j["mode"] = mode;
    if (subcommand == "chains") j["lmax"] = lmax;
    if (subcommand == "perturb") j.update({{"eps", eps}, {"trials", trials}});
    return j;
  }
};

std::string file_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInstance("cannot open " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

json input_hashes(const Config& c) {
  json h = json::object();
  for (const std::string* p : {&c.instance, &c.cost, &c.mu, &c.nu, &c.support})
    if (!p->empty()) h[*p] = sha256_hex(file_bytes(*p));
  return h;
}

void emit(const Config& c, json body) {
  body["config"] = c.to_json();
  if (!body.contains("input_sha256")) body["input_sha256"] = input_hashes(c);
  const std::string text = dump(body);
  if (c.out.empty())
    std::cout << text;
  else
    write_text_file(c.out, text);
}

LinkMode link_mode(const std::string& s) {
  if (s == "exact") return LinkMode::exact;
  if (s == "gradient") return LinkMode::gradient;
  throw InvalidParameter("mode must be exact or gradient");
}

Instance load_problem(const Config& c) {
  if (!c.instance.empty()) return instance_from_json(read_json_file(c.instance));
  if (c.cost.empty() || c.mu.empty() || c.nu.empty())
    throw InvalidParameter("give --instance, or all of --cost, --mu and --nu");
  Instance in;
  in.kind = "custom";
  in.cost = cost_from_json(read_json_file(c.cost));
  in.mu = measure_from_json(read_json_file(c.mu));
  in.nu = measure_from_json(read_json_file(c.nu));
  if (in.cost.rows != in.mu.size() || in.cost.cols != in.nu.size())
    throw InvalidInstance("cost matrix dimensions do not match the measures");
  return in;
}

int cmd_generate(const Config& c) {
  const WeightKind w = parse_weight_kind(c.weights);
  Instance in;
  if (c.kind == "circle") {
    in = circle_instance(c.n, w, c.seed, c.phase);
  } else if (c.kind == "nested") {
    in = nested_instance(c.L, c.m, c.n_per, w, c.seed);
  } else if (c.kind == "lake") {
    in = lake_instance(c.n);
  } else if (c.kind == "bouquet") {
    in = bouquet_instance(c.simplices, c.m, c.per_simplex, w, c.seed);
  } else if (c.kind == "random-cost") {
    in = random_cost_instance(c.rows, c.cols, c.max_cost, c.seed);
  } else if (c.kind == "constant") {
    in = constant_cost_instance(c.rows, c.cols, parse_rational(c.value));
  } else {
    throw InvalidParameter("unknown instance kind: " + c.kind);
  }
  json j = instance_to_json(in);
  j["config"] = c.to_json();
  if (!c.parts_dir.empty()) {
    std::filesystem::create_directories(c.parts_dir);
    const std::filesystem::path d(c.parts_dir);
    write_text_file((d / "cost.json").string(), dump(j["cost"]));
    write_text_file((d / "mu.json").string(), dump(j["mu"]));
    write_text_file((d / "nu.json").string(), dump(j["nu"]));
    write_text_file((d / "instance.json").string(), dump(j));
  }
  const std::string text = dump(j);
  if (c.out.empty())
    std::cout << text;
  else
    write_text_file(c.out, text);
  return 0;
}

template <class T>
int solve_as(const Config& c, const Dense<T>& cost, const std::vector<T>& mu, const std::vector<T>& nu) {
  Solution<T> s = solve_kantorovich(cost, mu, nu);
  json body = {{"plan", plan_to_json(s.plan)},       {"entries", plan_to_json(s.plan)["entries"]},
               {"value", number_to_json(s.plan.value)}, {"potentials", duals_to_json(s.duals)},
               {"pivots", s.pivots},                  {"is_graph", is_graph(s.plan)},
               {"is_antigraph", is_antigraph(s.plan)}, {"m", s.plan.m},
               {"n", s.plan.n}};
  emit(c, body);
  return 0;
}

int cmd_solve(const Config& c) {
  Instance in = load_problem(c);
  if (c.exact) return solve_as<Q>(c, in.cost, in.mu, in.nu);
  return solve_as<double>(c, to_double(in.cost), to_double(in.mu), to_double(in.nu));
}

SupportSet support_for(const Config& c, const std::vector<Pair>& pairs, const std::optional<Instance>& in) {
  if (link_mode(c.mode) == LinkMode::gradient) {
    if (!in) throw InvalidParameter("gradient mode needs --instance for the cost gradients");
    return SupportSet::with_gradients(pairs, in->field(), c.tol_grad);
  }
  return SupportSet::from_pairs(pairs);
}

int cmd_chains(const Config& c) {
  if (c.support.empty()) throw InvalidParameter("chains needs --support");
  std::optional<Instance> in;
  if (!c.instance.empty()) in = instance_from_json(read_json_file(c.instance));
  const SupportSet S = support_for(c, pairs_from_json(read_json_file(c.support)), in);
  const MatchGraph g = build_match_graph(S, link_mode(c.mode));
  const ChainEnumeration e = enumerate_chains(S, g, c.lmax);
  const std::vector<Chain> cycles = detect_cyclic(S, g);
  json body = chain_report(S, e, cycles);
  body["num_links"] = g.num_links();
  if (c.monotone_check) {
    if (!in) throw InvalidParameter("--monotone-check needs --instance");
    auto v = check_cyclical_monotone(S.pairs, in->cost, 6);
    body["monotone"] = v.monotone;
    if (!v.monotone) body["violation"] = {{"cycle", v.cycle}, {"sum", number_to_json(v.sum)}};
  }
  emit(c, body);
  return 0;
}

int cmd_limbs(const Config& c) {
  if (c.support.empty() || c.mu.empty() || c.nu.empty()) throw InvalidParameter("limbs needs --support, --mu, --nu");
  std::optional<Instance> in;
  if (!c.instance.empty()) in = instance_from_json(read_json_file(c.instance));
  const SupportSet S = support_for(c, pairs_from_json(read_json_file(c.support)), in);
  const std::vector<Q> mu = measure_from_json(read_json_file(c.mu));
  const std::vector<Q> nu = measure_from_json(read_json_file(c.nu));
  const LevelAssignment la = compute_levels(build_match_graph(S, link_mode(c.mode)));
  const LevelClasses cls = decompose_levels(la);
  json body;
  int rc = kExitUnique;
  try {
    const LimbSystem sys = build_limb_system(S.pairs, cls, mu.size(), nu.size());
    body = limb_report(sys);
    if (c.exact) {
      auto d = descent_reconstruct(sys, mu, nu);
      body["descent"] = {{"feasible", d.feasible}, {"failed_limb", d.failed_limb}, {"total", plan_to_json(d.total)}};
      if (!d.feasible) rc = kExitInconclusive;
    } else {
      auto d = descent_reconstruct(sys, to_double(mu), to_double(nu));
      body["descent"] = {{"feasible", d.feasible}, {"failed_limb", d.failed_limb}, {"total", plan_to_json(d.total)}};
      if (!d.feasible) rc = kExitInconclusive;
    }
  } catch (const StructureError& e) {
    body = {{"error", e.what()}, {"property", e.lemma()}, {"witness", pairs_to_json(e.witness())}};
    emit(c, body);
    return kExitError;
  }
  std::vector<Pair> einf;
  for (std::size_t p : cls.E_inf) einf.push_back(S.pairs[p]);
  body["e_inf"] = pairs_to_json(einf);
  if (!einf.empty()) rc = kExitInconclusive;
  body["verdict"] = rc == kExitUnique ? "unique-by-limbs" : "inconclusive";
  emit(c, body);
  return rc;
}

template <class T>
int analyze_as(const Config& c, const Instance& in, const Dense<T>& cost, const std::vector<T>& mu,
               const std::vector<T>& nu) {
  VerdictOptions opts;
  opts.mode = link_mode(c.mode);
  opts.tol_grad = c.tol_grad;
  opts.compute_face = !c.no_face;
  std::optional<CostField> field;
  if (opts.mode == LinkMode::gradient) {
    field = in.field();
    opts.field = &*field;
  }
  UniquenessReport<T> r = uniqueness_verdict(cost, mu, nu, opts);
  json body = verdict_report(r);
  body["instance_kind"] = in.kind;
  if (in.reference_plan) {
    TransportPlan<T> ref;
    if constexpr (Arith<T>::exact) {
      ref = *in.reference_plan;
    } else {
      ref.m = in.reference_plan->m;
      ref.n = in.reference_plan->n;
      for (const auto& e : in.reference_plan->entries) ref.entries.push_back({e.i, e.j, e.mass.get_d()});
    }
    T v(0);
    for (const auto& e : ref.entries) v += cost(e.i, e.j) * e.mass;
    body["reference_plan"] = {{"value", number_to_json(v)},
                              {"value_equals_optimum", Arith<T>::eq(v, r.solution.plan.value)},
                              {"equals_solver_plan", plans_match(ref, r.solution.plan)},
                              {"is_graph", is_graph(ref)}};
  }
  if (c.twist) {
    CostField f = in.field();
    if (f.kind() == CostKind::matrix_tabulated) throw InvalidParameter("--twist needs an analytic cost");
    std::vector<std::size_t> sm(f.rows()), sn(f.cols());
    std::iota(sm.begin(), sm.end(), 0);
    std::iota(sn.begin(), sn.end(), 0);
    TwistReport t = twist_scan(f, sm, sn, c.sv_tol, c.fd_step);
    body["twist"] = {{"flagged_fraction", t.fraction}, {"min_singular", t.min_singular}, {"flagged", t.flagged.size()}};
  }
  emit(c, body);
  return r.verdict == Verdict::inconclusive ? kExitInconclusive : kExitUnique;
}

int cmd_analyze(const Config& c) {
  Instance in = load_problem(c);
  if (c.exact) return analyze_as<Q>(c, in, in.cost, in.mu, in.nu);
  return analyze_as<double>(c, in, to_double(in.cost), to_double(in.mu), to_double(in.nu));
}

int cmd_perturb(const Config& c) {
  if (!(c.eps >= 0.0)) throw InvalidParameter("--eps must be >= 0");
  if (c.trials < 1) throw InvalidParameter("--trials must be >= 1");
  if (c.jobs < 1) throw InvalidParameter("--jobs must be >= 1");
  Instance in = load_problem(c);
  const Dense<double> base = in.cost_double();
  const Dense<Q> base_exact = to_exact(base);
  const Q before = optimal_face_diameter<Q>(base_exact, in.mu, in.nu, nullptr, Q(0)).diameter;

  std::vector<Q> after(c.trials);
  std::vector<std::string> errors(c.trials);
  auto work = [&](std::size_t t) {
    try {
      const Dense<Q> pc = to_exact(perturb_matrix(base, c.eps, c.seed + t));
      after[t] = optimal_face_diameter<Q>(pc, in.mu, in.nu, nullptr, Q(0)).diameter;
    } catch (const std::exception& e) {
      errors[t] = e.what();
    }
  };
  std::vector<std::thread> pool;
  const std::size_t J = std::min<std::size_t>(static_cast<std::size_t>(c.jobs), c.trials);
  for (std::size_t w = 0; w < J; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t t = w; t < c.trials; t += J) work(t);
    });
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (!e.empty()) throw Error(e);

  json trials = json::array();
  std::size_t unique = 0;
  for (std::size_t t = 0; t < c.trials; ++t) {
    const bool u = after[t].get_d() <= 1e-9;
    unique += u ? 1 : 0;
    trials.push_back({{"seed", c.seed + t}, {"diameter", after[t].get_d()}, {"unique", u}});
  }
  json body = {{"diameter_before", before.get_d()},
               {"unique_before", before.get_d() <= 1e-9},
               {"trials", trials},
               {"unique_fraction", static_cast<double>(unique) / static_cast<double>(c.trials)}};
  emit(c, body);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  Config c;
  CLI::App app{"Chain and limb analysis of discrete optimal transport plans"};
  app.require_subcommand(1);
  app.fallthrough();
  bool want_double = false, want_exact = false;
  app.add_flag("--exact", want_exact, "Rational arithmetic (default)");
  app.add_flag("--double", want_double, "Double precision with tolerances");
  app.add_option("--fd-step", c.fd_step, "Finite-difference step")->check(CLI::PositiveNumber);
  app.add_option("--sv-tol", c.sv_tol, "Singular-value threshold for the twist scan")->check(CLI::PositiveNumber);
  app.add_option("--tol-grad", c.tol_grad, "Gradient matching tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed, "Random seed");
  app.add_option("--out", c.out, "Output file (default stdout)");
  app.add_option("--weights", c.weights, "Measure weights")->check(CLI::IsMember({"uniform", "dirichlet"}));
  app.add_option("--jobs", c.jobs, "Parallel trials")->check(CLI::PositiveNumber);

  auto* gen = app.add_subcommand("generate", "Write an instance file");
  gen->add_option("kind", c.kind, "Instance family")
      ->required()
      ->check(CLI::IsMember({"circle", "nested", "lake", "bouquet", "random-cost", "constant"}));
  gen->add_option("--n", c.n, "Point count");
  gen->add_option("--L", c.L, "Number of nested bodies");
  gen->add_option("--m", c.m, "Intrinsic dimension");
  gen->add_option("--n-per", c.n_per, "Points per nested boundary");
  gen->add_option("--simplices", c.simplices, "Simplices in the bouquet");
  gen->add_option("--per-simplex", c.per_simplex, "Points per simplex");
  gen->add_option("--rows", c.rows, "Rows of a tabulated cost");
  gen->add_option("--cols", c.cols, "Columns of a tabulated cost");
  gen->add_option("--max-cost", c.max_cost, "Largest random integer cost");
  gen->add_option("--value", c.value, "Constant cost value");
  gen->add_option("--phase", c.phase, "Rotation of the target circle");
  gen->add_option("--parts-dir", c.parts_dir, "Also write cost.json, mu.json, nu.json here");

  auto add_problem = [&](CLI::App* s) {
    s->add_option("--instance", c.instance, "Instance file");
    s->add_option("--cost", c.cost, "Cost matrix file");
    s->add_option("--mu", c.mu, "Source measure file");
    s->add_option("--nu", c.nu, "Target measure file");
  };
  auto* solve = app.add_subcommand("solve", "Solve the transport problem");
  add_problem(solve);

  auto* chains = app.add_subcommand("chains", "Levels, chains and cycles of a support");
  chains->add_option("--support", c.support, "Plan or pair list file")->required();
  chains->add_option("--instance", c.instance, "Instance file (gradient mode, monotonicity check)");
  chains->add_option("--mode", c.mode, "Link rule")->check(CLI::IsMember({"exact", "gradient"}));
  chains->add_option("--tol", c.tol_grad, "Gradient matching tolerance")->check(CLI::PositiveNumber);
  chains->add_option("--lmax", c.lmax, "Longest chain to enumerate")->check(CLI::PositiveNumber);
  chains->add_flag("--monotone-check", c.monotone_check, "Scan cycles of length <= 6 for monotonicity");

  auto* limbs = app.add_subcommand("limbs", "Numbered limb system and descent");
  limbs->add_option("--support", c.support, "Plan or pair list file")->required();
  limbs->add_option("--mu", c.mu, "Source measure file")->required();
  limbs->add_option("--nu", c.nu, "Target measure file")->required();
  limbs->add_option("--instance", c.instance, "Instance file (gradient mode)");
  limbs->add_option("--mode", c.mode, "Link rule")->check(CLI::IsMember({"exact", "gradient"}));

  auto* analyze = app.add_subcommand("analyze", "Solve, build chains and limbs, and issue a verdict");
  add_problem(analyze);
  analyze->add_option("--mode", c.mode, "Link rule")->check(CLI::IsMember({"exact", "gradient"}));
  analyze->add_flag("--no-face", c.no_face, "Skip the optimal-face diameter");
  analyze->add_flag("--twist", c.twist, "Include the mixed-Hessian scan");

  auto* perturb = app.add_subcommand("perturb", "Face diameter before and after random cost perturbations");
  add_problem(perturb);
  perturb->add_option("--eps", c.eps, "Perturbation magnitude");
  perturb->add_option("--trials", c.trials, "Number of seeds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }
  if (want_double && want_exact) {
    std::cerr << "error: --exact and --double are exclusive\n";
    return kExitUsage;
  }
  c.exact = !want_double;
  c.subcommand = app.get_subcommands().front()->get_name();

  try {
    if (c.subcommand == "generate") return cmd_generate(c);
    if (c.subcommand == "solve") return cmd_solve(c);
    if (c.subcommand == "chains") return cmd_chains(c);
    if (c.subcommand == "limbs") return cmd_limbs(c);
    if (c.subcommand == "analyze") return cmd_analyze(c);
    if (c.subcommand == "perturb") return cmd_perturb(c);
  } catch (const InvalidParameter& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const StructureError& e) {
    std::cerr << "error: " << e.what() << " [" << e.lemma() << "]\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitUsage;
}
