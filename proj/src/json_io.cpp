#include "otc/json_io.hpp"

#include <openssl/evp.h>

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace otc {

namespace {

// Integers and values exactly representable as doubles stay numeric; anything else is "p/q".
json compact_number(const Q& q) {
  if (q.get_den() == 1 && q.get_num().fits_slong_p()) return q.get_num().get_si();
  const double d = q.get_d();
  if (std::isfinite(d) && Q(d) == q) return d;
  return q.get_str();
}

json vec_to_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v(k));
  return a;
}

Eigen::VectorXd vec_from_json(const json& a) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t k = 0; k < a.size(); ++k) v(static_cast<Eigen::Index>(k)) = a[k].get<double>();
  return v;
}

json simplex_points_to_json(const std::vector<SimplexPoint>& pts) {
  json a = json::array();
  for (const auto& t : pts) a.push_back({{"simplex_id", t.simplex_id}, {"barycentric", vec_to_json(t.barycentric)}});
  return a;
}

std::vector<SimplexPoint> simplex_points_from_json(const json& a) {
  std::vector<SimplexPoint> out;
  for (const auto& e : a) {
    SimplexPoint t;
    t.simplex_id = e.at("simplex_id").get<int>();
    t.barycentric = vec_from_json(e.at("barycentric"));
    validate_simplex_point(t);
    out.push_back(t);
  }
  return out;
}

json level_value(const LevelAssignment& la, std::size_t p) {
  if (la.infinite[p]) return "inf";
  return la.level[p];
}

json histogram(const LevelAssignment& la) {
  std::map<std::string, std::size_t> h;
  for (std::size_t p = 0; p < la.level.size(); ++p) ++h[la.infinite[p] ? "inf" : std::to_string(la.level[p])];
  json o = json::object();
  for (const auto& [k, v] : h) o[k] = v;
  return o;
}

json chain_length_json(const ChainLength& c) {
  if (c.infinite) return "inf";
  return c.value;
}

}  // namespace

json number_to_json(const Q& q) { return to_string(q); }
json number_to_json(double d) { return d; }

Q rational_from_json(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Q(mpz_class(std::to_string(j.get<long long>())));
  if (j.is_number()) {
    const double d = j.get<double>();
    if (!std::isfinite(d)) throw InvalidInstance("non-finite number");
    return Q(d);
  }
  throw InvalidInstance("expected a number or a rational string");
}

template <class T>
json plan_to_json(const TransportPlan<T>& p) {
  json entries = json::array();
  for (const auto& e : p.entries) entries.push_back({e.i, e.j, number_to_json(e.mass)});
  return {{"m", p.m}, {"n", p.n}, {"entries", entries}, {"value", number_to_json(p.value)}};
}

TransportPlan<Q> plan_from_json(const json& j) {
  TransportPlan<Q> p;
  for (const auto& e : j.at("entries")) {
    if (!e.is_array() || e.size() != 3) throw InvalidInstance("plan entries must be [i, j, mass]");
    PlanEntry<Q> pe{e[0].get<std::size_t>(), e[1].get<std::size_t>(), rational_from_json(e[2])};
    if (sgn(pe.mass) <= 0) throw InvalidInstance("plan entries must carry positive mass");
    p.entries.push_back(pe);
    p.m = std::max(p.m, pe.i + 1);
    p.n = std::max(p.n, pe.j + 1);
  }
  if (j.contains("m")) p.m = j["m"].get<std::size_t>();
  if (j.contains("n")) p.n = j["n"].get<std::size_t>();
  std::sort(p.entries.begin(), p.entries.end(),
            [](const auto& a, const auto& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  for (std::size_t k = 1; k < p.entries.size(); ++k)
    if (p.entries[k].i == p.entries[k - 1].i && p.entries[k].j == p.entries[k - 1].j)
      throw InvalidInstance("plan has a repeated entry");
  if (j.contains("value")) p.value = rational_from_json(j["value"]);
  return p;
}

template <class T>
json measure_to_json(const std::vector<T>& w) {
  json a = json::array();
  for (const auto& v : w) a.push_back(number_to_json(v));
  return {{"weights", a}};
}

std::vector<Q> measure_from_json(const json& j) {
  const json& a = j.is_array() ? j : j.at("weights");
  std::vector<Q> w;
  for (const auto& v : a) w.push_back(rational_from_json(v));
  return w;
}

template <class T>
json cost_to_json(const Dense<T>& c) {
  json data = json::array();
  for (std::size_t i = 0; i < c.rows; ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < c.cols; ++j) {
      if constexpr (Arith<T>::exact)
        row.push_back(compact_number(c(i, j)));
      else
        row.push_back(c(i, j));
    }
    data.push_back(row);
  }
  return {{"rows", c.rows}, {"cols", c.cols}, {"data", data}};
}

Dense<Q> cost_from_json(const json& j) {
  const json& data = j.is_array() ? j : j.at("data");
  const std::size_t rows = data.size();
  if (rows == 0) throw InvalidInstance("cost matrix is empty");
  const std::size_t cols = data[0].size();
  Dense<Q> c(rows, cols);
  for (std::size_t i = 0; i < rows; ++i) {
    if (data[i].size() != cols) throw InvalidInstance("cost matrix rows have different lengths");
    for (std::size_t k = 0; k < cols; ++k) c(i, k) = rational_from_json(data[i][k]);
  }
  return c;
}

template <class T>
json duals_to_json(const DualPotentials<T>& d) {
  json psi = json::array(), phi = json::array();
  for (const auto& v : d.psi) psi.push_back(number_to_json(v));
  for (const auto& v : d.phi) phi.push_back(number_to_json(v));
  return {{"psi", psi}, {"phi", phi}};
}

json pairs_to_json(const std::vector<Pair>& p) {
  json a = json::array();
  for (const auto& c : p) a.push_back({c.i, c.j});
  return a;
}

std::vector<Pair> pairs_from_json(const json& j) {
  std::vector<Pair> out;
  if (j.is_object() && j.contains("entries")) {
    for (const auto& e : j["entries"]) out.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
    return out;
  }
  const json& a = j.is_object() ? j.at("pairs") : j;
  for (const auto& e : a) out.push_back({e[0].get<std::size_t>(), e[1].get<std::size_t>()});
  return out;
}

json instance_to_json(const Instance& in) {
  json j;
  j["kind"] = in.kind;
  j["params"] = in.params;
  j["cost"] = cost_to_json(in.cost);
  j["mu"] = measure_to_json(in.mu);
  j["nu"] = measure_to_json(in.nu);
  if (in.M && in.N) {
    j["cost_kind"] = cost_kind_name(CostKind::quadratic_ambient);
    j["sample_M"] = sample_to_json(*in.M);
    j["sample_N"] = sample_to_json(*in.N);
  } else if (!in.BM.empty()) {
    j["cost_kind"] = cost_kind_name(CostKind::bouquet_composed);
    j["simplex_M"] = simplex_points_to_json(in.BM);
    j["simplex_N"] = simplex_points_to_json(in.BN);
  } else {
    j["cost_kind"] = cost_kind_name(CostKind::matrix_tabulated);
  }
  if (in.disc) j["disc"] = {{"center", {in.disc->center(0), in.disc->center(1)}}, {"radius", in.disc->radius}};
  if (in.reference_plan) j["reference_plan"] = plan_to_json(*in.reference_plan);
  return j;
}

Instance instance_from_json(const json& j) {
  Instance in;
  in.kind = j.value("kind", std::string("custom"));
  if (j.contains("params")) in.params = j["params"];
  if (j.contains("sample_M")) {
    in.M = std::make_shared<EmbeddedSample>(sample_from_json(j["sample_M"]));
    in.N = std::make_shared<EmbeddedSample>(sample_from_json(j.at("sample_N")));
  }
  if (j.contains("simplex_M")) {
    in.BM = simplex_points_from_json(j["simplex_M"]);
    in.BN = simplex_points_from_json(j.at("simplex_N"));
  }
  if (j.contains("cost"))
    in.cost = cost_from_json(j["cost"]);
  else if (in.M || !in.BM.empty())
    in.cost = to_exact(in.field().matrix());
  else
    throw InvalidInstance("instance has no cost");
  in.mu = measure_from_json(j.at("mu"));
  in.nu = measure_from_json(j.at("nu"));
  if (in.cost.rows != in.mu.size() || in.cost.cols != in.nu.size())
    throw InvalidInstance("cost matrix dimensions do not match the measures");
  if (j.contains("disc")) {
    Disc d;
    d.center = Eigen::Vector2d(j["disc"]["center"][0].get<double>(), j["disc"]["center"][1].get<double>());
    d.radius = j["disc"]["radius"].get<double>();
    in.disc = d;
  }
  if (j.contains("reference_plan")) in.reference_plan = plan_from_json(j["reference_plan"]);
  return in;
}

json chain_report(const SupportSet& S, const ChainEnumeration& e, const std::vector<Chain>& cycles) {
  json levels = json::object(), ends = json::object();
  for (std::size_t p = 0; p < S.size(); ++p) {
    levels[std::to_string(p)] = level_value(e.levels, p);
    std::string kind = e.levels.infinite[p] ? "inf" : (e.levels.level[p] < 2 ? "trivial" : "");
    if (kind.empty()) kind = e.levels.h_flag[p] && e.levels.v_flag[p] ? "hv" : (e.levels.h_flag[p] ? "h" : "v");
    ends[std::to_string(p)] = kind;
  }
  json cyc = json::array();
  for (const auto& c : cycles) cyc.push_back(c.links);
  return {{"pairs", pairs_to_json(S.pairs)},
          {"levels", levels},
          {"ends", ends},
          {"level_histogram", histogram(e.levels)},
          {"max_len", chain_length_json(max_chain_length(e.levels))},
          {"num_chains", e.chains.size()},
          {"cycles", cyc}};
}

json limb_report(const LimbSystem& sys) {
  json limbs = json::array();
  for (std::size_t k = 1; k <= sys.N; ++k) {
    std::vector<Pair> pts;
    for (std::size_t p : sys.G[k]) pts.push_back(sys.pairs[p]);
    limbs.push_back({{"k", k}, {"kind", sys.is_graph_limb(k) ? "graph" : "antigraph"}, {"pairs", pairs_to_json(pts)}});
  }
  json I = json::object();
  for (std::size_t k = 0; k < sys.I.size(); ++k) I[std::to_string(k)] = sys.I[k];
  return {{"limbs", limbs}, {"I", I}, {"N", sys.N}};
}

template <class T>
json verdict_report(const UniquenessReport<T>& r) {
  json j;
  j["verdict"] = verdict_name(r.verdict);
  if (!r.note.empty()) j["note"] = r.note;
  j["plan"] = plan_to_json(r.solution.plan);
  j["potentials"] = duals_to_json(r.solution.duals);
  j["is_graph"] = is_graph(r.solution.plan);
  j["is_antigraph"] = is_antigraph(r.solution.plan);
  j["optimal_support_union"] = pairs_to_json(r.support);
  j["max_chain_length"] = chain_length_json(r.max_len);
  j["level_histogram"] = histogram(r.levels);
  std::vector<Pair> einf;
  for (std::size_t p : r.classes.E_inf) einf.push_back(r.support[p]);
  j["e_inf"] = pairs_to_json(einf);
  j["e_inf_max_mass"] = number_to_json(r.e_inf_max_mass);
  if (r.limbs) j["limb_system"] = limb_report(*r.limbs);
  if (r.descent) {
    j["descent"] = {{"feasible", r.descent->feasible},
                    {"failed_limb", r.descent->failed_limb},
                    {"total", plan_to_json(r.descent->total)}};
    if (!r.descent->message.empty()) j["descent"]["message"] = r.descent->message;
  }
  j["reconstruction_matches"] = r.reconstruction_matches;
  if (r.face) {
    j["face"] = {{"diameter", number_to_json(r.face->diameter)},
                 {"diameter_approx", Arith<T>::to_double(r.face->diameter)},
                 {"singleton_by_forest", r.face->singleton_by_forest},
                 {"probes", r.face->max_l.size()}};
  }
  return j;
}

std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error("sha256 digest failed");
  std::string hex;
  char buf[3];
  for (unsigned int k = 0; k < len; ++k) {
    std::snprintf(buf, sizeof buf, "%02x", md[k]);
    hex += buf;
  }
  return hex;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInstance("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InvalidInstance("malformed JSON in " + path + ": " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << text;
}

template json plan_to_json<Q>(const TransportPlan<Q>&);
template json plan_to_json<double>(const TransportPlan<double>&);
template json measure_to_json<Q>(const std::vector<Q>&);
template json measure_to_json<double>(const std::vector<double>&);
template json cost_to_json<Q>(const Dense<Q>&);
template json cost_to_json<double>(const Dense<double>&);
template json duals_to_json<Q>(const DualPotentials<Q>&);
template json duals_to_json<double>(const DualPotentials<double>&);
template json verdict_report<Q>(const UniquenessReport<Q>&);
template json verdict_report<double>(const UniquenessReport<double>&);

}  // namespace otc
