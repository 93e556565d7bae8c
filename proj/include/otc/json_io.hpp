#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "otc/chains.hpp"
#include "otc/instances.hpp"
#include "otc/limbs.hpp"
#include "otc/transport.hpp"

namespace otc {

using nlohmann::json;

json number_to_json(const Q& q);  // "p/q" string
json number_to_json(double d);
Q rational_from_json(const json& j);  // "p/q" strings, decimal strings or JSON numbers (exact binary value)

template <class T>
json plan_to_json(const TransportPlan<T>& p);
TransportPlan<Q> plan_from_json(const json& j);  // needs "m" and "n", or infers them from the entries

template <class T>
json measure_to_json(const std::vector<T>& w);
std::vector<Q> measure_from_json(const json& j);

template <class T>
json cost_to_json(const Dense<T>& c);
Dense<Q> cost_from_json(const json& j);

template <class T>
json duals_to_json(const DualPotentials<T>& d);

json pairs_to_json(const std::vector<Pair>& p);
std::vector<Pair> pairs_from_json(const json& j);

json instance_to_json(const Instance& in);
Instance instance_from_json(const json& j);

json chain_report(const SupportSet& S, const ChainEnumeration& e, const std::vector<Chain>& cycles);
json limb_report(const LimbSystem& sys);
template <class T>
json verdict_report(const UniquenessReport<T>& r);

std::string sha256_hex(const std::string& data);

// Pretty JSON with a trailing newline.
std::string dump(const json& j);
json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace otc
