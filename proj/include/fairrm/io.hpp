#pragma once

#include <string>

#include <json.hpp>

#include "fairrm/instance.hpp"
#include "fairrm/pricing.hpp"

namespace fairrm {

using Json = nlohmann::json;

// Instance files carry n, L, A (row-major), r, lambda (length n, with the
// remainder assigned to no-arrival, or length n+1 with index 0 explicit),
// capacity as m or as q + m_scale, and horizon as T or as horizon_ratio.
Instance instance_from_json(const Json& j, bool validate = true);
Json instance_to_json(const Instance& inst);
Instance load_instance_file(const std::string& path);

// Pricing files extend the instance format with p and purchase_prob tables
// ({"prices": [...], "probs": [...]} per type).
PricingInstance pricing_instance_from_json(const Json& j);
Json pricing_instance_to_json(const PricingInstance& pinst);
PricingInstance load_pricing_instance_file(const std::string& path);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& content);

std::string fnv1a64_hex(const std::string& bytes);

inline constexpr const char* kVersionString = "fairrm 0.1.0";

}  // namespace fairrm
