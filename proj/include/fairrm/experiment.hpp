#pragma once

#include <iosfwd>
#include <memory>
#include <optional>
#include <string>

#include "fairrm/io.hpp"
#include "fairrm/metrics.hpp"
#include "fairrm/policies_adversarial.hpp"
#include "fairrm/policy.hpp"
#include "fairrm/pricing.hpp"

namespace fairrm {

// Every subcommand consumes one JSON config; command-line flags are merged
// into it by the CLI front end before the call. Outputs are CSV files plus a
// manifest listing each file with a content hash; nothing in the output
// depends on wall-clock time or thread count, so a rerun with the same
// config and seed is byte-identical.

bool is_pricing_policy(const std::string& id);

std::unique_ptr<Policy> make_policy_from_config(const Json& cfg, const Instance& inst,
                                                RandomSource rng);
std::unique_ptr<PricingPolicy> make_pricing_policy_from_config(const Json& cfg,
                                                               const PricingInstance& pinst,
                                                               RandomSource rng);

double resolve_delta(const Json& cfg, int T);

int cmd_run(const Json& cfg, const std::string& out_dir, std::ostream& log);
int cmd_audit(const Json& cfg, const std::string& out_dir, std::ostream& log);
int cmd_regret_sweep(const Json& cfg, const std::string& out_dir, std::ostream& log);
int cmd_cr_sweep(const Json& cfg, const std::string& out_dir, std::ostream& log);
int cmd_oracle(const std::string& instance_path, const std::string& arrivals_path,
               std::ostream& out);
int cmd_validate(const std::string& instance_path, std::ostream& out);

// Exit codes used by cmd_audit.
inline constexpr int kAuditPass = 0;
inline constexpr int kAuditFail = 2;
inline constexpr int kAuditLowPower = 3;

}  // namespace fairrm
