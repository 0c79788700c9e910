#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "fairrm/experiment.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::string out_dir = "out";
    std::string instance;
    std::string policy;
    std::optional<std::uint64_t> seed;
    std::optional<int> replications;
    std::optional<double> alpha;
    std::optional<double> delta;
    std::optional<double> beta;
    std::optional<int> threads;
};

void attach_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "JSON config file");
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--instance", flags.instance, "instance file (overrides config)");
    cmd->add_option("--policy", flags.policy, "policy id (overrides config)");
    cmd->add_option("--seed", flags.seed, "base RNG seed");
    cmd->add_option("--replications", flags.replications, "replication count");
    cmd->add_option("--alpha", flags.alpha, "fairness alpha");
    cmd->add_option("--delta", flags.delta, "fairness delta");
    cmd->add_option("--beta", flags.beta, "segment exponent for gp_rdlp");
    cmd->add_option("--threads", flags.threads, "worker threads (0 = auto/FAIRRM_THREADS)");
}

fairrm::Json merge_config(const CommonFlags& flags) {
    fairrm::Json cfg = fairrm::Json::object();
    if (!flags.config_path.empty())
        cfg = fairrm::Json::parse(fairrm::read_file(flags.config_path));
    if (!flags.instance.empty()) cfg["instance"] = flags.instance;
    if (!flags.policy.empty()) cfg["policy"] = flags.policy;
    if (flags.seed) cfg["seed"] = *flags.seed;
    if (flags.replications) cfg["replications"] = *flags.replications;
    if (flags.alpha) cfg["alpha"] = *flags.alpha;
    if (flags.delta) cfg["delta"] = *flags.delta;
    if (flags.beta) cfg["beta"] = *flags.beta;
    if (flags.threads) cfg["threads"] = *flags.threads;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Network revenue management simulation and fairness measurement"};
    app.require_subcommand(1);

    CommonFlags run_flags, audit_flags, regret_flags, cr_flags;
    std::string oracle_instance, oracle_arrivals, validate_instance;

    CLI::App* run = app.add_subcommand("run", "simulate replications and write traces");
    attach_common(run, run_flags);

    CLI::App* audit = app.add_subcommand("audit", "fairness audit of a policy");
    attach_common(audit, audit_flags);

    CLI::App* regret = app.add_subcommand("regret-sweep", "regret across horizons + slope");
    attach_common(regret, regret_flags);

    CLI::App* cr = app.add_subcommand("cr-sweep", "competitive ratio across capacity scales");
    attach_common(cr, cr_flags);

    CLI::App* oracle = app.add_subcommand("oracle", "hindsight optimum of an arrival file");
    oracle->add_option("--instance", oracle_instance, "instance file")->required();
    oracle->add_option("--arrivals", oracle_arrivals, "arrivals CSV (round,type)")->required();

    CLI::App* validate = app.add_subcommand("validate", "check instance invariants");
    validate->add_option("--instance", validate_instance, "instance file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return fairrm::cmd_run(merge_config(run_flags), run_flags.out_dir, std::cout);
        if (audit->parsed())
            return fairrm::cmd_audit(merge_config(audit_flags), audit_flags.out_dir, std::cout);
        if (regret->parsed())
            return fairrm::cmd_regret_sweep(merge_config(regret_flags), regret_flags.out_dir,
                                            std::cout);
        if (cr->parsed())
            return fairrm::cmd_cr_sweep(merge_config(cr_flags), cr_flags.out_dir, std::cout);
        if (oracle->parsed()) return fairrm::cmd_oracle(oracle_instance, oracle_arrivals, std::cout);
        if (validate->parsed()) return fairrm::cmd_validate(validate_instance, std::cout);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
