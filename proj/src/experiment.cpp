#include "fairrm/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <ostream>
#include <sstream>

#include "fairrm/grace.hpp"
#include "fairrm/parallel.hpp"
#include "fairrm/policies_stochastic.hpp"

namespace fairrm {

namespace fs = std::filesystem;

namespace {

// Collects outputs, then writes everything plus a manifest in one pass.
class OutputSet {
public:
    explicit OutputSet(std::string dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) {
        files_[name] = std::move(content);
    }

    void write(const Json& manifest_extra) {
        fs::create_directories(dir_);
        Json files = Json::array();
        for (const auto& [name, content] : files_) {
            write_file(dir_ + "/" + name, content);
            files.push_back({{"name", name}, {"fnv1a64", fnv1a64_hex(content)}});
        }
        Json manifest = manifest_extra;
        manifest["version"] = kVersionString;
        manifest["files"] = std::move(files);
        const std::string body = manifest.dump(2) + "\n";
        write_file(dir_ + "/manifest.json", body);
    }

private:
    std::string dir_;
    std::map<std::string, std::string> files_;  // ordered for determinism
};

std::string rep_name(const char* stem, int rep) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%04d.csv", stem, rep);
    return std::string(buf);
}

std::vector<int> booking_limits_from_config(const Json& cfg, const Instance& inst) {
    if (cfg.contains("b")) return cfg.at("b").get<std::vector<int>>();
    return default_booking_limits(inst);
}

// Nested tail quotas only behave like the textbook protection levels when
// they do not grow toward the low-revenue types; warn, do not reject.
void warn_on_increasing_nesting_quotas(const Json& cfg, const Instance& inst, std::ostream& log) {
    const std::string id = cfg.value("policy", std::string());
    if (id != "nesting" && id != "gp_nesting") return;
    const std::vector<int> b = booking_limits_from_config(cfg, inst);
    for (std::size_t i = 0; i + 1 < b.size(); ++i)
        if (b[i] < b[i + 1]) {
            log << "warning: nesting quotas increase toward lower-revenue types; "
                   "lower types may crowd out higher ones\n";
            return;
        }
}

OgdParams ogd_from_config(const Json& cfg, const Instance& inst) {
    OgdParams params = OgdParams::defaults(inst);
    if (cfg.contains("ogd")) {
        const Json& o = cfg.at("ogd");
        if (o.contains("D")) params.D = o.at("D").get<double>();
        if (o.contains("G")) params.G = o.at("G").get<double>();
        if (o.contains("theta_bar")) params.theta_bar = o.at("theta_bar").get<double>();
    }
    return params;
}

std::optional<int> t_star_from_config(const Json& cfg, const Instance& inst, double beta,
                                      int segment_len) {
    if (cfg.contains("t_star")) {
        const Json& v = cfg.at("t_star");
        if (v.is_string()) {
            const std::string s = v.get<std::string>();
            if (s == "none") return std::nullopt;
            if (s == "auto") return aligned_resolve_point(inst.T, segment_len);
            throw std::invalid_argument("t_star must be a number, \"auto\" or \"none\"");
        }
        return v.get<int>();
    }
    // One resolve by default only in the beta = 1/3 configuration.
    if (std::abs(beta - 1.0 / 3.0) < 1e-6) return aligned_resolve_point(inst.T, segment_len);
    return std::nullopt;
}

double slope_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int c = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0)) continue;
        const double lx = std::log(x[i]);
        const double ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++c;
    }
    if (c < 2) return std::numeric_limits<double>::quiet_NaN();
    return (c * sxy - sx * sy) / (c * sxx - sx * sx);
}

}  // namespace

double resolve_delta(const Json& cfg, int T) {
    if (!cfg.contains("delta")) return 1.0 / static_cast<double>(T);
    const Json& v = cfg.at("delta");
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        if (s == "1/T") return 1.0 / static_cast<double>(T);
        throw std::invalid_argument("delta must be a number or \"1/T\"");
    }
    return v.get<double>();
}

bool is_pricing_policy(const std::string& id) {
    return id == "static_pricing" || id == "gp_pricing";
}

std::unique_ptr<Policy> make_policy_from_config(const Json& cfg, const Instance& inst,
                                                RandomSource rng) {
    const std::string id = cfg.at("policy").get<std::string>();
    const double alpha = cfg.value("alpha", 0.1);

    if (id == "fcfs") return make_fcfs(inst);
    if (id == "dlp_pa") {
        if (cfg.contains("x_star")) return make_dlp_pa(inst, cfg.at("x_star").get<Vec>(), rng);
        return make_dlp_pa(inst, rng);
    }
    if (id == "rdlp_pa") {
        const int t_star = cfg.contains("t_star") && cfg.at("t_star").is_number()
                               ? cfg.at("t_star").get<int>()
                               : inst.T / 2;
        return make_rdlp_pa(inst, t_star, rng);
    }
    if (id == "sbpc") {
        if (cfg.contains("theta_star")) return make_sbpc(inst, cfg.at("theta_star").get<Vec>());
        return make_sbpc(inst);
    }
    if (id == "bpc_ogd") return make_bpc_ogd(inst, ogd_from_config(cfg, inst));
    if (id == "bl") return make_bl(inst, booking_limits_from_config(cfg, inst));
    if (id == "nesting") return make_nesting(inst, booking_limits_from_config(cfg, inst));

    const GraceConfig gcfg = GraceConfig::make(alpha, resolve_delta(cfg, inst.T));
    if (id == "gp_fcfs") return make_gp_fcfs(inst, gcfg, rng);
    if (id == "gp_rdlp") {
        const double beta = cfg.value("beta", 0.5);
        const int seg = grace_segment_length(inst.T, beta);
        return make_gp_rdlp(inst, gcfg, beta, t_star_from_config(cfg, inst, beta, seg), rng);
    }
    if (id == "gp_sbpc") {
        if (cfg.contains("theta_star"))
            return make_gp_sbpc(inst, gcfg, cfg.at("theta_star").get<Vec>(), rng);
        return make_gp_sbpc(inst, gcfg, rng);
    }
    if (id == "gp_bpc_ogd") return make_gp_bpc_ogd(inst, gcfg, ogd_from_config(cfg, inst), rng);
    if (id == "gp_bl")
        return make_gp_bl(inst, booking_limits_from_config(cfg, inst), gcfg, rng);
    if (id == "gp_nesting")
        return make_gp_nesting(inst, booking_limits_from_config(cfg, inst), gcfg, rng);

    throw std::invalid_argument("unknown policy id: " + id);
}

std::unique_ptr<PricingPolicy> make_pricing_policy_from_config(const Json& cfg,
                                                               const PricingInstance& pinst,
                                                               RandomSource rng) {
    const std::string id = cfg.at("policy").get<std::string>();
    if (id == "static_pricing") return make_static_pricing(pinst, rng);
    if (id == "gp_pricing") {
        const double alpha = cfg.value("alpha", 0.1);
        const GraceConfig gcfg = GraceConfig::make(alpha, resolve_delta(cfg, pinst.base.T));
        return make_gp_pricing(pinst, gcfg, rng);
    }
    throw std::invalid_argument("unknown pricing policy id: " + id);
}

int cmd_run(const Json& cfg, const std::string& out_dir, std::ostream& log) {
    const std::string policy_id = cfg.at("policy").get<std::string>();
    const int R = cfg.value("replications", 1);
    const std::uint64_t seed = cfg.value("seed", 1ull);
    const int threads = cfg.value("threads", 0);
    const bool record_capacity = cfg.value("record_capacity", false);
    if (R < 1) throw std::invalid_argument("replications must be >= 1");

    OutputSet out(out_dir);
    Json streams = Json::array();
    for (int rep = 0; rep < R; ++rep) streams.push_back(rep);

    if (is_pricing_policy(policy_id)) {
        const PricingInstance pinst = load_pricing_instance_file(cfg.at("instance").get<std::string>());
        std::vector<std::string> traces(static_cast<std::size_t>(R));
        parallel_for(R, threads, [&](int rep) {
            RandomSource base(seed, static_cast<std::uint64_t>(rep));
            RandomSource arr_rng = base.fork("arrivals");
            const ArrivalSequence arrivals =
                sample_arrivals(pinst.base.lambda, pinst.base.T, arr_rng);
            auto policy = make_pricing_policy_from_config(cfg, pinst, base.fork("policy"));
            const PriceTrace trace = run_pricing_policy(*policy, pinst, arrivals);
            traces[static_cast<std::size_t>(rep)] = price_trace_to_csv(trace);
        });
        for (int rep = 0; rep < R; ++rep)
            out.add(rep_name("price_trace", rep), std::move(traces[static_cast<std::size_t>(rep)]));
    } else {
        const Instance inst = load_instance_file(cfg.at("instance").get<std::string>());
        warn_on_increasing_nesting_quotas(cfg, inst, log);
        std::vector<std::string> traces(static_cast<std::size_t>(R));
        std::vector<std::string> gp_logs(static_cast<std::size_t>(R));
        RunOptions opt;
        opt.record_capacity = record_capacity;
        parallel_for(R, threads, [&](int rep) {
            RandomSource base(seed, static_cast<std::uint64_t>(rep));
            RandomSource arr_rng = base.fork("arrivals");
            const ArrivalSequence arrivals = sample_arrivals(inst.lambda, inst.T, arr_rng);
            auto policy = make_policy_from_config(cfg, inst, base.fork("policy"));
            const RunTrace trace = run_policy(*policy, inst, arrivals, opt);
            traces[static_cast<std::size_t>(rep)] = trace_to_csv(trace);
            if (!policy->grace_events().empty())
                gp_logs[static_cast<std::size_t>(rep)] = grace_events_to_csv(policy->grace_events());
        });
        for (int rep = 0; rep < R; ++rep) {
            out.add(rep_name("trace", rep), std::move(traces[static_cast<std::size_t>(rep)]));
            if (!gp_logs[static_cast<std::size_t>(rep)].empty())
                out.add(rep_name("gp_events", rep), std::move(gp_logs[static_cast<std::size_t>(rep)]));
        }
    }

    out.write({{"command", "run"}, {"seed", seed}, {"config", cfg}, {"streams", streams}});
    log << "run: wrote " << R << " trace file(s) to " << out_dir << "\n";
    return 0;
}

int cmd_audit(const Json& cfg, const std::string& out_dir, std::ostream& log) {
    const std::string policy_id = cfg.at("policy").get<std::string>();
    const int R = cfg.value("replications", 1000);
    const std::uint64_t seed = cfg.value("seed", 1ull);
    const int threads = resolve_threads(cfg.value("threads", 0));
    const double alpha = cfg.value("alpha", 0.1);
    const std::vector<int> offsets = cfg.value("offsets", std::vector<int>{1, 2, 3});

    OutputSet out(out_dir);
    int exit_code;
    Json summary;

    if (is_pricing_policy(policy_id)) {
        const PricingInstance pinst = load_pricing_instance_file(cfg.at("instance").get<std::string>());
        const double delta = resolve_delta(cfg, pinst.base.T);
        PriceFairnessAuditor auditor(pinst.base.n, alpha, delta, offsets);
        constexpr int kChunk = 512;
        for (int start = 0; start < R; start += kChunk) {
            const int batch = std::min(kChunk, R - start);
            std::vector<PriceTrace> traces(static_cast<std::size_t>(batch));
            parallel_for(batch, threads, [&](int k) {
                const int rep = start + k;
                RandomSource base(seed, static_cast<std::uint64_t>(rep));
                RandomSource arr_rng = base.fork("arrivals");
                const ArrivalSequence arrivals =
                    sample_arrivals(pinst.base.lambda, pinst.base.T, arr_rng);
                auto policy = make_pricing_policy_from_config(cfg, pinst, base.fork("policy"));
                traces[static_cast<std::size_t>(k)] = run_pricing_policy(*policy, pinst, arrivals);
            });
            for (const PriceTrace& tr : traces) auditor.add(tr);
        }
        const PriceFairnessReport report = auditor.finalize();
        exit_code = report.low_power ? kAuditLowPower : (report.pass ? kAuditPass : kAuditFail);
        summary = {{"pass", report.pass},
                   {"low_power", report.low_power},
                   {"replications", report.replications},
                   {"depletion_freq", report.depletion_freq},
                   {"max_adjacent", report.max_adjacent}};
        std::ostringstream csv;
        csv << "type,offset,max_freq,mean_freq,worst_u\n";
        for (std::size_t i = 0; i < report.types.size(); ++i)
            for (const auto& cell : report.types[i])
                csv << (i + 1) << ',' << cell.offset << ',' << cell.max_freq << ','
                    << cell.mean_freq << ',' << cell.worst_u << '\n';
        out.add("fairness_report.csv", csv.str());
    } else {
        const Instance inst = load_instance_file(cfg.at("instance").get<std::string>());
        const double delta = resolve_delta(cfg, inst.T);
        FairnessOptions fopt;
        fopt.alpha = alpha;
        fopt.delta = delta;
        fopt.offsets = offsets;
        FairnessAuditor auditor(inst.n, fopt);
        constexpr int kChunk = 512;
        for (int start = 0; start < R; start += kChunk) {
            const int batch = std::min(kChunk, R - start);
            std::vector<RunTrace> traces(static_cast<std::size_t>(batch));
            parallel_for(batch, threads, [&](int k) {
                const int rep = start + k;
                RandomSource base(seed, static_cast<std::uint64_t>(rep));
                RandomSource arr_rng = base.fork("arrivals");
                const ArrivalSequence arrivals = sample_arrivals(inst.lambda, inst.T, arr_rng);
                auto policy = make_policy_from_config(cfg, inst, base.fork("policy"));
                traces[static_cast<std::size_t>(k)] = run_policy(*policy, inst, arrivals);
            });
            for (const RunTrace& tr : traces) auditor.add(tr);
        }
        const FairnessReport report = auditor.finalize();
        exit_code = report.low_power ? kAuditLowPower : (report.pass ? kAuditPass : kAuditFail);
        summary = {{"pass", report.pass},
                   {"low_power", report.low_power},
                   {"replications", report.replications},
                   {"depletion_freq", report.depletion_freq},
                   {"max_adjacent", report.max_adjacent},
                   {"mean_adjacent", report.mean_adjacent}};
        out.add("fairness_report.csv", fairness_report_to_csv(report));
    }

    out.add("fairness_summary.json", summary.dump(2) + "\n");
    out.write({{"command", "audit"}, {"seed", seed}, {"config", cfg}, {"exit_code", exit_code}});
    log << "audit: " << summary.dump() << "\n";
    return exit_code;
}

int cmd_regret_sweep(const Json& cfg, const std::string& out_dir, std::ostream& log) {
    const std::vector<int> T_list = cfg.at("T_list").get<std::vector<int>>();
    if (T_list.size() < 3) throw std::invalid_argument("regret sweep needs at least 3 horizons");
    const int R = cfg.value("replications", 200);
    const std::uint64_t seed = cfg.value("seed", 1ull);
    const int threads = cfg.value("threads", 0);
    const double ratio = cfg.value("horizon_ratio", 4.0);
    const Instance templ = load_instance_file(cfg.at("instance").get<std::string>());

    std::ostringstream csv;
    csv << "T,policy,regret,std_error,mean_hindsight,mean_revenue,replications\n";
    std::vector<double> Ts, regrets;
    for (const int T : T_list) {
        const Instance inst = scale_instance(templ, static_cast<double>(T) / ratio, ratio);
        Json run_cfg = cfg;
        const RegretReport rep = estimate_regret(
            [&](RandomSource rng) { return make_policy_from_config(run_cfg, inst, rng); }, inst, R,
            seed, threads);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%d,%s,%.12g,%.12g,%.12g,%.12g,%d\n", inst.T,
                      cfg.at("policy").get<std::string>().c_str(), rep.regret, rep.std_error,
                      rep.mean_hindsight, rep.mean_revenue, rep.replications);
        csv << buf;
        Ts.push_back(static_cast<double>(inst.T));
        // Regret at solver-noise scale counts as zero for the slope fit.
        const double floor = 1e-9 * std::max(1.0, std::abs(rep.mean_hindsight));
        regrets.push_back(rep.regret > floor ? rep.regret : 0.0);
        log << "T=" << inst.T << " regret=" << rep.regret << " +- " << rep.std_error << "\n";
    }
    const double slope = slope_loglog(Ts, regrets);

    OutputSet out(out_dir);
    out.add("regret_sweep.csv", csv.str());
    Json summary = {{"policy", cfg.at("policy")}, {"T_list", T_list}};
    if (std::isnan(slope))
        summary["slope"] = "not-applicable";
    else
        summary["slope"] = slope;
    out.add("regret_summary.json", summary.dump(2) + "\n");
    out.write({{"command", "regret-sweep"}, {"seed", seed}, {"config", cfg}});
    log << "slope=" << (std::isnan(slope) ? std::string("n/a") : std::to_string(slope)) << "\n";
    return 0;
}

int cmd_cr_sweep(const Json& cfg, const std::string& out_dir, std::ostream& log) {
    const std::vector<double> m_list = cfg.at("m_list").get<std::vector<double>>();
    if (m_list.size() < 3) throw std::invalid_argument("cr sweep needs at least 3 scales");
    const std::uint64_t seed = cfg.value("seed", 1ull);
    const int threads = cfg.value("threads", 0);
    const int reps = cfg.value("replications", 1000);
    const double ratio = cfg.value("horizon_ratio", 4.0);
    const Instance templ = load_instance_file(cfg.at("instance").get<std::string>());

    std::vector<FamilySpec> families;
    if (cfg.contains("families")) {
        for (const Json& f : cfg.at("families"))
            families.push_back({f.at("id").get<std::string>(), f.value("k", 3)});
    } else {
        families = {{"low_first"}, {"high_first"}, {"single_type_flood"}, {"alternating"},
                    {"block_permutations", 3}};
    }

    const std::string base_id = cfg.at("base_policy").get<std::string>();
    const std::string gp_id = cfg.at("gp_policy").get<std::string>();

    std::ostringstream rows;
    rows << "m_scale,family,instance_id,policy,revenue,opt,ratio\n";
    std::ostringstream summary_csv;
    summary_csv << "m_scale,cr_base,cr_gp,gap,gap_m_over_logm\n";

    for (const double m : m_list) {
        auto run_one = [&](const std::string& id, int r) {
            Json pcfg = cfg;
            pcfg["policy"] = id;
            return empirical_cr(
                [&pcfg](const Instance& inst, RandomSource rng) {
                    return make_policy_from_config(pcfg, inst, rng);
                },
                id, templ, families, m, r, seed, ratio, threads);
        };
        const CrReport base = run_one(base_id, 1);
        const CrReport gp = run_one(gp_id, reps);
        for (const CrReport* rep : {&base, &gp})
            for (const CrRow& row : rep->rows) {
                char buf[256];
                std::snprintf(buf, sizeof buf, "%.12g,%s,%d,%s,%.12g,%.12g,%.12g\n", row.m_scale,
                              row.family.c_str(), row.instance_id, row.policy.c_str(), row.revenue,
                              row.opt, row.ratio);
                rows << buf;
            }
        const double gap = base.cr - gp.cr;
        const double scaled = gap * m / std::log(m);
        char buf[160];
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g,%.12g,%.12g\n", m, base.cr, gp.cr, gap,
                      scaled);
        summary_csv << buf;
        log << "m=" << m << " cr_base=" << base.cr << " cr_gp=" << gp.cr
            << " gap*m/logm=" << scaled << "\n";
        if (base.skipped_zero_opt + gp.skipped_zero_opt > 0)
            log << "warning: skipped " << (base.skipped_zero_opt + gp.skipped_zero_opt)
                << " zero-OPT instance(s)\n";
    }

    OutputSet out(out_dir);
    out.add("cr_rows.csv", rows.str());
    out.add("cr_sweep.csv", summary_csv.str());
    out.write({{"command", "cr-sweep"}, {"seed", seed}, {"config", cfg}});
    return 0;
}

int cmd_oracle(const std::string& instance_path, const std::string& arrivals_path,
               std::ostream& out) {
    const Instance inst = load_instance_file(instance_path);
    const ArrivalSequence arrivals = arrivals_from_csv(read_file(arrivals_path), inst.n);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", hindsight_value(inst, arrivals));
    out << buf << "\n";
    return 0;
}

int cmd_validate(const std::string& instance_path, std::ostream& out) {
    Json j;
    try {
        j = Json::parse(read_file(instance_path));
    } catch (const std::exception& e) {
        out << "invalid: " << e.what() << "\n";
        return 1;
    }
    Instance inst;
    try {
        inst = instance_from_json(j, /*validate=*/false);
    } catch (const std::exception& e) {
        out << "invalid: " << e.what() << "\n";
        return 1;
    }
    const ValidationReport rep = validate_instance(inst);
    if (rep.ok) {
        out << "ok\n";
        return 0;
    }
    for (const auto& v : rep.violations) out << "violation: " << v << "\n";
    return 1;
}

}  // namespace fairrm
