#pragma once

#include <functional>
#include <memory>
#include <string>

#include "fairrm/linprog.hpp"
#include "fairrm/policy.hpp"

namespace fairrm {

// LP optimum of the hindsight program on the realized counts.
double hindsight_value(const Instance& inst, const ArrivalSequence& arrivals);

struct RegretReport {
    double mean_hindsight = 0.0;
    double mean_revenue = 0.0;
    double regret = 0.0;     // mean over paired per-replication differences
    double std_error = 0.0;  // of the paired differences
    int replications = 0;
};

using SimplePolicyFactory = std::function<std::unique_ptr<Policy>(RandomSource)>;

// Paired estimator: replication r draws one arrival sequence used for both
// the hindsight LP and the policy run.
RegretReport estimate_regret(const SimplePolicyFactory& factory, const Instance& inst,
                             int replications, std::uint64_t seed, int threads = 1);

struct FairnessOptions {
    double alpha = 0.1;
    double delta = 0.01;
    std::vector<int> offsets = {1, 2, 3};
    int min_reps_per_index = 30;
    int low_power_threshold = 1000;
};

struct FairnessCell {
    int offset = 0;
    // Later-favored: {i(u) rejected and i(u+d) accepted}; earlier-favored is
    // the mirror event. Highest per-u frequency plus the u attaining it.
    double max_freq = 0.0;
    int worst_u = 0;
    double mean_later = 0.0;
    double mean_earlier = 0.0;
    bool pass = true;
    int skipped_indices = 0;  // u with fewer than min_reps_per_index samples
};

struct FairnessTypeReport {
    std::vector<FairnessCell> conditional;    // given no depletion
    std::vector<FairnessCell> unconditional;
    bool pass = true;  // conditional cells only
};

struct FairnessReport {
    bool pass = false;
    bool low_power = false;
    int replications = 0;
    double depletion_freq = 0.0;
    double depletion_sigma = 0.0;
    std::vector<FairnessTypeReport> types;

    // Convenience aggregates over the conditional adjacent (d = 1) cells.
    double max_adjacent = 0.0;
    double mean_adjacent = 0.0;
};

// Streaming auditor: feed every replication's trace, then finalize.
// Mergeable so replications can be audited in parallel.
class FairnessAuditor {
public:
    FairnessAuditor(int n, FairnessOptions options);

    void add(const RunTrace& trace);
    void merge(const FairnessAuditor& other);
    FairnessReport finalize() const;

private:
    struct PairCounts {
        std::vector<int> pairs, later, earlier;             // unconditional
        std::vector<int> cond_pairs, cond_later, cond_earlier;
    };

    int n_;
    FairnessOptions opt_;
    int reps_ = 0;
    int depleted_ = 0;
    // counts_[type][offset_index]
    std::vector<std::vector<PairCounts>> counts_;
};

FairnessReport fairness_audit(const std::vector<RunTrace>& traces, int n,
                              const FairnessOptions& options);

std::string fairness_report_to_csv(const FairnessReport& report);

// Number of within-type adjacent decision changes summed over types.
int ogd_flip_count(const RunTrace& trace, int n);

}  // namespace fairrm
