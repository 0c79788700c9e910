#pragma once

#include <memory>
#include <string>
#include <vector>

#include "fairrm/instance.hpp"

namespace fairrm {

enum class Decision { Accept, Reject, NoOp };

const char* to_string(Decision d);

struct StepResult {
    Decision decision = Decision::NoOp;
    // Reject caused by insufficient capacity while the policy rule said
    // accept. Marks the depletion event the fairness theorems condition on.
    bool forced = false;
};

struct TraceEvent {
    int t = 0;         // 1-based round
    int type = 0;      // 0 = no arrival
    int u = 0;         // 1-based within-type index, 0 for no arrival
    Decision decision = Decision::NoOp;
    bool forced = false;
    double revenue = 0.0;
};

struct RunTrace {
    std::vector<TraceEvent> events;
    Vec final_capacity;
    double total_revenue = 0.0;
    bool depleted = false;  // any forced reject in the run
    // Per-event remaining-capacity snapshots, only if requested at run time.
    std::vector<Vec> capacity_snapshots;

    std::vector<int> accepted_per_type;  // size n
    std::vector<int> arrivals_per_type;  // size n
};

// Mode transition log entry for grace-period policies.
struct GraceEvent {
    int t = 0;
    int type = 0;  // 0 = all types
    std::string from;
    std::string to;
    std::string trigger;
};

// Step-wise admission policy. One instance drives exactly one run and is
// stepped sequentially; parallel replications use separate instances.
class Policy {
public:
    virtual ~Policy() = default;

    virtual std::string name() const = 0;

    // type = 0 means a no-arrival round; must return NoOp for it.
    virtual StepResult step(int type) = 0;

    virtual const Vec& remaining_capacity() const = 0;

    virtual const std::vector<GraceEvent>& grace_events() const {
        static const std::vector<GraceEvent> none;
        return none;
    }
};

struct RunOptions {
    bool record_capacity = false;
};

RunTrace run_policy(Policy& policy, const Instance& inst, const ArrivalSequence& arrivals,
                    const RunOptions& options = {});

std::string trace_to_csv(const RunTrace& trace);
std::string grace_events_to_csv(const std::vector<GraceEvent>& events);

// Shared capacity bookkeeping for concrete policies.
class CapacityBook {
public:
    explicit CapacityBook(const Instance& inst) : inst_(&inst), remaining_(inst.m) {}

    const Vec& remaining() const { return remaining_; }

    bool fits(int type) const {
        const auto& row = inst_->A[static_cast<std::size_t>(type - 1)];
        for (std::size_t j = 0; j < row.size(); ++j)
            if (row[j] > remaining_[j] + 1e-12) return false;
        return true;
    }

    // True if no type fits any more.
    bool exhausted() const {
        for (int i = 1; i <= inst_->n; ++i)
            if (fits(i)) return false;
        return true;
    }

    void consume(int type) {
        const auto& row = inst_->A[static_cast<std::size_t>(type - 1)];
        for (std::size_t j = 0; j < row.size(); ++j) {
            remaining_[j] -= row[j];
            if (remaining_[j] < 0.0 && remaining_[j] > -1e-9) remaining_[j] = 0.0;
        }
    }

    double min_remaining() const {
        double lo = remaining_.empty() ? 0.0 : remaining_[0];
        for (double v : remaining_) lo = std::min(lo, v);
        return lo;
    }

private:
    const Instance* inst_;
    Vec remaining_;
};

}  // namespace fairrm
