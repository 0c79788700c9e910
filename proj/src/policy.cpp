#include "fairrm/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace fairrm {

const char* to_string(Decision d) {
    switch (d) {
        case Decision::Accept: return "accept";
        case Decision::Reject: return "reject";
        case Decision::NoOp: return "noop";
    }
    return "?";
}

RunTrace run_policy(Policy& policy, const Instance& inst, const ArrivalSequence& arrivals,
                    const RunOptions& options) {
    RunTrace trace;
    trace.events.reserve(arrivals.events.size());
    trace.accepted_per_type.assign(static_cast<std::size_t>(inst.n), 0);
    trace.arrivals_per_type.assign(static_cast<std::size_t>(inst.n), 0);

    Vec before = policy.remaining_capacity();
    for (std::size_t idx = 0; idx < arrivals.events.size(); ++idx) {
        const int t = static_cast<int>(idx) + 1;
        const int type = arrivals.events[idx];

        TraceEvent ev;
        ev.t = t;
        ev.type = type;
        if (type > 0) {
            trace.arrivals_per_type[static_cast<std::size_t>(type - 1)]++;
            ev.u = trace.arrivals_per_type[static_cast<std::size_t>(type - 1)];
        }

        const StepResult res = policy.step(type);
        ev.decision = res.decision;
        ev.forced = res.forced;
        if (res.forced) trace.depleted = true;

        const Vec& after = policy.remaining_capacity();
        if (res.decision == Decision::Accept) {
            if (type <= 0) throw std::logic_error("policy accepted a no-arrival round");
            ev.revenue = inst.r[static_cast<std::size_t>(type - 1)];
            trace.total_revenue += ev.revenue;
            trace.accepted_per_type[static_cast<std::size_t>(type - 1)]++;
            for (int j = 0; j < inst.L; ++j) {
                const double expect = before[static_cast<std::size_t>(j)] -
                                      inst.A[static_cast<std::size_t>(type - 1)][static_cast<std::size_t>(j)];
                if (std::abs(after[static_cast<std::size_t>(j)] - expect) > 1e-6)
                    throw std::logic_error("capacity did not decrease by A_i on accept");
                if (after[static_cast<std::size_t>(j)] < -1e-9)
                    throw std::logic_error("capacity went negative");
            }
        } else {
            for (int j = 0; j < inst.L; ++j)
                if (std::abs(after[static_cast<std::size_t>(j)] - before[static_cast<std::size_t>(j)]) > 1e-9)
                    throw std::logic_error("capacity changed on a non-accept step");
        }
        before = after;

        if (options.record_capacity) trace.capacity_snapshots.push_back(after);
        trace.events.push_back(std::move(ev));
    }
    trace.final_capacity = policy.remaining_capacity();
    return trace;
}

std::string trace_to_csv(const RunTrace& trace) {
    std::ostringstream os;
    os << "t,type,u,decision,revenue,remaining_capacity\n";
    const bool have_caps = trace.capacity_snapshots.size() == trace.events.size();
    char buf[64];
    for (std::size_t i = 0; i < trace.events.size(); ++i) {
        const TraceEvent& ev = trace.events[i];
        std::snprintf(buf, sizeof buf, "%.12g", ev.revenue);
        os << ev.t << ',' << ev.type << ',' << ev.u << ',' << to_string(ev.decision) << ','
           << buf << ',';
        os << '"' << '[';
        if (have_caps) {
            const Vec& cap = trace.capacity_snapshots[i];
            for (std::size_t j = 0; j < cap.size(); ++j) {
                std::snprintf(buf, sizeof buf, "%.12g", cap[j]);
                os << (j ? "," : "") << buf;
            }
        }
        os << ']' << '"' << '\n';
    }
    return os.str();
}

std::string grace_events_to_csv(const std::vector<GraceEvent>& events) {
    std::ostringstream os;
    os << "t,type,mode_from,mode_to,trigger\n";
    for (const GraceEvent& ev : events)
        os << ev.t << ',' << ev.type << ',' << ev.from << ',' << ev.to << ',' << ev.trigger
           << '\n';
    return os.str();
}

}  // namespace fairrm
