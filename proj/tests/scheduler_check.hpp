// Replay-based validation of task pool traces: PU exclusivity, dependency
// order and priority compliance are checked against the recorded event log.

#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "taskpool.hpp"

namespace schedcheck {

struct TaskMeta {
    std::uint64_t id = 0;
    int nthreads = 0;
    std::uint32_t flags = 0;
    int numanode = sellkit::numanode_any;
    std::uint64_t parent = 0;  // 0 = none
    std::vector<std::uint64_t> deps;
};

struct Violations {
    int exclusivity = 0;
    int dependency = 0;
    int priority = 0;
    int accounting = 0;

    bool clean() const { return exclusivity + dependency + priority + accounting == 0; }
};

/// Replays the trace, tracking PU ownership and task lifetimes.
inline Violations check_trace(const std::vector<sellkit::TaskPool::TraceEvent>& events,
                              const std::map<std::uint64_t, TaskMeta>& meta, int npus,
                              const std::vector<int>& numa_of_pu) {
    Violations v;
    std::vector<std::int64_t> owner(static_cast<std::size_t>(npus), -1);
    std::map<std::uint64_t, std::uint64_t> enqueue_ts, start_ts, finish_ts;
    std::set<std::uint64_t> waiting;  // enqueued, not yet started

    for (const auto& e : events) {
        if (e.event == "enqueue") {
            enqueue_ts[e.task] = e.ts;
            waiting.insert(e.task);
        } else if (e.event == "reserve") {
            for (int p : e.pus) {
                if (owner[p] != -1) ++v.exclusivity;
                owner[p] = std::int64_t(e.task);
            }
        } else if (e.event == "borrow") {
            const auto it = meta.find(e.task);
            const std::uint64_t parent = it != meta.end() ? it->second.parent : 0;
            for (int p : e.pus) {
                if (owner[p] != std::int64_t(parent)) ++v.exclusivity;
                owner[p] = std::int64_t(e.task);
            }
        } else if (e.event == "release") {
            for (int p : e.pus) {
                if (owner[p] != std::int64_t(e.task)) ++v.accounting;
                owner[p] = -1;
            }
        } else if (e.event == "return") {
            const auto it = meta.find(e.task);
            const std::uint64_t parent = it != meta.end() ? it->second.parent : 0;
            for (int p : e.pus) {
                if (owner[p] != std::int64_t(e.task)) ++v.accounting;
                owner[p] = std::int64_t(parent);
            }
        } else if (e.event == "start") {
            start_ts[e.task] = e.ts;
            waiting.erase(e.task);
            const auto it = meta.find(e.task);
            if (it != meta.end()) {
                // dependency order: every dependency finished before this start
                for (std::uint64_t d : it->second.deps) {
                    auto f = finish_ts.find(d);
                    if (f == finish_ts.end() || f->second > e.ts) ++v.dependency;
                }
                // NUMA strictness: all reserved PUs carry the requested node
                if (it->second.flags & sellkit::task_flag_numanode_strict)
                    for (int p : e.pus)
                        if (numa_of_pu[p] != it->second.numanode) ++v.accounting;
                // priority: no waiting PrioHigh task that was runnable at this
                // instant may be overtaken by a later-enqueued non-prio task
                if (!(it->second.flags & sellkit::task_flag_prio_high)) {
                    for (std::uint64_t cand : waiting) {
                        const auto cit = meta.find(cand);
                        if (cit == meta.end()) continue;
                        const TaskMeta& cm = cit->second;
                        if (!(cm.flags & sellkit::task_flag_prio_high)) continue;
                        if (enqueue_ts[cand] > enqueue_ts[e.task]) continue;
                        bool deps_done = true;
                        for (std::uint64_t d : cm.deps)
                            if (!finish_ts.count(d)) deps_done = false;
                        if (!deps_done) continue;
                        // count idle PUs usable by the candidate; the PUs the
                        // starting task just claimed were taken from this set
                        int usable = 0;
                        for (int p = 0; p < npus; ++p) {
                            const bool idle =
                                owner[p] == -1 ||
                                std::find(e.pus.begin(), e.pus.end(), p) != e.pus.end();
                            if (!idle) continue;
                            if ((cm.flags & sellkit::task_flag_numanode_strict) &&
                                numa_of_pu[p] != cm.numanode)
                                continue;
                            ++usable;
                        }
                        const int need = (cm.flags & sellkit::task_flag_not_pin) ? 0 : cm.nthreads;
                        if (usable >= need) ++v.priority;
                    }
                }
            }
        } else if (e.event == "finish") {
            finish_ts[e.task] = e.ts;
        }
    }
    return v;
}

} // namespace schedcheck
