#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "types.hpp"

namespace sellkit {

inline constexpr std::uint32_t task_flag_prio_high = 1;        // enqueue to the head of the queue
inline constexpr std::uint32_t task_flag_numanode_strict = 2;  // run only on the given NUMA node
inline constexpr std::uint32_t task_flag_not_allow_child = 4;  // children may not use this task's PUs
inline constexpr std::uint32_t task_flag_not_pin = 8;          // reserve no PUs

inline constexpr int numanode_any = -1;

enum class TaskState { created, enqueued, running, finished };

class TaskPool;

/// Unit of work. The callback runs on a shepherd worker once all dependencies
/// have finished and nthreads PUs could be reserved (none for NOT_PIN tasks).
struct TaskImpl : std::enable_shared_from_this<TaskImpl> {
    std::function<void*(void*)> func;
    void* arg = nullptr;
    void* ret = nullptr;
    std::vector<std::shared_ptr<TaskImpl>> depends;
    int nthreads = 1;
    int numanode = numanode_any;
    std::uint32_t flags = 0;

    // managed by the pool
    TaskPool* pool = nullptr;
    std::uint64_t id = 0;
    std::uint64_t seq = 0;  // enqueue order
    std::atomic<TaskState> state{TaskState::created};
    TaskImpl* parent = nullptr;  // spawning task, children may borrow its PUs
    std::vector<int> reserved;
    std::vector<int> borrowed;  // subset of reserved owned by the parent
    bool destroyed = false;
};

using TaskRef = std::shared_ptr<TaskImpl>;

struct PoolConfig {
    int npus = 1;
    std::vector<int> numa_of_pu;  // empty: all PUs on node 0
    int nshepherds = 0;           // 0: one per PU
    /// Optional platform pinning hook, called on the worker before the task
    /// callback runs. Correctness never depends on it.
    std::function<void(std::span<const int> pus)> bind_hook;
};

/// Affinity-aware task pool: shepherd workers claim enqueued tasks and
/// reserve PUs exclusively in a process-wide bitmap. The environment
/// variable SELLKIT_NPUS caps the PU count.
class TaskPool {
public:
    explicit TaskPool(PoolConfig cfg);
    ~TaskPool();

    TaskPool(const TaskPool&) = delete;
    TaskPool& operator=(const TaskPool&) = delete;

    TaskRef create_task(std::function<void*(void*)> fn, void* arg, int nthreads,
                        int numanode = numanode_any, std::uint32_t flags = 0);

    /// Returns immediately; the task runs once its requirements are met.
    void enqueue(const TaskRef& t);

    /// Enqueue from within a task callback; the child may occupy the parent's
    /// PUs unless the parent carries NOT_ALLOW_CHILD.
    void spawn_child(const TaskRef& t);

    /// Blocks until the task finished; returns the callback result.
    void* wait(const TaskRef& t);

    /// The task whose callback is executing on the calling worker, if any.
    TaskRef current_task();

    TaskState state(const TaskRef& t) const { return t->state.load(); }

    std::vector<int> reserved_pus(const TaskRef& t) const;

    /// Release a finished task's bookkeeping.
    void destroy(const TaskRef& t);

    /// Terminate the shepherds; idempotent. Errors while tasks are running
    /// or still waiting in the queue.
    void shutdown();

    int npus() const { return npus_; }
    int nshepherds() const { return static_cast<int>(shepherds_.size()); }
    int numa_node_of(int pu) const;
    int num_numa_nodes() const;

    struct TraceEvent {
        std::uint64_t ts;
        std::string event;  // enqueue|start|finish|reserve|borrow|release|return
        std::uint64_t task;
        std::vector<int> pus;
    };
    std::vector<TraceEvent> trace() const;
    /// Line-oriented form: "ts=<t> event=<e> task=<id> pus=<a,b,...>".
    std::string trace_text() const;

private:
    struct PuState {
        std::int64_t owner = -1;  // task id, -1 = idle
        int node = 0;
    };

    void shepherd_loop();
    bool claimable(const TaskRef& t, std::vector<int>& pus_out) const;
    void start_locked(const TaskRef& t, const std::vector<int>& pus);
    void finish_locked(const TaskRef& t);
    void record(const char* ev, std::uint64_t task, const std::vector<int>& pus);

    int npus_ = 0;
    std::vector<PuState> pumap_;
    PoolConfig cfg_;

    mutable std::mutex mtx_;
    std::condition_variable cv_work_;
    std::condition_variable cv_state_;
    std::deque<TaskRef> queue_;
    std::vector<std::thread> shepherds_;
    bool stop_ = false;
    int running_ = 0;
    std::uint64_t next_id_ = 1;
    std::uint64_t next_seq_ = 1;
    std::uint64_t clock_ = 0;
    std::vector<TraceEvent> trace_;
};

} // namespace sellkit
