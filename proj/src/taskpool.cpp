#include "taskpool.hpp"

#include <algorithm>
#include <cstdlib>
#include <sstream>

namespace sellkit {

namespace {
thread_local TaskImpl* tls_current = nullptr;
} // namespace

TaskPool::TaskPool(PoolConfig cfg) : cfg_(std::move(cfg)) {
    int npus = cfg_.npus;
    if (const char* env = std::getenv("SELLKIT_NPUS")) {
        const int cap = std::atoi(env);
        if (cap >= 1) npus = std::min(npus, cap);
    }
    SK_REQUIRE(npus >= 1, errc::invalid_arg, "pool needs at least one PU");
    npus_ = npus;
    pumap_.resize(static_cast<std::size_t>(npus_));
    if (!cfg_.numa_of_pu.empty()) {
        SK_REQUIRE(cfg_.numa_of_pu.size() >= std::size_t(npus_), errc::invalid_arg,
                   "NUMA layout shorter than the PU count");
        for (int p = 0; p < npus_; ++p) {
            SK_REQUIRE(cfg_.numa_of_pu[p] >= 0, errc::invalid_arg, "negative NUMA node label");
            pumap_[p].node = cfg_.numa_of_pu[p];
        }
    }
    const int nshep = cfg_.nshepherds > 0 ? cfg_.nshepherds : npus_;
    shepherds_.reserve(static_cast<std::size_t>(nshep));
    for (int i = 0; i < nshep; ++i) shepherds_.emplace_back([this] { shepherd_loop(); });
}

TaskPool::~TaskPool() {
    {
        std::lock_guard<std::mutex> lk(mtx_);
        stop_ = true;
    }
    cv_work_.notify_all();
    for (auto& t : shepherds_)
        if (t.joinable()) t.join();
    shepherds_.clear();
}

TaskRef TaskPool::create_task(std::function<void*(void*)> fn, void* arg, int nthreads,
                              int numanode, std::uint32_t flags) {
    SK_REQUIRE(bool(fn), errc::invalid_arg, "task callback is empty");
    SK_REQUIRE(nthreads >= 0, errc::invalid_arg, "negative thread count");
    auto t = std::make_shared<TaskImpl>();
    t->func = std::move(fn);
    t->arg = arg;
    t->nthreads = (flags & task_flag_not_pin) ? 0 : nthreads;
    t->numanode = numanode;
    t->flags = flags;
    t->pool = this;
    {
        std::lock_guard<std::mutex> lk(mtx_);
        t->id = next_id_++;
    }
    return t;
}

void TaskPool::enqueue(const TaskRef& t) {
    SK_REQUIRE(t && t->pool == this, errc::invalid_arg, "task belongs to another pool");
    std::unique_lock<std::mutex> lk(mtx_);
    SK_REQUIRE(!stop_, errc::state, "pool is shut down");
    SK_REQUIRE(t->state.load() == TaskState::created, errc::state, "task was already enqueued");
    for (const auto& d : t->depends)
        SK_REQUIRE(d->state.load() != TaskState::created, errc::state,
                   "dependencies must be enqueued or finished");
    if (!(t->flags & task_flag_not_pin)) {
        int cap = npus_;
        if (t->parent && (t->parent->flags & task_flag_not_allow_child))
            cap -= static_cast<int>(t->parent->reserved.size());
        if (t->flags & task_flag_numanode_strict) {
            int on_node = 0;
            for (const auto& pu : pumap_)
                if (pu.node == t->numanode) ++on_node;
            cap = std::min(cap, on_node);
        }
        SK_REQUIRE(t->nthreads <= cap, errc::capacity,
                   "task can never acquire the requested PUs");
    }
    t->seq = next_seq_++;
    t->state.store(TaskState::enqueued);
    record("enqueue", t->id, {});
    if (t->flags & task_flag_prio_high)
        queue_.push_front(t);
    else
        queue_.push_back(t);
    lk.unlock();
    cv_work_.notify_all();
}

void TaskPool::spawn_child(const TaskRef& t) {
    TaskImpl* cur = tls_current;
    SK_REQUIRE(cur != nullptr && cur->pool == this, errc::state,
               "spawn_child must be called from within a task of this pool");
    t->parent = cur;
    enqueue(t);
}

void* TaskPool::wait(const TaskRef& t) {
    SK_REQUIRE(t && t->pool == this, errc::invalid_arg, "task belongs to another pool");
    SK_REQUIRE(t->state.load() != TaskState::created, errc::state,
               "cannot wait on a task that was never enqueued");
    std::unique_lock<std::mutex> lk(mtx_);
    cv_state_.wait(lk, [&] { return t->state.load() == TaskState::finished; });
    return t->ret;
}

TaskRef TaskPool::current_task() {
    TaskImpl* cur = tls_current;
    if (!cur || cur->pool != this) return nullptr;
    return cur->shared_from_this();
}

std::vector<int> TaskPool::reserved_pus(const TaskRef& t) const {
    std::lock_guard<std::mutex> lk(mtx_);
    return t->reserved;
}

void TaskPool::destroy(const TaskRef& t) {
    SK_REQUIRE(t && t->pool == this, errc::invalid_arg, "task belongs to another pool");
    std::lock_guard<std::mutex> lk(mtx_);
    SK_REQUIRE(t->state.load() == TaskState::finished, errc::state,
               "only finished tasks can be destroyed");
    t->destroyed = true;
    t->func = nullptr;
    t->depends.clear();
}

void TaskPool::shutdown() {
    std::unique_lock<std::mutex> lk(mtx_);
    if (stop_) return;
    SK_REQUIRE(running_ == 0, errc::state, "cannot shut down while tasks are running");
    SK_REQUIRE(queue_.empty(), errc::state, "cannot shut down with queued tasks");
    stop_ = true;
    lk.unlock();
    cv_work_.notify_all();
    for (auto& t : shepherds_)
        if (t.joinable()) t.join();
    shepherds_.clear();
}

int TaskPool::numa_node_of(int pu) const {
    SK_REQUIRE(pu >= 0 && pu < npus_, errc::invalid_arg, "PU out of range");
    return pumap_[pu].node;
}

int TaskPool::num_numa_nodes() const {
    int m = 0;
    for (const auto& pu : pumap_) m = std::max(m, pu.node);
    return m + 1;
}

std::vector<TaskPool::TraceEvent> TaskPool::trace() const {
    std::lock_guard<std::mutex> lk(mtx_);
    return trace_;
}

std::string TaskPool::trace_text() const {
    const auto events = trace();
    std::ostringstream os;
    for (const auto& e : events) {
        os << "ts=" << e.ts << " event=" << e.event << " task=" << e.task << " pus=";
        for (std::size_t i = 0; i < e.pus.size(); ++i) os << (i ? "," : "") << e.pus[i];
        os << "\n";
    }
    return os.str();
}

void TaskPool::record(const char* ev, std::uint64_t task, const std::vector<int>& pus) {
    trace_.push_back(TraceEvent{clock_++, ev, task, pus});
}

bool TaskPool::claimable(const TaskRef& t, std::vector<int>& pus_out) const {
    for (const auto& d : t->depends)
        if (d->state.load() != TaskState::finished) return false;
    pus_out.clear();
    if (t->flags & task_flag_not_pin) return true;

    const bool strict = t->flags & task_flag_numanode_strict;
    const bool borrow_ok =
        t->parent && t->parent->state.load() == TaskState::running &&
        !(t->parent->flags & task_flag_not_allow_child);
    auto usable = [&](int p) {
        if (strict && pumap_[p].node != t->numanode) return false;
        if (pumap_[p].owner == -1) return true;
        return borrow_ok && pumap_[p].owner == std::int64_t(t->parent->id);
    };
    // preferred node first, then any; idle PUs before borrowed ones within a group
    auto pick = [&](auto pred) {
        for (int p = 0; p < npus_ && int(pus_out.size()) < t->nthreads; ++p)
            if (usable(p) && pred(p) &&
                std::find(pus_out.begin(), pus_out.end(), p) == pus_out.end())
                pus_out.push_back(p);
    };
    const int node = t->numanode;
    if (node != numanode_any) {
        pick([&](int p) { return pumap_[p].node == node && pumap_[p].owner == -1; });
        pick([&](int p) { return pumap_[p].node == node; });
    }
    if (!strict) {
        pick([&](int p) { return pumap_[p].owner == -1; });
        pick([&](int) { return true; });
    }
    return int(pus_out.size()) >= t->nthreads;
}

void TaskPool::start_locked(const TaskRef& t, const std::vector<int>& pus) {
    std::vector<int> fresh, borrowed;
    for (int p : pus) {
        if (pumap_[p].owner == -1)
            fresh.push_back(p);
        else
            borrowed.push_back(p);
        pumap_[p].owner = std::int64_t(t->id);
    }
    t->reserved = pus;
    t->borrowed = borrowed;
    if (!fresh.empty()) record("reserve", t->id, fresh);
    if (!borrowed.empty()) record("borrow", t->id, borrowed);
    t->state.store(TaskState::running);
    ++running_;
    record("start", t->id, t->reserved);
}

void TaskPool::finish_locked(const TaskRef& t) {
    std::vector<int> fresh, borrowed;
    for (int p : t->reserved) {
        const bool was_borrowed =
            std::find(t->borrowed.begin(), t->borrowed.end(), p) != t->borrowed.end();
        if (was_borrowed) {
            pumap_[p].owner = std::int64_t(t->parent->id);
            borrowed.push_back(p);
        } else {
            pumap_[p].owner = -1;
            fresh.push_back(p);
        }
    }
    if (!fresh.empty()) record("release", t->id, fresh);
    if (!borrowed.empty()) record("return", t->id, borrowed);
    record("finish", t->id, t->reserved);
    t->reserved.clear();
    t->borrowed.clear();
    --running_;
    t->state.store(TaskState::finished);
}

void TaskPool::shepherd_loop() {
    std::unique_lock<std::mutex> lk(mtx_);
    std::vector<int> pus;
    for (;;) {
        // drain the queue before exiting so waiters are never stranded
        if (stop_ && queue_.empty()) return;
        TaskRef claimed;
        for (auto it = queue_.begin(); it != queue_.end(); ++it) {
            if (claimable(*it, pus)) {
                claimed = *it;
                queue_.erase(it);
                break;
            }
        }
        if (!claimed) {
            cv_work_.wait(lk);
            continue;
        }
        start_locked(claimed, pus);
        lk.unlock();

        TaskImpl* prev = tls_current;
        tls_current = claimed.get();
        if (cfg_.bind_hook) cfg_.bind_hook(std::span<const int>(claimed->reserved));
        claimed->ret = claimed->func(claimed->arg);
        tls_current = prev;

        lk.lock();
        finish_locked(claimed);
        lk.unlock();
        cv_state_.notify_all();
        cv_work_.notify_all();
        lk.lock();
    }
}

} // namespace sellkit
