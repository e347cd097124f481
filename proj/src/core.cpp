#include <atomic>
#include <cstdlib>

#include <omp.h>

#include "types.hpp"

namespace sellkit {

const char* errc_name(errc c) {
    switch (c) {
        case errc::ok: return "ok";
        case errc::invalid_arg: return "invalid argument";
        case errc::overflow: return "index overflow";
        case errc::shape_mismatch: return "shape mismatch";
        case errc::pattern_mismatch: return "sparsity pattern mismatch";
        case errc::io: return "io error";
        case errc::capacity: return "capacity exceeded";
        case errc::state: return "invalid state";
        case errc::alloc: return "allocation failure";
        case errc::transport: return "transport failure";
        case errc::unsupported: return "unsupported operation";
        case errc::numeric: return "numeric failure";
    }
    return "unknown";
}

namespace {

int initial_workers() {
    if (const char* env = std::getenv("SELLKIT_NUM_WORKERS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return omp_get_max_threads();
}

std::atomic<int>& worker_slot() {
    static std::atomic<int> n{initial_workers()};
    return n;
}

} // namespace

int num_workers() { return worker_slot().load(std::memory_order_relaxed); }

void set_num_workers(int n) {
    SK_REQUIRE(n >= 1, errc::invalid_arg, "worker count must be positive");
    worker_slot().store(n, std::memory_order_relaxed);
}

} // namespace sellkit
