#include "perfmodel.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <numeric>

namespace sellkit {

int flops_per_nonzero(Datatype dt) { return is_complex(dt) ? 8 : 2; }

double spmv_code_balance(Datatype dt, int index_bytes, bool include_vectors,
                         double avg_nnz_per_row) {
    SK_REQUIRE(index_bytes > 0, errc::invalid_arg, "index bytes must be positive");
    const double vb = static_cast<double>(value_bytes(dt));
    const double flops = flops_per_nonzero(dt);
    double balance = (vb + index_bytes) / flops;
    if (include_vectors) {
        SK_REQUIRE(avg_nnz_per_row > 0, errc::invalid_arg, "average row length must be positive");
        // rhs read + lhs write-allocate read + lhs write, once per row
        balance += (2.0 * vb + vb) / (flops * avg_nnz_per_row);
    }
    return balance;
}

double index_width_saving(int value_bytes) {
    SK_REQUIRE(value_bytes == 4 || value_bytes == 8 || value_bytes == 16, errc::unsupported,
               "unsupported value width");
    return 4.0 / (value_bytes + 8.0);
}

double roofline_bound(const MachineModel& m, double code_balance) {
    SK_REQUIRE(m.bandwidth_gbs > 0 && m.peak_gflops > 0, errc::invalid_arg,
               "machine model parameters must be positive");
    SK_REQUIRE(code_balance >= 0, errc::invalid_arg, "negative code balance");
    if (code_balance == 0.0) return m.peak_gflops;
    return std::min(m.peak_gflops, m.bandwidth_gbs / code_balance);
}

double crs_refresh_cost(gidx nnz, int value_bytes, double spmv_traffic_per_call_bytes) {
    SK_REQUIRE(nnz > 0 && value_bytes > 0 && spmv_traffic_per_call_bytes > 0, errc::invalid_arg,
               "refresh cost inputs must be positive");
    return 3.0 * double(nnz) * value_bytes / spmv_traffic_per_call_bytes;
}

double Region::p_max() const {
    SK_REQUIRE(!samples_.empty(), errc::state, "region has no samples");
    return *std::max_element(samples_.begin(), samples_.end());
}

double Region::p_skip10() const {
    SK_REQUIRE(samples_.size() > 10, errc::state, "P_skip10 needs more than ten calls");
    return std::accumulate(samples_.begin() + 10, samples_.end(), 0.0) /
           double(samples_.size() - 10);
}

std::string region_table(std::span<const Region* const> regions) {
    auto sci = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2e", v);
        return std::string(buf);
    };
    std::string out;
    char line[128];
    std::snprintf(line, sizeof(line), "%-12s| %5s | %8s | %8s\n", "Region", "Calls", "P_max",
                  "P_skip10");
    out += line;
    out += std::string(41, '-') + "\n";
    for (const Region* r : regions) {
        const std::string skip = r->has_skip10() ? sci(r->p_skip10()) : "n/a";
        std::snprintf(line, sizeof(line), "%-12s| %5zu | %8s | %8s\n", r->name().c_str(),
                      r->ncalls(), sci(r->p_max()).c_str(), skip.c_str());
        out += line;
    }
    return out;
}

namespace {
std::atomic<double (*)(void*)> timer_fn{nullptr};
std::atomic<void*> timer_arg{nullptr};
} // namespace

double now_seconds() {
    if (auto* fn = timer_fn.load(std::memory_order_acquire)) return fn(timer_arg.load());
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

void set_timer_override(double (*fn)(void*), void* arg) {
    timer_arg.store(arg);
    timer_fn.store(fn, std::memory_order_release);
}

} // namespace sellkit
