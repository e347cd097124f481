#pragma once

#include <span>
#include <string>
#include <vector>

#include "types.hpp"

namespace sellkit {

/// Attainable memory bandwidth b (GB/s) and peak floating point rate (Gflop/s).
struct MachineModel {
    double bandwidth_gbs;
    double peak_gflops;
};

/// Flops per stored nonzero for one multiply-add: 2 for real scalars,
/// 8 for complex (4 mul + 4 add).
int flops_per_nonzero(Datatype dt);

/// Bytes of memory traffic per flop of the SpMV kernel. The minimal balance
/// counts one matrix value and one column index per nonzero; include_vectors
/// adds the rhs read plus the lhs read(write-allocate)+write, amortized over
/// the average row length.
double spmv_code_balance(Datatype dt, int index_bytes, bool include_vectors = false,
                         double avg_nnz_per_row = 0.0);

/// Fraction of per-nonzero traffic saved by 32-bit instead of 64-bit column
/// indices: 4/(value_bytes+8). value_bytes must be one of 4, 8, 16.
double index_width_saving(int value_bytes);

/// min(peak, bandwidth / code_balance) in Gflop/s.
double roofline_bound(const MachineModel& m, double code_balance);

/// Value refresh cost of a constant-pattern matrix, in SpMV equivalents:
/// 3*nnz*value_bytes / spmv_traffic_per_call.
double crs_refresh_cost(gidx nnz, int value_bytes, double spmv_traffic_per_call_bytes);

/// Per-region performance samples (Gflop/s per call).
class Region {
public:
    explicit Region(std::string name) : name_(std::move(name)) {}

    void record(double sample) { samples_.push_back(sample); }

    const std::string& name() const { return name_; }
    std::size_t ncalls() const { return samples_.size(); }

    /// Maximum over all calls (the first ten included).
    double p_max() const;
    /// Mean over calls 11..ncalls; requires more than ten calls.
    double p_skip10() const;
    bool has_skip10() const { return samples_.size() > 10; }

private:
    std::string name_;
    std::vector<double> samples_;
};

/// Fixed-format region table:
///   Region      | Calls |    P_max | P_skip10
/// P values use scientific notation with three significant digits; regions
/// with ten or fewer calls print "n/a" in the P_skip10 column.
std::string region_table(std::span<const Region* const> regions);

/// Monotonic wall clock in seconds; the override hook makes reports
/// reproducible in tests.
double now_seconds();
void set_timer_override(double (*fn)(void*), void* arg);

} // namespace sellkit
