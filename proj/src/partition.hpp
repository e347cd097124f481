#pragma once

#include <cmath>
#include <exception>
#include <memory>
#include <thread>

#include "sellcs.hpp"
#include "spmv.hpp"
#include "taskpool.hpp"
#include "transport.hpp"

namespace sellkit {

enum class WeightMode { by_rows, by_nnz };

/// Per-rank work shares; a rank with weight 2 gets a twice as large chunk of
/// the matrix, measured in rows or nonzeros.
struct RankWeights {
    std::vector<double> weights;
    WeightMode mode = WeightMode::by_rows;
};

struct PartitionPlan {
    int nranks = 0;
    std::vector<gidx> row_offset;  // length nranks+1, strictly increasing, ends at n

    int owner_of(gidx row) const {
        int lo = 0, hi = nranks - 1;
        while (lo < hi) {
            const int mid = (lo + hi) / 2;
            if (row < row_offset[mid + 1])
                hi = mid;
            else
                lo = mid + 1;
        }
        return lo;
    }
};

/// Weighted contiguous row distribution. ByRows places boundaries at
/// round_half_up(n * cumulative_share); ByNnz picks the row prefix whose
/// nonzero count is closest to the cumulative share of the total. Every rank
/// receives at least one row.
inline PartitionPlan compute_partition(gidx n, std::span<const lidx> rowlens,
                                       const RankWeights& rw) {
    const int k = static_cast<int>(rw.weights.size());
    SK_REQUIRE(n > 0, errc::invalid_arg, "empty matrix");
    SK_REQUIRE(k >= 1, errc::invalid_arg, "need at least one rank");
    SK_REQUIRE(gidx(k) <= n, errc::invalid_arg, "more ranks than rows");
    double total_w = 0.0;
    for (double w : rw.weights) {
        SK_REQUIRE(w > 0.0, errc::invalid_arg, "weights must be positive");
        total_w += w;
    }

    std::vector<gidx> prefix_nnz;
    gidx total_nnz = 0;
    if (rw.mode == WeightMode::by_nnz) {
        SK_REQUIRE(rowlens.size() == std::size_t(n), errc::invalid_arg,
                   "ByNnz partitioning needs per-row lengths");
        prefix_nnz.resize(std::size_t(n) + 1, 0);
        for (gidx r = 0; r < n; ++r) prefix_nnz[r + 1] = prefix_nnz[r] + rowlens[r];
        total_nnz = prefix_nnz[n];
    }

    PartitionPlan plan;
    plan.nranks = k;
    plan.row_offset.assign(std::size_t(k) + 1, 0);
    plan.row_offset[k] = n;
    double cum = 0.0;
    for (int i = 1; i < k; ++i) {
        cum += rw.weights[i - 1];
        const double share = cum / total_w;
        gidx b;
        if (rw.mode == WeightMode::by_rows || total_nnz == 0) {
            b = static_cast<gidx>(std::floor(double(n) * share + 0.5));
        } else {
            const double target = double(total_nnz) * share;
            gidx p = 0;
            while (p < n && double(prefix_nnz[p]) < target) ++p;
            // the prefix one row shorter may sit closer to the target
            if (p > 0 && std::abs(double(prefix_nnz[p - 1]) - target) <=
                             std::abs(double(prefix_nnz[p]) - target))
                b = p - 1;
            else
                b = p;
        }
        b = std::max(b, plan.row_offset[i - 1] + 1);
        b = std::min(b, n - (k - i));
        plan.row_offset[i] = b;
    }
    return plan;
}

/// A rank's matrix part split by column locality. The local part covers the
/// rank's own columns (shifted and sigma-permuted), the remote part addresses
/// halo columns compressed to [0, n_halo) in ascending (owner, global column)
/// order.
template <class T>
struct SplitMatrix {
    int rank = 0;
    gidx first_row = 0;
    SellMatrix<T> local;
    bool has_remote = false;
    SellMatrix<T> remote;
    std::vector<std::pair<int, gidx>> halo_map;       // compressed -> (owner, global column)
    std::vector<std::pair<int, lidx>> recv_counts;    // (owner, halo columns), owner ascending
    struct SendList {
        int to;
        std::vector<lidx> rows;  // stored-space rows of this rank's x to send
    };
    std::vector<SendList> send_lists;
    /// Overlap modes keep a second copy of the result vector.
    bool needs_result_duplicate = false;

    lidx n_halo() const { return static_cast<lidx>(halo_map.size()); }
};

/// Restrict global CRS data to the row range [r0, r1); columns stay global.
template <class T>
CrsData<T> restrict_rows(const CrsData<T>& a, gidx r0, gidx r1) {
    CrsData<T> out;
    out.nrows = r1 - r0;
    out.ncols = a.ncols;
    out.rowptr.assign(std::size_t(out.nrows) + 1, 0);
    for (gidx r = r0; r < r1; ++r) out.rowptr[r - r0 + 1] = out.rowptr[r - r0] + a.rowlen(r);
    const gidx base = a.rowptr[r0];
    out.col.assign(a.col.begin() + base, a.col.begin() + a.rowptr[r1]);
    out.val.assign(a.val.begin() + base, a.val.begin() + a.rowptr[r1]);
    return out;
}

/// Split a rank's rows into local and remote parts; send lists are filled by
/// the context, which knows all ranks' halo requests.
template <class T>
SplitMatrix<T> split_local_remote(const CrsData<T>& mine, const PartitionPlan& plan, int rank,
                                  SellParams params) {
    SK_REQUIRE(rank >= 0 && rank < plan.nranks, errc::invalid_arg, "rank out of range");
    const gidx r0 = plan.row_offset[rank];
    const gidx r1 = plan.row_offset[rank + 1];
    const gidx nlocal = r1 - r0;
    SK_REQUIRE(mine.nrows == nlocal, errc::shape_mismatch,
               "row block does not match the partition plan");
    const gidx n = plan.row_offset[plan.nranks];

    SplitMatrix<T> sm;
    sm.rank = rank;
    sm.first_row = r0;

    // compressed halo indices in ascending global column order, which equals
    // ascending (owner, column) order for contiguous rank ranges
    std::vector<gidx> halo_cols;
    for (gidx c : mine.col) {
        SK_REQUIRE(c >= 0 && c < n, errc::invalid_arg, "column index out of range");
        if (c < r0 || c >= r1) halo_cols.push_back(c);
    }
    std::sort(halo_cols.begin(), halo_cols.end());
    halo_cols.erase(std::unique(halo_cols.begin(), halo_cols.end()), halo_cols.end());
    sm.halo_map.reserve(halo_cols.size());
    for (gidx c : halo_cols) sm.halo_map.emplace_back(plan.owner_of(c), c);

    auto compressed = [&](gidx c) {
        return static_cast<gidx>(std::lower_bound(halo_cols.begin(), halo_cols.end(), c) -
                                 halo_cols.begin());
    };

    CrsData<T> local, remote;
    local.nrows = remote.nrows = nlocal;
    local.ncols = nlocal;
    remote.ncols = std::max<gidx>(1, gidx(halo_cols.size()));
    local.rowptr.assign(std::size_t(nlocal) + 1, 0);
    remote.rowptr.assign(std::size_t(nlocal) + 1, 0);
    for (gidx r = 0; r < nlocal; ++r) {
        for (gidx j = mine.rowptr[r]; j < mine.rowptr[r + 1]; ++j) {
            const gidx c = mine.col[j];
            if (c >= r0 && c < r1) {
                local.col.push_back(c - r0);
                local.val.push_back(mine.val[j]);
                local.rowptr[r + 1]++;
            } else {
                remote.col.push_back(compressed(c));
                remote.val.push_back(mine.val[j]);
                remote.rowptr[r + 1]++;
            }
        }
    }
    for (gidx r = 0; r < nlocal; ++r) {
        local.rowptr[r + 1] += local.rowptr[r];
        remote.rowptr[r + 1] += remote.rowptr[r];
    }

    // one sigma permutation from the combined row lengths, shared by both parts
    std::vector<lidx> lens(static_cast<std::size_t>(nlocal), 0);
    for (gidx r = 0; r < nlocal; ++r) lens[r] = mine.rowlen(r);
    BuildOptions opt;
    opt.imposed_order = sigma_permutation(lens, params.sigma);

    BuildOptions local_opt = opt;
    local_opt.permute_columns = true;
    sm.local = build(local, params, local_opt);

    sm.has_remote = !halo_cols.empty();
    if (sm.has_remote) {
        BuildOptions remote_opt = opt;
        remote_opt.permute_columns = false;
        sm.remote = build(remote, params, remote_opt);
        sm.needs_result_duplicate = true;
    }

    int cur_owner = -1;
    for (const auto& [owner, gcol] : sm.halo_map) {
        if (owner != cur_owner) {
            sm.recv_counts.emplace_back(owner, 0);
            cur_owner = owner;
        }
        sm.recv_counts.back().second++;
    }
    return sm;
}

/// Block vector distributed over the simulated ranks; each part lives in its
/// rank's stored (permuted) row space.
template <class T>
struct DistVec {
    using value_type = T;

    std::vector<DenseMat<T>> parts;
    lidx width = 1;
};

enum class DistMode { no_overlap, naive_overlap, task_overlap };

/// Simulated-rank execution context: partition plan, per-rank split matrices,
/// halo send lists and the shared transport. Ranks are driven by one worker
/// thread each; the transport is the only cross-rank channel.
template <class T>
class DistContext {
public:
    using value_type = T;

    PartitionPlan plan;
    SellParams params;
    std::vector<SplitMatrix<T>> ranks;
    std::shared_ptr<Transport> transport;
    std::shared_ptr<RecordingTransport> recorder;  // set when record = true
    gidx nrows_global = 0;
    gidx nnz_global = 0;

    static DistContext build_context(const CrsData<T>& a, const RankWeights& rw, SellParams params,
                                     bool record = false) {
        a.validate();
        SK_REQUIRE(a.nrows == a.ncols, errc::invalid_arg,
                   "row-wise distribution requires a square matrix");
        DistContext ctx;
        ctx.params = params;
        ctx.nrows_global = a.nrows;
        ctx.nnz_global = a.nnz();
        std::vector<lidx> rowlens(std::size_t(a.nrows));
        for (gidx r = 0; r < a.nrows; ++r) rowlens[r] = a.rowlen(r);
        ctx.plan = compute_partition(a.nrows, rowlens, rw);
        const int k = ctx.plan.nranks;
        ctx.ranks.reserve(std::size_t(k));
        for (int r = 0; r < k; ++r) {
            const CrsData<T> mine = restrict_rows(a, ctx.plan.row_offset[r], ctx.plan.row_offset[r + 1]);
            ctx.ranks.push_back(split_local_remote(mine, ctx.plan, r, params));
        }
        // fill send lists from all ranks' halo requests: ascending requesting
        // rank, within that ascending global column
        for (int r = 0; r < k; ++r) {
            for (const auto& [owner, gcol] : ctx.ranks[r].halo_map) {
                auto& lists = ctx.ranks[owner].send_lists;
                if (lists.empty() || lists.back().to != r) lists.push_back({r, {}});
                const gidx local = gcol - ctx.plan.row_offset[owner];
                lists.back().rows.push_back(ctx.ranks[owner].local.row_perm[local]);
            }
        }
        auto inner = make_inprocess_transport(k);
        if (record) {
            ctx.recorder = std::make_shared<RecordingTransport>(inner);
            ctx.transport = ctx.recorder;
        } else {
            ctx.transport = inner;
        }
        return ctx;
    }

    int nranks() const { return plan.nranks; }
    lidx rank_rows(int r) const {
        return static_cast<lidx>(plan.row_offset[r + 1] - plan.row_offset[r]);
    }

    DistVec<T> make_vec(lidx width, StorageOrder order = StorageOrder::row_major) const {
        DistVec<T> v;
        v.width = width;
        v.parts.reserve(ranks.size());
        for (int r = 0; r < nranks(); ++r)
            v.parts.push_back(DenseMat<T>::create(rank_rows(r), width, order));
        return v;
    }

    void scatter(const DenseMat<T>& global, DistVec<T>& v) const {
        SK_REQUIRE(global.rows() == nrows_global && global.cols() == v.width, errc::shape_mismatch,
                   "global vector shape mismatch");
        for (int r = 0; r < nranks(); ++r) {
            const gidx off = plan.row_offset[r];
            for (lidx i = 0; i < rank_rows(r); ++i) {
                const lidx stored = ranks[r].local.row_perm[i];
                for (lidx j = 0; j < v.width; ++j)
                    v.parts[r](stored, j) = global(lidx(off + i), j);
            }
        }
    }

    void gather(const DistVec<T>& v, DenseMat<T>& out) const {
        SK_REQUIRE(out.rows() == nrows_global && out.cols() == v.width, errc::shape_mismatch,
                   "global vector shape mismatch");
        for (int r = 0; r < nranks(); ++r) {
            const gidx off = plan.row_offset[r];
            for (lidx i = 0; i < rank_rows(r); ++i) {
                const lidx stored = ranks[r].local.row_perm[i];
                for (lidx j = 0; j < v.width; ++j)
                    out(lidx(off + i), j) = v.parts[r](stored, j);
            }
        }
    }
};

/// Two-phase halo exchange so overlap modes can compute between begin and
/// wait. Receive buffers are contiguous per neighbor because compressed
/// indices are grouped by owner.
template <class T>
struct HaloExchange {
    DenseMat<T> halo;
    std::vector<Transport::Request> pending;
    std::vector<std::vector<T>> send_bufs;

    void begin(const SplitMatrix<T>& sm, const DenseMat<T>& x_local, Transport& tr) {
        SK_REQUIRE(x_local.rows() == sm.local.nrows, errc::shape_mismatch,
                   "x rows must equal the local row count");
        const lidx w = x_local.cols();
        if (sm.n_halo() > 0) {
            halo = DenseMat<T>::create(sm.n_halo(), w, StorageOrder::row_major);
            lidx row = 0;
            for (const auto& [owner, count] : sm.recv_counts) {
                pending.push_back(tr.post_recv(owner, sm.rank, &halo(row, 0),
                                               std::size_t(count) * w * sizeof(T)));
                row += count;
            }
        }
        for (const auto& sl : sm.send_lists) {
            auto& buf = send_bufs.emplace_back(sl.rows.size() * std::size_t(w));
            for (std::size_t i = 0; i < sl.rows.size(); ++i)
                for (lidx j = 0; j < w; ++j) buf[i * w + j] = x_local(sl.rows[i], j);
            tr.post_send(sm.rank, sl.to, buf.data(), buf.size() * sizeof(T));
        }
    }

    void wait(Transport& tr) {
        for (auto& r : pending) tr.complete(r);
        pending.clear();
    }
};

/// Synchronous halo exchange; returns the n_halo x width block of owner
/// values in compressed order.
template <class T>
DenseMat<T> halo_exchange(const SplitMatrix<T>& sm, const DenseMat<T>& x_local, Transport& tr) {
    HaloExchange<T> ex;
    ex.begin(sm, x_local, tr);
    ex.wait(tr);
    return std::move(ex.halo);
}

namespace detail {

/// Deterministic sum-allreduce: gather to rank 0, combine in rank order,
/// broadcast the result.
template <class T>
void allreduce_sum(Transport& tr, int rank, int nranks, std::span<T> buf) {
    if (nranks <= 1) return;
    const std::size_t bytes = buf.size() * sizeof(T);
    if (rank == 0) {
        std::vector<T> incoming(buf.size());
        for (int r = 1; r < nranks; ++r) {
            tr.complete(tr.post_recv(r, 0, incoming.data(), bytes));
            for (std::size_t i = 0; i < buf.size(); ++i) buf[i] += incoming[i];
        }
        for (int r = 1; r < nranks; ++r) tr.post_send(0, r, buf.data(), bytes);
    } else {
        tr.post_send(rank, 0, buf.data(), bytes);
        tr.complete(tr.post_recv(0, rank, buf.data(), bytes));
    }
}

inline void run_ranks(int nranks, const std::function<void(int)>& fn) {
    if (nranks == 1) {
        fn(0);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(nranks), nullptr);
    threads.reserve(std::size_t(nranks));
    for (int r = 0; r < nranks; ++r)
        threads.emplace_back([&, r] {
            try {
                fn(r);
            } catch (...) {
                errors[std::size_t(r)] = std::current_exception();
            }
        });
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace detail

/// The distributed fused SpMV. All modes produce the true global product;
/// they differ in how communication overlaps local computation. Task mode
/// runs a one-worker communication task besides an (npus-1)-worker local
/// compute task and does the remote part on the parent.
template <class T>
void dist_spmv(DistVec<T>& y, DistContext<T>& ctx, const DistVec<T>& x, const SpmvOpts<T>& opts,
               DistMode mode, std::type_identity_t<DistVec<T>>* z = nullptr,
               std::span<TaskPool* const> pools = {}) {
    SK_REQUIRE(opts.z == nullptr, errc::invalid_arg,
               "distributed chain target must be passed as a DistVec");
    const bool wants_chain = opts.flags & spmv_flag_chain_axpby;
    SK_REQUIRE(!wants_chain || z != nullptr, errc::invalid_arg, "CHAIN_AXPBY requires z");
    const std::uint32_t dot_flags =
        opts.flags & (spmv_flag_dot_yy | spmv_flag_dot_xy | spmv_flag_dot_xx);
    SK_REQUIRE(!dot_flags || opts.dot != nullptr, errc::invalid_arg,
               "dot flags require a dot buffer");
    const int k = ctx.nranks();

    std::vector<std::unique_ptr<TaskPool>> own_pools;
    std::vector<TaskPool*> pool_ptrs(pools.begin(), pools.end());
    if (mode == DistMode::task_overlap && pool_ptrs.empty()) {
        for (int r = 0; r < k; ++r)
            own_pools.push_back(std::make_unique<TaskPool>(PoolConfig{.npus = 4}));
        for (auto& p : own_pools) pool_ptrs.push_back(p.get());
    }
    if (mode == DistMode::task_overlap)
        SK_REQUIRE(int(pool_ptrs.size()) == k, errc::invalid_arg,
                   "task mode needs one pool per rank");

    // local sweep carries everything except dots and the chain, which need
    // the final y; the remote sweep accumulates on top
    SpmvOpts<T> base = opts;
    base.dot = nullptr;
    base.z = nullptr;
    base.flags &= ~(dot_flags | spmv_flag_chain_axpby);
    SpmvOpts<T> accum;
    accum.alpha = opts.alpha;
    accum.beta = T{1};
    accum.flags = spmv_flag_axpby;

    std::vector<T> global_dots(dot_flags ? 3 * std::size_t(x.width) : 0);

    detail::run_ranks(k, [&](int r) {
        SplitMatrix<T>& sm = ctx.ranks[r];
        DenseMat<T>& yr = y.parts[r];
        const DenseMat<T>& xr = x.parts[r];
        Transport& tr = *ctx.transport;

        switch (mode) {
            case DistMode::no_overlap: {
                DenseMat<T> halo = halo_exchange(sm, xr, tr);
                spmv(yr, sm.local, xr, base);
                if (sm.has_remote) spmv(yr, sm.remote, halo, accum);
                break;
            }
            case DistMode::naive_overlap: {
                HaloExchange<T> ex;
                ex.begin(sm, xr, tr);
                DenseMat<T> ydup = yr.compact_clone();
                spmv(ydup, sm.local, xr, base);
                ex.wait(tr);
                if (sm.has_remote) spmv(ydup, sm.remote, ex.halo, accum);
                yr.copy_from(ydup);
                break;
            }
            case DistMode::task_overlap: {
                TaskPool& pool = *pool_ptrs[r];
                HaloExchange<T> ex;
                DenseMat<T> ydup = yr.compact_clone();
                auto body = [&](void*) -> void* {
                    auto comm_fn = [&](void*) -> void* {
                        ex.begin(sm, xr, tr);
                        ex.wait(tr);
                        return nullptr;
                    };
                    auto local_fn = [&](void*) -> void* {
                        spmv(ydup, sm.local, xr, base);
                        return nullptr;
                    };
                    TaskRef comm = pool.create_task(comm_fn, nullptr, 1);
                    TaskRef local =
                        pool.create_task(local_fn, nullptr, std::max(1, pool.npus() - 1));
                    pool.spawn_child(comm);
                    pool.spawn_child(local);
                    pool.wait(comm);
                    pool.wait(local);
                    // remote computation stays on the parent task
                    if (sm.has_remote) spmv(ydup, sm.remote, ex.halo, accum);
                    pool.destroy(comm);
                    pool.destroy(local);
                    return nullptr;
                };
                TaskRef main = pool.create_task(body, nullptr, pool.npus());
                pool.enqueue(main);
                pool.wait(main);
                pool.destroy(main);
                yr.copy_from(ydup);
                break;
            }
        }

        if (dot_flags) {
            std::vector<T> local_dots(3 * std::size_t(x.width), T{});
            if (dot_flags & spmv_flag_dot_yy) {
                auto d = dot(yr, yr);
                std::copy(d.begin(), d.end(), local_dots.begin());
            }
            if (dot_flags & spmv_flag_dot_xy) {
                auto d = dot(xr, yr);
                std::copy(d.begin(), d.end(), local_dots.begin() + x.width);
            }
            if (dot_flags & spmv_flag_dot_xx) {
                auto d = dot(xr, xr);
                std::copy(d.begin(), d.end(), local_dots.begin() + 2 * std::size_t(x.width));
            }
            detail::allreduce_sum<T>(tr, r, k, local_dots);
            if (r == 0) std::copy(local_dots.begin(), local_dots.end(), global_dots.begin());
        }
        if (wants_chain) axpby(z->parts[r], yr, opts.eta, opts.delta);
    });

    if (dot_flags) {
        const lidx w = x.width;
        if (dot_flags & spmv_flag_dot_yy)
            std::copy_n(global_dots.begin(), w, opts.dot);
        if (dot_flags & spmv_flag_dot_xy)
            std::copy_n(global_dots.begin() + w, w, opts.dot + w);
        if (dot_flags & spmv_flag_dot_xx)
            std::copy_n(global_dots.begin() + 2 * std::size_t(w), w, opts.dot + 2 * std::size_t(w));
    }
}

/// Suppressed-communication variant: computes from local columns only, so the
/// result is not the true global product unless the coupling is block
/// diagonal.
template <class T>
void spmv_pseudo_nocomm(DistVec<T>& y, DistContext<T>& ctx, const DistVec<T>& x,
                        const SpmvOpts<T>& opts, std::type_identity_t<DistVec<T>>* z = nullptr) {
    SK_REQUIRE(opts.z == nullptr, errc::invalid_arg,
               "distributed chain target must be passed as a DistVec");
    const bool wants_chain = opts.flags & spmv_flag_chain_axpby;
    SK_REQUIRE(!wants_chain || z != nullptr, errc::invalid_arg, "CHAIN_AXPBY requires z");
    const std::uint32_t dot_flags =
        opts.flags & (spmv_flag_dot_yy | spmv_flag_dot_xy | spmv_flag_dot_xx);
    SpmvOpts<T> base = opts;
    base.dot = nullptr;
    base.z = nullptr;
    base.flags &= ~(dot_flags | spmv_flag_chain_axpby);

    std::vector<T> global_dots(dot_flags ? 3 * std::size_t(x.width) : 0);
    const int k = ctx.nranks();
    detail::run_ranks(k, [&](int r) {
        DenseMat<T>& yr = y.parts[r];
        const DenseMat<T>& xr = x.parts[r];
        spmv(yr, ctx.ranks[r].local, xr, base);
        if (dot_flags) {
            std::vector<T> local_dots(3 * std::size_t(x.width), T{});
            if (dot_flags & spmv_flag_dot_yy) {
                auto d = dot(yr, yr);
                std::copy(d.begin(), d.end(), local_dots.begin());
            }
            if (dot_flags & spmv_flag_dot_xy) {
                auto d = dot(xr, yr);
                std::copy(d.begin(), d.end(), local_dots.begin() + x.width);
            }
            if (dot_flags & spmv_flag_dot_xx) {
                auto d = dot(xr, xr);
                std::copy(d.begin(), d.end(), local_dots.begin() + 2 * std::size_t(x.width));
            }
            detail::allreduce_sum<T>(*ctx.transport, r, k, local_dots);
            if (r == 0) std::copy(local_dots.begin(), local_dots.end(), global_dots.begin());
        }
        if (wants_chain) axpby(z->parts[r], yr, opts.eta, opts.delta);
    });
    if (dot_flags) {
        const lidx w = x.width;
        if (dot_flags & spmv_flag_dot_yy) std::copy_n(global_dots.begin(), w, opts.dot);
        if (dot_flags & spmv_flag_dot_xy) std::copy_n(global_dots.begin() + w, w, opts.dot + w);
        if (dot_flags & spmv_flag_dot_xx)
            std::copy_n(global_dots.begin() + 2 * std::size_t(w), w, opts.dot + 2 * std::size_t(w));
    }
}

} // namespace sellkit
