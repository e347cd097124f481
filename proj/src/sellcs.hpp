#pragma once

#include <algorithm>
#include <exception>
#include <functional>
#include <map>
#include <numeric>
#include <span>
#include <vector>

#include "aligned.hpp"
#include "densemat.hpp"
#include "types.hpp"

namespace sellkit {

template <class T>
struct SpmvOpts;

/// Chunk height C (hardware-determined) and sorting scope sigma
/// (matrix-determined). sigma = 1 disables sorting, sigma >= nrows sorts
/// globally; otherwise sigma must be a multiple of C.
struct SellParams {
    lidx chunk_height = 1;
    lidx sigma = 1;
};

inline void validate(const SellParams& p, gidx nrows) {
    SK_REQUIRE(p.chunk_height >= 1, errc::invalid_arg, "chunk height must be positive");
    SK_REQUIRE(p.sigma >= 1, errc::invalid_arg, "sigma must be positive");
    SK_REQUIRE(p.sigma == 1 || p.sigma % p.chunk_height == 0 || p.sigma >= nrows, errc::invalid_arg,
               "sigma must be 1, a multiple of the chunk height, or cover all rows");
}

/// Plain CRS arrays with global column indices.
template <class T>
struct CrsData {
    using value_type = T;

    gidx nrows = 0;
    gidx ncols = 0;
    std::vector<gidx> rowptr;  // length nrows+1
    std::vector<gidx> col;
    std::vector<T> val;

    gidx nnz() const { return rowptr.empty() ? 0 : rowptr.back(); }
    lidx rowlen(gidx r) const { return static_cast<lidx>(rowptr[r + 1] - rowptr[r]); }

    void validate() const {
        SK_REQUIRE(nrows >= 0 && ncols >= 0, errc::invalid_arg, "negative dimension");
        SK_REQUIRE(rowptr.size() == std::size_t(nrows) + 1, errc::invalid_arg, "rowptr length mismatch");
        SK_REQUIRE(rowptr.front() == 0, errc::invalid_arg, "rowptr must start at 0");
        for (gidx r = 0; r < nrows; ++r)
            SK_REQUIRE(rowptr[r] <= rowptr[r + 1], errc::invalid_arg, "rowptr must be non-decreasing");
        SK_REQUIRE(col.size() == std::size_t(rowptr.back()) && val.size() == col.size(),
                   errc::invalid_arg, "payload length mismatch");
        for (gidx r = 0; r < nrows; ++r) {
            for (gidx k = rowptr[r]; k < rowptr[r + 1]; ++k) {
                SK_REQUIRE(col[k] >= 0 && col[k] < ncols, errc::invalid_arg, "column index out of range");
                if (k > rowptr[r])
                    SK_REQUIRE(col[k] > col[k - 1], errc::invalid_arg, "columns must be strictly increasing per row");
            }
        }
    }
};

/// Row-by-row matrix source. The callback must be pure with respect to the
/// row index: the same row always yields the same entries.
template <class T>
struct RowSource {
    std::function<void(gidx row, lidx& len, gidx* cols, T* vals)> fn;
    gidx nrows = 0;
    gidx ncols = 0;
    lidx max_rowlen = 0;
};

/// Per-scope stable sort by descending nonzero count. Returns the row order:
/// order[k] is the original index of the row stored at position k. Rows never
/// cross scope boundaries; a final partial scope is sorted on its own.
inline std::vector<lidx> sigma_permutation(std::span<const lidx> rowlens, lidx sigma) {
    const gidx n = static_cast<gidx>(rowlens.size());
    std::vector<lidx> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    if (sigma <= 1) return order;
    for (gidx s = 0; s < n; s += sigma) {
        const gidx e = std::min<gidx>(n, s + sigma);
        std::stable_sort(order.begin() + s, order.begin() + e,
                         [&](lidx a, lidx b) { return rowlens[a] > rowlens[b]; });
    }
    return order;
}

/// SELL-C-sigma matrix: rows grouped into chunks of C, entries stored
/// column-wise within a chunk, rows padded to the chunk's longest row.
/// Padded slots hold value 0 and column 0 so their contribution vanishes.
template <class T>
class SellMatrix {
public:
    using value_type = T;

    lidx nrows = 0;
    lidx ncols = 0;
    lidx nrows_padded = 0;
    gidx nnz = 0;
    SellParams params;
    std::vector<lidx> chunk_len;     // per-chunk length l_c
    std::vector<gidx> chunk_offset;  // per-chunk start into val/col, length nchunks+1
    avector<T> val;
    avector<lidx> col;
    std::vector<lidx> row_perm;      // original row -> stored position
    std::vector<lidx> row_perm_inv;  // stored position -> original row
    std::vector<lidx> rowlen;        // per stored row, length nrows_padded
    double beta = 1.0;               // nnz / stored slots
    bool cols_permuted = false;

    /// Optional replacement for the built-in multiply; enables matrix-free
    /// operators. Receives (y, x, opts) in storage index space and must honor
    /// the full fused contract.
    std::function<void(DenseMat<T>& y, const DenseMat<T>& x, const SpmvOpts<T>& opts)> apply_override;

    gidx nchunks() const { return static_cast<gidx>(chunk_len.size()); }
    gidx stored_slots() const { return chunk_offset.empty() ? 0 : chunk_offset.back(); }
};

struct BuildOptions {
    /// Store column indices in the permuted index space (square matrices only).
    bool permute_columns = true;
    /// Use this row order instead of the sigma sort (used when several matrix
    /// parts must share one row order).
    std::vector<lidx> imposed_order;
};

struct StorageStats {
    double beta = 1.0;
    std::size_t bytes_total = 0;
    std::vector<std::pair<lidx, gidx>> chunk_histogram;  // chunk length -> count
};

namespace detail {

/// Layout pass shared by both build paths. Fills everything except val/col
/// content; `fetch(orig_row, cols_out, vals_out)` supplies row entries.
template <class T, class LenFn, class FetchFn>
SellMatrix<T> build_sell(gidx nrows_g, gidx ncols_g, SellParams params, const BuildOptions& opt,
                         LenFn&& length_of, FetchFn&& fetch) {
    validate(params, nrows_g);
    const lidx n = narrow_index(nrows_g);
    const lidx nc = narrow_index(ncols_g);
    SK_REQUIRE(n > 0, errc::invalid_arg, "matrix must have at least one row");

    SellMatrix<T> m;
    m.nrows = n;
    m.ncols = nc;
    m.params = params;
    m.cols_permuted = opt.permute_columns;
    SK_REQUIRE(!m.cols_permuted || n == nc, errc::invalid_arg,
               "column permutation requires a square matrix");

    std::vector<lidx> lens(static_cast<std::size_t>(n));
    for (lidx r = 0; r < n; ++r) lens[r] = length_of(r);

    if (!opt.imposed_order.empty()) {
        SK_REQUIRE(opt.imposed_order.size() == std::size_t(n), errc::invalid_arg,
                   "imposed row order has wrong length");
        m.row_perm_inv = opt.imposed_order;
    } else {
        m.row_perm_inv = sigma_permutation(lens, params.sigma);
    }
    m.row_perm.assign(static_cast<std::size_t>(n), 0);
    for (lidx k = 0; k < n; ++k) m.row_perm[m.row_perm_inv[k]] = k;

    const lidx C = params.chunk_height;
    const gidx nchunks = (gidx(n) + C - 1) / C;
    m.nrows_padded = static_cast<lidx>(nchunks * C);

    m.rowlen.assign(static_cast<std::size_t>(m.nrows_padded), 0);
    for (lidx k = 0; k < n; ++k) m.rowlen[k] = lens[m.row_perm_inv[k]];

    m.chunk_len.assign(static_cast<std::size_t>(nchunks), 0);
    m.chunk_offset.assign(static_cast<std::size_t>(nchunks) + 1, 0);
    for (gidx c = 0; c < nchunks; ++c) {
        lidx lc = 0;
        for (lidx i = 0; i < C; ++i) lc = std::max(lc, m.rowlen[c * C + i]);
        m.chunk_len[c] = lc;
        m.chunk_offset[c + 1] = m.chunk_offset[c] + gidx(C) * lc;
    }

    m.val.assign(static_cast<std::size_t>(m.stored_slots()), T{});
    m.col.assign(static_cast<std::size_t>(m.stored_slots()), 0);
    m.nnz = std::accumulate(lens.begin(), lens.end(), gidx(0));
    m.beta = m.stored_slots() > 0 ? double(m.nnz) / double(m.stored_slots()) : 1.0;

    // chunk filling is independent per chunk: parallel and bit-deterministic
    const auto blocks = worker_blocks(nchunks, num_workers());
    std::exception_ptr first_error = nullptr;
#pragma omp parallel
    {
        std::vector<gidx> cbuf;
        std::vector<T> vbuf;
#pragma omp for schedule(static)
        for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
            try {
                for (gidx c = blocks[bi].first; c < blocks[bi].second; ++c) {
                    for (lidx i = 0; i < C; ++i) {
                        const lidx stored = static_cast<lidx>(c * C + i);
                        if (stored >= n) continue;
                        const lidx orig = m.row_perm_inv[stored];
                        const lidx len = lens[orig];
                        cbuf.resize(static_cast<std::size_t>(len));
                        vbuf.resize(static_cast<std::size_t>(len));
                        fetch(orig, cbuf.data(), vbuf.data());
                        for (lidx j = 0; j < len; ++j) {
                            const gidx g = cbuf[j];
                            SK_REQUIRE(g >= 0 && g < ncols_g, errc::invalid_arg,
                                       "column index out of range");
                            const lidx stored_col =
                                m.cols_permuted ? m.row_perm[static_cast<lidx>(g)] : narrow_index(g);
                            const gidx slot = m.chunk_offset[c] + gidx(j) * C + i;
                            m.val[slot] = vbuf[j];
                            m.col[slot] = stored_col;
                        }
                    }
                }
            } catch (...) {
#pragma omp critical(sellkit_build_error)
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return m;
}

} // namespace detail

template <class T>
SellMatrix<T> build(const CrsData<T>& src, SellParams params, const BuildOptions& opt = {}) {
    return detail::build_sell<T>(
        src.nrows, src.ncols, params, opt, [&](lidx r) { return src.rowlen(r); },
        [&](lidx r, gidx* cols, T* vals) {
            const gidx b = src.rowptr[r];
            const gidx e = src.rowptr[r + 1];
            std::copy(src.col.begin() + b, src.col.begin() + e, cols);
            std::copy(src.val.begin() + b, src.val.begin() + e, vals);
        });
}

template <class T>
SellMatrix<T> build(const RowSource<T>& src, SellParams params, const BuildOptions& opt = {}) {
    SK_REQUIRE(bool(src.fn), errc::invalid_arg, "row source callback is empty");
    SK_REQUIRE(src.max_rowlen >= 0, errc::invalid_arg, "negative max_rowlen");
    // two passes over the source: row lengths first, entries second
    std::vector<gidx> cbuf(static_cast<std::size_t>(src.max_rowlen));
    std::vector<T> vbuf(static_cast<std::size_t>(src.max_rowlen));
    auto query = [&](gidx r, gidx* cols, T* vals) -> lidx {
        lidx len = 0;
        src.fn(r, len, cols, vals);
        SK_REQUIRE(len >= 0 && len <= src.max_rowlen, errc::invalid_arg,
                   "row longer than max_rowlen");
        return len;
    };
    return detail::build_sell<T>(
        src.nrows, src.ncols, params, opt, [&](lidx r) { return query(r, cbuf.data(), vbuf.data()); },
        [&](lidx r, gidx* cols, T* vals) { query(r, cols, vals); });
}

/// Replace the stored values from CRS data with the identical sparsity
/// pattern; layout, column indices and permutations stay untouched.
template <class T>
void update_values(SellMatrix<T>& m, const CrsData<T>& src) {
    SK_REQUIRE(src.nrows == m.nrows, errc::pattern_mismatch, "row count differs");
    SK_REQUIRE(src.nnz() == m.nnz, errc::pattern_mismatch, "nonzero count differs");
    const lidx C = m.params.chunk_height;
    for (lidx orig = 0; orig < m.nrows; ++orig) {
        const lidx stored = m.row_perm[orig];
        SK_REQUIRE(src.rowlen(orig) == m.rowlen[stored], errc::pattern_mismatch,
                   "row length differs from the stored pattern");
        const gidx c = stored / C;
        const lidx i = stored % C;
        const gidx base = m.chunk_offset[c];
        for (lidx j = 0; j < m.rowlen[stored]; ++j)
            m.val[base + gidx(j) * C + i] = src.val[src.rowptr[orig] + j];
    }
}

/// CRS of the logically unpermuted matrix; build -> to_crs round trips the
/// input pattern and values exactly. Entries keep their source order.
template <class T>
CrsData<T> to_crs(const SellMatrix<T>& m) {
    CrsData<T> out;
    out.nrows = m.nrows;
    out.ncols = m.ncols;
    out.rowptr.assign(static_cast<std::size_t>(m.nrows) + 1, 0);
    for (lidx orig = 0; orig < m.nrows; ++orig)
        out.rowptr[orig + 1] = out.rowptr[orig] + m.rowlen[m.row_perm[orig]];
    out.col.resize(static_cast<std::size_t>(out.rowptr.back()));
    out.val.resize(static_cast<std::size_t>(out.rowptr.back()));
    const lidx C = m.params.chunk_height;
    for (lidx orig = 0; orig < m.nrows; ++orig) {
        const lidx stored = m.row_perm[orig];
        const gidx c = stored / C;
        const lidx i = stored % C;
        const gidx base = m.chunk_offset[c];
        for (lidx j = 0; j < m.rowlen[stored]; ++j) {
            const lidx sc = m.col[base + gidx(j) * C + i];
            out.col[out.rowptr[orig] + j] = m.cols_permuted ? gidx(m.row_perm_inv[sc]) : gidx(sc);
            out.val[out.rowptr[orig] + j] = m.val[base + gidx(j) * C + i];
        }
    }
    return out;
}

template <class T>
StorageStats storage_stats(const SellMatrix<T>& m) {
    StorageStats s;
    s.beta = m.beta;
    s.bytes_total = std::size_t(m.stored_slots()) * (sizeof(T) + sizeof(lidx)) +
                    m.chunk_len.size() * sizeof(lidx) + m.chunk_offset.size() * sizeof(gidx) +
                    (m.row_perm.size() + m.row_perm_inv.size() + m.rowlen.size()) * sizeof(lidx);
    std::map<lidx, gidx> hist;
    for (lidx lc : m.chunk_len) hist[lc]++;
    s.chunk_histogram.assign(hist.begin(), hist.end());
    return s;
}

} // namespace sellkit
