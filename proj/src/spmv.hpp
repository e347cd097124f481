#pragma once

#include <cstring>
#include <vector>

#include "densemat.hpp"
#include "sellcs.hpp"
#include "spmv_args.hpp"
#include "spmv_epilogue.hpp"

namespace sellkit {

/// Option record of the fused SpMV: y = alpha*(A - gamma*I)*x + beta*y with
/// optional chained dot products and z = delta*z + eta*y.
template <class T>
struct SpmvOpts {
    T alpha{1};
    T beta{0};
    T gamma{0};                      // SHIFT
    const T* gamma_list = nullptr;   // VSHIFT, one entry per block column
    T delta{0};
    T eta{0};
    DenseMat<T>* z = nullptr;        // CHAIN_AXPBY target
    T* dot = nullptr;                // 3 * block width
    std::uint32_t flags = 0;
};

struct BuildConfig {
    std::span<const int> chunk_heights;
    std::span<const int> block_widths;
};

inline BuildConfig build_config() {
    return BuildConfig{specialized_chunk_heights(), specialized_block_widths()};
}

/// A resolved kernel in the dispatch cascade; 0 means the generic dimension.
struct KernelVariant {
    int chunk_height = 0;
    int block_width = 0;
    bool vectorized = false;
};

/// Walk the specialization cascade from most to least specialized; the bottom
/// (generic/generic/plain) always exists. Specialized kernels are generated
/// for row-major block vectors; column-major input selects the generic one.
inline KernelVariant select_kernel(const SellParams& params, lidx block_width, StorageOrder order,
                                   const BuildConfig& cfg = build_config()) {
    auto has = [](std::span<const int> list, gidx v) {
        for (int e : list)
            if (e == v) return true;
        return false;
    };
    const bool c_ok = has(cfg.chunk_heights, params.chunk_height);
    const bool w_ok = has(cfg.block_widths, block_width);
    if (order == StorageOrder::row_major) {
        if (c_ok && w_ok) return {params.chunk_height, static_cast<int>(block_width), true};
        if (c_ok) return {params.chunk_height, 0, true};
        if (w_ok) return {0, static_cast<int>(block_width), true};
    }
    return {0, 0, false};
}

namespace kernels {

/// Generic fallback: any scalar type, runtime chunk height and width, any
/// storage order via strided addressing.
template <class T>
void spmv_generic(const SpmvArgs<T>& a, gidx c0, gidx c1, T* dotp) {
    const lidx C = a.chunk_height;
    const lidx w = a.width;
    std::vector<T> acc(static_cast<std::size_t>(C) * w);
    for (gidx c = c0; c < c1; ++c) {
        const gidx off = a.chunk_offset[c];
        const lidx len = a.chunk_len[c];
        std::fill(acc.begin(), acc.end(), T{});
        for (lidx j = 0; j < len; ++j) {
            const T* vj = a.val + off + gidx(j) * C;
            const lidx* cj = a.col + off + gidx(j) * C;
            for (lidx r = 0; r < C; ++r) {
                const T m = vj[r];
                const T* xr = a.x + gidx(cj[r]) * a.x_row_stride;
                T* ar = acc.data() + std::size_t(r) * w;
                for (lidx v = 0; v < w; ++v) ar[v] += m * xr[v * a.x_col_step];
            }
        }
        for (lidx r = 0; r < C; ++r) {
            const gidx row = c * C + r;
            if (row < a.nrows) spmv_store_row<T>(a, row, acc.data() + std::size_t(r) * w, dotp);
        }
    }
}

kernels::spmv_fn_d lookup_variant(const KernelVariant& v);

} // namespace kernels

template <class T>
void validate_spmv_inputs(DenseMat<T>& y, const SellMatrix<T>& A, const DenseMat<T>& x,
                          const SpmvOpts<T>& opts) {
    SK_REQUIRE(!y.scattered() && !x.scattered(), errc::unsupported,
               "scattered views are not supported by spmv; make a compact clone first");
    SK_REQUIRE(x.rows() == A.ncols, errc::shape_mismatch, "x rows must equal matrix columns");
    SK_REQUIRE(y.rows() == A.nrows, errc::shape_mismatch, "y rows must equal matrix rows");
    SK_REQUIRE(x.cols() == y.cols(), errc::shape_mismatch, "x and y must have the same width");
    SK_REQUIRE(y.data() != x.data(), errc::invalid_arg, "y must not alias x");
    const auto f = opts.flags;
    SK_REQUIRE((f & ~spmv_flag_all) == 0, errc::invalid_arg, "unknown spmv flag");
    SK_REQUIRE(!((f & spmv_flag_shift) && (f & spmv_flag_vshift)), errc::invalid_arg,
               "SHIFT and VSHIFT are mutually exclusive");
    if (f & (spmv_flag_shift | spmv_flag_vshift))
        SK_REQUIRE(A.nrows == A.ncols, errc::shape_mismatch, "shift requires a square matrix");
    if (f & spmv_flag_vshift)
        SK_REQUIRE(opts.gamma_list != nullptr, errc::invalid_arg, "VSHIFT requires a gamma list");
    if (f & (spmv_flag_dot_yy | spmv_flag_dot_xy | spmv_flag_dot_xx))
        SK_REQUIRE(opts.dot != nullptr, errc::invalid_arg, "dot flags require a dot buffer");
    if (f & (spmv_flag_dot_xy | spmv_flag_dot_xx))
        SK_REQUIRE(x.rows() == y.rows(), errc::shape_mismatch,
                   "<x,y> and <x,x> require equal x and y row counts");
    if (f & spmv_flag_chain_axpby) {
        SK_REQUIRE(opts.z != nullptr, errc::invalid_arg, "CHAIN_AXPBY requires z");
        SK_REQUIRE(opts.z->same_shape(y), errc::shape_mismatch, "z must have the shape of y");
        SK_REQUIRE(!opts.z->scattered(), errc::unsupported, "z must be compact");
    }
}

/// The unified sparse matrix (multiple-)vector multiply. Runs the most
/// specialized registered kernel and falls back to the generic one.
template <class T>
void spmv(DenseMat<T>& y, const SellMatrix<T>& A, const DenseMat<T>& x, const SpmvOpts<T>& opts = {}) {
    validate_spmv_inputs(y, A, x, opts);
    if (A.apply_override) {
        A.apply_override(y, x, opts);
        return;
    }

    kernels::SpmvArgs<T> a;
    a.chunk_offset = A.chunk_offset.data();
    a.chunk_len = A.chunk_len.data();
    a.val = A.val.data();
    a.col = A.col.data();
    a.nrows = A.nrows;
    a.chunk_height = A.params.chunk_height;
    a.nchunks = A.nchunks();
    a.y = y.data();
    a.y_row_stride = y.row_stride();
    a.y_col_step = y.col_step();
    a.x = x.data();
    a.x_row_stride = x.row_stride();
    a.x_col_step = x.col_step();
    if (opts.z) {
        a.z = opts.z->data();
        a.z_row_stride = opts.z->row_stride();
        a.z_col_step = opts.z->col_step();
    }
    a.width = x.cols();
    a.flags = opts.flags;
    a.alpha = opts.alpha;
    a.beta = opts.beta;
    a.delta = opts.delta;
    a.eta = opts.eta;
    a.gamma0 = opts.gamma;
    a.gamma_list = opts.gamma_list;

    kernels::spmv_fn_d fn = nullptr;
    if constexpr (std::is_same_v<T, double>) {
        const KernelVariant v = select_kernel(A.params, x.cols(), x.order());
        if (x.order() == StorageOrder::row_major && y.order() == StorageOrder::row_major &&
            (!opts.z || opts.z->order() == StorageOrder::row_major))
            fn = kernels::lookup_variant(v);
    }

    const auto blocks = detail::worker_blocks(a.nchunks, num_workers());
    const std::size_t dotn = 3 * std::size_t(a.width);
    std::vector<T> partials(blocks.size() * dotn, T{});
#pragma omp parallel for schedule(static)
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        T* dotp = partials.data() + bi * dotn;
        if constexpr (std::is_same_v<T, double>) {
            if (fn) {
                fn(a, blocks[bi].first, blocks[bi].second, dotp);
                continue;
            }
        }
        kernels::spmv_generic(a, blocks[bi].first, blocks[bi].second, dotp);
    }

    if (opts.flags & (spmv_flag_dot_yy | spmv_flag_dot_xy | spmv_flag_dot_xx)) {
        const lidx w = a.width;
        auto combine = [&](std::size_t seg) {
            for (lidx v = 0; v < w; ++v) {
                T s{};
                for (std::size_t bi = 0; bi < blocks.size(); ++bi)
                    s += partials[bi * dotn + seg * w + v];
                opts.dot[seg * w + v] = s;
            }
        };
        if (opts.flags & spmv_flag_dot_yy) combine(0);
        if (opts.flags & spmv_flag_dot_xy) combine(1);
        if (opts.flags & spmv_flag_dot_xx) combine(2);
    }
}

} // namespace sellkit
