// The extern "C" surface of the library. Handles wrap the C++ core types in a
// variant over the four scalar types; exceptions are mapped to error codes at
// this boundary.

#include "sellkit.h"

#include <cstring>
#include <variant>

#include "io.hpp"
#include "partition.hpp"
#include "perfmodel.hpp"
#include "sellcs.hpp"
#include "spmv.hpp"
#include "taskpool.hpp"
#include "tsm.hpp"

namespace sk = sellkit;

namespace {

using cf = std::complex<float>;
using cd = std::complex<double>;

template <template <class> class H>
using Any = std::variant<H<float>, H<double>, H<cf>, H<cd>>;

sk::Datatype from_c(sellkit_datatype dt) {
    switch (dt) {
        case SELLKIT_R32: return sk::Datatype::r32;
        case SELLKIT_R64: return sk::Datatype::r64;
        case SELLKIT_C32: return sk::Datatype::c32;
        case SELLKIT_C64: return sk::Datatype::c64;
    }
    sk::fail(sk::errc::invalid_arg, "unknown datatype");
}

sellkit_datatype to_c(sk::Datatype dt) {
    switch (dt) {
        case sk::Datatype::r32: return SELLKIT_R32;
        case sk::Datatype::r64: return SELLKIT_R64;
        case sk::Datatype::c32: return SELLKIT_C32;
        case sk::Datatype::c64: return SELLKIT_C64;
    }
    return SELLKIT_R64;
}

sellkit_error to_c(sk::errc c) { return static_cast<sellkit_error>(static_cast<int>(c)); }

template <class F>
sellkit_error guarded(F&& f) noexcept {
    try {
        f();
        return SELLKIT_OK;
    } catch (const sk::Error& e) {
        return to_c(e.code());
    } catch (const std::bad_alloc&) {
        return SELLKIT_ERR_ALLOC;
    } catch (...) {
        return SELLKIT_ERR_INVALID_ARG;
    }
}

template <class T>
T scalar_or(const void* p, T dflt) {
    if (!p) return dflt;
    T v;
    std::memcpy(&v, p, sizeof(T));
    return v;
}

void require(bool cond, const char* msg) {
    if (!cond) sk::fail(sk::errc::invalid_arg, msg);
}

// construct a variant holding H<T> for the runtime datatype
template <template <class> class H, class F>
Any<H> make_any(sk::Datatype dt, F&& f) {
    switch (dt) {
        case sk::Datatype::r32: return Any<H>{f.template operator()<float>()};
        case sk::Datatype::r64: return Any<H>{f.template operator()<double>()};
        case sk::Datatype::c32: return Any<H>{f.template operator()<cf>()};
        case sk::Datatype::c64: return Any<H>{f.template operator()<cd>()};
    }
    sk::fail(sk::errc::invalid_arg, "unknown datatype");
}

} // namespace

struct sellkit_crs {
    Any<sk::CrsData> v;
};
struct sellkit_mat {
    Any<sk::SellMatrix> v;
};
struct sellkit_densemat {
    Any<sk::DenseMat> v;
};
struct sellkit_ctx {
    Any<sk::DistContext> v;
};
struct sellkit_dvec {
    Any<sk::DistVec> v;
};
struct sellkit_pool {
    sk::TaskPool pool;
    explicit sellkit_pool(sk::PoolConfig cfg) : pool(std::move(cfg)) {}
};
struct sellkit_task {
    sk::TaskRef ref;
};
struct sellkit_region {
    sk::Region region;
    explicit sellkit_region(std::string name) : region(std::move(name)) {}
};

namespace {

template <class T>
sk::StorageOrder order_from(sellkit_order o) {
    return o == SELLKIT_ROW_MAJOR ? sk::StorageOrder::row_major : sk::StorageOrder::col_major;
}

template <class T>
sk::SpmvOpts<T> opts_from(const sellkit_spmv_opts* o, sellkit_densemat* z_override) {
    sk::SpmvOpts<T> opts;
    if (!o) return opts;
    opts.flags = o->flags;
    opts.alpha = scalar_or<T>(o->alpha, T{1});
    opts.beta = scalar_or<T>(o->beta, T{0});
    opts.delta = scalar_or<T>(o->delta, T{0});
    opts.eta = scalar_or<T>(o->eta, T{0});
    if (o->flags & SELLKIT_SPMV_VSHIFT)
        opts.gamma_list = static_cast<const T*>(o->gamma);
    else
        opts.gamma = scalar_or<T>(o->gamma, T{0});
    opts.dot = static_cast<T*>(o->dot);
    if (z_override) opts.z = &std::get<sk::DenseMat<T>>(z_override->v);
    return opts;
}

template <class T, class H>
T& typed(H& handle, const char* what) {
    auto* p = std::get_if<T>(&handle.v);
    if (!p) sk::fail(sk::errc::invalid_arg, std::string("datatype mismatch between ") + what);
    return *p;
}

template <class T>
sk::RowSource<T> make_rowsource(sellkit_gidx nrows, sellkit_gidx ncols, sellkit_lidx max_rowlen,
                                sellkit_row_fn fn, void* arg) {
    require(fn != nullptr, "row callback must not be null");
    sk::RowSource<T> src;
    src.nrows = nrows;
    src.ncols = ncols;
    src.max_rowlen = max_rowlen;
    src.fn = [fn, arg](sk::gidx row, sk::lidx& len, sk::gidx* cols, T* vals) {
        if (fn(row, &len, cols, vals, arg) != 0)
            sk::fail(sk::errc::invalid_arg, "row callback reported failure");
    };
    return src;
}

template <class T>
sk::CrsData<T> crs_from_rowsource(const sk::RowSource<T>& src) {
    sk::CrsData<T> out;
    out.nrows = src.nrows;
    out.ncols = src.ncols;
    out.rowptr.assign(static_cast<std::size_t>(src.nrows) + 1, 0);
    std::vector<sk::gidx> cbuf(static_cast<std::size_t>(src.max_rowlen));
    std::vector<T> vbuf(static_cast<std::size_t>(src.max_rowlen));
    for (sk::gidx r = 0; r < src.nrows; ++r) {
        sk::lidx len = 0;
        src.fn(r, len, cbuf.data(), vbuf.data());
        SK_REQUIRE(len >= 0 && len <= src.max_rowlen, sk::errc::invalid_arg,
                   "row longer than max_rowlen");
        out.rowptr[r + 1] = out.rowptr[r] + len;
        out.col.insert(out.col.end(), cbuf.begin(), cbuf.begin() + len);
        out.val.insert(out.val.end(), vbuf.begin(), vbuf.begin() + len);
    }
    out.validate();
    return out;
}

} // namespace

extern "C" {

/* ----------------------------------------------------------------- basics */

const char* sellkit_error_name(sellkit_error err) {
    return sk::errc_name(static_cast<sk::errc>(static_cast<int>(err)));
}

sellkit_error sellkit_narrow_index(sellkit_gidx g, sellkit_lidx* out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = sk::narrow_index(g);
    });
}

sellkit_error sellkit_buildconfig_chunk_heights(const int** out, size_t* n) {
    return guarded([&] {
        require(out && n, "null output");
        auto s = sk::specialized_chunk_heights();
        *out = s.data();
        *n = s.size();
    });
}

sellkit_error sellkit_buildconfig_block_widths(const int** out, size_t* n) {
    return guarded([&] {
        require(out && n, "null output");
        auto s = sk::specialized_block_widths();
        *out = s.data();
        *n = s.size();
    });
}

sellkit_error sellkit_set_num_workers(int n) {
    return guarded([&] { sk::set_num_workers(n); });
}

int sellkit_num_workers(void) { return sk::num_workers(); }

double sellkit_now_seconds(void) { return sk::now_seconds(); }

void sellkit_set_timer_override(double (*now_fn)(void*), void* arg) {
    sk::set_timer_override(now_fn, arg);
}

/* -------------------------------------------------------------------- crs */

sellkit_error sellkit_crs_create(sellkit_datatype dt, sellkit_gidx nrows, sellkit_gidx ncols,
                                 const sellkit_gidx* rowptr, const sellkit_gidx* col,
                                 const void* val, sellkit_crs** out) {
    return guarded([&] {
        require(out && rowptr, "null argument");
        require(nrows >= 0 && ncols >= 0, "negative dimension");
        const sk::gidx nnz = rowptr[nrows];
        require(nnz >= 0, "negative nonzero count");
        require(nnz == 0 || (col && val), "null payload");
        auto build = [&]<class T>() {
            sk::CrsData<T> c;
            c.nrows = nrows;
            c.ncols = ncols;
            c.rowptr.assign(rowptr, rowptr + nrows + 1);
            c.col.assign(col, col + nnz);
            c.val.assign(static_cast<const T*>(val), static_cast<const T*>(val) + nnz);
            c.validate();
            return c;
        };
        *out = new sellkit_crs{make_any<sk::CrsData>(from_c(dt), build)};
    });
}

sellkit_error sellkit_crs_from_rowfunc(sellkit_datatype dt, sellkit_gidx nrows, sellkit_gidx ncols,
                                       sellkit_lidx max_rowlen, sellkit_row_fn fn, void* arg,
                                       sellkit_crs** out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        auto build = [&]<class T>() {
            return crs_from_rowsource<T>(make_rowsource<T>(nrows, ncols, max_rowlen, fn, arg));
        };
        *out = new sellkit_crs{make_any<sk::CrsData>(from_c(dt), build)};
    });
}

sellkit_error sellkit_crs_read_mm(const char* path, sellkit_datatype dt, sellkit_crs** out) {
    return guarded([&] {
        require(path && out, "null argument");
        auto build = [&]<class T>() { return sk::read_matrix_market<T>(path); };
        *out = new sellkit_crs{make_any<sk::CrsData>(from_c(dt), build)};
    });
}

sellkit_error sellkit_crs_read_bin(const char* path, sellkit_crs** out) {
    return guarded([&] {
        require(path && out, "null argument");
        const auto header = sk::read_binary_crs_header(path);
        auto build = [&]<class T>() { return sk::read_binary_crs<T>(path); };
        *out = new sellkit_crs{make_any<sk::CrsData>(header.datatype(), build)};
    });
}

sellkit_error sellkit_crs_write_bin(const char* path, const sellkit_crs* crs, int wide_cols) {
    return guarded([&] {
        require(path && crs, "null argument");
        std::visit([&](const auto& c) { sk::write_binary_crs(path, c, wide_cols != 0); }, crs->v);
    });
}

sellkit_error sellkit_crs_dims(const sellkit_crs* crs, sellkit_gidx* nrows, sellkit_gidx* ncols,
                               sellkit_gidx* nnz) {
    return guarded([&] {
        require(crs != nullptr, "null handle");
        std::visit(
            [&](const auto& c) {
                if (nrows) *nrows = c.nrows;
                if (ncols) *ncols = c.ncols;
                if (nnz) *nnz = c.nnz();
            },
            crs->v);
    });
}

sellkit_datatype sellkit_crs_datatype(const sellkit_crs* crs) {
    return std::visit(
        [](const auto& c) {
            using T = typename std::decay_t<decltype(c)>::value_type;
            return to_c(sk::scalar_traits<T>::datatype);
        },
        crs->v);
}

void sellkit_crs_destroy(sellkit_crs* crs) { delete crs; }

/* ------------------------------------------------------------------- sell */

sellkit_error sellkit_mat_build(const sellkit_crs* crs, int chunk_height, int sigma,
                                sellkit_mat** out) {
    return guarded([&] {
        require(crs && out, "null argument");
        *out = new sellkit_mat{std::visit(
            [&](const auto& c) -> Any<sk::SellMatrix> {
                return sk::build(c, sk::SellParams{chunk_height, sigma});
            },
            crs->v)};
    });
}

sellkit_error sellkit_mat_build_rowfunc(sellkit_datatype dt, sellkit_gidx nrows, sellkit_gidx ncols,
                                        sellkit_lidx max_rowlen, sellkit_row_fn fn, void* arg,
                                        int chunk_height, int sigma, sellkit_mat** out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        auto build = [&]<class T>() {
            return sk::build(make_rowsource<T>(nrows, ncols, max_rowlen, fn, arg),
                             sk::SellParams{chunk_height, sigma});
        };
        *out = new sellkit_mat{make_any<sk::SellMatrix>(from_c(dt), build)};
    });
}

sellkit_error sellkit_mat_stats(const sellkit_mat* m, double* beta, uint64_t* bytes_total) {
    return guarded([&] {
        require(m != nullptr, "null handle");
        std::visit(
            [&](const auto& mat) {
                const auto s = sk::storage_stats(mat);
                if (beta) *beta = s.beta;
                if (bytes_total) *bytes_total = s.bytes_total;
            },
            m->v);
    });
}

sellkit_error sellkit_mat_update_values(sellkit_mat* m, const sellkit_crs* crs) {
    return guarded([&] {
        require(m && crs, "null argument");
        std::visit(
            [&](auto& mat) {
                using T = typename std::decay_t<decltype(mat)>::value_type;
                sk::update_values(mat, typed<sk::CrsData<T>>(const_cast<sellkit_crs&>(*crs),
                                                             "matrix and CRS data"));
            },
            m->v);
    });
}

sellkit_error sellkit_mat_to_crs(const sellkit_mat* m, sellkit_crs** out) {
    return guarded([&] {
        require(m && out, "null argument");
        *out = new sellkit_crs{std::visit(
            [](const auto& mat) -> Any<sk::CrsData> { return sk::to_crs(mat); }, m->v)};
    });
}

sellkit_error sellkit_mat_dims(const sellkit_mat* m, sellkit_lidx* nrows, sellkit_lidx* ncols,
                               sellkit_gidx* nnz) {
    return guarded([&] {
        require(m != nullptr, "null handle");
        std::visit(
            [&](const auto& mat) {
                if (nrows) *nrows = mat.nrows;
                if (ncols) *ncols = mat.ncols;
                if (nnz) *nnz = mat.nnz;
            },
            m->v);
    });
}

void sellkit_mat_destroy(sellkit_mat* m) { delete m; }

/* --------------------------------------------------------------- densemat */

sellkit_error sellkit_densemat_create(sellkit_datatype dt, sellkit_lidx nrows, sellkit_lidx ncols,
                                      sellkit_order order, sellkit_densemat** out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        auto build = [&]<class T>() {
            return sk::DenseMat<T>::create(nrows, ncols, order_from<T>(order));
        };
        *out = new sellkit_densemat{make_any<sk::DenseMat>(from_c(dt), build)};
    });
}

sellkit_error sellkit_densemat_view_plain(sellkit_datatype dt, void* buffer, size_t nelems,
                                          sellkit_lidx nrows, sellkit_lidx ncols,
                                          sellkit_lidx stride, sellkit_order order,
                                          sellkit_densemat** out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        auto build = [&]<class T>() {
            return sk::DenseMat<T>::view_plain(std::span<T>(static_cast<T*>(buffer), nelems),
                                               nrows, ncols, stride, order_from<T>(order));
        };
        *out = new sellkit_densemat{make_any<sk::DenseMat>(from_c(dt), build)};
    });
}

sellkit_error sellkit_densemat_view(const sellkit_densemat* parent, sellkit_lidx row_begin,
                                    sellkit_lidx row_end, const sellkit_lidx* cols,
                                    sellkit_lidx ncols, sellkit_densemat** out) {
    return guarded([&] {
        require(parent && cols && out, "null argument");
        *out = new sellkit_densemat{std::visit(
            [&](const auto& p) -> Any<sk::DenseMat> {
                return p.view(row_begin, row_end, std::span(cols, std::size_t(ncols)));
            },
            parent->v)};
    });
}

sellkit_error sellkit_densemat_compact_clone(const sellkit_densemat* m, sellkit_densemat** out) {
    return guarded([&] {
        require(m && out, "null argument");
        *out = new sellkit_densemat{std::visit(
            [](const auto& p) -> Any<sk::DenseMat> { return p.compact_clone(); }, m->v)};
    });
}

sellkit_error sellkit_densemat_convert_order(sellkit_densemat* m, sellkit_order new_order,
                                             int in_place, sellkit_densemat** out) {
    return guarded([&] {
        require(m != nullptr, "null handle");
        require(in_place || out, "out-of-place conversion needs an output handle");
        auto converted = std::visit(
            [&](auto& p) -> Any<sk::DenseMat> {
                using T = typename std::decay_t<decltype(p)>::value_type;
                return sk::convert_order(p, order_from<T>(new_order), in_place != 0);
            },
            m->v);
        if (out) *out = new sellkit_densemat{std::move(converted)};
    });
}

int sellkit_densemat_is_scattered(const sellkit_densemat* m) {
    if (!m) return 0;
    return std::visit([](const auto& p) { return p.scattered() ? 1 : 0; }, m->v);
}

sellkit_error sellkit_densemat_dims(const sellkit_densemat* m, sellkit_lidx* nrows,
                                    sellkit_lidx* ncols) {
    return guarded([&] {
        require(m != nullptr, "null handle");
        std::visit(
            [&](const auto& p) {
                if (nrows) *nrows = p.rows();
                if (ncols) *ncols = p.cols();
            },
            m->v);
    });
}

sellkit_error sellkit_densemat_copy_in(sellkit_densemat* m, const void* buf, size_t nelems) {
    return guarded([&] {
        require(m && buf, "null argument");
        std::visit(
            [&](auto& p) {
                using T = typename std::decay_t<decltype(p)>::value_type;
                p.copy_in(std::span(static_cast<const T*>(buf), nelems));
            },
            m->v);
    });
}

sellkit_error sellkit_densemat_copy_out(const sellkit_densemat* m, void* buf, size_t nelems) {
    return guarded([&] {
        require(m && buf, "null argument");
        std::visit(
            [&](const auto& p) {
                using T = typename std::decay_t<decltype(p)>::value_type;
                p.copy_out(std::span(static_cast<T*>(buf), nelems));
            },
            m->v);
    });
}

void sellkit_densemat_destroy(sellkit_densemat* m) { delete m; }

sellkit_error sellkit_axpby(sellkit_densemat* y, const sellkit_densemat* x, const void* alpha,
                            const void* beta) {
    return guarded([&] {
        require(y && x, "null argument");
        std::visit(
            [&](auto& ym) {
                using T = typename std::decay_t<decltype(ym)>::value_type;
                sk::axpby(ym,
                          typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*x), "y and x"),
                          scalar_or<T>(alpha, T{1}), scalar_or<T>(beta, T{1}));
            },
            y->v);
    });
}

sellkit_error sellkit_vaxpby(sellkit_densemat* y, const sellkit_densemat* x, const void* alphas,
                             const void* betas) {
    return guarded([&] {
        require(y && x && alphas && betas, "null argument");
        std::visit(
            [&](auto& ym) {
                using T = typename std::decay_t<decltype(ym)>::value_type;
                const std::size_t w = std::size_t(ym.cols());
                sk::vaxpby(ym,
                           typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*x), "y and x"),
                           std::span(static_cast<const T*>(alphas), w),
                           std::span(static_cast<const T*>(betas), w));
            },
            y->v);
    });
}

sellkit_error sellkit_scal(sellkit_densemat* x, const void* factor) {
    return guarded([&] {
        require(x && factor, "null argument");
        std::visit(
            [&](auto& xm) {
                using T = typename std::decay_t<decltype(xm)>::value_type;
                sk::scal(xm, scalar_or<T>(factor, T{1}));
            },
            x->v);
    });
}

sellkit_error sellkit_vscal(sellkit_densemat* x, const void* factors) {
    return guarded([&] {
        require(x && factors, "null argument");
        std::visit(
            [&](auto& xm) {
                using T = typename std::decay_t<decltype(xm)>::value_type;
                sk::vscal(xm, std::span(static_cast<const T*>(factors), std::size_t(xm.cols())));
            },
            x->v);
    });
}

sellkit_error sellkit_dot(const sellkit_densemat* a, const sellkit_densemat* b, void* out) {
    return guarded([&] {
        require(a && b && out, "null argument");
        std::visit(
            [&](const auto& am) {
                using T = typename std::decay_t<decltype(am)>::value_type;
                const auto r = sk::dot(
                    am, typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*b), "a and b"));
                std::memcpy(out, r.data(), r.size() * sizeof(T));
            },
            a->v);
    });
}

/* -------------------------------------------------------------------- tsm */

sellkit_error sellkit_tsmttsm(sellkit_densemat* x, const sellkit_densemat* v,
                              const sellkit_densemat* w, const void* alpha, const void* beta,
                              int kahan) {
    return guarded([&] {
        require(x && v && w, "null argument");
        std::visit(
            [&](auto& xm) {
                using T = typename std::decay_t<decltype(xm)>::value_type;
                sk::tsmttsm(xm,
                            typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*v), "x and v"),
                            typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*w), "x and w"),
                            scalar_or<T>(alpha, T{1}), scalar_or<T>(beta, T{0}), kahan != 0);
            },
            x->v);
    });
}

sellkit_error sellkit_tsmm(sellkit_densemat* w, const sellkit_densemat* v,
                           const sellkit_densemat* x, const void* alpha, const void* beta) {
    return guarded([&] {
        require(w && v && x, "null argument");
        std::visit(
            [&](auto& wm) {
                using T = typename std::decay_t<decltype(wm)>::value_type;
                sk::tsmm(wm, typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*v), "w and v"),
                         typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*x), "w and x"),
                         scalar_or<T>(alpha, T{1}), scalar_or<T>(beta, T{0}));
            },
            w->v);
    });
}

sellkit_error sellkit_tsmm_inplace(sellkit_densemat* v, const sellkit_densemat* x,
                                   const void* alpha, const void* beta) {
    return guarded([&] {
        require(v && x, "null argument");
        std::visit(
            [&](auto& vm) {
                using T = typename std::decay_t<decltype(vm)>::value_type;
                sk::tsmm_inplace(vm,
                                 typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*x),
                                                        "v and x"),
                                 scalar_or<T>(alpha, T{1}), scalar_or<T>(beta, T{0}));
            },
            v->v);
    });
}

sellkit_error sellkit_gemm(sellkit_densemat* c, const sellkit_densemat* a,
                           const sellkit_densemat* b, const void* alpha, const void* beta,
                           sellkit_trans ta, sellkit_trans tb) {
    return guarded([&] {
        require(c && a && b, "null argument");
        auto conv = [](sellkit_trans t) {
            switch (t) {
                case SELLKIT_TRANS_NONE: return sk::Trans::none;
                case SELLKIT_TRANS_T: return sk::Trans::transpose;
                case SELLKIT_TRANS_C: return sk::Trans::conj_transpose;
            }
            sk::fail(sk::errc::invalid_arg, "unknown transpose mode");
        };
        std::visit(
            [&](auto& cm) {
                using T = typename std::decay_t<decltype(cm)>::value_type;
                sk::gemm(cm, typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*a), "c and a"),
                         typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*b), "c and b"),
                         scalar_or<T>(alpha, T{1}), scalar_or<T>(beta, T{0}), conv(ta), conv(tb));
            },
            c->v);
    });
}

/* ------------------------------------------------------------------- spmv */

void sellkit_spmv_opts_init(sellkit_spmv_opts* opts) {
    if (opts) std::memset(opts, 0, sizeof(*opts));
}

sellkit_error sellkit_spmv(sellkit_densemat* y, const sellkit_mat* a, const sellkit_densemat* x,
                           const sellkit_spmv_opts* opts) {
    return guarded([&] {
        require(y && a && x, "null argument");
        std::visit(
            [&](auto& ym) {
                using T = typename std::decay_t<decltype(ym)>::value_type;
                auto o = opts_from<T>(opts, opts ? opts->z : nullptr);
                sk::spmv(ym, typed<sk::SellMatrix<T>>(const_cast<sellkit_mat&>(*a), "y and A"),
                         typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*x), "y and x"), o);
            },
            y->v);
    });
}

sellkit_error sellkit_select_kernel(int chunk_height, sellkit_lidx block_width,
                                    sellkit_order order, int* variant_chunk, int* variant_width,
                                    int* vectorized) {
    return guarded([&] {
        const auto v = sk::select_kernel(sk::SellParams{chunk_height, 1}, block_width,
                                         order == SELLKIT_ROW_MAJOR
                                             ? sk::StorageOrder::row_major
                                             : sk::StorageOrder::col_major);
        if (variant_chunk) *variant_chunk = v.chunk_height;
        if (variant_width) *variant_width = v.block_width;
        if (vectorized) *vectorized = v.vectorized ? 1 : 0;
    });
}

/* ------------------------------------------------------------ distributed */

sellkit_error sellkit_partition_compute(sellkit_gidx n, const sellkit_lidx* rowlens,
                                        const double* weights, int nranks,
                                        sellkit_weight_mode mode, sellkit_gidx* offsets_out) {
    return guarded([&] {
        require(weights && offsets_out, "null argument");
        sk::RankWeights rw;
        rw.weights.assign(weights, weights + nranks);
        rw.mode = mode == SELLKIT_BY_NNZ ? sk::WeightMode::by_nnz : sk::WeightMode::by_rows;
        std::span<const sk::lidx> lens;
        if (rowlens) lens = std::span(rowlens, std::size_t(n));
        const auto plan = sk::compute_partition(n, lens, rw);
        std::copy(plan.row_offset.begin(), plan.row_offset.end(), offsets_out);
    });
}

sellkit_error sellkit_ctx_create(const sellkit_crs* a, const double* weights, int nranks,
                                 sellkit_weight_mode mode, int chunk_height, int sigma,
                                 int record_transport, sellkit_ctx** out) {
    return guarded([&] {
        require(a && out && nranks >= 1, "null argument");
        sk::RankWeights rw;
        if (weights)
            rw.weights.assign(weights, weights + nranks);
        else
            rw.weights.assign(std::size_t(nranks), 1.0);
        rw.mode = mode == SELLKIT_BY_NNZ ? sk::WeightMode::by_nnz : sk::WeightMode::by_rows;
        *out = new sellkit_ctx{std::visit(
            [&](const auto& crs) -> Any<sk::DistContext> {
                using T = typename std::decay_t<decltype(crs)>::value_type;
                return sk::DistContext<T>::build_context(crs, rw,
                                                         sk::SellParams{chunk_height, sigma},
                                                         record_transport != 0);
            },
            a->v)};
    });
}

sellkit_error sellkit_ctx_rank_range(const sellkit_ctx* ctx, int rank, sellkit_gidx* first,
                                     sellkit_gidx* count) {
    return guarded([&] {
        require(ctx != nullptr, "null handle");
        std::visit(
            [&](const auto& c) {
                require(rank >= 0 && rank < c.nranks(), "rank out of range");
                if (first) *first = c.plan.row_offset[rank];
                if (count) *count = c.plan.row_offset[rank + 1] - c.plan.row_offset[rank];
            },
            ctx->v);
    });
}

sellkit_error sellkit_ctx_halo_size(const sellkit_ctx* ctx, int rank, sellkit_lidx* n_halo) {
    return guarded([&] {
        require(ctx && n_halo, "null argument");
        std::visit(
            [&](const auto& c) {
                require(rank >= 0 && rank < c.nranks(), "rank out of range");
                *n_halo = c.ranks[rank].n_halo();
            },
            ctx->v);
    });
}

sellkit_error sellkit_ctx_comm_stats(const sellkit_ctx* ctx, uint64_t* total_bytes,
                                     uint64_t* total_messages) {
    return guarded([&] {
        require(ctx != nullptr, "null handle");
        std::visit(
            [&](const auto& c) {
                SK_REQUIRE(c.recorder != nullptr, sk::errc::state,
                           "context was created without transport recording");
                if (total_bytes) *total_bytes = c.recorder->total_bytes_sent();
                if (total_messages) {
                    uint64_t msgs = 0;
                    for (int r = 0; r < c.nranks(); ++r) msgs += c.recorder->messages_sent_by(r);
                    *total_messages = msgs;
                }
            },
            ctx->v);
    });
}

sellkit_error sellkit_ctx_reset_comm_stats(sellkit_ctx* ctx) {
    return guarded([&] {
        require(ctx != nullptr, "null handle");
        std::visit(
            [&](auto& c) {
                SK_REQUIRE(c.recorder != nullptr, sk::errc::state,
                           "context was created without transport recording");
                c.recorder->reset_counters();
            },
            ctx->v);
    });
}

void sellkit_ctx_destroy(sellkit_ctx* ctx) { delete ctx; }

sellkit_error sellkit_dvec_create(const sellkit_ctx* ctx, sellkit_lidx width, sellkit_order order,
                                  sellkit_dvec** out) {
    return guarded([&] {
        require(ctx && out, "null argument");
        *out = new sellkit_dvec{std::visit(
            [&](const auto& c) -> Any<sk::DistVec> {
                using T = typename std::decay_t<decltype(c)>::value_type;
                return c.make_vec(width, order_from<T>(order));
            },
            ctx->v)};
    });
}

sellkit_error sellkit_dvec_scatter(const sellkit_ctx* ctx, const sellkit_densemat* global,
                                   sellkit_dvec* v) {
    return guarded([&] {
        require(ctx && global && v, "null argument");
        std::visit(
            [&](const auto& c) {
                using T = typename std::decay_t<decltype(c)>::value_type;
                c.scatter(typed<sk::DenseMat<T>>(const_cast<sellkit_densemat&>(*global),
                                                 "context and vector"),
                          typed<sk::DistVec<T>>(*v, "context and vector"));
            },
            ctx->v);
    });
}

sellkit_error sellkit_dvec_gather(const sellkit_ctx* ctx, const sellkit_dvec* v,
                                  sellkit_densemat* out) {
    return guarded([&] {
        require(ctx && v && out, "null argument");
        std::visit(
            [&](const auto& c) {
                using T = typename std::decay_t<decltype(c)>::value_type;
                c.gather(typed<sk::DistVec<T>>(const_cast<sellkit_dvec&>(*v),
                                               "context and vector"),
                         typed<sk::DenseMat<T>>(*out, "context and vector"));
            },
            ctx->v);
    });
}

void sellkit_dvec_destroy(sellkit_dvec* v) { delete v; }

sellkit_error sellkit_dist_spmv(sellkit_dvec* y, sellkit_ctx* ctx, const sellkit_dvec* x,
                                const sellkit_spmv_opts* opts, sellkit_dist_mode mode,
                                sellkit_dvec* z, int pus_per_rank) {
    return guarded([&] {
        require(y && ctx && x, "null argument");
        require(!opts || opts->z == nullptr, "distributed chain target must be a sellkit_dvec");
        std::visit(
            [&](auto& c) {
                using T = typename std::decay_t<decltype(c)>::value_type;
                auto o = opts_from<T>(opts, nullptr);
                sk::DistVec<T>* zz =
                    z ? &typed<sk::DistVec<T>>(*z, "context and z") : nullptr;
                sk::DistMode m = mode == SELLKIT_NO_OVERLAP ? sk::DistMode::no_overlap
                                 : mode == SELLKIT_NAIVE_OVERLAP ? sk::DistMode::naive_overlap
                                                                 : sk::DistMode::task_overlap;
                std::vector<std::unique_ptr<sk::TaskPool>> pools;
                std::vector<sk::TaskPool*> ptrs;
                if (m == sk::DistMode::task_overlap) {
                    const int pus = pus_per_rank > 0 ? pus_per_rank : 4;
                    for (int r = 0; r < c.nranks(); ++r)
                        pools.push_back(std::make_unique<sk::TaskPool>(sk::PoolConfig{.npus = pus}));
                    for (auto& p : pools) ptrs.push_back(p.get());
                }
                sk::dist_spmv(typed<sk::DistVec<T>>(*y, "context and y"), c,
                              typed<sk::DistVec<T>>(const_cast<sellkit_dvec&>(*x),
                                                    "context and x"),
                              o, m, zz, std::span<sk::TaskPool* const>(ptrs));
            },
            ctx->v);
    });
}

sellkit_error sellkit_spmv_nocomm(sellkit_dvec* y, sellkit_ctx* ctx, const sellkit_dvec* x,
                                  const sellkit_spmv_opts* opts, sellkit_dvec* z) {
    return guarded([&] {
        require(y && ctx && x, "null argument");
        std::visit(
            [&](auto& c) {
                using T = typename std::decay_t<decltype(c)>::value_type;
                auto o = opts_from<T>(opts, nullptr);
                sk::DistVec<T>* zz =
                    z ? &typed<sk::DistVec<T>>(*z, "context and z") : nullptr;
                sk::spmv_pseudo_nocomm(typed<sk::DistVec<T>>(*y, "context and y"), c,
                                       typed<sk::DistVec<T>>(const_cast<sellkit_dvec&>(*x),
                                                             "context and x"),
                                       o, zz);
            },
            ctx->v);
    });
}

/* -------------------------------------------------------------- task pool */

sellkit_error sellkit_pool_create(int npus, const int* numa_of_pu, int nshepherds,
                                  sellkit_pool** out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        sk::PoolConfig cfg;
        cfg.npus = npus;
        if (numa_of_pu) cfg.numa_of_pu.assign(numa_of_pu, numa_of_pu + npus);
        cfg.nshepherds = nshepherds;
        *out = new sellkit_pool(std::move(cfg));
    });
}

sellkit_error sellkit_task_create(sellkit_pool* pool, sellkit_task_fn fn, void* arg, int nthreads,
                                  int numanode, uint32_t flags, sellkit_task** out) {
    return guarded([&] {
        require(pool && fn && out, "null argument");
        *out = new sellkit_task{pool->pool.create_task(fn, arg, nthreads, numanode, flags)};
    });
}

sellkit_error sellkit_task_add_dependency(sellkit_task* task, sellkit_task* dep) {
    return guarded([&] {
        require(task && dep, "null argument");
        SK_REQUIRE(task->ref->state.load() == sk::TaskState::created, sk::errc::state,
                   "dependencies must be added before enqueue");
        task->ref->depends.push_back(dep->ref);
    });
}

sellkit_error sellkit_task_enqueue(sellkit_pool* pool, sellkit_task* task) {
    return guarded([&] {
        require(pool && task, "null argument");
        pool->pool.enqueue(task->ref);
    });
}

sellkit_error sellkit_task_spawn_child(sellkit_pool* pool, sellkit_task* task) {
    return guarded([&] {
        require(pool && task, "null argument");
        pool->pool.spawn_child(task->ref);
    });
}

sellkit_error sellkit_task_wait(sellkit_pool* pool, sellkit_task* task, void** ret) {
    return guarded([&] {
        require(pool && task, "null argument");
        void* r = pool->pool.wait(task->ref);
        if (ret) *ret = r;
    });
}

sellkit_error sellkit_pool_current_task(sellkit_pool* pool, sellkit_task** out) {
    return guarded([&] {
        require(pool && out, "null argument");
        auto cur = pool->pool.current_task();
        *out = cur ? new sellkit_task{cur} : nullptr;
    });
}

sellkit_error sellkit_task_state_of(const sellkit_task* task, sellkit_task_state* state) {
    return guarded([&] {
        require(task && state, "null argument");
        *state = static_cast<sellkit_task_state>(static_cast<int>(task->ref->state.load()));
    });
}

sellkit_error sellkit_task_destroy(sellkit_pool* pool, sellkit_task* task) {
    return guarded([&] {
        require(pool && task, "null argument");
        pool->pool.destroy(task->ref);
        delete task;
    });
}

sellkit_error sellkit_pool_shutdown(sellkit_pool* pool) {
    return guarded([&] {
        require(pool != nullptr, "null handle");
        pool->pool.shutdown();
    });
}

int sellkit_pool_npus(const sellkit_pool* pool) { return pool ? pool->pool.npus() : 0; }

int sellkit_pool_num_numa_nodes(const sellkit_pool* pool) {
    return pool ? pool->pool.num_numa_nodes() : 0;
}

sellkit_error sellkit_pool_numa_node_of(const sellkit_pool* pool, int pu, int* node) {
    return guarded([&] {
        require(pool && node, "null argument");
        *node = pool->pool.numa_node_of(pu);
    });
}

sellkit_error sellkit_pool_trace(const sellkit_pool* pool, char** out) {
    return guarded([&] {
        require(pool && out, "null argument");
        const std::string text = pool->pool.trace_text();
        *out = new char[text.size() + 1];
        std::memcpy(*out, text.c_str(), text.size() + 1);
    });
}

void sellkit_pool_destroy(sellkit_pool* pool) { delete pool; }

void sellkit_string_free(char* s) { delete[] s; }

/* -------------------------------------------------------- performance model */

sellkit_error sellkit_spmv_code_balance(sellkit_datatype dt, int index_bytes, int include_vectors,
                                        double avg_nnz_per_row, double* out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = sk::spmv_code_balance(from_c(dt), index_bytes, include_vectors != 0,
                                     avg_nnz_per_row);
    });
}

sellkit_error sellkit_index_width_saving(int value_bytes, double* out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = sk::index_width_saving(value_bytes);
    });
}

sellkit_error sellkit_roofline_bound(double bandwidth_gbs, double peak_gflops, double code_balance,
                                     double* out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = sk::roofline_bound(sk::MachineModel{bandwidth_gbs, peak_gflops}, code_balance);
    });
}

sellkit_error sellkit_crs_refresh_cost(sellkit_gidx nnz, int value_bytes,
                                       double spmv_traffic_per_call, double* out) {
    return guarded([&] {
        require(out != nullptr, "null output");
        *out = sk::crs_refresh_cost(nnz, value_bytes, spmv_traffic_per_call);
    });
}

sellkit_error sellkit_region_create(const char* name, sellkit_region** out) {
    return guarded([&] {
        require(name && out, "null argument");
        *out = new sellkit_region(name);
    });
}

sellkit_error sellkit_region_record(sellkit_region* region, double sample) {
    return guarded([&] {
        require(region != nullptr, "null handle");
        region->region.record(sample);
    });
}

sellkit_error sellkit_region_p_max(const sellkit_region* region, double* out) {
    return guarded([&] {
        require(region && out, "null argument");
        *out = region->region.p_max();
    });
}

sellkit_error sellkit_region_p_skip10(const sellkit_region* region, double* out) {
    return guarded([&] {
        require(region && out, "null argument");
        *out = region->region.p_skip10();
    });
}

sellkit_error sellkit_region_table(const sellkit_region* const* regions, int nregions, char** out) {
    return guarded([&] {
        require(regions && out, "null argument");
        std::vector<const sk::Region*> rs;
        rs.reserve(std::size_t(nregions));
        for (int i = 0; i < nregions; ++i) rs.push_back(&regions[i]->region);
        const std::string text = sk::region_table(rs);
        *out = new char[text.size() + 1];
        std::memcpy(*out, text.c_str(), text.size() + 1);
    });
}

void sellkit_region_destroy(sellkit_region* region) { delete region; }

} // extern "C"
