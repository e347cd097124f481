#pragma once

#include <type_traits>
#include <vector>

#include "densemat.hpp"
#include "types.hpp"

namespace sellkit {

/// Both dimensions of a replicated small matrix must stay below this bound;
/// gemm uses it to decide when an operand counts as small or tall-skinny.
inline constexpr lidx small_dim_bound = 64;

namespace kernels {

using tsmttsm_fn_d = void (*)(const double* v, gidx v_rs, const double* w, gidx w_rs,
                              double* x_acc /* m*k col-major */, gidx row_begin, gidx row_end);
using tsmm_fn_d = void (*)(double* w, gidx w_rs, const double* v, gidx v_rs,
                           const double* x_cm /* m*k col-major */, double alpha, double beta,
                           gidx row_begin, gidx row_end);

struct TsmttsmVariant {
    int m, k;
    tsmttsm_fn_d fn;
};
struct TsmmVariant {
    int m, k;
    tsmm_fn_d fn;
};

const TsmttsmVariant* tsmttsm_variants(std::size_t* n);
const TsmmVariant* tsmm_variants(std::size_t* n);

/// Fixed-dimension accumulation kernel for row-major compact inputs;
/// instantiated at build time for the configured block widths.
template <class T, int M, int K>
void tsmttsm_fixed(const T* v, gidx v_rs, const T* w, gidx w_rs, T* x_acc, gidx row_begin,
                   gidx row_end) {
    for (gidx i = row_begin; i < row_end; ++i) {
        const T* vr = v + i * v_rs;
        const T* wr = w + i * w_rs;
        for (int m = 0; m < M; ++m) {
            const T vm = conj_of(vr[m]);
#pragma omp simd
            for (int k = 0; k < K; ++k) x_acc[k * M + m] += vm * wr[k];
        }
    }
}

template <class T, int M, int K>
void tsmm_fixed(T* w, gidx w_rs, const T* v, gidx v_rs, const T* x_cm, T alpha, T beta,
                gidx row_begin, gidx row_end) {
    for (gidx i = row_begin; i < row_end; ++i) {
        const T* vr = v + i * v_rs;
        T* wr = w + i * w_rs;
        T tmp[K];
#pragma omp simd
        for (int k = 0; k < K; ++k) tmp[k] = T{};
        for (int m = 0; m < M; ++m) {
            const T vm = vr[m];
#pragma omp simd
            for (int k = 0; k < K; ++k) tmp[k] += vm * x_cm[k * M + m];
        }
#pragma omp simd
        for (int k = 0; k < K; ++k) wr[k] = alpha * tmp[k] + beta * wr[k];
    }
}

/// Compensated accumulator (Kahan-Babuska-Neumaier): the running compensation
/// is added back at the end, which keeps cancellation-heavy sums exact where
/// plain Kahan loses the correction term.
template <class T>
struct CompensatedSum {
    T sum{};
    T comp{};

    void add(T x) {
        const T t = sum + x;
        if (abs_of(sum) >= abs_of(x))
            comp += (sum - t) + x;
        else
            comp += (x - t) + sum;
        sum = t;
    }
    T result() const { return sum + comp; }
};

} // namespace kernels

namespace detail {

template <class T>
void normalize_small_colmajor(const DenseMat<T>& x, std::vector<T>& out) {
    out.resize(std::size_t(x.rows()) * x.cols());
    for (lidx j = 0; j < x.cols(); ++j)
        for (lidx i = 0; i < x.rows(); ++i) out[std::size_t(j) * x.rows() + i] = x(i, j);
}

} // namespace detail

/// X <- alpha * V^H * W + beta * X with V (n x m), W (n x k), X (m x k).
/// The length-n reduction runs over fixed worker blocks combined in block
/// order; with kahan set, every accumulation is compensated.
template <class T>
void tsmttsm(DenseMat<T>& x, const DenseMat<T>& v, const DenseMat<T>& w, T alpha, T beta,
             bool kahan = false) {
    SK_REQUIRE(v.rows() == w.rows(), errc::shape_mismatch, "V and W must have equal row counts");
    SK_REQUIRE(x.rows() == v.cols() && x.cols() == w.cols(), errc::shape_mismatch,
               "X must be (V cols) x (W cols)");
    const lidx m = x.rows(), k = x.cols();
    const gidx n = v.rows();
    const auto blocks = detail::worker_blocks(n, num_workers());
    const std::size_t cells = std::size_t(m) * k;

    kernels::tsmttsm_fn_d fixed = nullptr;
    if constexpr (std::is_same_v<T, double>) {
        if (!kahan && v.order() == StorageOrder::row_major && w.order() == StorageOrder::row_major &&
            !v.scattered() && !w.scattered()) {
            std::size_t nv = 0;
            const auto* tab = kernels::tsmttsm_variants(&nv);
            for (std::size_t i = 0; i < nv; ++i)
                if (tab[i].m == m && tab[i].k == k) {
                    fixed = tab[i].fn;
                    break;
                }
        }
    }

    if (!kahan) {
        std::vector<T> partial(blocks.size() * cells, T{});
#pragma omp parallel for schedule(static)
        for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
            T* acc = partial.data() + bi * cells;
            if constexpr (std::is_same_v<T, double>) {
                if (fixed) {
                    fixed(v.data(), v.row_stride(), w.data(), w.row_stride(), acc,
                          blocks[bi].first, blocks[bi].second);
                    continue;
                }
            }
            for (gidx i = blocks[bi].first; i < blocks[bi].second; ++i)
                for (lidx mm = 0; mm < m; ++mm) {
                    const T vm = conj_of(v(lidx(i), mm));
                    for (lidx kk = 0; kk < k; ++kk) acc[std::size_t(kk) * m + mm] += vm * w(lidx(i), kk);
                }
        }
        for (lidx kk = 0; kk < k; ++kk)
            for (lidx mm = 0; mm < m; ++mm) {
                T s{};
                for (std::size_t bi = 0; bi < blocks.size(); ++bi)
                    s += partial[bi * cells + std::size_t(kk) * m + mm];
                x(mm, kk) = alpha * s + beta * x(mm, kk);
            }
        return;
    }

    std::vector<kernels::CompensatedSum<T>> partial(blocks.size() * cells);
#pragma omp parallel for schedule(static)
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        auto* acc = partial.data() + bi * cells;
        for (gidx i = blocks[bi].first; i < blocks[bi].second; ++i)
            for (lidx mm = 0; mm < m; ++mm) {
                const T vm = conj_of(v(lidx(i), mm));
                for (lidx kk = 0; kk < k; ++kk) acc[std::size_t(kk) * m + mm].add(vm * w(lidx(i), kk));
            }
    }
    for (lidx kk = 0; kk < k; ++kk)
        for (lidx mm = 0; mm < m; ++mm) {
            kernels::CompensatedSum<T> total;
            for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
                const auto& p = partial[bi * cells + std::size_t(kk) * m + mm];
                total.add(p.sum);
                total.add(p.comp);
            }
            x(mm, kk) = alpha * total.result() + beta * x(mm, kk);
        }
}

/// W <- alpha * V * X + beta * W with V (n x m), X (m x k), W (n x k).
template <class T>
void tsmm(DenseMat<T>& w, const DenseMat<T>& v, const DenseMat<T>& x, T alpha, T beta) {
    SK_REQUIRE(w.rows() == v.rows(), errc::shape_mismatch, "V and W must have equal row counts");
    SK_REQUIRE(x.rows() == v.cols() && x.cols() == w.cols(), errc::shape_mismatch,
               "X must be (V cols) x (W cols)");
    SK_REQUIRE(w.data() != v.data(), errc::invalid_arg, "V and W must be distinct");
    const lidx m = x.rows(), k = x.cols();
    std::vector<T> xcm;
    detail::normalize_small_colmajor(x, xcm);

    kernels::tsmm_fn_d fixed = nullptr;
    if constexpr (std::is_same_v<T, double>) {
        if (v.order() == StorageOrder::row_major && w.order() == StorageOrder::row_major &&
            !v.scattered() && !w.scattered()) {
            std::size_t nv = 0;
            const auto* tab = kernels::tsmm_variants(&nv);
            for (std::size_t i = 0; i < nv; ++i)
                if (tab[i].m == m && tab[i].k == k) {
                    fixed = tab[i].fn;
                    break;
                }
        }
    }

    const auto blocks = detail::worker_blocks(v.rows(), num_workers());
#pragma omp parallel for schedule(static)
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        if constexpr (std::is_same_v<T, double>) {
            if (fixed) {
                fixed(w.data(), w.row_stride(), v.data(), v.row_stride(), xcm.data(), alpha, beta,
                      blocks[bi].first, blocks[bi].second);
                continue;
            }
        }
        std::vector<T> tmp(static_cast<std::size_t>(k));
        for (gidx i = blocks[bi].first; i < blocks[bi].second; ++i) {
            std::fill(tmp.begin(), tmp.end(), T{});
            for (lidx mm = 0; mm < m; ++mm) {
                const T vm = v(lidx(i), mm);
                for (lidx kk = 0; kk < k; ++kk) tmp[kk] += vm * xcm[std::size_t(kk) * m + mm];
            }
            for (lidx kk = 0; kk < k; ++kk) w(lidx(i), kk) = alpha * tmp[kk] + beta * w(lidx(i), kk);
        }
    }
}

/// V <- alpha * V * X + beta * V with square X (m x m); equals the
/// out-of-place tsmm into a copy followed by a move.
template <class T>
void tsmm_inplace(DenseMat<T>& v, const DenseMat<T>& x, T alpha, T beta) {
    SK_REQUIRE(x.rows() == x.cols(), errc::shape_mismatch, "in-place tsmm requires a square X");
    SK_REQUIRE(x.rows() == v.cols(), errc::shape_mismatch, "X must be (V cols) x (V cols)");
    const lidx m = x.rows();
    std::vector<T> xcm;
    detail::normalize_small_colmajor(x, xcm);
    const auto blocks = detail::worker_blocks(v.rows(), num_workers());
#pragma omp parallel for schedule(static)
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        std::vector<T> tmp(static_cast<std::size_t>(m));
        for (gidx i = blocks[bi].first; i < blocks[bi].second; ++i) {
            for (lidx kk = 0; kk < m; ++kk) {
                T s{};
                for (lidx mm = 0; mm < m; ++mm) s += v(lidx(i), mm) * xcm[std::size_t(kk) * m + mm];
                tmp[kk] = s;
            }
            for (lidx kk = 0; kk < m; ++kk) v(lidx(i), kk) = alpha * tmp[kk] + beta * v(lidx(i), kk);
        }
    }
}

enum class Trans { none, transpose, conj_transpose };

namespace detail {

template <class T>
T gemm_elem(const DenseMat<T>& a, lidx i, lidx j, Trans t) {
    if (t == Trans::none) return a(i, j);
    if (t == Trans::transpose) return a(j, i);
    return conj_of(a(j, i));
}

/// Reference GEMM; also the dispatch fallback.
template <class T>
void gemm_naive(DenseMat<T>& c, const DenseMat<T>& a, const DenseMat<T>& b, T alpha, T beta,
                Trans ta, Trans tb) {
    const lidx n = c.rows(), k = c.cols();
    const lidx inner = (ta == Trans::none) ? a.cols() : a.rows();
    for (lidx i = 0; i < n; ++i)
        for (lidx j = 0; j < k; ++j) {
            T s{};
            for (lidx l = 0; l < inner; ++l) s += gemm_elem(a, i, l, ta) * gemm_elem(b, l, j, tb);
            c(i, j) = alpha * s + beta * c(i, j);
        }
}

} // namespace detail

/// General matrix multiply that prefers the tall-skinny kernels: A^H * B with
/// tall-skinny A routes to tsmttsm, tall-skinny A times small B to tsmm,
/// everything else to the reference fallback.
template <class T>
void gemm(DenseMat<T>& c, const DenseMat<T>& a, const DenseMat<T>& b, T alpha, T beta, Trans ta,
          Trans tb) {
    const lidx a_rows = (ta == Trans::none) ? a.rows() : a.cols();
    const lidx a_cols = (ta == Trans::none) ? a.cols() : a.rows();
    const lidx b_rows = (tb == Trans::none) ? b.rows() : b.cols();
    const lidx b_cols = (tb == Trans::none) ? b.cols() : b.rows();
    SK_REQUIRE(a_cols == b_rows, errc::shape_mismatch, "inner dimensions must agree");
    SK_REQUIRE(c.rows() == a_rows && c.cols() == b_cols, errc::shape_mismatch,
               "output shape mismatch");

    const bool a_tall = a.rows() > small_dim_bound && a.cols() <= small_dim_bound;
    const bool conj_ok = !scalar_traits<T>::is_complex || ta == Trans::conj_transpose;
    if (a_tall && ta != Trans::none && conj_ok && tb == Trans::none && b.rows() == a.rows() &&
        b.cols() <= small_dim_bound) {
        tsmttsm(c, a, b, alpha, beta);
        return;
    }
    if (a_tall && ta == Trans::none && tb == Trans::none && b.rows() <= small_dim_bound &&
        b.cols() <= small_dim_bound) {
        tsmm(c, a, b, alpha, beta);
        return;
    }
    detail::gemm_naive(c, a, b, alpha, beta, ta, tb);
}

} // namespace sellkit
