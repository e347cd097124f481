#pragma once

#include <algorithm>
#include <cstring>
#include <memory>
#include <span>
#include <vector>

#include "aligned.hpp"
#include "types.hpp"

namespace sellkit {

enum class StorageOrder { row_major, col_major };
enum class ViewKind { owned, compact_view, scattered_view };

/// Dense matrix / block vector. Owns its (aligned, row-padded) buffer or
/// views memory of a parent matrix or plain caller memory. Views alias their
/// parent; writes through a view are visible in the parent.
template <class T>
class DenseMat {
public:
    using value_type = T;

    DenseMat() = default;

    /// Zero-initialized owned matrix. Rows are padded to a multiple of the
    /// largest configured chunk height, the buffer is SIMD-aligned.
    static DenseMat create(lidx nrows, lidx ncols, StorageOrder order) {
        SK_REQUIRE(nrows > 0 && ncols > 0, errc::invalid_arg, "matrix dimensions must be positive");
        DenseMat m;
        m.nrows_ = nrows;
        m.ncols_ = ncols;
        m.order_ = order;
        m.kind_ = ViewKind::owned;
        const lidx pad = row_padding();
        const lidx nrows_padded = static_cast<lidx>((gidx(nrows) + pad - 1) / pad * pad);
        if (order == StorageOrder::row_major) {
            m.stride_ = ncols;
            m.alloc(gidx(nrows_padded) * ncols);
        } else {
            m.stride_ = nrows_padded;
            m.alloc(gidx(nrows_padded) * ncols);
        }
        return m;
    }

    /// Non-owning view over caller memory. Alignment is not checked; an
    /// unaligned buffer only costs performance.
    static DenseMat view_plain(std::span<T> buffer, lidx nrows, lidx ncols, lidx stride,
                               StorageOrder order) {
        SK_REQUIRE(buffer.data() != nullptr, errc::invalid_arg, "null buffer");
        SK_REQUIRE(nrows > 0 && ncols > 0, errc::invalid_arg, "matrix dimensions must be positive");
        const lidx leading = (order == StorageOrder::row_major) ? ncols : nrows;
        const lidx slow = (order == StorageOrder::row_major) ? nrows : ncols;
        SK_REQUIRE(stride >= leading, errc::invalid_arg, "stride smaller than leading extent");
        SK_REQUIRE(buffer.size() >= std::size_t(stride) * slow, errc::invalid_arg,
                   "buffer too small for the requested shape and stride");
        DenseMat m;
        m.nrows_ = nrows;
        m.ncols_ = ncols;
        m.order_ = order;
        m.stride_ = stride;
        m.kind_ = ViewKind::compact_view;
        m.data_ = buffer.data();
        return m;
    }

    /// Sub-matrix view: contiguous row range plus a strictly increasing column
    /// selection. A contiguous column range gives a compact view, anything
    /// with gaps is flagged scattered.
    DenseMat view(lidx row_begin, lidx row_end, std::span<const lidx> cols) const {
        SK_REQUIRE(row_begin >= 0 && row_begin < row_end && row_end <= nrows_, errc::invalid_arg,
                   "row range out of bounds");
        SK_REQUIRE(!cols.empty(), errc::invalid_arg, "empty column selection");
        for (std::size_t k = 0; k < cols.size(); ++k) {
            SK_REQUIRE(cols[k] >= 0 && cols[k] < ncols_, errc::invalid_arg, "column selection out of bounds");
            if (k > 0) SK_REQUIRE(cols[k] > cols[k - 1], errc::invalid_arg, "column selection must be strictly increasing");
        }
        // map through this matrix first: a selection that looks contiguous on a
        // scattered view may still have gaps in the underlying storage
        std::vector<gidx> mapped;
        mapped.reserve(cols.size());
        for (lidx c : cols) mapped.push_back(map_col(c));
        const bool contiguous = mapped.back() - mapped.front() + 1 == gidx(mapped.size());

        DenseMat v;
        v.nrows_ = row_end - row_begin;
        v.ncols_ = static_cast<lidx>(cols.size());
        v.order_ = order_;
        v.stride_ = stride_;
        v.owner_ = owner_;
        if (contiguous) {
            v.kind_ = ViewKind::compact_view;
            const gidx r = row_offset_ + row_begin;
            const gidx c = mapped.front();
            v.data_ = (order_ == StorageOrder::row_major) ? data_ + r * stride_ + c
                                                          : data_ + c * stride_ + r;
        } else {
            v.kind_ = ViewKind::scattered_view;
            v.data_ = data_;
            v.row_offset_ = row_offset_ + row_begin;
            v.col_map_ = std::move(mapped);
        }
        return v;
    }

    DenseMat view(lidx row_begin, lidx row_end, lidx col_begin, lidx col_end) const {
        SK_REQUIRE(col_begin >= 0 && col_begin < col_end && col_end <= ncols_, errc::invalid_arg,
                   "column range out of bounds");
        std::vector<lidx> cols(static_cast<std::size_t>(col_end - col_begin));
        for (lidx c = col_begin; c < col_end; ++c) cols[static_cast<std::size_t>(c - col_begin)] = c;
        return view(row_begin, row_end, cols);
    }

    /// Owned compact copy with identical logical contents.
    DenseMat compact_clone() const {
        DenseMat out = create(nrows_, ncols_, order_);
        for (lidx i = 0; i < nrows_; ++i)
            for (lidx j = 0; j < ncols_; ++j) out(i, j) = (*this)(i, j);
        return out;
    }

    lidx rows() const { return nrows_; }
    lidx cols() const { return ncols_; }
    StorageOrder order() const { return order_; }
    lidx stride() const { return stride_; }
    ViewKind kind() const { return kind_; }
    bool scattered() const { return kind_ == ViewKind::scattered_view; }

    T& operator()(lidx i, lidx j) { return *const_cast<T*>(ptr(i, j)); }
    const T& operator()(lidx i, lidx j) const { return *ptr(i, j); }

    T* data() { return data_; }
    const T* data() const { return data_; }

    /// Element strides for kernels; only meaningful for non-scattered matrices.
    gidx row_stride() const { return order_ == StorageOrder::row_major ? gidx(stride_) : 1; }
    gidx col_step() const { return order_ == StorageOrder::row_major ? 1 : gidx(stride_); }

    bool same_shape(const DenseMat& o) const { return nrows_ == o.nrows_ && ncols_ == o.ncols_; }

    void fill(T v) {
        for (lidx i = 0; i < nrows_; ++i)
            for (lidx j = 0; j < ncols_; ++j) (*this)(i, j) = v;
    }

    /// Copy logical contents row-by-row from a contiguous row-major buffer.
    void copy_in(std::span<const T> src) {
        SK_REQUIRE(src.size() == std::size_t(nrows_) * std::size_t(ncols_), errc::shape_mismatch,
                   "buffer size does not match matrix shape");
        for (lidx i = 0; i < nrows_; ++i)
            for (lidx j = 0; j < ncols_; ++j) (*this)(i, j) = src[std::size_t(i) * ncols_ + j];
    }

    void copy_out(std::span<T> dst) const {
        SK_REQUIRE(dst.size() == std::size_t(nrows_) * std::size_t(ncols_), errc::shape_mismatch,
                   "buffer size does not match matrix shape");
        for (lidx i = 0; i < nrows_; ++i)
            for (lidx j = 0; j < ncols_; ++j) dst[std::size_t(i) * ncols_ + j] = (*this)(i, j);
    }

    void copy_from(const DenseMat& src) {
        SK_REQUIRE(same_shape(src), errc::shape_mismatch, "shape mismatch");
        for (lidx i = 0; i < nrows_; ++i)
            for (lidx j = 0; j < ncols_; ++j) (*this)(i, j) = src(i, j);
    }

    /// Largest configured chunk height; owned row counts are padded to it.
    static lidx row_padding();

private:
    void alloc(gidx nelems) {
        auto buf = std::make_shared<avector<T>>(static_cast<std::size_t>(nelems), T{});
        data_ = buf->data();
        owner_ = std::move(buf);
    }

    // storage offset of logical column j (scattered views hold an explicit map)
    gidx map_col(lidx j) const {
        if (kind_ == ViewKind::scattered_view) return col_map_[static_cast<std::size_t>(j)];
        return j;
    }

    const T* ptr(lidx i, lidx j) const {
        const gidx r = row_offset_ + i;
        const gidx c = map_col(j);
        if (order_ == StorageOrder::row_major) return data_ + r * stride_ + c;
        return data_ + c * stride_ + r;
    }

    lidx nrows_ = 0, ncols_ = 0;
    StorageOrder order_ = StorageOrder::row_major;
    lidx stride_ = 0;
    ViewKind kind_ = ViewKind::owned;
    std::shared_ptr<void> owner_;
    T* data_ = nullptr;
    gidx row_offset_ = 0;             // scattered views only
    std::vector<gidx> col_map_;       // scattered views only
};

template <class T>
lidx DenseMat<T>::row_padding() {
    auto chunks = specialized_chunk_heights();
    lidx pad = 1;
    for (int c : chunks) pad = std::max<lidx>(pad, c);
    return pad;
}

/// Change the physical layout; the round trip is bit-exact. Scattered views
/// must be compacted first. In-place conversion requires an owned matrix.
template <class T>
DenseMat<T> convert_order(DenseMat<T>& v, StorageOrder new_order, bool in_place) {
    SK_REQUIRE(!v.scattered(), errc::invalid_arg, "convert_order requires a compact matrix");
    DenseMat<T> out = DenseMat<T>::create(v.rows(), v.cols(), new_order);
    for (lidx i = 0; i < v.rows(); ++i)
        for (lidx j = 0; j < v.cols(); ++j) out(i, j) = v(i, j);
    if (in_place) {
        SK_REQUIRE(v.kind() == ViewKind::owned, errc::invalid_arg,
                   "in-place conversion requires an owned matrix");
        v = out;
    }
    return out;
}

namespace detail {

/// Fixed block partition of [0, n) into num_workers() ranges; the basis of
/// reproducible reductions: per-block partials are combined in block order.
inline std::vector<std::pair<gidx, gidx>> worker_blocks(gidx n, int workers) {
    std::vector<std::pair<gidx, gidx>> blocks;
    if (n <= 0) return blocks;
    const gidx w = std::max<gidx>(1, workers);
    const gidx chunk = (n + w - 1) / w;
    for (gidx b = 0; b * chunk < n; ++b)
        blocks.emplace_back(b * chunk, std::min(n, (b + 1) * chunk));
    return blocks;
}

} // namespace detail

/// y <- alpha*x + beta*y columnwise (axpy is the beta = 1 case).
template <class T>
void axpby(DenseMat<T>& y, const DenseMat<T>& x, T alpha, T beta) {
    SK_REQUIRE(y.same_shape(x), errc::shape_mismatch, "axpby shape mismatch");
    for (lidx i = 0; i < y.rows(); ++i)
        for (lidx j = 0; j < y.cols(); ++j) y(i, j) = alpha * x(i, j) + beta * y(i, j);
}

/// Column j: y_j <- alphas[j]*x_j + betas[j]*y_j.
template <class T>
void vaxpby(DenseMat<T>& y, const DenseMat<T>& x, std::span<const T> alphas, std::span<const T> betas) {
    SK_REQUIRE(y.same_shape(x), errc::shape_mismatch, "vaxpby shape mismatch");
    SK_REQUIRE(alphas.size() == std::size_t(y.cols()) && betas.size() == std::size_t(y.cols()),
               errc::shape_mismatch, "scalar list length must match block width");
    for (lidx i = 0; i < y.rows(); ++i)
        for (lidx j = 0; j < y.cols(); ++j) y(i, j) = alphas[j] * x(i, j) + betas[j] * y(i, j);
}

template <class T>
void scal(DenseMat<T>& x, T factor) {
    for (lidx i = 0; i < x.rows(); ++i)
        for (lidx j = 0; j < x.cols(); ++j) x(i, j) *= factor;
}

template <class T>
void vscal(DenseMat<T>& x, std::span<const T> factors) {
    SK_REQUIRE(factors.size() == std::size_t(x.cols()), errc::shape_mismatch,
               "scalar list length must match block width");
    for (lidx i = 0; i < x.rows(); ++i)
        for (lidx j = 0; j < x.cols(); ++j) x(i, j) *= factors[j];
}

/// result[j] = sum_i conj(a[i,j]) * b[i,j]. Reduction runs over fixed
/// per-worker blocks combined in block order.
template <class T>
std::vector<T> dot(const DenseMat<T>& a, const DenseMat<T>& b) {
    SK_REQUIRE(a.same_shape(b), errc::shape_mismatch, "dot shape mismatch");
    const lidx w = a.cols();
    const auto blocks = detail::worker_blocks(a.rows(), num_workers());
    std::vector<T> partial(blocks.size() * w, T{});
#pragma omp parallel for schedule(static)
    for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
        T* p = partial.data() + bi * w;
        for (gidx i = blocks[bi].first; i < blocks[bi].second; ++i)
            for (lidx j = 0; j < w; ++j) p[j] += conj_of(a(lidx(i), j)) * b(lidx(i), j);
    }
    std::vector<T> out(w, T{});
    for (std::size_t bi = 0; bi < blocks.size(); ++bi)
        for (lidx j = 0; j < w; ++j) out[j] += partial[bi * w + j];
    return out;
}

} // namespace sellkit
