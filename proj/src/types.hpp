#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <span>

#include "error.hpp"

namespace sellkit {

/// Index of a row/column in the global matrix.
using gidx = std::int64_t;
/// Index within a rank-local matrix part.
using lidx = std::int32_t;

/// Narrow a global index to the 32-bit local type. Identity on [0, 2^31).
inline lidx narrow_index(gidx g) {
    SK_REQUIRE(g >= 0, errc::invalid_arg, "negative index");
    SK_REQUIRE(g < (gidx(1) << 31), errc::overflow, "index does not fit the 32-bit local range");
    return static_cast<lidx>(g);
}

enum class Datatype { r32, r64, c32, c64 };

template <class T>
struct scalar_traits;

template <>
struct scalar_traits<float> {
    using real_type = float;
    static constexpr bool is_complex = false;
    static constexpr Datatype datatype = Datatype::r32;
};
template <>
struct scalar_traits<double> {
    using real_type = double;
    static constexpr bool is_complex = false;
    static constexpr Datatype datatype = Datatype::r64;
};
template <>
struct scalar_traits<std::complex<float>> {
    using real_type = float;
    static constexpr bool is_complex = true;
    static constexpr Datatype datatype = Datatype::c32;
};
template <>
struct scalar_traits<std::complex<double>> {
    using real_type = double;
    static constexpr bool is_complex = true;
    static constexpr Datatype datatype = Datatype::c64;
};

inline bool is_complex(Datatype dt) { return dt == Datatype::c32 || dt == Datatype::c64; }
inline bool is_single(Datatype dt) { return dt == Datatype::r32 || dt == Datatype::c32; }

inline std::size_t value_bytes(Datatype dt) {
    switch (dt) {
        case Datatype::r32: return 4;
        case Datatype::r64: return 8;
        case Datatype::c32: return 8;
        case Datatype::c64: return 16;
    }
    return 0;
}

template <class T>
inline T conj_of(T v) {
    if constexpr (scalar_traits<T>::is_complex)
        return std::conj(v);
    else
        return v;
}

template <class T>
inline double abs_of(T v) {
    return static_cast<double>(std::abs(v));
}

/// Relative error bound for floating comparisons: |a-b| <= rel_eps*(1+|b|).
struct Tolerance {
    double rel_eps;
};

inline Tolerance default_tolerance(Datatype dt) {
    return Tolerance{is_single(dt) ? 1e-5 : 1e-12};
}

template <class T>
inline bool approx_equal(T a, T b, Tolerance tol = default_tolerance(scalar_traits<T>::datatype)) {
    return abs_of(a - b) <= tol.rel_eps * (1.0 + abs_of(b));
}

/// Number of workers used by deterministic block-partitioned kernels.
/// Results are bit-reproducible for a fixed worker count.
int num_workers();
void set_num_workers(int n);

/// Dimensions with specialized kernels, fixed at build time (config/kernels.cfg).
std::span<const int> specialized_chunk_heights();
std::span<const int> specialized_block_widths();

} // namespace sellkit
