#pragma once

#include <cstdint>

#include "types.hpp"

namespace sellkit {

// Augmentation flags of the fused SpMV (mirrored in the public C header).
inline constexpr std::uint32_t spmv_flag_axpby = 1u << 0;
inline constexpr std::uint32_t spmv_flag_shift = 1u << 1;
inline constexpr std::uint32_t spmv_flag_vshift = 1u << 2;
inline constexpr std::uint32_t spmv_flag_dot_yy = 1u << 3;
inline constexpr std::uint32_t spmv_flag_dot_xy = 1u << 4;
inline constexpr std::uint32_t spmv_flag_dot_xx = 1u << 5;
inline constexpr std::uint32_t spmv_flag_chain_axpby = 1u << 6;
inline constexpr std::uint32_t spmv_flag_all = (1u << 7) - 1;

namespace kernels {

/// Flat argument block passed to SpMV kernels. Vectors are addressed as
/// base + row*row_stride + column*col_step; specialized kernels require
/// col_step == 1 (row-major).
template <class T>
struct SpmvArgs {
    const gidx* chunk_offset = nullptr;
    const lidx* chunk_len = nullptr;
    const T* val = nullptr;
    const lidx* col = nullptr;
    lidx nrows = 0;
    lidx chunk_height = 1;
    gidx nchunks = 0;

    T* y = nullptr;
    gidx y_row_stride = 0, y_col_step = 1;
    const T* x = nullptr;
    gidx x_row_stride = 0, x_col_step = 1;
    T* z = nullptr;
    gidx z_row_stride = 0, z_col_step = 1;
    lidx width = 1;

    std::uint32_t flags = 0;
    T alpha{1}, beta{0}, delta{0}, eta{0};
    T gamma0{0};
    const T* gamma_list = nullptr;
};

/// Kernel over a chunk range; dot partials (3*width) accumulate per worker.
using spmv_fn_d = void (*)(const SpmvArgs<double>&, gidx chunk_begin, gidx chunk_end, double* dot_partial);

struct SpmvVariantEntry {
    int chunk_height;  // 0 = generic
    int block_width;   // 0 = generic
    spmv_fn_d fn;
};

const SpmvVariantEntry* spmv_variant_table();
std::size_t spmv_variant_table_size();

const int* buildcfg_chunk_heights(std::size_t* n);
const int* buildcfg_block_widths(std::size_t* n);

} // namespace kernels
} // namespace sellkit
