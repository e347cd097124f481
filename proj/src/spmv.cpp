#include "spmv.hpp"

namespace sellkit::kernels {

spmv_fn_d lookup_variant(const KernelVariant& v) {
    if (v.chunk_height == 0 && v.block_width == 0) return nullptr;  // generic fallback
    std::size_t n = spmv_variant_table_size();
    const SpmvVariantEntry* table = spmv_variant_table();
    for (std::size_t i = 0; i < n; ++i)
        if (table[i].chunk_height == v.chunk_height && table[i].block_width == v.block_width)
            return table[i].fn;
    return nullptr;
}

} // namespace sellkit::kernels
