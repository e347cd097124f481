// Template source for fixed chunk height with a runtime block width.

#include <vector>

#include "spmv_args.hpp"
#include "spmv_epilogue.hpp"

namespace sellkit::kernels {

void spmv_d_c${CHUNK}_wg(const SpmvArgs<double>& a, gidx c0, gidx c1, double* dotp) {
    constexpr int C = ${CHUNK};
    const lidx w = a.width;
    std::vector<double> accbuf(std::size_t(C) * w);
    double* acc = accbuf.data();
    for (gidx c = c0; c < c1; ++c) {
        const gidx off = a.chunk_offset[c];
        const lidx len = a.chunk_len[c];
        //#unroll#{ double* ar = acc + std::size_t(@) * w; _Pragma("omp simd") for (lidx v = 0; v < w; ++v) ar[v] = 0.0; }#${CHUNK}
        for (lidx j = 0; j < len; ++j) {
            const double* vj = a.val + off + gidx(j) * C;
            const lidx* cj = a.col + off + gidx(j) * C;
            //#unroll#{ const double* xr = a.x + gidx(cj[@]) * a.x_row_stride; const double m = vj[@]; double* ar = acc + std::size_t(@) * w; _Pragma("omp simd") for (lidx v = 0; v < w; ++v) ar[v] += m * xr[v]; }#${CHUNK}
        }
        //#unroll#if (c * C + @ < a.nrows) spmv_store_row<double>(a, c * C + @, acc + std::size_t(@) * w, dotp);#${CHUNK}
    }
}

} // namespace sellkit::kernels
