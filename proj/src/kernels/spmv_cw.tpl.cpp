// Template source; the build runs kernelgen over it once per configured
// (chunk height, block width) pair. Marked lines expand to one copy per
// chunk row, with the placeholder replaced by the copy index.

#include "spmv_args.hpp"
#include "spmv_epilogue.hpp"

namespace sellkit::kernels {

void spmv_d_c${CHUNK}_w${NVECS}(const SpmvArgs<double>& a, gidx c0, gidx c1, double* dotp) {
    constexpr int C = ${CHUNK};
    constexpr int W = ${NVECS};
    //#unroll#double acc@[W];#${CHUNK}
    for (gidx c = c0; c < c1; ++c) {
        const gidx off = a.chunk_offset[c];
        const lidx len = a.chunk_len[c];
        //#unroll#{ _Pragma("omp simd") for (int v = 0; v < W; ++v) acc@[v] = 0.0; }#${CHUNK}
        for (lidx j = 0; j < len; ++j) {
            const double* vj = a.val + off + gidx(j) * C;
            const lidx* cj = a.col + off + gidx(j) * C;
            //#unroll#{ const double* xr = a.x + gidx(cj[@]) * a.x_row_stride; const double m = vj[@]; _Pragma("omp simd") for (int v = 0; v < W; ++v) acc@[v] += m * xr[v]; }#${CHUNK}
        }
        //#unroll#if (c * C + @ < a.nrows) spmv_store_row<double, W>(a, c * C + @, acc@, dotp);#${CHUNK}
    }
}

} // namespace sellkit::kernels
