// Template source for fixed block width with a runtime chunk height. The
// register block covers (NVECS+3)/4 AVX-sized groups of accumulators per row.

#include <vector>

#include "spmv_args.hpp"
#include "spmv_epilogue.hpp"

namespace sellkit::kernels {

void spmv_d_cg_w${NVECS}(const SpmvArgs<double>& a, gidx c0, gidx c1, double* dotp) {
    constexpr int W = ${NVECS};
    constexpr int G = 4;  // accumulator group size
    const lidx C = a.chunk_height;
    std::vector<double> accbuf(std::size_t(C) * W);
    double* acc = accbuf.data();
    for (gidx c = c0; c < c1; ++c) {
        const gidx off = a.chunk_offset[c];
        const lidx len = a.chunk_len[c];
        for (lidx r = 0; r < C; ++r) {
            double* ar = acc + std::size_t(r) * W;
            //#unroll#{ const int ge = (@ + 1) * G < W ? (@ + 1) * G : W; _Pragma("omp simd") for (int g = @ * G; g < ge; ++g) ar[g] = 0.0; }#(${NVECS}+3)/4
        }
        for (lidx j = 0; j < len; ++j) {
            const double* vj = a.val + off + gidx(j) * C;
            const lidx* cj = a.col + off + gidx(j) * C;
            for (lidx r = 0; r < C; ++r) {
                const double m = vj[r];
                const double* xr = a.x + gidx(cj[r]) * a.x_row_stride;
                double* ar = acc + std::size_t(r) * W;
                //#unroll#{ const int ge = (@ + 1) * G < W ? (@ + 1) * G : W; _Pragma("omp simd") for (int g = @ * G; g < ge; ++g) ar[g] += m * xr[g]; }#(${NVECS}+3)/4
            }
        }
        for (lidx r = 0; r < C; ++r) {
            const gidx row = c * gidx(C) + r;
            if (row < a.nrows) spmv_store_row<double, W>(a, row, acc + std::size_t(r) * W, dotp);
        }
    }
}

} // namespace sellkit::kernels
