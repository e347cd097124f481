#pragma once

#include "spmv_args.hpp"

namespace sellkit::kernels {

/// Row epilogue shared by every SpMV kernel: applies shift, alpha, axpby,
/// writes y, chains z and accumulates the requested dot products:
///   y_i <- alpha*(acc_i - gamma*x_i) + beta*y_i ; z_i <- delta*z_i + eta*y_i
/// Dot partial layout: [0,w) <y,y>, [w,2w) <x,y>, [2w,3w) <x,x>.
/// W > 0 fixes the width at compile time, W == -1 takes it from the args.
template <class T, int W = -1>
inline void spmv_store_row(const SpmvArgs<T>& a, gidx row, const T* acc, T* dotp) {
    const lidx w = (W > 0) ? W : a.width;
    T* yr = a.y + row * a.y_row_stride;
    const bool shift = a.flags & (spmv_flag_shift | spmv_flag_vshift);
    const bool want_x = shift || (a.flags & (spmv_flag_dot_xy | spmv_flag_dot_xx));
    const T* xr = want_x ? a.x + row * a.x_row_stride : nullptr;

    for (lidx v = 0; v < w; ++v) {
        T t = acc[v];
        if (a.flags & spmv_flag_shift) t -= a.gamma0 * xr[v * a.x_col_step];
        if (a.flags & spmv_flag_vshift) t -= a.gamma_list[v] * xr[v * a.x_col_step];
        t *= a.alpha;
        if (a.flags & spmv_flag_axpby) t += a.beta * yr[v * a.y_col_step];
        yr[v * a.y_col_step] = t;
        if (a.flags & spmv_flag_chain_axpby) {
            T* zr = a.z + row * a.z_row_stride;
            zr[v * a.z_col_step] = a.delta * zr[v * a.z_col_step] + a.eta * t;
        }
        if (a.flags & spmv_flag_dot_yy) dotp[v] += conj_of(t) * t;
        if (a.flags & spmv_flag_dot_xy) dotp[w + v] += conj_of(xr[v * a.x_col_step]) * t;
        if (a.flags & spmv_flag_dot_xx)
            dotp[2 * w + v] += conj_of(xr[v * a.x_col_step]) * xr[v * a.x_col_step];
    }
}

} // namespace sellkit::kernels
