/*
 * sellkit -- sparse linear algebra building blocks: SELL-C-sigma storage,
 * fused sparse matrix (multiple-)vector multiplication, tall-skinny dense
 * kernels, weighted row-wise partitioning with halo exchange over simulated
 * ranks, and an affinity-aware task pool.
 *
 * Pure C interface over opaque handles. Every fallible call returns a
 * sellkit_error; results travel through out-parameters.
 */

#ifndef SELLKIT_H
#define SELLKIT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

/* ------------------------------------------------------------- basic types */

typedef enum sellkit_error {
    SELLKIT_OK = 0,
    SELLKIT_ERR_INVALID_ARG = 1,
    SELLKIT_ERR_OVERFLOW = 2,
    SELLKIT_ERR_SHAPE = 3,
    SELLKIT_ERR_PATTERN = 4,
    SELLKIT_ERR_IO = 5,
    SELLKIT_ERR_CAPACITY = 6,
    SELLKIT_ERR_STATE = 7,
    SELLKIT_ERR_ALLOC = 8,
    SELLKIT_ERR_TRANSPORT = 9,
    SELLKIT_ERR_UNSUPPORTED = 10,
    SELLKIT_ERR_NUMERIC = 11
} sellkit_error;

const char* sellkit_error_name(sellkit_error err);

typedef enum sellkit_datatype {
    SELLKIT_R32 = 0, /* float */
    SELLKIT_R64 = 1, /* double */
    SELLKIT_C32 = 2, /* float complex (interleaved re, im) */
    SELLKIT_C64 = 3  /* double complex */
} sellkit_datatype;

typedef enum sellkit_order { SELLKIT_ROW_MAJOR = 0, SELLKIT_COL_MAJOR = 1 } sellkit_order;

/* 64-bit indices for global quantities, 32-bit for rank-local ones. */
typedef int64_t sellkit_gidx;
typedef int32_t sellkit_lidx;

/* Identity on [0, 2^31); SELLKIT_ERR_OVERFLOW beyond. */
sellkit_error sellkit_narrow_index(sellkit_gidx g, sellkit_lidx* out);

/* Dimensions with specialized kernels, fixed when the library was built. */
sellkit_error sellkit_buildconfig_chunk_heights(const int** out, size_t* n);
sellkit_error sellkit_buildconfig_block_widths(const int** out, size_t* n);

/* Worker count for the deterministic block-partitioned kernels. */
sellkit_error sellkit_set_num_workers(int n);
int sellkit_num_workers(void);

/* Monotonic clock used by benchmarks; override it for reproducible reports. */
double sellkit_now_seconds(void);
void sellkit_set_timer_override(double (*now_fn)(void*), void* arg);

/* --------------------------------------------------------------- CRS data */

typedef struct sellkit_crs sellkit_crs;

sellkit_error sellkit_crs_create(sellkit_datatype dt, sellkit_gidx nrows, sellkit_gidx ncols,
                                 const sellkit_gidx* rowptr, const sellkit_gidx* col,
                                 const void* val, sellkit_crs** out);

/* Row-callback construction: the function stores the row's nonzero count in
 * *rowlen and its entries in col/val (capacity max_rowlen) and returns 0. */
typedef int (*sellkit_row_fn)(sellkit_gidx row, sellkit_lidx* rowlen, sellkit_gidx* col, void* val,
                              void* arg);
sellkit_error sellkit_crs_from_rowfunc(sellkit_datatype dt, sellkit_gidx nrows, sellkit_gidx ncols,
                                       sellkit_lidx max_rowlen, sellkit_row_fn fn, void* arg,
                                       sellkit_crs** out);

sellkit_error sellkit_crs_read_mm(const char* path, sellkit_datatype dt, sellkit_crs** out);
/* The binary reader picks the element type from the file header. */
sellkit_error sellkit_crs_read_bin(const char* path, sellkit_crs** out);
sellkit_error sellkit_crs_write_bin(const char* path, const sellkit_crs* crs, int wide_cols);

sellkit_error sellkit_crs_dims(const sellkit_crs* crs, sellkit_gidx* nrows, sellkit_gidx* ncols,
                               sellkit_gidx* nnz);
sellkit_datatype sellkit_crs_datatype(const sellkit_crs* crs);
void sellkit_crs_destroy(sellkit_crs* crs);

/* --------------------------------------------------------- SELL-C-sigma -- */

typedef struct sellkit_mat sellkit_mat;

sellkit_error sellkit_mat_build(const sellkit_crs* crs, int chunk_height, int sigma,
                                sellkit_mat** out);
sellkit_error sellkit_mat_build_rowfunc(sellkit_datatype dt, sellkit_gidx nrows, sellkit_gidx ncols,
                                        sellkit_lidx max_rowlen, sellkit_row_fn fn, void* arg,
                                        int chunk_height, int sigma, sellkit_mat** out);
sellkit_error sellkit_mat_stats(const sellkit_mat* m, double* beta, uint64_t* bytes_total);
sellkit_error sellkit_mat_update_values(sellkit_mat* m, const sellkit_crs* crs);
sellkit_error sellkit_mat_to_crs(const sellkit_mat* m, sellkit_crs** out);
sellkit_error sellkit_mat_dims(const sellkit_mat* m, sellkit_lidx* nrows, sellkit_lidx* ncols,
                               sellkit_gidx* nnz);
void sellkit_mat_destroy(sellkit_mat* m);

/* --------------------------------------------------------- dense matrices */

typedef struct sellkit_densemat sellkit_densemat;

sellkit_error sellkit_densemat_create(sellkit_datatype dt, sellkit_lidx nrows, sellkit_lidx ncols,
                                      sellkit_order order, sellkit_densemat** out);
/* Non-owning view of caller memory (nelems elements of the given type); the
 * buffer must outlive the handle. */
sellkit_error sellkit_densemat_view_plain(sellkit_datatype dt, void* buffer, size_t nelems,
                                          sellkit_lidx nrows, sellkit_lidx ncols,
                                          sellkit_lidx stride, sellkit_order order,
                                          sellkit_densemat** out);
/* Contiguous row range plus strictly increasing column selection. */
sellkit_error sellkit_densemat_view(const sellkit_densemat* parent, sellkit_lidx row_begin,
                                    sellkit_lidx row_end, const sellkit_lidx* cols,
                                    sellkit_lidx ncols, sellkit_densemat** out);
sellkit_error sellkit_densemat_compact_clone(const sellkit_densemat* m, sellkit_densemat** out);
sellkit_error sellkit_densemat_convert_order(sellkit_densemat* m, sellkit_order new_order,
                                             int in_place, sellkit_densemat** out);
int sellkit_densemat_is_scattered(const sellkit_densemat* m);
sellkit_error sellkit_densemat_dims(const sellkit_densemat* m, sellkit_lidx* nrows,
                                    sellkit_lidx* ncols);
/* Logical contents as a contiguous row-major buffer of nrows*ncols elements. */
sellkit_error sellkit_densemat_copy_in(sellkit_densemat* m, const void* buf, size_t nelems);
sellkit_error sellkit_densemat_copy_out(const sellkit_densemat* m, void* buf, size_t nelems);
void sellkit_densemat_destroy(sellkit_densemat* m);

/* Scalars are passed as pointers to the handle's element type; NULL means the
 * documented default of the operation. */
sellkit_error sellkit_axpby(sellkit_densemat* y, const sellkit_densemat* x, const void* alpha,
                            const void* beta);
sellkit_error sellkit_vaxpby(sellkit_densemat* y, const sellkit_densemat* x, const void* alphas,
                             const void* betas);
sellkit_error sellkit_scal(sellkit_densemat* x, const void* factor);
sellkit_error sellkit_vscal(sellkit_densemat* x, const void* factors);
/* out receives ncols elements; the first argument is conjugated. */
sellkit_error sellkit_dot(const sellkit_densemat* a, const sellkit_densemat* b, void* out);

/* ------------------------------------------------------ tall-skinny GEMMs */

sellkit_error sellkit_tsmttsm(sellkit_densemat* x, const sellkit_densemat* v,
                              const sellkit_densemat* w, const void* alpha, const void* beta,
                              int kahan);
sellkit_error sellkit_tsmm(sellkit_densemat* w, const sellkit_densemat* v,
                           const sellkit_densemat* x, const void* alpha, const void* beta);
sellkit_error sellkit_tsmm_inplace(sellkit_densemat* v, const sellkit_densemat* x,
                                   const void* alpha, const void* beta);

typedef enum sellkit_trans {
    SELLKIT_TRANS_NONE = 0,
    SELLKIT_TRANS_T = 1,
    SELLKIT_TRANS_C = 2
} sellkit_trans;
sellkit_error sellkit_gemm(sellkit_densemat* c, const sellkit_densemat* a,
                           const sellkit_densemat* b, const void* alpha, const void* beta,
                           sellkit_trans ta, sellkit_trans tb);

/* ------------------------------------------------------------- fused SpMV */

#define SELLKIT_SPMV_AXPBY 0x01u
#define SELLKIT_SPMV_SHIFT 0x02u
#define SELLKIT_SPMV_VSHIFT 0x04u
#define SELLKIT_SPMV_DOT_YY 0x08u
#define SELLKIT_SPMV_DOT_XY 0x10u
#define SELLKIT_SPMV_DOT_XX 0x20u
#define SELLKIT_SPMV_CHAIN_AXPBY 0x40u

/* y = alpha*(A - gamma*I)*x + beta*y, optionally chained with the dot
 * products <y,y>, <x,y>, <x,x> and with z = delta*z + eta*y. Scalar fields
 * point to values of the matrix element type; NULL selects the default
 * (alpha 1, others 0). gamma points to one scalar for SHIFT and to a
 * width-sized array for VSHIFT. dot receives 3*width elements laid out as
 * [<y,y>..., <x,y>..., <x,x>...], only the requested thirds are written. */
typedef struct sellkit_spmv_opts {
    uint32_t flags;
    const void* alpha;
    const void* beta;
    const void* gamma;
    const void* delta;
    const void* eta;
    sellkit_densemat* z;
    void* dot;
} sellkit_spmv_opts;

void sellkit_spmv_opts_init(sellkit_spmv_opts* opts);

sellkit_error sellkit_spmv(sellkit_densemat* y, const sellkit_mat* a, const sellkit_densemat* x,
                           const sellkit_spmv_opts* opts);

/* Resolve the dispatch cascade for the given shape; 0 means the generic
 * dimension. The returned variant is always runnable. */
sellkit_error sellkit_select_kernel(int chunk_height, sellkit_lidx block_width,
                                    sellkit_order order, int* variant_chunk, int* variant_width,
                                    int* vectorized);

/* ------------------------------------- distributed execution (simulated) -- */

typedef enum sellkit_weight_mode { SELLKIT_BY_ROWS = 0, SELLKIT_BY_NNZ = 1 } sellkit_weight_mode;
typedef enum sellkit_dist_mode {
    SELLKIT_NO_OVERLAP = 0,
    SELLKIT_NAIVE_OVERLAP = 1,
    SELLKIT_TASK_OVERLAP = 2
} sellkit_dist_mode;

/* offsets_out receives nranks+1 entries. rowlens may be NULL for BY_ROWS. */
sellkit_error sellkit_partition_compute(sellkit_gidx n, const sellkit_lidx* rowlens,
                                        const double* weights, int nranks,
                                        sellkit_weight_mode mode, sellkit_gidx* offsets_out);

typedef struct sellkit_ctx sellkit_ctx;
typedef struct sellkit_dvec sellkit_dvec;

sellkit_error sellkit_ctx_create(const sellkit_crs* a, const double* weights, int nranks,
                                 sellkit_weight_mode mode, int chunk_height, int sigma,
                                 int record_transport, sellkit_ctx** out);
sellkit_error sellkit_ctx_rank_range(const sellkit_ctx* ctx, int rank, sellkit_gidx* first,
                                     sellkit_gidx* count);
sellkit_error sellkit_ctx_halo_size(const sellkit_ctx* ctx, int rank, sellkit_lidx* n_halo);
/* Requires record_transport at creation. */
sellkit_error sellkit_ctx_comm_stats(const sellkit_ctx* ctx, uint64_t* total_bytes,
                                     uint64_t* total_messages);
sellkit_error sellkit_ctx_reset_comm_stats(sellkit_ctx* ctx);
void sellkit_ctx_destroy(sellkit_ctx* ctx);

sellkit_error sellkit_dvec_create(const sellkit_ctx* ctx, sellkit_lidx width, sellkit_order order,
                                  sellkit_dvec** out);
sellkit_error sellkit_dvec_scatter(const sellkit_ctx* ctx, const sellkit_densemat* global,
                                   sellkit_dvec* v);
sellkit_error sellkit_dvec_gather(const sellkit_ctx* ctx, const sellkit_dvec* v,
                                  sellkit_densemat* out);
void sellkit_dvec_destroy(sellkit_dvec* v);

/* All modes produce the true global product. z may be NULL unless CHAIN is
 * requested; pus_per_rank sizes the per-rank pools of the task mode. */
sellkit_error sellkit_dist_spmv(sellkit_dvec* y, sellkit_ctx* ctx, const sellkit_dvec* x,
                                const sellkit_spmv_opts* opts, sellkit_dist_mode mode,
                                sellkit_dvec* z, int pus_per_rank);
/* Suppressed communication: local columns only; not the true global product. */
sellkit_error sellkit_spmv_nocomm(sellkit_dvec* y, sellkit_ctx* ctx, const sellkit_dvec* x,
                                  const sellkit_spmv_opts* opts, sellkit_dvec* z);

/* -------------------------------------------------------------- task pool */

#define SELLKIT_TASK_PRIO_HIGH 0x1u
#define SELLKIT_TASK_NUMANODE_STRICT 0x2u
#define SELLKIT_TASK_NOT_ALLOW_CHILD 0x4u
#define SELLKIT_TASK_NOT_PIN 0x8u
#define SELLKIT_NUMANODE_ANY (-1)

typedef enum sellkit_task_state {
    SELLKIT_TASK_CREATED = 0,
    SELLKIT_TASK_ENQUEUED = 1,
    SELLKIT_TASK_RUNNING = 2,
    SELLKIT_TASK_FINISHED = 3
} sellkit_task_state;

typedef struct sellkit_pool sellkit_pool;
typedef struct sellkit_task sellkit_task;
typedef void* (*sellkit_task_fn)(void*);

/* numa_of_pu may be NULL (all PUs on node 0); nshepherds 0 means one per PU.
 * The environment variable SELLKIT_NPUS caps npus. */
sellkit_error sellkit_pool_create(int npus, const int* numa_of_pu, int nshepherds,
                                  sellkit_pool** out);
sellkit_error sellkit_task_create(sellkit_pool* pool, sellkit_task_fn fn, void* arg, int nthreads,
                                  int numanode, uint32_t flags, sellkit_task** out);
sellkit_error sellkit_task_add_dependency(sellkit_task* task, sellkit_task* dep);
sellkit_error sellkit_task_enqueue(sellkit_pool* pool, sellkit_task* task);
sellkit_error sellkit_task_spawn_child(sellkit_pool* pool, sellkit_task* task);
sellkit_error sellkit_task_wait(sellkit_pool* pool, sellkit_task* task, void** ret);
/* *out is NULL when the calling thread is not inside a task callback. The
 * returned handle is borrowed and must not be destroyed. */
sellkit_error sellkit_pool_current_task(sellkit_pool* pool, sellkit_task** out);
sellkit_error sellkit_task_state_of(const sellkit_task* task, sellkit_task_state* state);
sellkit_error sellkit_task_destroy(sellkit_pool* pool, sellkit_task* task);
sellkit_error sellkit_pool_shutdown(sellkit_pool* pool);
int sellkit_pool_npus(const sellkit_pool* pool);
int sellkit_pool_num_numa_nodes(const sellkit_pool* pool);
sellkit_error sellkit_pool_numa_node_of(const sellkit_pool* pool, int pu, int* node);
/* Line-oriented scheduler event log; free with sellkit_string_free. */
sellkit_error sellkit_pool_trace(const sellkit_pool* pool, char** out);
void sellkit_pool_destroy(sellkit_pool* pool);

void sellkit_string_free(char* s);

/* -------------------------------------------------------- performance model */

sellkit_error sellkit_spmv_code_balance(sellkit_datatype dt, int index_bytes, int include_vectors,
                                        double avg_nnz_per_row, double* out);
sellkit_error sellkit_index_width_saving(int value_bytes, double* out);
sellkit_error sellkit_roofline_bound(double bandwidth_gbs, double peak_gflops, double code_balance,
                                     double* out);
sellkit_error sellkit_crs_refresh_cost(sellkit_gidx nnz, int value_bytes,
                                       double spmv_traffic_per_call, double* out);

typedef struct sellkit_region sellkit_region;

sellkit_error sellkit_region_create(const char* name, sellkit_region** out);
sellkit_error sellkit_region_record(sellkit_region* region, double sample);
sellkit_error sellkit_region_p_max(const sellkit_region* region, double* out);
sellkit_error sellkit_region_p_skip10(const sellkit_region* region, double* out);
/* Fixed-format report table; free with sellkit_string_free. */
sellkit_error sellkit_region_table(const sellkit_region* const* regions, int nregions, char** out);
void sellkit_region_destroy(sellkit_region* region);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SELLKIT_H */
