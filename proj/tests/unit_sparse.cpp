#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <complex>
#include <random>

#include "sellcs.hpp"
#include "spmv.hpp"
#include "tsm.hpp"

#include "oracles.hpp"

using namespace sellkit;
using cd = std::complex<double>;

namespace {

/// The worked 4x4 example used throughout: rows
///   r0: (0,1)  r1: (0,2),(1,3)  r2: (2,4)  r3: (1,5),(2,6),(3,7)
CrsData<double> example_4x4() {
    CrsData<double> a;
    a.nrows = a.ncols = 4;
    a.rowptr = {0, 1, 3, 4, 7};
    a.col = {0, 0, 1, 2, 1, 2, 3};
    a.val = {1, 2, 3, 4, 5, 6, 7};
    return a;
}

CrsData<double> identity_crs(gidx n) {
    CrsData<double> a;
    a.nrows = a.ncols = n;
    a.rowptr.resize(std::size_t(n) + 1);
    for (gidx r = 0; r <= n; ++r) a.rowptr[r] = r;
    a.col.resize(std::size_t(n));
    for (gidx r = 0; r < n; ++r) a.col[r] = r;
    a.val.assign(std::size_t(n), 1.0);
    return a;
}

template <class T>
DenseMat<T> from_values(lidx nrows, lidx ncols, StorageOrder order, std::vector<T> vals) {
    auto m = DenseMat<T>::create(nrows, ncols, order);
    m.copy_in(std::span<const T>(vals));
    return m;
}

template <class T>
std::vector<T> flat(const DenseMat<T>& m) {
    std::vector<T> out(std::size_t(m.rows()) * m.cols());
    m.copy_out(std::span<T>(out));
    return out;
}

/// Run the library spmv against the CRS oracle on an unpermuted-index level:
/// inputs and outputs are mapped through row_perm.
template <class T>
std::vector<T> sell_spmv_logical(const SellMatrix<T>& A, const std::vector<T>& x, lidx width,
                                 const SpmvOpts<T>& opts = {}, StorageOrder order = StorageOrder::row_major) {
    auto xs = DenseMat<T>::create(A.ncols, width, order);
    auto ys = DenseMat<T>::create(A.nrows, width, order);
    for (lidx i = 0; i < A.ncols; ++i)
        for (lidx v = 0; v < width; ++v)
            xs(A.cols_permuted ? A.row_perm[i] : i, v) = x[std::size_t(i) * width + v];
    spmv(ys, A, xs, opts);
    std::vector<T> out(std::size_t(A.nrows) * width);
    for (lidx i = 0; i < A.nrows; ++i)
        for (lidx v = 0; v < width; ++v) out[std::size_t(i) * width + v] = ys(A.row_perm[i], v);
    return out;
}

} // namespace

// ----------------------------------------------------------------- sellcs --

TEST_CASE("sigma permutation sorts stably by descending row length per scope") {
    const std::vector<lidx> lens = {1, 2, 1, 3};
    auto order = sigma_permutation(lens, 4);
    CHECK(order == std::vector<lidx>{3, 1, 0, 2});

    auto ident = sigma_permutation(lens, 1);
    CHECK(ident == std::vector<lidx>{0, 1, 2, 3});

    const std::vector<lidx> equal = {2, 2, 2, 2, 2};
    CHECK(sigma_permutation(equal, 5) == std::vector<lidx>{0, 1, 2, 3, 4});

    // scopes never cross: two scopes of 2 sort independently
    const std::vector<lidx> two = {1, 3, 1, 5};
    CHECK(sigma_permutation(two, 2) == std::vector<lidx>{1, 0, 3, 2});
}

TEST_CASE("build lays out the worked 4x4 example") {
    auto A = build(example_4x4(), SellParams{2, 4});
    CHECK(A.nrows == 4);
    CHECK(A.nrows_padded == 4);
    CHECK(A.nnz == 7);
    REQUIRE(A.chunk_len.size() == 2);
    CHECK(A.chunk_len[0] == 3);
    CHECK(A.chunk_len[1] == 1);
    CHECK(A.chunk_offset[1] == 6);
    CHECK(A.chunk_offset[2] == 8);
    // chunk 0 holds rows {r3, r1} column-wise: values [5,2,6,3,7,0]
    const std::vector<double> want0 = {5, 2, 6, 3, 7, 0};
    for (std::size_t i = 0; i < want0.size(); ++i) CHECK(A.val[i] == want0[i]);
    // chunk 1 holds rows {r0, r2}: values [1,4]
    CHECK(A.val[6] == 1.0);
    CHECK(A.val[7] == 4.0);
    CHECK(A.beta == doctest::Approx(7.0 / 8.0));
    CHECK(A.row_perm_inv == std::vector<lidx>{3, 1, 0, 2});

    // padded slots carry value 0 and column 0
    CHECK(A.val[5] == 0.0);
    CHECK(A.col[5] == 0);
}

TEST_CASE("identity matrix builds with unit chunks and beta one") {
    auto A = build(identity_crs(6), SellParams{2, 1});
    for (lidx lc : A.chunk_len) CHECK(lc == 1);
    CHECK(A.beta == 1.0);
    for (lidx i = 0; i < 6; ++i) CHECK(A.row_perm[i] == i);
}

TEST_CASE("SELL-1-1 equals CRS storage") {
    auto src = example_4x4();
    auto A = build(src, SellParams{1, 1});
    REQUIRE(A.val.size() == std::size_t(src.nnz()));
    for (gidx i = 0; i < src.nnz(); ++i) {
        CHECK(A.val[i] == src.val[i]);
        CHECK(A.col[i] == src.col[i]);
    }
    REQUIRE(A.chunk_offset.size() == src.rowptr.size());
    for (std::size_t i = 0; i < src.rowptr.size(); ++i) CHECK(A.chunk_offset[i] == src.rowptr[i]);
    CHECK(A.beta == 1.0);
}

TEST_CASE("SELL-n-1 yields a single ELLPACK chunk") {
    auto src = example_4x4();
    auto A = build(src, SellParams{4, 1});
    CHECK(A.nchunks() == 1);
    CHECK(A.chunk_len[0] == 3);  // max row length
    CHECK(A.nrows_padded == 4);
    CHECK(gidx(A.val.size()) == 12);
}

TEST_CASE("build validates parameters and input") {
    auto src = example_4x4();
    CHECK_THROWS_AS(build(src, SellParams{0, 1}), Error);
    CHECK_THROWS_AS(build(src, SellParams{4, 2}), Error);  // sigma not multiple of C
    CHECK_NOTHROW(build(src, SellParams{4, 4}));
    CHECK_NOTHROW(build(src, SellParams{3, 7}));  // sigma >= nrows: global scope

    auto bad = src;
    bad.col[0] = 9;  // out of range
    CHECK_THROWS_AS(build(bad, SellParams{2, 1}), Error);
}

TEST_CASE("build from a row source matches build from CRS") {
    auto src = example_4x4();
    RowSource<double> rs;
    rs.nrows = rs.ncols = 4;
    rs.max_rowlen = 3;
    rs.fn = [&src](gidx row, lidx& len, gidx* cols, double* vals) {
        len = lidx(src.rowptr[row + 1] - src.rowptr[row]);
        for (lidx j = 0; j < len; ++j) {
            cols[j] = src.col[src.rowptr[row] + j];
            vals[j] = src.val[src.rowptr[row] + j];
        }
    };
    auto A = build(src, SellParams{2, 4});
    auto B = build(rs, SellParams{2, 4});
    CHECK(A.val == B.val);
    CHECK(A.col == B.col);
    CHECK(A.chunk_offset == B.chunk_offset);

    // a row longer than max_rowlen is rejected; the callback reports the true
    // length but must never write beyond the provided capacity
    RowSource<double> lying;
    lying.nrows = lying.ncols = 4;
    lying.max_rowlen = 2;
    lying.fn = [&src](gidx row, lidx& len, gidx* cols, double* vals) {
        len = lidx(src.rowptr[row + 1] - src.rowptr[row]);
        for (lidx j = 0; j < std::min<lidx>(len, 2); ++j) {
            cols[j] = src.col[src.rowptr[row] + j];
            vals[j] = src.val[src.rowptr[row] + j];
        }
    };
    CHECK_THROWS_AS(build(lying, SellParams{2, 4}), Error);
}

TEST_CASE("update_values rewrites values without touching the layout") {
    auto src = example_4x4();
    auto A = build(src, SellParams{2, 4});
    const auto cols_before = A.col;
    const auto offsets_before = A.chunk_offset;

    auto doubled = src;
    for (auto& v : doubled.val) v *= 2.0;
    update_values(A, doubled);
    const std::vector<double> want0 = {10, 4, 12, 6, 14, 0};
    for (std::size_t i = 0; i < want0.size(); ++i) CHECK(A.val[i] == want0[i]);
    CHECK(A.col == cols_before);
    CHECK(A.chunk_offset == offsets_before);

    // idempotence: same values produce bit-identical storage
    auto again = A.val;
    update_values(A, doubled);
    CHECK(A.val == again);

    // one extra nonzero is a pattern mismatch
    auto extra = src;
    extra.rowptr = {0, 2, 4, 5, 8};
    extra.col = {0, 1, 0, 1, 2, 1, 2, 3};
    extra.val = {1, 9, 2, 3, 4, 5, 6, 7};
    CHECK_THROWS_AS(update_values(A, extra), Error);
    try {
        update_values(A, extra);
    } catch (const Error& e) {
        CHECK(e.code() == errc::pattern_mismatch);
    }
}

TEST_CASE("to_crs recovers the original matrix") {
    auto src = example_4x4();
    for (auto params : {SellParams{2, 4}, SellParams{1, 1}, SellParams{4, 4}}) {
        auto A = build(src, params);
        auto back = to_crs(A);
        CHECK(back.rowptr == src.rowptr);
        CHECK(back.col == src.col);
        CHECK(back.val == src.val);
    }

    auto ident = build(identity_crs(5), SellParams{2, 1});
    auto back = to_crs(ident);
    for (gidx r = 0; r < 5; ++r) {
        CHECK(back.rowptr[r] == r);
        CHECK(back.col[r] == r);
    }

    // empty rows round trip as repeated rowptr entries
    CrsData<double> gaps;
    gaps.nrows = gaps.ncols = 3;
    gaps.rowptr = {0, 1, 1, 2};
    gaps.col = {0, 2};
    gaps.val = {1.0, 2.0};
    auto G = build(gaps, SellParams{2, 1});
    auto gback = to_crs(G);
    CHECK(gback.rowptr == gaps.rowptr);
    CHECK(gback.col == gaps.col);
}

TEST_CASE("storage stats report beta and the chunk histogram") {
    auto src = example_4x4();
    auto s44 = storage_stats(build(src, SellParams{2, 4}));
    CHECK(s44.beta == doctest::Approx(0.875));

    // without sorting the chunks pair r0,r1 and r2,r3: lengths 2 and 3
    auto s41 = storage_stats(build(src, SellParams{2, 1}));
    CHECK(s41.beta == doctest::Approx(0.7));

    auto dense_rows = build(identity_crs(8), SellParams{4, 1});
    CHECK(storage_stats(dense_rows).beta == 1.0);

    auto hist = storage_stats(build(src, SellParams{2, 4})).chunk_histogram;
    REQUIRE(hist.size() == 2);
    CHECK(hist[0].first == 1);
    CHECK(hist[0].second == 1);
    CHECK(hist[1].first == 3);
    CHECK(hist[1].second == 1);
}

TEST_CASE("layout is deterministic across worker counts") {
    std::mt19937 rng(17);
    auto src = oracle::random_crs<double>(rng, 150, 150, 0.08);
    const int saved = num_workers();
    set_num_workers(1);
    auto a1 = build(src, SellParams{8, 32});
    set_num_workers(2);
    auto a2 = build(src, SellParams{8, 32});
    set_num_workers(8);
    auto a8 = build(src, SellParams{8, 32});
    set_num_workers(saved);
    CHECK(a1.val == a2.val);
    CHECK(a1.val == a8.val);
    CHECK(a1.col == a2.col);
    CHECK(a1.col == a8.col);
    CHECK(a1.chunk_offset == a8.chunk_offset);
    CHECK(a1.row_perm == a8.row_perm);
}

TEST_CASE("sell spmv equals the CRS oracle over random matrices") {
    std::mt19937 rng(23);
    for (int trial = 0; trial < 12; ++trial) {
        const gidx n = 20 + gidx(rng() % 180);
        auto src = oracle::random_crs<double>(rng, n, n, 0.15);
        auto x = oracle::random_values<double>(rng, std::size_t(n));
        auto want = oracle::crs_spmv(src, x, 1);
        for (lidx c : {1, 2, 4, 8, 32}) {
            for (lidx sigma : {lidx(1), c, lidx(4) * c, lidx(n)}) {
                auto A = build(src, SellParams{c, sigma});
                auto got = sell_spmv_logical(A, x, 1);
                CHECK(oracle::max_rel_err(got, want) < 1e-12);
            }
        }
    }
}

// ------------------------------------------------------------------- spmv --

TEST_CASE("spmv identity and basic products") {
    auto I = build(identity_crs(4), SellParams{2, 1});
    auto x = from_values<double>(4, 1, StorageOrder::row_major, {1, 2, 3, 4});
    auto y = DenseMat<double>::create(4, 1, StorageOrder::row_major);
    spmv(y, I, x);
    for (lidx i = 0; i < 4; ++i) CHECK(y(i, 0) == x(i, 0));

    // column extraction through e1 against the worked example
    auto A = build(example_4x4(), SellParams{2, 4});
    std::vector<double> e1 = {1, 0, 0, 0};
    auto got = sell_spmv_logical(A, e1, 1);
    CHECK(got == std::vector<double>{1, 2, 0, 0});
}

TEST_CASE("shift annihilates the identity") {
    auto I = build(identity_crs(5), SellParams{2, 1});
    auto x = from_values<double>(5, 1, StorageOrder::row_major, {1, 2, 3, 4, 5});
    auto y = DenseMat<double>::create(5, 1, StorageOrder::row_major);
    SpmvOpts<double> opts;
    opts.flags = spmv_flag_shift;
    opts.gamma = 1.0;
    spmv(y, I, x, opts);
    for (lidx i = 0; i < 5; ++i) CHECK(y(i, 0) == 0.0);
}

TEST_CASE("axpby with chained dot mirrors the hand evaluation") {
    auto I = build(identity_crs(2), SellParams{1, 1});
    auto x = from_values<double>(2, 1, StorageOrder::row_major, {1, 1});
    auto y = from_values<double>(2, 1, StorageOrder::row_major, {1, 1});
    double dots[3] = {99, 99, 99};
    SpmvOpts<double> opts;
    opts.flags = spmv_flag_axpby | spmv_flag_dot_xy;
    opts.beta = -2.0;
    opts.dot = dots;
    spmv(y, I, x, opts);
    CHECK(y(0, 0) == -1.0);
    CHECK(y(1, 0) == -1.0);
    CHECK(dots[1] == -2.0);
    CHECK(dots[0] == 99.0);  // only the requested third is written
    CHECK(dots[2] == 99.0);
}

TEST_CASE("spmv validates flags and shapes") {
    auto I = build(identity_crs(3), SellParams{1, 1});
    auto x = DenseMat<double>::create(3, 1, StorageOrder::row_major);
    auto y = DenseMat<double>::create(3, 1, StorageOrder::row_major);
    SpmvOpts<double> opts;
    opts.flags = spmv_flag_shift | spmv_flag_vshift;
    CHECK_THROWS_AS(spmv(y, I, x, opts), Error);
    opts.flags = spmv_flag_dot_yy;  // no buffer
    CHECK_THROWS_AS(spmv(y, I, x, opts), Error);
    auto wide = DenseMat<double>::create(3, 2, StorageOrder::row_major);
    CHECK_THROWS_AS(spmv(wide, I, x, SpmvOpts<double>{}), Error);
    CHECK_THROWS_AS(spmv(x, I, x, SpmvOpts<double>{}), Error);  // aliasing
}

TEST_CASE("fusion equivalence across all valid flag combinations") {
    std::mt19937 rng(31);
    const gidx n = 60;
    const lidx width = 3;
    auto src = oracle::random_crs<double>(rng, n, n, 0.1);
    auto A = build(src, SellParams{4, 8});
    const auto xv = oracle::random_values<double>(rng, std::size_t(n) * width);
    const auto yv = oracle::random_values<double>(rng, std::size_t(n) * width);
    const auto zv = oracle::random_values<double>(rng, std::size_t(n) * width);
    const double alpha = 1.3, beta = -0.7, delta = 0.4, eta = 2.2;
    const std::vector<double> gammas = {0.5, -1.5, 2.0};

    int checked = 0;
    for (std::uint32_t flags = 0; flags < (1u << 7); ++flags) {
        if ((flags & spmv_flag_shift) && (flags & spmv_flag_vshift)) continue;
        SpmvOpts<double> opts;
        opts.flags = flags;
        opts.alpha = alpha;
        opts.beta = beta;
        opts.delta = delta;
        opts.eta = eta;
        opts.gamma = gammas[0];
        opts.gamma_list = gammas.data();
        std::vector<double> dots(3 * width, 0.0);
        opts.dot = dots.data();

        auto x = from_values<double>(lidx(n), width, StorageOrder::row_major, xv);
        auto y = from_values<double>(lidx(n), width, StorageOrder::row_major, yv);
        auto z = from_values<double>(lidx(n), width, StorageOrder::row_major, zv);
        opts.z = &z;

        // map logical x/y/z into the permuted space, run, map back
        std::vector<double> got(std::size_t(n) * width), zgot(std::size_t(n) * width);
        {
            auto xs = DenseMat<double>::create(lidx(n), width, StorageOrder::row_major);
            auto ys = DenseMat<double>::create(lidx(n), width, StorageOrder::row_major);
            auto zs = DenseMat<double>::create(lidx(n), width, StorageOrder::row_major);
            for (lidx i = 0; i < n; ++i)
                for (lidx v = 0; v < width; ++v) {
                    xs(A.row_perm[i], v) = xv[std::size_t(i) * width + v];
                    ys(A.row_perm[i], v) = yv[std::size_t(i) * width + v];
                    zs(A.row_perm[i], v) = zv[std::size_t(i) * width + v];
                }
            SpmvOpts<double> run = opts;
            run.z = &zs;
            spmv(ys, A, xs, run);
            for (lidx i = 0; i < n; ++i)
                for (lidx v = 0; v < width; ++v) {
                    got[std::size_t(i) * width + v] = ys(A.row_perm[i], v);
                    zgot[std::size_t(i) * width + v] = zs(A.row_perm[i], v);
                }
        }

        const bool shift = flags & (spmv_flag_shift | spmv_flag_vshift);
        std::vector<double> gamma_ref(width, 0.0);
        if (flags & spmv_flag_shift) gamma_ref.assign(width, gammas[0]);
        if (flags & spmv_flag_vshift) gamma_ref = gammas;
        auto ref = oracle::fused_spmv(src, xv, yv, zv, width, alpha, beta, gamma_ref, delta, eta,
                                      flags & spmv_flag_axpby, shift, flags & spmv_flag_dot_yy,
                                      flags & spmv_flag_dot_xy, flags & spmv_flag_dot_xx,
                                      flags & spmv_flag_chain_axpby);
        CHECK(oracle::max_rel_err(got, ref.y) < 1e-12);
        CHECK(oracle::max_rel_err(zgot, ref.z) < 1e-12);
        if (flags & spmv_flag_dot_yy)
            for (lidx v = 0; v < width; ++v)
                CHECK(oracle::rel_err(dots[v], ref.dot[v]) < 1e-12);
        if (flags & spmv_flag_dot_xy)
            for (lidx v = 0; v < width; ++v)
                CHECK(oracle::rel_err(dots[width + v], ref.dot[width + v]) < 1e-12);
        if (flags & spmv_flag_dot_xx)
            for (lidx v = 0; v < width; ++v)
                CHECK(oracle::rel_err(dots[2 * width + v], ref.dot[2 * width + v]) < 1e-12);
        ++checked;
    }
    CHECK(checked == 96);  // 128 combinations minus the 32 with both shifts
}

TEST_CASE("spmv is linear in x") {
    std::mt19937 rng(37);
    auto src = oracle::random_crs<double>(rng, 80, 80, 0.1);
    auto A = build(src, SellParams{8, 8});
    auto x1 = oracle::random_values<double>(rng, 80);
    auto x2 = oracle::random_values<double>(rng, 80);
    const double a = 1.7, b = -2.3;
    std::vector<double> combo(80);
    for (int i = 0; i < 80; ++i) combo[i] = a * x1[i] + b * x2[i];
    auto y1 = sell_spmv_logical(A, x1, 1);
    auto y2 = sell_spmv_logical(A, x2, 1);
    auto yc = sell_spmv_logical(A, combo, 1);
    std::vector<double> want(80);
    for (int i = 0; i < 80; ++i) want[i] = a * y1[i] + b * y2[i];
    CHECK(oracle::max_rel_err(yc, want) < 1e-12);
}

TEST_CASE("row- and column-major block vectors agree") {
    std::mt19937 rng(41);
    auto src = oracle::random_crs<double>(rng, 70, 70, 0.12);
    auto A = build(src, SellParams{4, 4});
    auto xv = oracle::random_values<double>(rng, 70 * 4);
    auto rm = sell_spmv_logical(A, xv, 4, {}, StorageOrder::row_major);
    auto cm = sell_spmv_logical(A, xv, 4, {}, StorageOrder::col_major);
    CHECK(oracle::max_rel_err(rm, cm) < 1e-12);
}

TEST_CASE("select_kernel walks the cascade") {
    // 32 and 4 are in the default build configuration
    auto v = select_kernel(SellParams{32, 1}, 4, StorageOrder::row_major);
    CHECK(v.chunk_height == 32);
    CHECK(v.block_width == 4);
    CHECK(v.vectorized);

    auto generic_c = select_kernel(SellParams{7, 1}, 4, StorageOrder::row_major);
    CHECK(generic_c.chunk_height == 0);

    auto generic_w = select_kernel(SellParams{32, 1}, 1000, StorageOrder::row_major);
    CHECK(generic_w.chunk_height == 32);
    CHECK(generic_w.block_width == 0);

    auto colmajor = select_kernel(SellParams{32, 1}, 4, StorageOrder::col_major);
    CHECK(colmajor.chunk_height == 0);
    CHECK(colmajor.block_width == 0);
    CHECK_FALSE(colmajor.vectorized);
}

TEST_CASE("every registered kernel variant matches the generic fallback") {
    std::mt19937 rng(43);
    std::size_t nv = 0;
    const auto* table = kernels::spmv_variant_table();
    nv = kernels::spmv_variant_table_size();
    REQUIRE(nv > 0);
    for (std::size_t i = 0; i < nv; ++i) {
        const int c = table[i].chunk_height ? table[i].chunk_height : 5;
        const lidx w = table[i].block_width ? table[i].block_width : 3;
        const gidx n = 64 + gidx(rng() % 64);
        auto src = oracle::random_crs<double>(rng, n, n, 0.1);
        auto A = build(src, SellParams{c, 1});
        auto xv = oracle::random_values<double>(rng, std::size_t(n) * w);
        auto want = oracle::crs_spmv(src, xv, w);
        auto got = sell_spmv_logical(A, xv, w);  // dispatches to the variant
        CHECK(oracle::max_rel_err(got, want) < 1e-12);
    }
}

TEST_CASE("permuted storage with mapped vectors equals the unpermuted oracle") {
    std::mt19937 rng(47);
    auto src = oracle::random_crs<double>(rng, 90, 90, 0.1);
    auto A = build(src, SellParams{4, 90});  // global sort: heavy permutation
    bool permuted = false;
    for (lidx i = 0; i < 90; ++i) permuted |= A.row_perm[i] != i;
    CHECK(permuted);
    auto xv = oracle::random_values<double>(rng, 90);
    auto got = sell_spmv_logical(A, xv, 1);
    auto want = oracle::crs_spmv(src, xv, 1);
    CHECK(oracle::max_rel_err(got, want) < 1e-12);
}

TEST_CASE("matrix-free override replaces the built-in multiply") {
    auto A = build(identity_crs(3), SellParams{1, 1});
    A.apply_override = [](DenseMat<double>& y, const DenseMat<double>& x,
                          const SpmvOpts<double>&) {
        for (lidx i = 0; i < y.rows(); ++i)
            for (lidx j = 0; j < y.cols(); ++j) y(i, j) = 2.0 * x(i, j);
    };
    auto x = from_values<double>(3, 1, StorageOrder::row_major, {1, 2, 3});
    auto y = DenseMat<double>::create(3, 1, StorageOrder::row_major);
    spmv(y, A, x);
    CHECK(y(1, 0) == 4.0);
}

TEST_CASE("fused complex spmv with conjugated dots matches the composition") {
    std::mt19937 rng(101);
    const gidx n = 30;
    auto src = oracle::random_crs<cd>(rng, n, n, 0.2);
    auto A = build(src, SellParams{2, 4});
    const auto xv = oracle::random_values<cd>(rng, std::size_t(n));
    const auto yv = oracle::random_values<cd>(rng, std::size_t(n));
    const cd alpha(0.7, -0.3), beta(1.1, 0.4), gamma(0.2, 0.9);

    auto xs = DenseMat<cd>::create(lidx(n), 1, StorageOrder::row_major);
    auto ys = DenseMat<cd>::create(lidx(n), 1, StorageOrder::row_major);
    for (lidx i = 0; i < n; ++i) {
        xs(A.row_perm[i], 0) = xv[std::size_t(i)];
        ys(A.row_perm[i], 0) = yv[std::size_t(i)];
    }
    SpmvOpts<cd> opts;
    opts.flags = spmv_flag_axpby | spmv_flag_shift | spmv_flag_dot_xy | spmv_flag_dot_yy;
    opts.alpha = alpha;
    opts.beta = beta;
    opts.gamma = gamma;
    std::vector<cd> dots(3, cd{});
    opts.dot = dots.data();
    spmv(ys, A, xs, opts);

    auto ref = oracle::fused_spmv<cd>(src, xv, yv, {}, 1, alpha, beta, {gamma}, cd{}, cd{},
                                      true, true, true, true, false, false);
    for (lidx i = 0; i < n; ++i)
        CHECK(std::abs(ys(A.row_perm[i], 0) - ref.y[std::size_t(i)]) /
                  (1.0 + std::abs(ref.y[std::size_t(i)])) <
              1e-12);
    CHECK(std::abs(dots[0] - ref.dot[0]) / (1.0 + std::abs(ref.dot[0])) < 1e-12);
    CHECK(std::abs(dots[1] - ref.dot[1]) / (1.0 + std::abs(ref.dot[1])) < 1e-12);
}

TEST_CASE("spmv works on compact column sub-views of wider block vectors") {
    std::mt19937 rng(103);
    const gidx n = 50;
    auto src = oracle::random_crs<double>(rng, n, n, 0.15);
    auto A = build(src, SellParams{4, 4});
    // vectors 1..2 of a four-vector block
    auto xbig = DenseMat<double>::create(lidx(n), 4, StorageOrder::row_major);
    auto ybig = DenseMat<double>::create(lidx(n), 4, StorageOrder::row_major);
    auto xv = oracle::random_values<double>(rng, std::size_t(n) * 2);
    for (lidx i = 0; i < n; ++i)
        for (lidx v = 0; v < 2; ++v) xbig(A.row_perm[i], v + 1) = xv[std::size_t(i) * 2 + v];
    auto xview = xbig.view(0, lidx(n), 1, 3);
    auto yview = ybig.view(0, lidx(n), 1, 3);
    CHECK(xview.kind() == ViewKind::compact_view);
    spmv(yview, A, xview, SpmvOpts<double>{});
    auto want = oracle::crs_spmv(src, xv, 2);
    for (lidx i = 0; i < n; ++i)
        for (lidx v = 0; v < 2; ++v)
            CHECK(oracle::rel_err(ybig(A.row_perm[i], v + 1), want[std::size_t(i) * 2 + v]) <
                  1e-12);
    // untouched columns of the parent stay zero
    for (lidx i = 0; i < n; ++i) {
        CHECK(ybig(i, 0) == 0.0);
        CHECK(ybig(i, 3) == 0.0);
    }
}

TEST_CASE("complex spmv matches the oracle") {
    std::mt19937 rng(53);
    auto src = oracle::random_crs<cd>(rng, 40, 40, 0.15);
    auto A = build(src, SellParams{4, 8});
    auto xv = oracle::random_values<cd>(rng, 40 * 2);
    auto got = sell_spmv_logical(A, xv, 2);
    auto want = oracle::crs_spmv(src, xv, 2);
    double m = 0;
    for (std::size_t i = 0; i < got.size(); ++i)
        m = std::max(m, std::abs(got[i] - want[i]) / (1.0 + std::abs(want[i])));
    CHECK(m < 1e-12);
}

// -------------------------------------------------------------------- tsm --

TEST_CASE("tsmttsm against the worked examples") {
    auto V = from_values<double>(2, 2, StorageOrder::row_major, {1, 2, 3, 4});
    auto W = from_values<double>(2, 2, StorageOrder::row_major, {1, 0, 0, 1});
    auto X = DenseMat<double>::create(2, 2, StorageOrder::col_major);
    tsmttsm(X, V, W, 1.0, 0.0);
    CHECK(X(0, 0) == 1.0);
    CHECK(X(0, 1) == 3.0);
    CHECK(X(1, 0) == 2.0);
    CHECK(X(1, 1) == 4.0);

    auto X2 = from_values<double>(2, 2, StorageOrder::row_major, {9, 8, 7, 6});
    tsmttsm(X2, V, W, 0.0, 1.0);
    CHECK(X2(0, 0) == 9.0);
    CHECK(X2(1, 1) == 6.0);
}

TEST_CASE("kahan summation survives forced cancellation") {
    const int saved = num_workers();
    set_num_workers(1);
    auto V = from_values<double>(3, 1, StorageOrder::row_major, {1e16, 1.0, -1e16});
    auto W = from_values<double>(3, 1, StorageOrder::row_major, {1, 1, 1});
    auto X = DenseMat<double>::create(1, 1, StorageOrder::row_major);
    tsmttsm(X, V, W, 1.0, 0.0, /*kahan=*/true);
    CHECK(X(0, 0) == 1.0);
    tsmttsm(X, V, W, 1.0, 0.0, /*kahan=*/false);
    CHECK(X(0, 0) == 0.0);
    set_num_workers(saved);
}

TEST_CASE("kahan dominance on ill-conditioned sums") {
    std::mt19937 rng(59);
    const int saved = num_workers();
    set_num_workers(1);
    int kahan_wins = 0;
    const int trials = 1000;
    for (int t = 0; t < trials; ++t) {
        const int n = 40;
        std::vector<double> vals(n);
        std::uniform_real_distribution<double> small(-1.0, 1.0);
        for (int i = 0; i < n; i += 2) {
            const double big = 1e12 * (1.0 + small(rng));
            vals[i] = big;
            vals[i + 1] = -big + small(rng);
        }
        auto V = from_values<double>(n, 1, StorageOrder::row_major, vals);
        auto W = from_values<double>(n, 1, StorageOrder::row_major,
                                     std::vector<double>(std::size_t(n), 1.0));
        long double exact = 0.0L;
        for (double v : vals) exact += (long double)v;
        auto Xp = DenseMat<double>::create(1, 1, StorageOrder::row_major);
        auto Xk = DenseMat<double>::create(1, 1, StorageOrder::row_major);
        tsmttsm(Xp, V, W, 1.0, 0.0, false);
        tsmttsm(Xk, V, W, 1.0, 0.0, true);
        const double err_p = std::abs((long double)Xp(0, 0) - exact);
        const double err_k = std::abs((long double)Xk(0, 0) - exact);
        if (err_k <= err_p) ++kahan_wins;
    }
    set_num_workers(saved);
    CHECK(kahan_wins >= 990);
}

TEST_CASE("tsmm against the worked examples") {
    auto V = from_values<double>(2, 2, StorageOrder::row_major, {1, 0, 0, 1});
    auto X = from_values<double>(2, 2, StorageOrder::row_major, {2, 3, 4, 5});
    auto W = DenseMat<double>::create(2, 2, StorageOrder::row_major);
    tsmm(W, V, X, 1.0, 0.0);
    CHECK(W(0, 0) == 2.0);
    CHECK(W(0, 1) == 3.0);
    CHECK(W(1, 0) == 4.0);
    CHECK(W(1, 1) == 5.0);

    auto V2 = from_values<double>(3, 2, StorageOrder::row_major, {1, 2, 3, 4, 5, 6});
    auto I2 = from_values<double>(2, 2, StorageOrder::row_major, {1, 0, 0, 1});
    auto W2 = DenseMat<double>::create(3, 2, StorageOrder::row_major);
    tsmm(W2, V2, I2, 1.0, 0.0);
    for (lidx i = 0; i < 3; ++i)
        for (lidx j = 0; j < 2; ++j) CHECK(W2(i, j) == V2(i, j));

    auto V3 = from_values<double>(1, 2, StorageOrder::row_major, {1, 2});
    auto X3 = from_values<double>(2, 1, StorageOrder::row_major, {1, 1});
    auto W3 = DenseMat<double>::create(1, 1, StorageOrder::row_major);
    tsmm(W3, V3, X3, 1.0, 0.0);
    CHECK(W3(0, 0) == 3.0);

    // V and W must be distinct
    auto sq = from_values<double>(2, 2, StorageOrder::row_major, {1, 0, 0, 1});
    CHECK_THROWS_AS(tsmm(sq, sq, I2, 1.0, 0.0), Error);
}

TEST_CASE("tsm kernels validate shapes") {
    auto V = DenseMat<double>::create(10, 2, StorageOrder::row_major);
    auto W = DenseMat<double>::create(10, 3, StorageOrder::row_major);
    auto Xbad = DenseMat<double>::create(3, 3, StorageOrder::row_major);
    CHECK_THROWS_AS(tsmttsm(Xbad, V, W, 1.0, 0.0), Error);
    auto Wbad = DenseMat<double>::create(9, 3, StorageOrder::row_major);
    CHECK_THROWS_AS(tsmttsm(Xbad, V, Wbad, 1.0, 0.0), Error);
}

TEST_CASE("tsmm_inplace equals copy-based evaluation") {
    auto V = from_values<double>(1, 2, StorageOrder::row_major, {1, 2});
    auto swap = from_values<double>(2, 2, StorageOrder::row_major, {0, 1, 1, 0});
    tsmm_inplace(V, swap, 1.0, 0.0);
    CHECK(V(0, 0) == 2.0);
    CHECK(V(0, 1) == 1.0);

    auto V2 = from_values<double>(2, 2, StorageOrder::row_major, {1, 2, 3, 4});
    auto I = from_values<double>(2, 2, StorageOrder::row_major, {1, 0, 0, 1});
    tsmm_inplace(V2, I, 1.0, 0.0);
    CHECK(V2(1, 1) == 4.0);
    tsmm_inplace(V2, I, 0.0, 2.0);
    CHECK(V2(1, 1) == 8.0);

    auto bad = from_values<double>(2, 3, StorageOrder::row_major, {1, 2, 3, 4, 5, 6});
    CHECK_THROWS_AS(tsmm_inplace(V2, bad, 1.0, 0.0), Error);
}

TEST_CASE("gemm dispatch routes and matches the reference") {
    std::mt19937 rng(61);
    // tall-skinny A^T B -> tsmttsm path
    {
        const lidx n = 1000, m = 4, k = 4;
        auto A = from_values<double>(n, m, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, std::size_t(n) * m));
        auto B = from_values<double>(n, k, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, std::size_t(n) * k));
        auto C = DenseMat<double>::create(m, k, StorageOrder::col_major);
        auto Cref = DenseMat<double>::create(m, k, StorageOrder::col_major);
        gemm(C, A, B, 1.0, 0.0, Trans::conj_transpose, Trans::none);
        oracle::gemm_ref(Cref, A, B, 1.0, 0.0, true, false, false, false);
        for (lidx i = 0; i < m; ++i)
            for (lidx j = 0; j < k; ++j)
                CHECK(oracle::rel_err(C(i, j), Cref(i, j)) < 1e-12);
    }
    // small square product -> fallback path
    {
        auto A = from_values<double>(4, 4, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, 16));
        auto B = from_values<double>(4, 4, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, 16));
        auto C = DenseMat<double>::create(4, 4, StorageOrder::row_major);
        auto Cref = DenseMat<double>::create(4, 4, StorageOrder::row_major);
        gemm(C, A, B, 1.0, 0.0, Trans::none, Trans::none);
        oracle::gemm_ref(Cref, A, B, 1.0, 0.0, false, false, false, false);
        for (lidx i = 0; i < 4; ++i)
            for (lidx j = 0; j < 4; ++j) CHECK(oracle::rel_err(C(i, j), Cref(i, j)) < 1e-12);
        // alpha 0 beta 1 leaves C untouched on every path
        auto before = flat(C);
        gemm(C, A, B, 0.0, 1.0, Trans::none, Trans::none);
        CHECK(flat(C) == before);
    }
}

TEST_CASE("tsm kernels match the triple-loop oracle on random shapes") {
    std::mt19937 rng(67);
    for (int trial = 0; trial < 10; ++trial) {
        const lidx n = 30 + lidx(rng() % 470);
        const lidx m = 1 + lidx(rng() % 8);
        const lidx k = 1 + lidx(rng() % 8);
        auto V = from_values<double>(n, m, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, std::size_t(n) * m));
        auto W = from_values<double>(n, k, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, std::size_t(n) * k));
        const double alpha = 1.25, beta = -0.5;

        auto X = from_values<double>(m, k, StorageOrder::col_major,
                                     oracle::random_values<double>(rng, std::size_t(m) * k));
        auto Xref = X.compact_clone();
        tsmttsm(X, V, W, alpha, beta);
        oracle::gemm_ref(Xref, V, W, alpha, beta, true, true, false, false);
        for (lidx i = 0; i < m; ++i)
            for (lidx j = 0; j < k; ++j) CHECK(oracle::rel_err(X(i, j), Xref(i, j)) < 1e-12);

        auto S = from_values<double>(m, k, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, std::size_t(m) * k));
        auto Wout = W.compact_clone();
        auto Wref = W.compact_clone();
        tsmm(Wout, V, S, alpha, beta);
        oracle::gemm_ref(Wref, V, S, alpha, beta, false, false, false, false);
        for (lidx i = 0; i < n; ++i)
            for (lidx j = 0; j < k; ++j)
                CHECK(oracle::rel_err(Wout(i, j), Wref(i, j)) < 1e-12);

        auto Q = from_values<double>(m, m, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, std::size_t(m) * m));
        auto Vio = V.compact_clone();
        auto Vref = V.compact_clone();
        tsmm_inplace(Vio, Q, alpha, beta);
        oracle::gemm_ref(Vref, V, Q, alpha, beta, false, false, false, false);
        // reference for in-place: alpha*V*Q + beta*V
        for (lidx i = 0; i < n; ++i)
            for (lidx j = 0; j < m; ++j)
                CHECK(oracle::rel_err(Vio(i, j), Vref(i, j)) < 1e-12);
    }
}

TEST_CASE("tsmttsm conjugates the first factor for complex scalars") {
    std::mt19937 rng(71);
    const lidx n = 50, m = 2, k = 3;
    auto V = from_values<cd>(n, m, StorageOrder::row_major,
                             oracle::random_values<cd>(rng, std::size_t(n) * m));
    auto W = from_values<cd>(n, k, StorageOrder::row_major,
                             oracle::random_values<cd>(rng, std::size_t(n) * k));
    auto X = DenseMat<cd>::create(m, k, StorageOrder::col_major);
    auto Xref = DenseMat<cd>::create(m, k, StorageOrder::col_major);
    tsmttsm(X, V, W, cd(1), cd(0));
    oracle::gemm_ref(Xref, V, W, cd(1), cd(0), true, true, false, false);
    for (lidx i = 0; i < m; ++i)
        for (lidx j = 0; j < k; ++j) CHECK(std::abs(X(i, j) - Xref(i, j)) < 1e-10);
}

TEST_CASE("fixed-dimension tsmm variants match the oracle") {
    std::mt19937 rng(79);
    std::size_t nv = 0;
    const auto* tab = kernels::tsmm_variants(&nv);
    REQUIRE(nv > 0);
    for (std::size_t i = 0; i < nv; ++i) {
        const lidx m = tab[i].m, k = tab[i].k;
        const lidx n = 150;
        auto V = from_values<double>(n, m, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, std::size_t(n) * m));
        auto X = from_values<double>(m, k, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, std::size_t(m) * k));
        auto W = from_values<double>(n, k, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, std::size_t(n) * k));
        auto Wref = W.compact_clone();
        tsmm(W, V, X, 1.5, -0.25);  // row-major double: fixed kernel path
        oracle::gemm_ref(Wref, V, X, 1.5, -0.25, false, false, false, false);
        for (lidx a = 0; a < n; ++a)
            for (lidx b = 0; b < k; ++b) CHECK(oracle::rel_err(W(a, b), Wref(a, b)) < 1e-12);
    }
}

TEST_CASE("fixed-width tsm variants match the generic path") {
    std::mt19937 rng(73);
    std::size_t nv = 0;
    const auto* tab = kernels::tsmttsm_variants(&nv);
    REQUIRE(nv > 0);
    for (std::size_t i = 0; i < nv; ++i) {
        const lidx m = tab[i].m, k = tab[i].k;
        const lidx n = 200;
        auto V = from_values<double>(n, m, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, std::size_t(n) * m));
        auto W = from_values<double>(n, k, StorageOrder::row_major,
                                     oracle::random_values<double>(rng, std::size_t(n) * k));
        auto X = DenseMat<double>::create(m, k, StorageOrder::col_major);
        auto Xref = DenseMat<double>::create(m, k, StorageOrder::col_major);
        tsmttsm(X, V, W, 2.0, 0.0);  // row-major double: dispatches to the fixed kernel
        oracle::gemm_ref(Xref, V, W, 2.0, 0.0, true, true, false, false);
        for (lidx a = 0; a < m; ++a)
            for (lidx b = 0; b < k; ++b) CHECK(oracle::rel_err(X(a, b), Xref(a, b)) < 1e-12);
    }
}
