// spmvbench: load or generate a sparse matrix, build SELL-C-sigma, run the
// (distributed) SpMV across simulated ranks and print the region report.
//
//   spmvbench -v -m matrix.mtx -f SELL-32-1 -w 1:2.75 --ranks 2
//
// Exit codes: 0 success, 1 usage error, 2 io error, 3 numeric failure.

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>
#include <thread>
#include <vector>

#include "sellkit.h"

namespace {

struct BenchArgs {
    std::string matrix;
    int chunk_height = 32;
    int sigma = 1;
    bool verbose = false;
    std::vector<double> weights;
    std::string variant = "default";  // default | nocomm
    int iterations = 100;
    int ranks = 1;
    std::string mode = "nooverlap";  // nooverlap | naive | task
    int width = 1;
    bool fake_timer = false;
};

[[noreturn]] void usage_error(const std::string& msg) {
    std::fprintf(stderr, "spmvbench: %s\n", msg.c_str());
    std::fprintf(stderr,
                 "usage: spmvbench -m <matrix|identity:N|laplace:N> [-f SELL-<C>-<sigma>] [-v]\n"
                 "                 [-w w0:w1:...] [-s default|nocomm] [-n iters]\n"
                 "                 [--ranks k] [--mode nooverlap|naive|task] [--width w]\n"
                 "                 [--fake-timer]\n");
    std::exit(1);
}

bool parse_int(const std::string& s, int& out) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) return false;
        out = v;
        return true;
    } catch (...) {
        return false;
    }
}

void parse_format(const std::string& fmt, BenchArgs& args) {
    // SELL-<C>-<sigma>
    if (fmt.rfind("SELL-", 0) != 0) usage_error("malformed format string: " + fmt);
    const std::string rest = fmt.substr(5);
    const auto dash = rest.find('-');
    if (dash == std::string::npos) usage_error("malformed format string: " + fmt);
    int c = 0, s = 0;
    if (!parse_int(rest.substr(0, dash), c) || !parse_int(rest.substr(dash + 1), s) || c < 1 ||
        s < 1)
        usage_error("malformed format string: " + fmt);
    args.chunk_height = c;
    args.sigma = s;
}

BenchArgs parse_args(int argc, char** argv) {
    BenchArgs args;
    auto need_value = [&](int& i, const char* flag) -> std::string {
        if (i + 1 >= argc) usage_error(std::string("missing value for ") + flag);
        return argv[++i];
    };
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "-m") {
            args.matrix = need_value(i, "-m");
        } else if (a == "-f") {
            parse_format(need_value(i, "-f"), args);
        } else if (a == "-v") {
            args.verbose = true;
        } else if (a == "-w") {
            const std::string w = need_value(i, "-w");
            std::size_t start = 0;
            while (start <= w.size()) {
                const auto colon = w.find(':', start);
                const std::string tok =
                    w.substr(start, colon == std::string::npos ? std::string::npos : colon - start);
                try {
                    args.weights.push_back(std::stod(tok));
                } catch (...) {
                    usage_error("malformed weight list: " + w);
                }
                if (colon == std::string::npos) break;
                start = colon + 1;
            }
        } else if (a == "-s") {
            args.variant = need_value(i, "-s");
            if (args.variant != "default" && args.variant != "nocomm")
                usage_error("unknown variant: " + args.variant);
        } else if (a == "-n") {
            if (!parse_int(need_value(i, "-n"), args.iterations) || args.iterations < 1)
                usage_error("bad iteration count");
        } else if (a == "--ranks") {
            if (!parse_int(need_value(i, "--ranks"), args.ranks) || args.ranks < 1)
                usage_error("bad rank count");
        } else if (a == "--mode") {
            args.mode = need_value(i, "--mode");
            if (args.mode != "nooverlap" && args.mode != "naive" && args.mode != "task")
                usage_error("unknown mode: " + args.mode);
        } else if (a == "--width") {
            if (!parse_int(need_value(i, "--width"), args.width) || args.width < 1)
                usage_error("bad block width");
        } else if (a == "--fake-timer") {
            args.fake_timer = true;
        } else {
            usage_error("unknown flag: " + a);
        }
    }
    if (args.matrix.empty()) usage_error("missing matrix (-m)");
    if (!args.weights.empty() && int(args.weights.size()) != args.ranks)
        usage_error("weight count must equal the rank count");
    return args;
}

// advances one millisecond per call, making the report reproducible
double fake_now(void*) {
    static double t = 0.0;
    t += 1.0e-3;
    return t;
}

int identity_row(sellkit_gidx row, sellkit_lidx* rowlen, sellkit_gidx* col, void* val, void*) {
    *rowlen = 1;
    col[0] = row;
    static_cast<double*>(val)[0] = 1.0;
    return 0;
}

struct LaplaceArg {
    sellkit_gidx n;
};

int laplace_row(sellkit_gidx row, sellkit_lidx* rowlen, sellkit_gidx* col, void* val, void* arg) {
    const sellkit_gidx n = static_cast<LaplaceArg*>(arg)->n;
    double* v = static_cast<double*>(val);
    sellkit_lidx k = 0;
    if (row > 0) {
        col[k] = row - 1;
        v[k++] = -1.0;
    }
    col[k] = row;
    v[k++] = 2.0;
    if (row + 1 < n) {
        col[k] = row + 1;
        v[k++] = -1.0;
    }
    *rowlen = k;
    return 0;
}

sellkit_crs* load_matrix(const BenchArgs& args) {
    sellkit_crs* crs = nullptr;
    sellkit_error err;
    if (args.matrix.rfind("identity:", 0) == 0) {
        const long n = std::atol(args.matrix.c_str() + 9);
        if (n < 1) usage_error("bad generator size: " + args.matrix);
        err = sellkit_crs_from_rowfunc(SELLKIT_R64, n, n, 1, identity_row, nullptr, &crs);
    } else if (args.matrix.rfind("laplace:", 0) == 0) {
        const long n = std::atol(args.matrix.c_str() + 8);
        if (n < 1) usage_error("bad generator size: " + args.matrix);
        static LaplaceArg la;
        la.n = n;
        err = sellkit_crs_from_rowfunc(SELLKIT_R64, n, n, 3, laplace_row, &la, &crs);
    } else if (args.matrix.size() > 4 &&
               args.matrix.compare(args.matrix.size() - 4, 4, ".mtx") == 0) {
        err = sellkit_crs_read_mm(args.matrix.c_str(), SELLKIT_R64, &crs);
    } else {
        err = sellkit_crs_read_bin(args.matrix.c_str(), &crs);
    }
    if (err != SELLKIT_OK) {
        std::fprintf(stderr, "spmvbench: cannot load %s: %s\n", args.matrix.c_str(),
                     sellkit_error_name(err));
        std::exit(2);
    }
    return crs;
}

int suggested_ranks() {
    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    sellkit_pool* probe = nullptr;
    if (sellkit_pool_create(int(hw), nullptr, 1, &probe) != SELLKIT_OK) return 1;
    const int nodes = sellkit_pool_num_numa_nodes(probe);
    sellkit_pool_destroy(probe);
    return nodes > 0 ? nodes : 1;
}

} // namespace

int main(int argc, char** argv) {
    const BenchArgs args = parse_args(argc, argv);
    if (args.fake_timer) sellkit_set_timer_override(&fake_now, nullptr);

    sellkit_crs* crs = load_matrix(args);
    sellkit_gidx nrows = 0, ncols = 0, nnz = 0;
    sellkit_crs_dims(crs, &nrows, &ncols, &nnz);
    if (args.verbose)
        std::fprintf(stderr, "matrix: %lld rows, %lld nonzeros, SELL-%d-%d, %d rank(s)\n",
                     (long long)nrows, (long long)nnz, args.chunk_height, args.sigma, args.ranks);

    const int suggestion = suggested_ranks();
    if (args.verbose && args.ranks != suggestion)
        std::fprintf(stderr,
                     "[GHOST] PERFWARNING: The number of MPI ranks (%d) on this node is not "
                     "optimal!\n                     Suggested number: %d (%d NUMA domains)\n",
                     args.ranks, suggestion, suggestion);

    sellkit_ctx* ctx = nullptr;
    sellkit_error err = sellkit_ctx_create(
        crs, args.weights.empty() ? nullptr : args.weights.data(), args.ranks, SELLKIT_BY_ROWS,
        args.chunk_height, args.sigma, /*record=*/1, &ctx);
    if (err != SELLKIT_OK) {
        std::fprintf(stderr, "spmvbench: context setup failed: %s\n", sellkit_error_name(err));
        sellkit_crs_destroy(crs);
        return 2;
    }

    sellkit_dvec* x = nullptr;
    sellkit_dvec* y = nullptr;
    sellkit_densemat* xg = nullptr;
    err = sellkit_dvec_create(ctx, args.width, SELLKIT_ROW_MAJOR, &x);
    if (err == SELLKIT_OK) err = sellkit_dvec_create(ctx, args.width, SELLKIT_ROW_MAJOR, &y);
    if (err == SELLKIT_OK)
        err = sellkit_densemat_create(SELLKIT_R64, (sellkit_lidx)nrows, args.width,
                                      SELLKIT_ROW_MAJOR, &xg);
    if (err == SELLKIT_OK) {
        std::vector<double> ones(std::size_t(nrows) * args.width, 1.0);
        err = sellkit_densemat_copy_in(xg, ones.data(), ones.size());
    }
    if (err == SELLKIT_OK) err = sellkit_dvec_scatter(ctx, xg, x);
    if (err != SELLKIT_OK) {
        std::fprintf(stderr, "spmvbench: vector setup failed: %s\n", sellkit_error_name(err));
        return 2;
    }

    const sellkit_dist_mode mode = args.mode == "naive"  ? SELLKIT_NAIVE_OVERLAP
                                   : args.mode == "task" ? SELLKIT_TASK_OVERLAP
                                                         : SELLKIT_NO_OVERLAP;
    sellkit_spmv_opts opts;
    sellkit_spmv_opts_init(&opts);

    sellkit_region* region = nullptr;
    sellkit_region_create("spmv (GF/s)", &region);
    const double flops = 2.0 * double(nnz) * args.width;

    for (int it = 0; it < args.iterations; ++it) {
        const double t0 = sellkit_now_seconds();
        if (args.variant == "nocomm")
            err = sellkit_spmv_nocomm(y, ctx, x, &opts, nullptr);
        else
            err = sellkit_dist_spmv(y, ctx, x, &opts, mode, nullptr, 4);
        const double t1 = sellkit_now_seconds();
        if (err != SELLKIT_OK) {
            std::fprintf(stderr, "spmvbench: spmv failed: %s\n", sellkit_error_name(err));
            return 3;
        }
        const double dt = t1 - t0;
        sellkit_region_record(region, dt > 0 ? flops / dt / 1e9 : 0.0);
    }

    // validate the result before reporting
    sellkit_densemat* yg = nullptr;
    err = sellkit_densemat_create(SELLKIT_R64, (sellkit_lidx)nrows, args.width, SELLKIT_ROW_MAJOR,
                                  &yg);
    if (err == SELLKIT_OK) err = sellkit_dvec_gather(ctx, y, yg);
    if (err == SELLKIT_OK) {
        std::vector<double> out(std::size_t(nrows) * args.width);
        err = sellkit_densemat_copy_out(yg, out.data(), out.size());
        if (err == SELLKIT_OK)
            for (double v : out)
                if (!std::isfinite(v)) {
                    std::fprintf(stderr, "spmvbench: non-finite result\n");
                    return 3;
                }
    }
    if (err != SELLKIT_OK) {
        std::fprintf(stderr, "spmvbench: result check failed: %s\n", sellkit_error_name(err));
        return 3;
    }

    if (args.verbose) {
        uint64_t bytes = 0, msgs = 0;
        if (sellkit_ctx_comm_stats(ctx, &bytes, &msgs) == SELLKIT_OK)
            std::fprintf(stderr, "communication: %llu messages, %llu bytes\n",
                         (unsigned long long)msgs, (unsigned long long)bytes);
    }

    char* table = nullptr;
    sellkit_region_table(&region, 1, &table);
    std::fputs(table, stdout);
    sellkit_string_free(table);

    sellkit_region_destroy(region);
    sellkit_densemat_destroy(yg);
    sellkit_densemat_destroy(xg);
    sellkit_dvec_destroy(x);
    sellkit_dvec_destroy(y);
    sellkit_ctx_destroy(ctx);
    sellkit_crs_destroy(crs);
    return 0;
}
