// Timing harness for the parallel kernels against their serial references.
// Results must match bit-for-bit; only wall time may differ.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include <omp.h>

#include "ccmtool/crossmap.hpp"
#include "ccmtool/dbn.hpp"
#include "ccmtool/metrics.hpp"
#include "ccmtool/neighbors.hpp"
#include "ccmtool/synthetic.hpp"

namespace {

using clock_type = std::chrono::steady_clock;

double time_best_of(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = clock_type::now();
        fn();
        const auto t1 = clock_type::now();
        best = std::min(best,
                        std::chrono::duration<double, std::milli>(t1 - t0)
                            .count());
    }
    return best;
}

void row(const std::string& name, double serial_ms, double parallel_ms) {
    std::printf("%-22s %12.2f %12.2f %9.2fx\n", name.c_str(), serial_ms,
                parallel_ms, serial_ms / parallel_ms);
}

} // namespace

int main(int argc, char** argv) {
    const int n = argc > 1 ? std::atoi(argv[1]) : 2500;
    const int reps = argc > 2 ? std::atoi(argv[2]) : 3;

    const ccmtool::Recording rec =
        ccmtool::generate(ccmtool::coupled_logistic_pair(0.32, n, 11));
    const ccmtool::TimeSeries& x = rec.channel(0);
    const ccmtool::TimeSeries& y = rec.channel(1);
    const ccmtool::EmbeddingParams params{3, 1};
    const ccmtool::ShadowManifold m = ccmtool::embed(x, params);
    const ccmtool::KernelConfig kernel{};

    std::printf("n_samples=%d  threads=%d  best of %d\n\n", n,
                omp_get_max_threads(), reps);
    std::printf("%-22s %12s %12s %9s\n", "kernel", "serial ms", "parallel ms",
                "speedup");

    {
        ccmtool::NeighborOptions opts;
        opts.exclusion_radius = params.delay * (params.dimension - 1);
        const double s = time_best_of(reps, [&] {
            (void)ccmtool::knn_batch(m, opts, ccmtool::Exec::serial);
        });
        const double p = time_best_of(reps, [&] {
            (void)ccmtool::knn_batch(m, opts, ccmtool::Exec::parallel);
        });
        row("knn_batch", s, p);
    }
    {
        ccmtool::CrossMapOptions so;
        so.exec = ccmtool::Exec::serial;
        ccmtool::CrossMapOptions po;
        po.exec = ccmtool::Exec::parallel;
        const double s = time_best_of(reps, [&] {
            (void)ccmtool::cross_map(x, y, params, kernel, nullptr, nullptr,
                                     so);
        });
        const double p = time_best_of(reps, [&] {
            (void)ccmtool::cross_map(x, y, params, kernel, nullptr, nullptr,
                                     po);
        });
        row("cross_map", s, p);
    }
    {
        ccmtool::LearnOptions so;
        so.exec = ccmtool::Exec::serial;
        ccmtool::LearnOptions po;
        po.exec = ccmtool::Exec::parallel;
        const double s = time_best_of(reps, [&] {
            (void)ccmtool::learn(rec, 2, 0.05, nullptr, so);
        });
        const double p = time_best_of(reps, [&] {
            (void)ccmtool::learn(rec, 2, 0.05, nullptr, po);
        });
        row("learn", s, p);
    }
    {
        ccmtool::SurrogateConfig sc;
        sc.n_surrogates = 20;
        sc.seed = 7;
        ccmtool::CrossMapOptions so;
        so.exec = ccmtool::Exec::serial;
        ccmtool::CrossMapOptions po;
        po.exec = ccmtool::Exec::parallel;
        const double s = time_best_of(reps, [&] {
            (void)ccmtool::shuffled_rho(x, y, params, kernel, nullptr, sc, so);
        });
        const double p = time_best_of(reps, [&] {
            (void)ccmtool::shuffled_rho(x, y, params, kernel, nullptr, sc, po);
        });
        row("shuffled_rho", s, p);
    }
    return 0;
}
