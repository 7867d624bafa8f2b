#include "ccmtool/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ccmtool/errors.hpp"

namespace ccmtool {

ShadowManifold::ShadowManifold(const TimeSeries& series, EmbeddingParams params)
    : params_(params) {
    const int e = params.dimension;
    const int tau = params.delay;
    if (e < 1 || tau < 1)
        throw InvalidSpec("embedding requires E >= 1 and tau >= 1");
    const auto n = static_cast<int>(series.size());
    offset_ = (e - 1) * tau;
    rows_ = n - offset_;
    if (rows_ < 1)
        throw SeriesTooShort("series of length " + std::to_string(n) +
                             " too short for E=" + std::to_string(e) +
                             ", tau=" + std::to_string(tau));
    const auto& x = series.values();
    points_.resize(static_cast<std::size_t>(rows_) * e);
    for (int k = 0; k < rows_; ++k)
        for (int j = 0; j < e; ++j)
            points_[static_cast<std::size_t>(k) * e + j] =
                x[static_cast<std::size_t>(offset_ + k - j * tau)];
}

ShadowManifold embed(const TimeSeries& series, EmbeddingParams params) {
    return ShadowManifold(series, params);
}

namespace {

// Mutual information of (x_t, x_{t-lag}) in nats, equal-width joint
// histogram with `bins` cells per axis over the full series range.
double lagged_mi(const std::vector<double>& x, int lag, int bins) {
    const auto n = static_cast<int>(x.size());
    const int pairs = n - lag;
    const auto [mn_it, mx_it] = std::minmax_element(x.begin(), x.end());
    const double lo = *mn_it;
    const double width = (*mx_it - lo);
    if (width == 0.0) return 0.0;

    auto bin_of = [&](double v) {
        int b = static_cast<int>((v - lo) / width * bins);
        return std::min(b, bins - 1);
    };

    std::vector<int> joint(static_cast<std::size_t>(bins) * bins, 0);
    std::vector<int> px(bins, 0), py(bins, 0);
    for (int t = lag; t < n; ++t) {
        const int a = bin_of(x[static_cast<std::size_t>(t)]);
        const int b = bin_of(x[static_cast<std::size_t>(t - lag)]);
        ++joint[static_cast<std::size_t>(a) * bins + b];
        ++px[a];
        ++py[b];
    }
    const double inv = 1.0 / pairs;
    double mi = 0.0;
    for (int a = 0; a < bins; ++a) {
        if (px[a] == 0) continue;
        for (int b = 0; b < bins; ++b) {
            const int c = joint[static_cast<std::size_t>(a) * bins + b];
            if (c == 0 || py[b] == 0) continue;
            const double pxy = c * inv;
            mi += pxy * std::log(pxy / (px[a] * inv * py[b] * inv));
        }
    }
    return mi;
}

// Sample autocorrelation at the given lag.
double autocorr(const std::vector<double>& x, int lag) {
    const auto n = static_cast<int>(x.size());
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= n;
    double denom = 0.0;
    for (const double v : x) denom += (v - mean) * (v - mean);
    if (denom == 0.0) return 0.0;
    double num = 0.0;
    for (int t = lag; t < n; ++t)
        num += (x[static_cast<std::size_t>(t)] - mean) *
               (x[static_cast<std::size_t>(t - lag)] - mean);
    return num / denom;
}

int acf_fallback(const std::vector<double>& x, int max_lag) {
    constexpr double inv_e = 0.36787944117144233;
    for (int lag = 1; lag <= max_lag; ++lag)
        if (autocorr(x, lag) < inv_e) return lag;
    return max_lag;
}

} // namespace

int select_tau(const TimeSeries& series, int max_lag) {
    if (max_lag < 1) throw InvalidSpec("max_lag must be >= 1");
    const auto n = static_cast<int>(series.size());
    if (n < 4 * max_lag)
        throw SeriesTooShort("select_tau needs N >= 4*max_lag");
    const auto& x = series.values();
    if (max_lag == 1) return 1;

    const int bins = static_cast<int>(std::ceil(std::sqrt(n / 5.0)));
    std::vector<double> mi(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int lag = 1; lag <= max_lag; ++lag) mi[static_cast<std::size_t>(lag)] = lagged_mi(x, lag, bins);

    // Independent data with this estimator still shows a positive MI of
    // roughly (bins-1)^2 / (2*pairs) nats; a curve that never rises above a
    // multiple of that floor carries no delay structure worth minimising.
    const double floor = (bins - 1.0) * (bins - 1.0) / (2.0 * (n - max_lag));
    const double peak = *std::max_element(mi.begin() + 1, mi.end());
    if (peak >= 5.0 * floor) {
        for (int lag = 1; lag < max_lag; ++lag) {
            const bool down = lag == 1 || mi[static_cast<std::size_t>(lag)] < mi[static_cast<std::size_t>(lag) - 1];
            if (down && mi[static_cast<std::size_t>(lag)] < mi[static_cast<std::size_t>(lag) + 1]) return lag;
        }
    }
    return acf_fallback(x, max_lag);
}

int select_dimension(const TimeSeries& series, int tau, int max_E) {
    if (tau < 1 || max_E < 1)
        throw InvalidSpec("select_dimension requires tau >= 1, max_E >= 1");
    const auto n = static_cast<int>(series.size());
    if (n <= (max_E - 1) * tau + 1)
        throw SeriesTooShort("select_dimension: series too short for max_E");
    if (max_E == 1) return 1;

    const auto& x = series.values();
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= n;
    double ss = 0.0;
    for (const double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / (n - 1));
    if (sd == 0.0) return 1; // constant series folds to a point

    constexpr double ratio_tol = 15.0;
    constexpr double lone_tol = 2.0;
    constexpr double accept_frac = 0.05;

    for (int e = 1; e <= max_E; ++e) {
        // Vector i carries x_{i - k*tau}, k = 0..e-1; it is judged by the
        // forward extension x_{i + tau}, so i runs over [(e-1)*tau, n-tau).
        const int lo = (e - 1) * tau;
        const int hi = n - tau;
        const int rows = hi - lo;
        if (rows < 3) break;

        int false_count = 0;
        for (int i = lo; i < hi; ++i) {
            double best = std::numeric_limits<double>::infinity();
            int best_j = -1;
            for (int j = lo; j < hi; ++j) {
                if (j == i) continue;
                double d2 = 0.0;
                for (int k = 0; k < e; ++k) {
                    const double diff =
                        x[static_cast<std::size_t>(i - k * tau)] -
                        x[static_cast<std::size_t>(j - k * tau)];
                    d2 += diff * diff;
                }
                if (d2 < best) {
                    best = d2;
                    best_j = j;
                }
            }
            // Near-duplicate vectors leave r_e at fp-noise scale where the
            // distance ratio is meaningless; the floor keeps such pairs from
            // registering as false when the extension gap is noise too.
            const double r_e = std::max(std::sqrt(best), 1e-8 * sd);
            const double extra =
                std::abs(x[static_cast<std::size_t>(i + tau)] -
                         x[static_cast<std::size_t>(best_j + tau)]);
            const double r_next = std::sqrt(r_e * r_e + extra * extra);
            if (extra / r_e > ratio_tol || r_next / sd > lone_tol)
                ++false_count;
        }
        if (static_cast<double>(false_count) / rows < accept_frac) return e;
    }
    return max_E;
}

} // namespace ccmtool
