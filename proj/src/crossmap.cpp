#include "ccmtool/crossmap.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <string>

#include "ccmtool/errors.hpp"
#include "ccmtool/rng.hpp"

namespace ccmtool {

namespace {

// Kahan-compensated accumulator; keeps parallel and serial reductions in
// agreement by making the serial sum itself nearly exact.
struct Accum {
    double sum = 0.0;
    double c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

double resolve_sigma(const NeighborSet& ns, const KernelConfig& cfg) {
    switch (cfg.bandwidth_mode) {
    case BandwidthMode::per_query_nearest:
        return ns.distances.front();
    case BandwidthMode::global_fixed:
        return *cfg.fixed_sigma;
    case BandwidthMode::per_query_mean:
    default: {
        double s = 0.0;
        for (const double d : ns.distances) s += d;
        return s / static_cast<double>(ns.distances.size());
    }
    }
}

} // namespace

std::vector<double> kernel_weights(const NeighborSet& ns,
                                   const KernelConfig& cfg) {
    if (ns.distances.empty())
        throw InvalidSpec("kernel_weights: empty neighbor set");
    if (cfg.fixed_sigma.has_value() !=
        (cfg.bandwidth_mode == BandwidthMode::global_fixed))
        throw InvalidSpec("fixed_sigma is required iff bandwidth is global_fixed");
    if (cfg.fixed_sigma && !(*cfg.fixed_sigma > 0.0))
        throw InvalidSpec("fixed_sigma must be positive");

    const bool all_zero =
        std::all_of(ns.distances.begin(), ns.distances.end(),
                    [](double d) { return d == 0.0; });
    if (all_zero)
        return std::vector<double>(ns.distances.size(), 1.0);

    const double sigma = resolve_sigma(ns, cfg);
    if (sigma == 0.0)
        throw DegenerateNeighborhood(
            "kernel bandwidth is 0 with nonzero neighbor distances (query " +
            std::to_string(ns.query_index) + ")");

    std::vector<double> u;
    u.reserve(ns.distances.size());
    for (const double d : ns.distances)
        u.push_back(std::exp(-(d * d) / (2.0 * sigma * sigma)));
    return u;
}

namespace {

// One row of the cross-map: neighbors, kernel weights, optional DBN
// conditionals, normalized combination. When every p_i carries the same
// value the normalizer is built from the u_i alone, which reduces to
// standard mode bit for bit (the p_i would cancel exactly in real
// arithmetic; this keeps the cancellation exact in floating point too).
double predict_row(const ShadowManifold& m, const TimeSeries& target,
                   int row, const KernelConfig& cfg,
                   const NeighborOptions& nopts,
                   const std::vector<int>* library, const DbnModel* model,
                   const Recording* rec, int target_channel) {
    const NeighborSet ns = library ? knn_library(m, *library, row, nopts)
                                   : knn(m, row, nopts);
    const std::vector<double> u = kernel_weights(ns, cfg);
    const std::size_t k = ns.indices.size();

    std::vector<double> p(k, 1.0);
    if (model) {
        for (std::size_t i = 0; i < k; ++i) {
            const int t = m.time_index(ns.indices[i]);
            // Rows whose parents predate the recording get a neutral weight.
            if (t >= model->max_lag())
                p[i] = conditional_probability(*model, *rec, target_channel, t);
        }
    }
    const bool equal_p =
        std::all_of(p.begin(), p.end(), [&](double v) { return v == p[0]; });

    double norm = 0.0;
    double pred = 0.0;
    if (equal_p) {
        for (std::size_t i = 0; i < k; ++i) norm += u[i];
        if (norm == 0.0) {
            // Kernel underflow (tiny fixed sigma): fall back to uniform.
            for (std::size_t i = 0; i < k; ++i)
                pred += target[static_cast<std::size_t>(
                            m.time_index(ns.indices[i]))] /
                        static_cast<double>(k);
            return pred;
        }
        for (std::size_t i = 0; i < k; ++i)
            pred += (u[i] / norm) *
                    target[static_cast<std::size_t>(m.time_index(ns.indices[i]))];
        return pred;
    }
    for (std::size_t i = 0; i < k; ++i) norm += u[i] * p[i];
    if (norm == 0.0) {
        for (std::size_t i = 0; i < k; ++i)
            pred += target[static_cast<std::size_t>(m.time_index(ns.indices[i]))] /
                    static_cast<double>(k);
        return pred;
    }
    for (std::size_t i = 0; i < k; ++i)
        pred += (u[i] * p[i] / norm) *
                target[static_cast<std::size_t>(m.time_index(ns.indices[i]))];
    return pred;
}

} // namespace

CcmResult cross_map(const TimeSeries& source, const TimeSeries& target,
                    const EmbeddingParams& params, const KernelConfig& cfg,
                    const DbnContext* dbn, const std::vector<int>* library,
                    const CrossMapOptions& options) {
    if (source.size() != target.size())
        throw LengthMismatch("source and target lengths differ");

    const ShadowManifold m = embed(source, params);

    NeighborOptions nopts;
    nopts.exclusion_radius =
        options.exclusion_radius
            ? *options.exclusion_radius
            : params.delay * (params.dimension - 1);
    nopts.allow_self = options.allow_self;

    const DbnModel* model = nullptr;
    const Recording* rec = nullptr;
    int target_channel = -1;
    if (dbn) {
        if (!dbn->model || !dbn->data)
            throw InvalidSpec("dbn context needs both a model and a recording");
        model = dbn->model;
        rec = dbn->data;
        if (rec->n_samples() != target.size())
            throw LengthMismatch("model recording is not sampled in lockstep "
                                 "with the series");
        target_channel = model->channel_index(target.label());
        if (static_cast<int>(rec->n_channels()) != model->n_channels())
            throw ChannelMismatch("recording channel count differs from model");
        for (int c = 0; c < model->n_channels(); ++c)
            if (rec->channel(static_cast<std::size_t>(c)).label() !=
                model->labels()[static_cast<std::size_t>(c)])
                throw ChannelMismatch("recording channel order differs from model");
    }

    std::vector<int> lib_sorted;
    if (library) {
        lib_sorted = *library;
        std::sort(lib_sorted.begin(), lib_sorted.end());
        lib_sorted.erase(std::unique(lib_sorted.begin(), lib_sorted.end()),
                         lib_sorted.end());
    }
    const std::vector<int>* lib = library ? &lib_sorted : nullptr;

    const int rows = m.rows();
    std::vector<double> predictions(static_cast<std::size_t>(rows));
    if (options.exec == Exec::serial) {
        for (int t = 0; t < rows; ++t)
            predictions[static_cast<std::size_t>(t)] =
                predict_row(m, target, t, cfg, nopts, lib, model, rec,
                            target_channel);
    } else {
        // Exceptions may not escape an OpenMP region; capture and rethrow.
        std::exception_ptr err;
#pragma omp parallel for schedule(static)
        for (int t = 0; t < rows; ++t) {
            try {
                predictions[static_cast<std::size_t>(t)] =
                    predict_row(m, target, t, cfg, nopts, lib, model, rec,
                                target_channel);
            } catch (...) {
#pragma omp critical(ccmtool_cross_map_err)
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
    }

    std::vector<double> truth(static_cast<std::size_t>(rows));
    for (int t = 0; t < rows; ++t)
        truth[static_cast<std::size_t>(t)] =
            target[static_cast<std::size_t>(m.time_index(t))];

    CcmResult out;
    out.degenerate = false;
    out.rho = pearson(truth, predictions, &out.degenerate);
    out.predictions = std::move(predictions);
    out.direction = {source.label(), target.label()};
    out.library_size = lib ? static_cast<int>(lib->size()) : rows;
    out.mode = dbn ? CcmMode::dbn_informed : CcmMode::standard;
    out.embedding = params;
    return out;
}

ConvergenceCurve convergence(const TimeSeries& source, const TimeSeries& target,
                             const EmbeddingParams& params,
                             const KernelConfig& cfg, const DbnContext* dbn,
                             const std::vector<int>& sizes, int n_draws,
                             std::uint64_t seed, LibraryDraw draw,
                             const CrossMapOptions& options) {
    if (sizes.empty() || n_draws < 1)
        throw InvalidSpec("convergence needs sizes and n_draws >= 1");
    for (std::size_t i = 1; i < sizes.size(); ++i)
        if (sizes[i] <= sizes[i - 1])
            throw InvalidSpec("library sizes must be strictly increasing");

    const ShadowManifold m = embed(source, params);
    const int rows = m.rows();
    if (sizes.front() < 1 || sizes.back() > rows)
        throw NotEnoughPoints("library size " + std::to_string(sizes.back()) +
                              " exceeds " + std::to_string(rows) +
                              " manifold rows");

    ConvergenceCurve curve;
    curve.library_sizes = sizes;
    curve.n_draws = n_draws;
    curve.rho_mean.reserve(sizes.size());
    curve.rho_std.reserve(sizes.size());

    std::vector<int> all_rows(static_cast<std::size_t>(rows));
    for (int i = 0; i < rows; ++i) all_rows[static_cast<std::size_t>(i)] = i;

    for (const int size : sizes) {
        std::vector<double> rhos;
        rhos.reserve(static_cast<std::size_t>(n_draws));
        for (int d = 0; d < n_draws; ++d) {
            SplitMix64 rng(derive_seed(seed, "convergence/size=" +
                                                 std::to_string(size) +
                                                 "/draw=" + std::to_string(d)));
            std::vector<int> lib;
            if (draw == LibraryDraw::contiguous) {
                const int start =
                    static_cast<int>(rng.uniform_int(0, rows - size));
                lib.resize(static_cast<std::size_t>(size));
                for (int i = 0; i < size; ++i)
                    lib[static_cast<std::size_t>(i)] = start + i;
            } else {
                // Partial Fisher-Yates: first `size` entries are a uniform
                // without-replacement sample of the rows.
                std::vector<int> pool = all_rows;
                for (int i = 0; i < size; ++i) {
                    const int j = i + static_cast<int>(
                                          rng.uniform_int(0, rows - 1 - i));
                    std::swap(pool[static_cast<std::size_t>(i)],
                              pool[static_cast<std::size_t>(j)]);
                }
                lib.assign(pool.begin(), pool.begin() + size);
                std::sort(lib.begin(), lib.end());
            }
            rhos.push_back(
                cross_map(source, target, params, cfg, dbn, &lib, options).rho);
        }
        double mean = 0.0;
        for (const double r : rhos) mean += r;
        mean /= static_cast<double>(n_draws);
        double var = 0.0;
        for (const double r : rhos) var += (r - mean) * (r - mean);
        var /= static_cast<double>(n_draws);
        curve.rho_mean.push_back(mean);
        curve.rho_std.push_back(std::sqrt(var));
    }
    return curve;
}

double pearson(const std::vector<double>& a, const std::vector<double>& b,
               bool* degenerate) {
    if (a.size() != b.size())
        throw LengthMismatch("pearson inputs differ in length");
    if (a.size() < 2)
        throw LengthMismatch("pearson needs at least 2 samples");
    if (degenerate) *degenerate = false;

    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
    if (*amin == *amax || *bmin == *bmax) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }

    const auto n = a.size();
    Accum sa, sb;
    for (std::size_t i = 0; i < n; ++i) {
        sa.add(a[i]);
        sb.add(b[i]);
    }
    const double ma = sa.sum / static_cast<double>(n);
    const double mb = sb.sum / static_cast<double>(n);

    Accum cov, va, vb;
    for (std::size_t i = 0; i < n; ++i) {
        const double da = a[i] - ma;
        const double db = b[i] - mb;
        cov.add(da * db);
        va.add(da * da);
        vb.add(db * db);
    }
    if (!(va.sum > 0.0) || !(vb.sum > 0.0)) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    // sqrt(va*vb) keeps the bitwise identities r(a,a)=1 and r(a,-a)=-1;
    // the product only overflows for variances beyond 1e150.
    const double prod = va.sum * vb.sum;
    const double denom =
        std::isfinite(prod) ? std::sqrt(prod)
                            : std::sqrt(va.sum) * std::sqrt(vb.sum);
    const double r = cov.sum / denom;
    return std::clamp(r, -1.0, 1.0);
}

} // namespace ccmtool
