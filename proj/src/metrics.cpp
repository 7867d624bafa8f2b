#include "ccmtool/metrics.hpp"

#include <cmath>
#include <exception>

#include "ccmtool/baselines.hpp"
#include "ccmtool/errors.hpp"
#include "ccmtool/rng.hpp"

namespace ccmtool {

double pc_norm(double rho_pre, double rho_shuffled) {
    if (rho_shuffled >= 1.0 - 1e-9)
        throw DegenerateBaseline("shuffled baseline too close to 1");
    return (rho_pre - rho_shuffled) / (1.0 - rho_shuffled);
}

namespace {

std::vector<double> surrogate_values(const TimeSeries& target,
                                     const SurrogateConfig& sc,
                                     std::uint64_t seed) {
    const auto n = target.size();
    SplitMix64 rng(seed);
    std::vector<double> v(target.values());
    if (sc.method == SurrogateMethod::full_permutation) {
        rng.shuffle(v);
        return v;
    }
    const auto lo = static_cast<std::int64_t>(n / 4);
    const auto hi = static_cast<std::int64_t>(3 * n / 4);
    const auto offset = sc.forced_offset
                            ? static_cast<std::int64_t>(*sc.forced_offset)
                            : rng.uniform_int(lo, hi);
    std::vector<double> rotated(n);
    for (std::size_t i = 0; i < n; ++i)
        rotated[i] = v[(i + static_cast<std::size_t>(offset)) % n];
    return rotated;
}

// Shared engine: pre-generated per-surrogate seeds, optional parallel loop,
// population mean and std of the skill values.
template <typename SkillFn>
SurrogateStats run_surrogates(const TimeSeries& target,
                              const SurrogateConfig& sc, Exec exec,
                              const SkillFn& skill) {
    if (sc.n_surrogates < 1)
        throw InvalidSpec("need at least one surrogate");

    std::vector<std::uint64_t> seeds(static_cast<std::size_t>(sc.n_surrogates));
    SplitMix64 root(sc.seed);
    for (auto& s : seeds) s = root.next();

    std::vector<double> skills(static_cast<std::size_t>(sc.n_surrogates));
    auto run_one = [&](int i) {
        const std::vector<double> values =
            surrogate_values(target, sc, seeds[static_cast<std::size_t>(i)]);
        const TimeSeries shuffled(values, target.sample_rate(), target.label());
        skills[static_cast<std::size_t>(i)] = skill(shuffled, values);
    };

    if (exec == Exec::serial) {
        for (int i = 0; i < sc.n_surrogates; ++i) run_one(i);
    } else {
        // Exceptions may not escape an OpenMP region; capture and rethrow.
        std::exception_ptr err;
#pragma omp parallel for schedule(static)
        for (int i = 0; i < sc.n_surrogates; ++i) {
            try {
                run_one(i);
            } catch (...) {
#pragma omp critical(ccmtool_surrogates_err)
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
    }

    double mean = 0.0;
    for (const double r : skills) mean += r;
    mean /= static_cast<double>(sc.n_surrogates);
    double var = 0.0;
    for (const double r : skills) var += (r - mean) * (r - mean);
    var /= static_cast<double>(sc.n_surrogates);
    return {mean, std::sqrt(var)};
}

} // namespace

SurrogateStats shuffled_rho(const TimeSeries& source, const TimeSeries& target,
                            const EmbeddingParams& params,
                            const KernelConfig& cfg, const DbnContext* dbn,
                            const SurrogateConfig& sc,
                            const CrossMapOptions& options) {
    // The surrogate loop is the parallel axis; rows inside cross_map stay
    // serial to avoid nested regions.
    CrossMapOptions inner = options;
    inner.exec = Exec::serial;
    return run_surrogates(
        target, sc, options.exec,
        [&](const TimeSeries& shuffled, const std::vector<double>& values) {
            if (dbn) {
                const Recording swapped = dbn->data->with_channel(
                    dbn->data->channel_index(target.label()), values);
                const DbnContext ctx{dbn->model, &swapped};
                return cross_map(source, shuffled, params, cfg, &ctx, nullptr,
                                 inner)
                    .rho;
            }
            return cross_map(source, shuffled, params, cfg, nullptr, nullptr,
                             inner)
                .rho;
        });
}

SurrogateStats shuffled_granger_skill(const TimeSeries& source,
                                      const TimeSeries& target, int lag_order,
                                      const SurrogateConfig& sc, Exec exec) {
    return run_surrogates(
        target, sc, exec,
        [&](const TimeSeries& shuffled, const std::vector<double>&) {
            return granger_skill(granger(source, shuffled, lag_order));
        });
}

std::vector<double> causal_impact(const std::vector<PredictorOutcome>& results) {
    if (results.empty())
        throw InvalidSpec("causal_impact needs at least one predictor");
    double max_delta = 0.0;
    for (const auto& r : results)
        max_delta = std::max(max_delta, std::abs(r.rho_post - r.rho_pre));
    std::vector<double> ci;
    ci.reserve(results.size());
    for (const auto& r : results)
        ci.push_back(max_delta == 0.0
                         ? 0.0
                         : r.rho_pre * std::abs(r.rho_post - r.rho_pre) /
                               max_delta);
    return ci;
}

} // namespace ccmtool
