#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ccmtool/dbn.hpp"
#include "ccmtool/embedding.hpp"
#include "ccmtool/neighbors.hpp"
#include "ccmtool/series.hpp"

namespace ccmtool {

/// Bandwidth rule for the Gaussian kernel. The per-query modes adapt sigma to
/// the local neighbor distances; global_fixed uses one user-supplied sigma.
enum class BandwidthMode { per_query_mean, per_query_nearest, global_fixed };

struct KernelConfig {
    BandwidthMode bandwidth_mode = BandwidthMode::per_query_mean;
    std::optional<double> fixed_sigma; ///< required iff global_fixed
};

enum class CcmMode { standard, dbn_informed };

/// Knobs that do not change the mathematical definition of the map, only the
/// neighbor admission rule and the execution policy. An unset
/// exclusion_radius resolves to the Theiler default tau*(E-1).
struct CrossMapOptions {
    std::optional<int> exclusion_radius;
    bool allow_self = false;
    Exec exec = Exec::parallel;
};

struct CcmResult {
    double rho = 0.0;
    std::vector<double> predictions; ///< one entry per manifold row
    std::pair<std::string, std::string> direction; ///< (source, target) labels
    int library_size = 0;
    CcmMode mode = CcmMode::standard;
    EmbeddingParams embedding;
    bool degenerate = false; ///< rho reported as 0 because a variance was 0
};

/// Library subsets for convergence curves are drawn either as uniform
/// without-replacement row samples or as one contiguous block per draw.
enum class LibraryDraw { uniform, contiguous };

struct ConvergenceCurve {
    std::vector<int> library_sizes; ///< strictly increasing
    std::vector<double> rho_mean;
    std::vector<double> rho_std; ///< population std over draws (0 when n_draws=1)
    int n_draws = 0;
};

/// A learned model plus the recording its conditionals are evaluated on. The
/// recording must have the model's channel layout and be sampled in lockstep
/// with the series handed to cross_map.
struct DbnContext {
    const DbnModel* model = nullptr;
    const Recording* data = nullptr;
};

/// Gaussian kernel weights u_i = exp(-d_i^2 / (2 sigma^2)) with sigma resolved
/// per cfg. An all-zero neighborhood (exact duplicates) returns uniform 1s;
/// a zero sigma against any nonzero distance throws DegenerateNeighborhood.
std::vector<double> kernel_weights(const NeighborSet& ns,
                                   const KernelConfig& cfg);

/// Cross-map the target from the source's shadow manifold. For every manifold
/// row: E+1 nearest neighbors (within `library` rows when given, the Theiler
/// window applies either way), kernel weights u_i, DBN conditionals p_i of the
/// target channel at each neighbor's sample index (1 outside the model's
/// observable range, and identically 1 in standard mode), hybrid weights
/// w_i = u_i p_i / sum_j u_j p_j, prediction sum_i w_i * target[time(i)].
/// rho is the Pearson correlation between the target samples at the predicted
/// rows and the predictions. When every p_i of a row is the same value the
/// normalizer is computed from the u_i alone, so a constant conditional
/// density reproduces standard mode bit for bit.
CcmResult cross_map(const TimeSeries& source, const TimeSeries& target,
                    const EmbeddingParams& params, const KernelConfig& cfg,
                    const DbnContext* dbn = nullptr,
                    const std::vector<int>* library = nullptr,
                    const CrossMapOptions& options = {});

/// Mean and population std of cross-map rho over n_draws random library
/// subsets per size. Each (size, draw) cell runs on its own stream derived
/// from `seed`, so the curve is independent of evaluation order.
ConvergenceCurve convergence(const TimeSeries& source, const TimeSeries& target,
                             const EmbeddingParams& params,
                             const KernelConfig& cfg, const DbnContext* dbn,
                             const std::vector<int>& sizes, int n_draws,
                             std::uint64_t seed,
                             LibraryDraw draw = LibraryDraw::uniform,
                             const CrossMapOptions& options = {});

/// Sample Pearson correlation with compensated summation. A constant input
/// yields 0 with *degenerate set; the result is clamped to [-1, 1].
double pearson(const std::vector<double>& a, const std::vector<double>& b,
               bool* degenerate = nullptr);

} // namespace ccmtool
