#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ccmtool/crossmap.hpp"
#include "ccmtool/series.hpp"

namespace ccmtool {

/// How a surrogate destroys source-target alignment. circular_shift keeps
/// each series' autocorrelation intact (the honest null for manifold
/// methods); full_permutation is the classical shuffle.
enum class SurrogateMethod { circular_shift, full_permutation };

struct SurrogateConfig {
    SurrogateMethod method = SurrogateMethod::circular_shift;
    int n_surrogates = 100;
    std::uint64_t seed = 0;
    /// Test hook: force every circular shift to this offset instead of
    /// drawing one (0 reproduces the unshuffled rho exactly).
    std::optional<int> forced_offset;
};

struct SurrogateStats {
    double mean = 0.0;
    double std = 0.0; ///< population std over surrogates
};

/// Normalized predictive consistency (rho_pre - rho_shuffled) /
/// (1 - rho_shuffled). Throws DegenerateBaseline when rho_shuffled is within
/// 1e-9 of 1. Values below 0 (rho_pre below the null) pass through verbatim.
double pc_norm(double rho_pre, double rho_shuffled);

/// Null distribution of cross-map skill: for each surrogate, misalign the
/// target (rotate by a uniform offset in [N/4, 3N/4], or permute), rerun
/// cross_map, and collect rho. Per-surrogate seeds are pre-generated from
/// sc.seed, so the result does not depend on evaluation order. With a DBN
/// context the model is not refit; its conditionals are evaluated against
/// the surrogate target so the whole scoring path is nullified.
SurrogateStats shuffled_rho(const TimeSeries& source, const TimeSeries& target,
                            const EmbeddingParams& params,
                            const KernelConfig& cfg, const DbnContext* dbn,
                            const SurrogateConfig& sc,
                            const CrossMapOptions& options = {});

/// Same null construction for the Granger baseline: misalign the target,
/// refit, collect granger_skill. Keeps the comparison with cross-map PC on
/// one footing.
SurrogateStats shuffled_granger_skill(const TimeSeries& source,
                                      const TimeSeries& target, int lag_order,
                                      const SurrogateConfig& sc,
                                      Exec exec = Exec::parallel);

struct PredictorOutcome {
    std::string predictor;
    double rho_pre = 0.0;
    double rho_post = 0.0;
};

/// Causal impact ranking: CI_i = rho_pre_i * |delta_i| / max_j |delta_j|.
/// When every delta is 0 all CI are 0 (documented convention, avoids 0/0).
/// A negative rho_pre passes through as-is.
std::vector<double> causal_impact(const std::vector<PredictorOutcome>& results);

} // namespace ccmtool
