#pragma once

#include <optional>
#include <string>
#include <utility>

#include "ccmtool/crossmap.hpp"
#include "ccmtool/dbn.hpp"
#include "ccmtool/series.hpp"
#include "ccmtool/synthetic.hpp"

namespace ccmtool {

/// Half-open analysis window in seconds.
struct Window {
    double start_s = 0.0;
    double end_s = 0.0;
};

enum class InterventionScheme { segmented, simulated };

/// DBN usage inside an intervention analysis. The model is always trained on
/// the pre-window segment; by default its conditionals are then evaluated on
/// the post segment unchanged, so intervention-induced probability shifts
/// stay observable. retrain_post refits on the post segment instead.
struct InterventionDbn {
    int max_lag = 2;
    double lambda = 0.05;
    const EdgePriorMatrix* priors = nullptr;
    bool retrain_post = false;
    LearnOptions learn;
};

struct InterventionResult {
    double rho_pre = 0.0;
    double rho_post = 0.0;
    double delta_rho = 0.0; ///< always exactly rho_post - rho_pre
    std::pair<std::string, std::string> direction;
    CcmMode mode = CcmMode::standard;
    InterventionScheme scheme = InterventionScheme::segmented;
    Window pre_window;  ///< resolved, seconds
    Window post_window; ///< resolved, seconds
    bool degenerate_pre = false;
    bool degenerate_post = false;
    /// Fraction of comparable manifold rows whose neighbor set differs
    /// between the pre and post manifolds. Purely diagnostic.
    double neighbor_shift_fraction = 0.0;
};

/// Cross-map skill before and after an event: the recording is cut into the
/// two windows (default [0, onset) and [onset, end), requiring an event
/// onset), each segment is embedded independently, and cross_map runs on
/// each. Segment-then-embed means no embedded point ever mixes pre and post
/// samples; the first (E-1)*tau samples after the cut never form a manifold
/// row of their own. Callers preprocess (filter/standardize) beforehand.
InterventionResult segmented_intervention(
    const Recording& rec, const std::string& source_ch,
    const std::string& target_ch, const EmbeddingParams& params,
    const KernelConfig& cfg, const InterventionDbn* dbn = nullptr,
    std::optional<Window> pre_window = std::nullopt,
    std::optional<Window> post_window = std::nullopt,
    const CrossMapOptions& options = {});

/// Generate a trajectory with a do-operation applied from
/// onset_fraction onward, then run the segmented analysis around that onset.
InterventionResult simulated_intervention(
    SyntheticSpec spec, const DoOperation& do_op, double onset_fraction,
    const std::string& source_ch, const std::string& target_ch,
    const EmbeddingParams& params, const KernelConfig& cfg,
    const InterventionDbn* dbn = nullptr, const CrossMapOptions& options = {});

} // namespace ccmtool
