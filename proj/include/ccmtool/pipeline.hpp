#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "ccmtool/crossmap.hpp"
#include "ccmtool/intervention.hpp"
#include "ccmtool/metrics.hpp"
#include "ccmtool/plot.hpp"
#include "ccmtool/series.hpp"
#include "ccmtool/synthetic.hpp"

namespace ccmtool {

/// How directed pairs are labelled in reports. paper: the manifold channel
/// is named first (rho_{X->Y} cross-maps Y from M_X). sugihara: the labels
/// are swapped, matching the classical reading where skill at cross-mapping
/// X from M_Y is evidence that X drives Y.
enum class DirectionConvention { paper, sugihara };

struct PipelineDbnConfig {
    bool enabled = true;
    int max_lag = 2;
    double lambda = 0.05;
    bool use_ccm_priors = true;
    bool retrain_post = false;
};

struct PipelineConfig {
    /// Input: a CSV path, stdin, or a synthetic spec (exactly one).
    std::string input_csv;
    bool stdin_data = false;
    std::optional<SyntheticSpec> synth;
    double sample_rate = 1.0;
    std::optional<double> event_onset; ///< seconds; CSV/stdin inputs only

    /// Empty list = one unfiltered "broadband" pass.
    std::vector<BandSpec> bands;

    std::optional<int> embedding_dimension;
    std::optional<int> embedding_delay;
    int max_tau = 20;
    int max_dimension = 8;

    KernelConfig kernel;
    CrossMapOptions crossmap;
    PipelineDbnConfig dbn;

    SurrogateMethod surrogate_method = SurrogateMethod::circular_shift;
    int n_surrogates = 100;

    bool run_granger = true;
    int granger_lag = 2;

    std::vector<int> convergence_sizes; ///< empty = auto from manifold rows
    int convergence_draws = 8;

    std::optional<Window> pre_window;
    std::optional<Window> post_window;

    std::string out_dir = "ccmtool-out";
    std::uint64_t master_seed = 0;
    int workers = 0; ///< OpenMP thread count; 0 keeps the runtime default
    DirectionConvention convention = DirectionConvention::paper;
};

/// Runs the full batch: per band, preprocess, select embeddings, learn the
/// DBN (optionally primed by a standard-CCM pass), then per directed pair
/// run both CCM modes, the Granger baseline, surrogates, and the segmented
/// intervention when an onset is present. Writes per-task JSON files plus a
/// manifest (rerun skips completed tasks), merged metrics.csv and
/// report.json, and the three SVG plots. Returns the process exit code;
/// failures also write a {stage, error, message} JSON to stderr and
/// <out_dir>/error.json.
int run_pipeline(const PipelineConfig& cfg);

/// Rebuild the three plots from a merged report. Throws MalformedReport.
struct PlotBundle {
    std::string connections_svg;
    std::string pre_post_svg;
    std::string convergence_svg;
};
PlotBundle plots_from_report(const nlohmann::ordered_json& report);

/// Pair label under a convention: paper keeps (manifold -> predicted),
/// sugihara swaps.
std::string direction_label(const std::string& source,
                            const std::string& target,
                            DirectionConvention convention);

/// Stable name of a library error for machine-readable error JSON.
std::string error_name(const std::exception& e);

/// Process exit code for a failure: 2 for usage/IO problems, 1 for analysis
/// errors.
int exit_code_for(const std::exception& e);

} // namespace ccmtool
