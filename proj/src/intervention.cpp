#include "ccmtool/intervention.hpp"

#include <algorithm>

#include "ccmtool/errors.hpp"
#include "ccmtool/neighbors.hpp"

namespace ccmtool {

namespace {

// Fraction of rows common to both manifolds whose E+1 neighbor indices
// differ. Both manifolds come from the same channel with the same embedding,
// so row k is directly comparable.
double neighbor_shift(const TimeSeries& pre_src, const TimeSeries& post_src,
                      const EmbeddingParams& params,
                      const NeighborOptions& nopts, Exec exec) {
    const ShadowManifold pre_m = embed(pre_src, params);
    const ShadowManifold post_m = embed(post_src, params);
    const auto pre_nn = knn_batch(pre_m, nopts, exec);
    const auto post_nn = knn_batch(post_m, nopts, exec);
    const std::size_t n = std::min(pre_nn.size(), post_nn.size());
    if (n == 0) return 0.0;
    std::size_t changed = 0;
    for (std::size_t k = 0; k < n; ++k)
        if (pre_nn[k].indices != post_nn[k].indices) ++changed;
    return static_cast<double>(changed) / static_cast<double>(n);
}

} // namespace

InterventionResult segmented_intervention(
    const Recording& rec, const std::string& source_ch,
    const std::string& target_ch, const EmbeddingParams& params,
    const KernelConfig& cfg, const InterventionDbn* dbn,
    std::optional<Window> pre_window, std::optional<Window> post_window,
    const CrossMapOptions& options) {
    if (pre_window.has_value() != post_window.has_value())
        throw InvalidSpec("give both analysis windows or neither");

    Window pre;
    Window post;
    if (pre_window) {
        pre = *pre_window;
        post = *post_window;
    } else {
        if (!rec.event_onset())
            throw MissingOnset("no event onset and no explicit windows");
        pre = {0.0, *rec.event_onset()};
        post = {*rec.event_onset(), rec.duration()};
    }

    const Recording pre_rec = segment(rec, pre.start_s, pre.end_s);
    const Recording post_rec = segment(rec, post.start_s, post.end_s);

    const std::size_t src_pre = pre_rec.channel_index(source_ch);
    const std::size_t tgt_pre = pre_rec.channel_index(target_ch);
    const std::size_t src_post = post_rec.channel_index(source_ch);
    const std::size_t tgt_post = post_rec.channel_index(target_ch);

    std::optional<DbnModel> pre_model;
    std::optional<DbnModel> post_model;
    if (dbn) {
        pre_model = learn(pre_rec, dbn->max_lag, dbn->lambda, dbn->priors,
                          dbn->learn);
        if (dbn->retrain_post)
            post_model = learn(post_rec, dbn->max_lag, dbn->lambda,
                               dbn->priors, dbn->learn);
    }

    DbnContext pre_ctx;
    DbnContext post_ctx;
    const DbnContext* pre_ctx_p = nullptr;
    const DbnContext* post_ctx_p = nullptr;
    if (dbn) {
        pre_ctx = {&*pre_model, &pre_rec};
        post_ctx = {dbn->retrain_post ? &*post_model : &*pre_model, &post_rec};
        pre_ctx_p = &pre_ctx;
        post_ctx_p = &post_ctx;
    }

    const CcmResult r_pre =
        cross_map(pre_rec.channel(src_pre), pre_rec.channel(tgt_pre), params,
                  cfg, pre_ctx_p, nullptr, options);
    const CcmResult r_post =
        cross_map(post_rec.channel(src_post), post_rec.channel(tgt_post),
                  params, cfg, post_ctx_p, nullptr, options);

    NeighborOptions nopts;
    nopts.exclusion_radius = options.exclusion_radius
                                 ? *options.exclusion_radius
                                 : params.delay * (params.dimension - 1);
    nopts.allow_self = options.allow_self;

    InterventionResult out;
    out.rho_pre = r_pre.rho;
    out.rho_post = r_post.rho;
    out.delta_rho = r_post.rho - r_pre.rho;
    out.direction = {source_ch, target_ch};
    out.mode = dbn ? CcmMode::dbn_informed : CcmMode::standard;
    out.scheme = InterventionScheme::segmented;
    out.pre_window = pre;
    out.post_window = post;
    out.degenerate_pre = r_pre.degenerate;
    out.degenerate_post = r_post.degenerate;
    out.neighbor_shift_fraction =
        neighbor_shift(pre_rec.channel(src_pre), post_rec.channel(src_post),
                       params, nopts, options.exec);
    return out;
}

InterventionResult simulated_intervention(
    SyntheticSpec spec, const DoOperation& do_op, double onset_fraction,
    const std::string& source_ch, const std::string& target_ch,
    const EmbeddingParams& params, const KernelConfig& cfg,
    const InterventionDbn* dbn, const CrossMapOptions& options) {
    if (!(onset_fraction > 0.0 && onset_fraction < 1.0))
        throw InvalidSpec("intervention onset fraction must be inside (0, 1)");
    spec.intervention = do_op;
    spec.intervention_onset_fraction = onset_fraction;
    const Recording rec = generate(spec);

    InterventionResult out =
        segmented_intervention(rec, source_ch, target_ch, params, cfg, dbn,
                               std::nullopt, std::nullopt, options);
    out.scheme = InterventionScheme::simulated;
    return out;
}

} // namespace ccmtool
