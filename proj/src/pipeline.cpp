#include "ccmtool/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ccmtool/baselines.hpp"
#include "ccmtool/dbn.hpp"
#include "ccmtool/embedding.hpp"
#include "ccmtool/errors.hpp"
#include "ccmtool/io.hpp"
#include "ccmtool/rng.hpp"

namespace ccmtool {

using ordered_json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string direction_label(const std::string& source,
                            const std::string& target,
                            DirectionConvention convention) {
    if (convention == DirectionConvention::paper) return source + "->" + target;
    return target + "->" + source;
}

std::string error_name(const std::exception& e) {
    if (dynamic_cast<const ZeroVariance*>(&e)) return "ZeroVariance";
    if (dynamic_cast<const InvalidBand*>(&e)) return "InvalidBand";
    if (dynamic_cast<const OutOfRange*>(&e)) return "OutOfRange";
    if (dynamic_cast<const SeriesTooShort*>(&e)) return "SeriesTooShort";
    if (dynamic_cast<const NotEnoughPoints*>(&e)) return "NotEnoughPoints";
    if (dynamic_cast<const NonFiniteInput*>(&e)) return "NonFiniteInput";
    if (dynamic_cast<const IndexOutOfRange*>(&e)) return "IndexOutOfRange";
    if (dynamic_cast<const NonSquare*>(&e)) return "NonSquare";
    if (dynamic_cast<const ChannelMismatch*>(&e)) return "ChannelMismatch";
    if (dynamic_cast<const LengthMismatch*>(&e)) return "LengthMismatch";
    if (dynamic_cast<const DegenerateNeighborhood*>(&e))
        return "DegenerateNeighborhood";
    if (dynamic_cast<const DegenerateBaseline*>(&e)) return "DegenerateBaseline";
    if (dynamic_cast<const SingularDesign*>(&e)) return "SingularDesign";
    if (dynamic_cast<const InvalidSpec*>(&e)) return "InvalidSpec";
    if (dynamic_cast<const Unstable*>(&e)) return "Unstable";
    if (dynamic_cast<const MissingOnset*>(&e)) return "MissingOnset";
    if (dynamic_cast<const MalformedReport*>(&e)) return "MalformedReport";
    if (dynamic_cast<const MalformedInput*>(&e)) return "MalformedInput";
    if (dynamic_cast<const IoError*>(&e)) return "IoError";
    if (dynamic_cast<const Error*>(&e)) return "Error";
    return "Exception";
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const IoError*>(&e) ||
        dynamic_cast<const MalformedInput*>(&e))
        return 2;
    return 1;
}

namespace {

std::string sanitize(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        const auto u = static_cast<unsigned char>(c);
        out += (std::isalnum(u) || c == '-' || c == '.' || c == '_')
                   ? c
                   : '_';
    }
    return out;
}

Recording load_input(const PipelineConfig& cfg) {
    const int sources = (cfg.synth ? 1 : 0) + (cfg.input_csv.empty() ? 0 : 1) +
                        (cfg.stdin_data ? 1 : 0);
    if (sources != 1)
        throw MalformedInput(
            "exactly one input source (csv path, stdin, or synthetic spec)");
    if (cfg.synth) return generate(*cfg.synth);
    if (cfg.stdin_data)
        return read_recording_csv(std::cin, cfg.sample_rate, cfg.event_onset);
    return read_recording_csv(cfg.input_csv, cfg.sample_rate, cfg.event_onset);
}

bool is_broadband(const BandSpec& b) { return b.high_hz <= b.low_hz; }

Recording prepare_band(const Recording& raw, const BandSpec& band) {
    std::vector<TimeSeries> out;
    out.reserve(raw.n_channels());
    for (const auto& ch : raw.channels()) {
        const TimeSeries filtered = is_broadband(band) ? ch : bandpass(ch, band);
        out.push_back(standardize(filtered));
    }
    return Recording(std::move(out), raw.event_onset());
}

std::pair<Window, Window> resolve_windows(const Recording& rec,
                                          const std::optional<Window>& pre,
                                          const std::optional<Window>& post) {
    if (pre.has_value() != post.has_value())
        throw InvalidSpec("give both analysis windows or neither");
    if (pre) return {*pre, *post};
    if (!rec.event_onset())
        throw MissingOnset("no event onset and no explicit windows");
    return {Window{0.0, *rec.event_onset()},
            Window{*rec.event_onset(), rec.duration()}};
}

// One preprocessed band with per-channel embedding choices and the
// band-level DBN model (learned on the full band recording).
struct BandPrep {
    BandSpec band;
    Recording prepared;
    std::vector<EmbeddingParams> embedding;
    std::optional<DbnModel> model;
};

EmbeddingParams select_embedding(const PipelineConfig& cfg,
                                 const TimeSeries& series) {
    EmbeddingParams p;
    if (cfg.embedding_delay) {
        p.delay = *cfg.embedding_delay;
    } else {
        const int cap = static_cast<int>(series.size()) / 4;
        p.delay = select_tau(series, std::max(1, std::min(cfg.max_tau, cap)));
    }
    p.dimension = cfg.embedding_dimension
                      ? *cfg.embedding_dimension
                      : select_dimension(series, p.delay, cfg.max_dimension);
    return p;
}

BandPrep make_band_prep(const PipelineConfig& cfg, const Recording& raw,
                        const BandSpec& band) {
    BandPrep prep{band, prepare_band(raw, band), {}, std::nullopt};
    prep.embedding.reserve(prep.prepared.n_channels());
    for (const auto& ch : prep.prepared.channels())
        prep.embedding.push_back(select_embedding(cfg, ch));

    if (!cfg.dbn.enabled) return prep;

    const auto nc = static_cast<int>(prep.prepared.n_channels());
    std::optional<EdgePriorMatrix> priors;
    if (cfg.dbn.use_ccm_priors) {
        // First pass: standard cross-map skill of every ordered pair seeds
        // the edge priors; prior (to, from) tracks rho_{from -> to}.
        Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(nc, nc);
        for (int from = 0; from < nc; ++from)
            for (int to = 0; to < nc; ++to) {
                if (from == to) continue;
                const auto& src = prep.prepared.channel(
                    static_cast<std::size_t>(from));
                const auto& tgt =
                    prep.prepared.channel(static_cast<std::size_t>(to));
                rho(to, from) =
                    cross_map(src, tgt,
                              prep.embedding[static_cast<std::size_t>(from)],
                              cfg.kernel, nullptr, nullptr, cfg.crossmap)
                        .rho;
            }
        priors = normalize_ccm_priors(rho);
    }

    LearnOptions lo;
    lo.exec = cfg.crossmap.exec;
    prep.model = learn(prep.prepared, cfg.dbn.max_lag, cfg.dbn.lambda,
                       priors ? &*priors : nullptr, lo);
    return prep;
}

std::vector<int> auto_sizes(int rows, const EmbeddingParams& params,
                            int radius) {
    const int floor_size = params.dimension + 2 * radius + 8;
    std::vector<int> sizes;
    for (const int s : {rows / 8, rows / 4, rows / 2})
        if (s >= floor_size && (sizes.empty() || s > sizes.back()))
            sizes.push_back(s);
    return sizes; // the full-library point is appended separately
}

ordered_json curve_json(const ConvergenceCurve& c) {
    ordered_json j;
    j["sizes"] = c.library_sizes;
    j["rho_mean"] = c.rho_mean;
    j["rho_std"] = c.rho_std;
    j["n_draws"] = c.n_draws;
    return j;
}

std::string curve_csv(const ConvergenceCurve& c) {
    std::string out = "size,rho_mean,rho_std\n";
    for (std::size_t i = 0; i < c.library_sizes.size(); ++i)
        out += std::to_string(c.library_sizes[i]) + ',' +
               format_double(c.rho_mean[i]) + ',' +
               format_double(c.rho_std[i]) + '\n';
    return out;
}

struct TaskInputs {
    const PipelineConfig& cfg;
    const BandPrep& prep;
    int source_index;
    int target_index;
    bool intervention_active;
};

ordered_json analyze_task(const TaskInputs& in) {
    const PipelineConfig& cfg = in.cfg;
    const BandPrep& prep = in.prep;
    const Recording& rec = prep.prepared;
    const auto si = static_cast<std::size_t>(in.source_index);
    const auto ti = static_cast<std::size_t>(in.target_index);
    const TimeSeries& source = rec.channel(si);
    const TimeSeries& target = rec.channel(ti);
    const EmbeddingParams params = prep.embedding[si];
    const std::string id =
        prep.band.name + "/" + source.label() + "->" + target.label();
    const int radius = cfg.crossmap.exclusion_radius
                           ? *cfg.crossmap.exclusion_radius
                           : params.delay * (params.dimension - 1);

    ordered_json task;
    task["id"] = id;
    task["band"] = prep.band.name;
    task["source"] = source.label();
    task["target"] = target.label();
    task["pair"] =
        direction_label(source.label(), target.label(), cfg.convention);
    task["embedding"] = {{"dimension", params.dimension},
                         {"delay", params.delay}};
    task["intervention"] = in.intervention_active;

    std::optional<Window> wpre;
    std::optional<Window> wpost;
    if (in.intervention_active) {
        const auto [a, b] = resolve_windows(rec, cfg.pre_window,
                                            cfg.post_window);
        wpre = a;
        wpost = b;
        task["windows"] = {{"pre", {a.start_s, a.end_s}},
                           {"post", {b.start_s, b.end_s}}};
    } else {
        task["windows"] = nullptr;
    }

    const auto pre_segment = [&]() { return segment(rec, wpre->start_s, wpre->end_s); };

    ordered_json methods;

    const auto add_ccm_method = [&](const std::string& name,
                                    const DbnContext* full_ctx,
                                    const InterventionDbn* int_dbn) {
        ordered_json m;
        const CcmResult full = cross_map(source, target, params, cfg.kernel,
                                         full_ctx, nullptr, cfg.crossmap);
        m["rho"] = full.rho;
        m["degenerate"] = full.degenerate;

        double rho_pre = full.rho;
        double rho_post = full.rho;
        if (in.intervention_active) {
            const InterventionResult ir = segmented_intervention(
                rec, source.label(), target.label(), params, cfg.kernel,
                int_dbn, wpre, wpost, cfg.crossmap);
            rho_pre = ir.rho_pre;
            rho_post = ir.rho_post;
            m["neighbor_shift_fraction"] = ir.neighbor_shift_fraction;
        }
        m["rho_pre"] = rho_pre;
        m["rho_post"] = rho_post;
        m["delta_rho"] = rho_post - rho_pre;

        // The null matches the quantity normalised by pc_norm: surrogates of
        // rho_pre, on the pre window when an intervention is present.
        SurrogateConfig sc;
        sc.method = cfg.surrogate_method;
        sc.n_surrogates = cfg.n_surrogates;
        sc.seed = derive_seed(cfg.master_seed, id + "/surrogates/" + name);
        SurrogateStats stats{};
        if (in.intervention_active) {
            const Recording pre_rec = pre_segment();
            const TimeSeries& psrc = pre_rec.channel(si);
            const TimeSeries& ptgt = pre_rec.channel(ti);
            if (int_dbn) {
                LearnOptions lo;
                lo.exec = cfg.crossmap.exec;
                const DbnModel pre_model =
                    learn(pre_rec, int_dbn->max_lag, int_dbn->lambda,
                          int_dbn->priors, lo);
                const DbnContext pre_ctx{&pre_model, &pre_rec};
                stats = shuffled_rho(psrc, ptgt, params, cfg.kernel, &pre_ctx,
                                     sc, cfg.crossmap);
            } else {
                stats = shuffled_rho(psrc, ptgt, params, cfg.kernel, nullptr,
                                     sc, cfg.crossmap);
            }
        } else {
            stats = shuffled_rho(source, target, params, cfg.kernel, full_ctx,
                                 sc, cfg.crossmap);
        }
        m["shuffled_mean"] = stats.mean;
        m["shuffled_std"] = stats.std;
        m["pc_norm"] = pc_norm(rho_pre, stats.mean);

        ConvergenceCurve curve;
        const int rows = static_cast<int>(full.predictions.size());
        const std::vector<int> sizes =
            cfg.convergence_sizes.empty()
                ? auto_sizes(rows, params, radius)
                : cfg.convergence_sizes;
        if (!sizes.empty()) {
            curve = convergence(
                source, target, params, cfg.kernel, full_ctx, sizes,
                cfg.convergence_draws,
                derive_seed(cfg.master_seed, id + "/convergence/" + name),
                LibraryDraw::uniform, cfg.crossmap);
        } else {
            curve.n_draws = cfg.convergence_draws;
        }
        if (cfg.convergence_sizes.empty()) {
            // Full-library point: every draw of all rows is the full map.
            curve.library_sizes.push_back(rows);
            curve.rho_mean.push_back(full.rho);
            curve.rho_std.push_back(0.0);
        }
        m["convergence"] = curve_json(curve);
        methods[name] = m;
        return curve;
    };

    add_ccm_method("standard_ccm", nullptr, nullptr);
    if (cfg.dbn.enabled) {
        const DbnContext ctx{&*prep.model, &rec};
        InterventionDbn idbn;
        idbn.max_lag = cfg.dbn.max_lag;
        idbn.lambda = cfg.dbn.lambda;
        idbn.retrain_post = cfg.dbn.retrain_post;
        idbn.learn.exec = cfg.crossmap.exec;
        add_ccm_method("dbn_ccm", &ctx, &idbn);
    }

    if (cfg.run_granger) {
        ordered_json g;
        const GrangerResult gr = granger(source, target, cfg.granger_lag);
        g["f_statistic"] = gr.f_statistic;
        g["p_value"] = gr.p_value;
        const double skill_full = granger_skill(gr);
        g["skill"] = skill_full;

        double skill_pre = skill_full;
        double skill_post = skill_full;
        SurrogateConfig sc;
        sc.method = cfg.surrogate_method;
        sc.n_surrogates = cfg.n_surrogates;
        sc.seed = derive_seed(cfg.master_seed, id + "/surrogates/granger");
        SurrogateStats stats{};
        if (in.intervention_active) {
            const Recording pre_rec = pre_segment();
            const Recording post_rec =
                segment(rec, wpost->start_s, wpost->end_s);
            skill_pre = granger_skill(granger(pre_rec.channel(si),
                                              pre_rec.channel(ti),
                                              cfg.granger_lag));
            skill_post = granger_skill(granger(post_rec.channel(si),
                                               post_rec.channel(ti),
                                               cfg.granger_lag));
            stats = shuffled_granger_skill(pre_rec.channel(si),
                                           pre_rec.channel(ti),
                                           cfg.granger_lag, sc,
                                           cfg.crossmap.exec);
        } else {
            stats = shuffled_granger_skill(source, target, cfg.granger_lag,
                                           sc, cfg.crossmap.exec);
        }
        g["rho_pre"] = skill_pre;
        g["rho_post"] = skill_post;
        g["delta_rho"] = skill_post - skill_pre;
        g["shuffled_mean"] = stats.mean;
        g["shuffled_std"] = stats.std;
        g["pc_norm"] = pc_norm(skill_pre, stats.mean);
        methods["granger"] = g;
    }

    task["methods"] = methods;
    task["seed"] = derive_seed(cfg.master_seed, id);
    return task;
}

const char* kMethodOrder[3] = {"standard_ccm", "dbn_ccm", "granger"};

// Merged metric rows in canonical order (band, pair, method); ci is filled
// afterwards because it normalises over all predictors of a target.
struct MetricRow {
    std::string pair;
    std::string band;
    std::string method;
    std::string source;
    std::string target;
    double pc_norm = 0.0;
    double ci = 0.0;
    double rho_pre = 0.0;
    double rho_post = 0.0;
    double shuffled_mean = 0.0;
    double shuffled_std = 0.0;
};

// Canonical row order: tasks are already (band in config order, pairs in
// channel order); methods use a fixed order within each task.
std::vector<MetricRow> merge_rows(const std::vector<ordered_json>& tasks) {
    std::vector<MetricRow> rows;
    for (const auto& t : tasks) {
        for (const char* method : kMethodOrder) {
            if (!t["methods"].contains(method)) continue;
            const auto& m = t["methods"][method];
            MetricRow r;
            r.pair = t["pair"].get<std::string>();
            r.band = t["band"].get<std::string>();
            r.method = method;
            r.source = t["source"].get<std::string>();
            r.target = t["target"].get<std::string>();
            r.pc_norm = m["pc_norm"].get<double>();
            r.rho_pre = m["rho_pre"].get<double>();
            r.rho_post = m["rho_post"].get<double>();
            r.shuffled_mean = m["shuffled_mean"].get<double>();
            r.shuffled_std = m["shuffled_std"].get<double>();
            rows.push_back(std::move(r));
        }
    }
    // Causal impact ranks the predictors (sources) of each target within a
    // band and method.
    for (auto& row : rows) {
        std::vector<PredictorOutcome> group;
        std::size_t self = 0;
        for (const auto& other : rows) {
            if (other.band != row.band || other.method != row.method ||
                other.target != row.target)
                continue;
            if (other.source == row.source) self = group.size();
            group.push_back({other.source, other.rho_pre, other.rho_post});
        }
        row.ci = causal_impact(group)[self];
    }
    return rows;
}

std::string metrics_csv(const std::vector<MetricRow>& rows) {
    std::string out = "pair,band,method,pc_norm,ci,rho_pre,rho_post,"
                      "rho_shuffled_mean,rho_shuffled_std\n";
    for (const auto& r : rows) {
        out += r.pair + ',' + r.band + ',' + r.method + ',';
        out += format_double(r.pc_norm) + ',' + format_double(r.ci) + ',';
        out += format_double(r.rho_pre) + ',' + format_double(r.rho_post) +
               ',';
        out += format_double(r.shuffled_mean) + ',' +
               format_double(r.shuffled_std) + '\n';
    }
    return out;
}

ordered_json metrics_json(const std::vector<MetricRow>& rows) {
    ordered_json arr = ordered_json::array();
    for (const auto& r : rows) {
        ordered_json j;
        j["pair"] = r.pair;
        j["band"] = r.band;
        j["method"] = r.method;
        j["source"] = r.source;
        j["target"] = r.target;
        j["pc_norm"] = r.pc_norm;
        j["ci"] = r.ci;
        j["rho_pre"] = r.rho_pre;
        j["rho_post"] = r.rho_post;
        j["rho_shuffled_mean"] = r.shuffled_mean;
        j["rho_shuffled_std"] = r.shuffled_std;
        arr.push_back(std::move(j));
    }
    return arr;
}

} // namespace

PlotBundle plots_from_report(const ordered_json& report) {
    try {
        const auto& metrics = report.at("metrics");
        const auto& tasks = report.at("tasks");
        const auto& bands = report.at("bands");

        std::string pref = "standard_ccm";
        for (const auto& row : metrics)
            if (row.at("method") == "dbn_ccm") pref = "dbn_ccm";

        std::vector<BandConnectionSummary> bars;
        for (const auto& band : bands) {
            BandConnectionSummary s;
            s.band = band.get<std::string>();
            double strength = 0.0;
            for (const auto& row : metrics) {
                if (row.at("band") != s.band || row.at("method") != pref)
                    continue;
                const double pre = row.at("rho_pre");
                const double mean = row.at("rho_shuffled_mean");
                const double sd = row.at("rho_shuffled_std");
                // A connection: positive skill clearing the null by 2 std.
                if (pre > 0.0 && pre >= mean + 2.0 * sd) {
                    ++s.count;
                    strength += pre;
                }
            }
            s.mean_strength = s.count ? strength / s.count : 0.0;
            bars.push_back(std::move(s));
        }

        std::vector<ScatterPoint> points;
        for (const auto& row : metrics) {
            if (row.at("method") != pref) continue;
            points.push_back({row.at("rho_pre").get<double>(),
                              row.at("rho_post").get<double>(),
                              row.at("band").get<std::string>() + " " +
                                  row.at("pair").get<std::string>()});
        }

        std::vector<CurveSeries> curves;
        const std::string first_band =
            bands.empty() ? "" : bands.at(0).get<std::string>();
        for (const auto& t : tasks) {
            if (curves.size() >= 6) break;
            if (t.at("band") != first_band) continue;
            if (!t.at("methods").contains(pref)) continue;
            const auto& c = t.at("methods").at(pref).at("convergence");
            CurveSeries cs;
            cs.label = t.at("pair");
            for (const auto& v : c.at("sizes"))
                cs.sizes.push_back(v.get<double>());
            for (const auto& v : c.at("rho_mean"))
                cs.means.push_back(v.get<double>());
            for (const auto& v : c.at("rho_std"))
                cs.stds.push_back(v.get<double>());
            curves.push_back(std::move(cs));
        }

        PlotBundle out;
        out.connections_svg = svg_connection_bars(bars);
        out.pre_post_svg = svg_pre_post_scatter(points);
        out.convergence_svg = svg_convergence_curves(curves);
        return out;
    } catch (const MalformedReport&) {
        throw;
    } catch (const std::exception& e) {
        throw MalformedReport(std::string("report missing fields: ") +
                              e.what());
    }
}

int run_pipeline(const PipelineConfig& cfg) {
    std::string stage = "config";
    try {
#ifdef _OPENMP
        if (cfg.workers > 0) omp_set_num_threads(cfg.workers);
#endif
        std::vector<BandSpec> bands = cfg.bands;
        if (bands.empty()) bands.push_back(BandSpec{"broadband", 0.0, 0.0});
        {
            std::set<std::string> names;
            for (const auto& b : bands)
                if (b.name.empty() || !names.insert(b.name).second)
                    throw MalformedInput("band names must be unique and "
                                         "nonempty");
        }

        stage = "ingest";
        const Recording raw = load_input(cfg);
        if (raw.n_channels() < 2)
            throw MalformedInput("need at least two channels");
        {
            std::set<std::string> labels;
            for (const auto& ch : raw.channels()) {
                if (ch.label().empty() || !labels.insert(ch.label()).second)
                    throw MalformedInput("channel labels must be unique and "
                                         "nonempty");
                if (ch.label().find(',') != std::string::npos)
                    throw MalformedInput("channel labels may not contain "
                                         "commas");
            }
        }

        stage = "prepare";
        const fs::path out_dir(cfg.out_dir);
        fs::create_directories(out_dir / "tasks");
        fs::create_directories(out_dir / "curves");
        if (cfg.dbn.enabled) fs::create_directories(out_dir / "models");

        std::set<std::string> done;
        const fs::path manifest_path = out_dir / "manifest.txt";
        if (fs::exists(manifest_path)) {
            std::ifstream mf(manifest_path);
            std::string line;
            while (std::getline(mf, line))
                if (!line.empty()) done.insert(line);
        }

        const bool intervention_active = cfg.pre_window.has_value() ||
                                         cfg.post_window.has_value() ||
                                         raw.event_onset().has_value();

        std::vector<ordered_json> task_records;
        const auto nc = static_cast<int>(raw.n_channels());

        for (const auto& band : bands) {
            stage = "preprocess";
            const BandPrep prep = make_band_prep(cfg, raw, band);
            if (prep.model)
                save_model(*prep.model,
                           (out_dir / "models" /
                            (sanitize(band.name) + ".json"))
                               .string());

            for (int from = 0; from < nc; ++from) {
                for (int to = 0; to < nc; ++to) {
                    if (from == to) continue;
                    const std::string src =
                        prep.prepared.channel(static_cast<std::size_t>(from))
                            .label();
                    const std::string tgt =
                        prep.prepared.channel(static_cast<std::size_t>(to))
                            .label();
                    const std::string id = band.name + "/" + src + "->" + tgt;
                    const fs::path task_path =
                        out_dir / "tasks" /
                        (sanitize(band.name) + "__" + sanitize(src) + "__" +
                         sanitize(tgt) + ".json");

                    stage = "analyze";
                    ordered_json task;
                    bool reused = false;
                    if (done.count(id) && fs::exists(task_path)) {
                        try {
                            task = ordered_json::parse(
                                read_text_file(task_path.string()));
                            reused = true;
                        } catch (const std::exception&) {
                            reused = false; // recompute a corrupt file
                        }
                    }
                    if (!reused) {
                        task = analyze_task({cfg, prep, from, to,
                                             intervention_active});
                        write_text_file(task_path.string(), task.dump(2));
                        std::ofstream mf(manifest_path, std::ios::app);
                        mf << id << '\n';
                        mf.flush();
                    }
                    for (const char* method : kMethodOrder) {
                        if (!task["methods"].contains(method) ||
                            !task["methods"][method].contains("convergence"))
                            continue;
                        const auto& c = task["methods"][method]["convergence"];
                        ConvergenceCurve curve;
                        for (const auto& v : c["sizes"])
                            curve.library_sizes.push_back(v.get<int>());
                        for (const auto& v : c["rho_mean"])
                            curve.rho_mean.push_back(v.get<double>());
                        for (const auto& v : c["rho_std"])
                            curve.rho_std.push_back(v.get<double>());
                        write_text_file(
                            (out_dir / "curves" /
                             (sanitize(band.name) + "__" + sanitize(src) +
                              "__" + sanitize(tgt) + "__" + method + ".csv"))
                                .string(),
                            curve_csv(curve));
                    }
                    task_records.push_back(std::move(task));
                }
            }
        }

        stage = "merge";
        const std::vector<MetricRow> rows = merge_rows(task_records);
        write_text_file((out_dir / "metrics.csv").string(),
                        metrics_csv(rows));

        ordered_json report;
        report["schema"] = "ccmtool/report/v1";
        report["seed"] = cfg.master_seed;
        report["convention"] =
            cfg.convention == DirectionConvention::paper ? "paper"
                                                         : "sugihara";
        report["sample_rate"] = raw.sample_rate();
        if (raw.event_onset())
            report["onset"] = *raw.event_onset();
        else
            report["onset"] = nullptr;
        {
            ordered_json jb = ordered_json::array();
            for (const auto& b : bands) jb.push_back(b.name);
            report["bands"] = jb;
            ordered_json jc = ordered_json::array();
            for (const auto& ch : raw.channels()) jc.push_back(ch.label());
            report["channels"] = jc;
        }
        report["metrics"] = metrics_json(rows);
        {
            ordered_json jt = ordered_json::array();
            for (const auto& t : task_records) jt.push_back(t);
            report["tasks"] = jt;
        }
        write_text_file((out_dir / "report.json").string(), report.dump(2));

        stage = "plot";
        const PlotBundle plots = plots_from_report(report);
        write_text_file((out_dir / "connections.svg").string(),
                        plots.connections_svg);
        write_text_file((out_dir / "pre_post.svg").string(),
                        plots.pre_post_svg);
        write_text_file((out_dir / "convergence.svg").string(),
                        plots.convergence_svg);
        return 0;
    } catch (const std::exception& e) {
        ordered_json err;
        err["stage"] = stage;
        err["error"] = error_name(e);
        err["message"] = e.what();
        std::cerr << err.dump() << '\n';
        try {
            write_text_file(
                (fs::path(cfg.out_dir) / "error.json").string(), err.dump(2));
        } catch (const std::exception&) {
            // Reporting must not mask the original failure.
        }
        return exit_code_for(e);
    }
}

} // namespace ccmtool
