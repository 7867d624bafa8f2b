#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ccmtool/baselines.hpp"
#include "ccmtool/crossmap.hpp"
#include "ccmtool/dbn.hpp"
#include "ccmtool/embedding.hpp"
#include "ccmtool/errors.hpp"
#include "ccmtool/intervention.hpp"
#include "ccmtool/io.hpp"
#include "ccmtool/metrics.hpp"
#include "ccmtool/pipeline.hpp"
#include "ccmtool/rng.hpp"
#include "ccmtool/series.hpp"
#include "ccmtool/synthetic.hpp"

namespace {

using ccmtool::BandSpec;
using ordered_json = nlohmann::ordered_json;

// Named EEG-style defaults; custom bands use "name:low-high" in Hz.
const std::map<std::string, std::pair<double, double>> kNamedBands = {
    {"delta", {1.0, 4.0}}, {"theta", {4.0, 8.0}}, {"alpha", {8.0, 13.0}},
    {"mu", {8.0, 12.0}},   {"beta", {13.0, 30.0}}, {"gamma", {30.0, 80.0}},
};

BandSpec parse_band(const std::string& text) {
    if (text == "broadband") return {"broadband", 0.0, 0.0};
    const auto named = kNamedBands.find(text);
    if (named != kNamedBands.end())
        return {text, named->second.first, named->second.second};
    const auto colon = text.find(':');
    const auto dash = text.find('-', colon == std::string::npos ? 0 : colon);
    if (colon == std::string::npos || dash == std::string::npos)
        throw ccmtool::MalformedInput(
            "band '" + text +
            "' is neither a named band nor of the form name:low-high");
    try {
        return {text.substr(0, colon),
                std::stod(text.substr(colon + 1, dash - colon - 1)),
                std::stod(text.substr(dash + 1))};
    } catch (const std::exception&) {
        throw ccmtool::MalformedInput("cannot parse band '" + text + "'");
    }
}

std::vector<BandSpec> parse_bands(const std::vector<std::string>& texts) {
    std::vector<BandSpec> out;
    for (const auto& t : texts) out.push_back(parse_band(t));
    return out;
}

ccmtool::KernelConfig make_kernel(const std::string& bandwidth,
                                  double fixed_sigma) {
    ccmtool::KernelConfig k;
    if (bandwidth == "mean") {
        k.bandwidth_mode = ccmtool::BandwidthMode::per_query_mean;
    } else if (bandwidth == "nearest") {
        k.bandwidth_mode = ccmtool::BandwidthMode::per_query_nearest;
    } else if (bandwidth == "fixed") {
        k.bandwidth_mode = ccmtool::BandwidthMode::global_fixed;
        k.fixed_sigma = fixed_sigma;
    } else {
        throw ccmtool::MalformedInput("unknown bandwidth mode '" + bandwidth +
                                      "'");
    }
    return k;
}

ccmtool::Recording load_csv(const std::string& path, bool use_stdin,
                            double rate, std::optional<double> onset) {
    if (use_stdin == !path.empty())
        throw ccmtool::MalformedInput("give exactly one of --input / --stdin");
    if (use_stdin) return ccmtool::read_recording_csv(std::cin, rate, onset);
    return ccmtool::read_recording_csv(path, rate, onset);
}

ccmtool::SyntheticSpec make_preset(const std::string& preset, int n,
                                   std::uint64_t seed, double beta) {
    using ccmtool::SyntheticSpec;
    if (preset == "unidirectional")
        return ccmtool::coupled_logistic_pair(beta, n, seed);
    if (preset == "uncoupled") return ccmtool::coupled_logistic_pair(0.0, n, seed);
    if (preset == "bidirectional") {
        SyntheticSpec spec = ccmtool::coupled_logistic_pair(beta, n, seed);
        spec.coupling(0, 1) = beta / 2.0;
        return spec;
    }
    if (preset == "var") {
        SyntheticSpec spec;
        spec.kind = SyntheticSpec::Kind::sparse_var;
        spec.n_samples = n;
        spec.n_channels = 3;
        spec.seed = seed;
        Eigen::MatrixXd a1 = Eigen::MatrixXd::Zero(3, 3);
        a1(0, 0) = 0.5;
        a1(1, 1) = 0.3;
        a1(2, 2) = 0.4;
        a1(1, 0) = 0.4;
        Eigen::MatrixXd a2 = Eigen::MatrixXd::Zero(3, 3);
        a2(2, 1) = 0.3;
        spec.lag_matrices = {a1, a2};
        spec.noise_std = 1.0;
        return spec;
    }
    throw ccmtool::MalformedInput("unknown preset '" + preset + "'");
}

int report_error(const std::exception& e) {
    ordered_json err;
    err["error"] = ccmtool::error_name(e);
    err["message"] = e.what();
    std::cerr << err.dump() << '\n';
    return ccmtool::exit_code_for(e);
}

ordered_json ccm_result_json(const ccmtool::CcmResult& r,
                             const ccmtool::KernelConfig& k,
                             ccmtool::DirectionConvention conv) {
    ordered_json j;
    j["direction"] = ccmtool::direction_label(r.direction.first,
                                              r.direction.second, conv);
    j["manifold"] = r.direction.first;
    j["predicted"] = r.direction.second;
    j["mode"] = r.mode == ccmtool::CcmMode::standard ? "standard"
                                                     : "dbn_informed";
    j["rho"] = r.rho;
    j["library_size"] = r.library_size;
    j["embedding"] = {{"dimension", r.embedding.dimension},
                      {"delay", r.embedding.delay}};
    ordered_json kj;
    switch (k.bandwidth_mode) {
    case ccmtool::BandwidthMode::per_query_mean: kj["bandwidth"] = "mean"; break;
    case ccmtool::BandwidthMode::per_query_nearest:
        kj["bandwidth"] = "nearest";
        break;
    case ccmtool::BandwidthMode::global_fixed:
        kj["bandwidth"] = "fixed";
        kj["sigma"] = *k.fixed_sigma;
        break;
    }
    j["kernel"] = kj;
    j["degenerate"] = r.degenerate;
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"DBN-informed convergent cross mapping toolkit"};
    app.require_subcommand(1);
    app.footer("Config files (run --config FILE) are INI-style key=value "
               "lines inside a [run] section;\nevery key is the long name of "
               "the matching flag, e.g. 'seed=7' for --seed.");

    // ---- shared option state ------------------------------------------
    std::string input;
    bool use_stdin = false;
    double rate = 1.0;
    double onset = -1.0; // <0 means absent
    std::string source_ch;
    std::string target_ch;
    int dimension = 0; // 0 = auto
    int tau = 0;       // 0 = auto
    int max_tau = 20;
    int max_e = 8;
    std::string bandwidth = "mean";
    double fixed_sigma = 0.0;
    int exclusion_radius = -1; // <0 = Theiler default
    bool allow_self = false;
    bool serial = false;
    std::uint64_t seed = 0;
    std::string convention = "paper";
    std::string mode = "standard";
    std::string model_path;

    const auto add_io = [&](CLI::App* sub, bool stdin_name_spec = false) {
        sub->add_option("-i,--input", input, "Input CSV (header = labels)");
        sub->add_flag(stdin_name_spec ? "--stdin-spec" : "--stdin", use_stdin,
                      "Read the CSV from standard input");
        sub->add_option("--rate", rate, "Sample rate in Hz")
            ->capture_default_str();
        sub->add_option("--onset", onset,
                        "Event onset in seconds (enables pre/post analysis)");
    };
    const auto add_embedding = [&](CLI::App* sub) {
        sub->add_option("-E,--dimension", dimension,
                        "Embedding dimension (0 = select by FNN)");
        sub->add_option("--tau", tau, "Embedding delay (0 = select by MI)");
        sub->add_option("--max-tau", max_tau, "Delay search bound")
            ->capture_default_str();
        sub->add_option("--max-e", max_e, "Dimension search bound")
            ->capture_default_str();
    };
    const auto add_kernel = [&](CLI::App* sub) {
        sub->add_option("--bandwidth", bandwidth,
                        "Kernel sigma rule: mean | nearest | fixed")
            ->capture_default_str();
        sub->add_option("--sigma", fixed_sigma,
                        "Kernel sigma for --bandwidth fixed");
        sub->add_option("--exclusion-radius", exclusion_radius,
                        "Theiler window (-1 = tau*(E-1))")
            ->capture_default_str();
        sub->add_flag("--allow-self-neighbor", allow_self,
                      "Admit the query point as its own neighbor");
        sub->add_flag("--serial", serial, "Disable parallel kernels");
    };
    const auto add_pair = [&](CLI::App* sub) {
        sub->add_option("-s,--source", source_ch, "Manifold channel label")
            ->required();
        sub->add_option("-t,--target", target_ch, "Predicted channel label")
            ->required();
    };

    const auto onset_opt = [&]() -> std::optional<double> {
        if (onset < 0.0) return std::nullopt;
        return onset;
    };
    const auto embedding_params = [&](const ccmtool::TimeSeries& src) {
        ccmtool::EmbeddingParams p;
        p.delay = tau > 0 ? tau
                          : ccmtool::select_tau(
                                src, std::max(1, std::min(max_tau,
                                                          static_cast<int>(
                                                              src.size()) /
                                                              4)));
        p.dimension = dimension > 0
                          ? dimension
                          : ccmtool::select_dimension(src, p.delay, max_e);
        return p;
    };
    const auto crossmap_options = [&]() {
        ccmtool::CrossMapOptions o;
        if (exclusion_radius >= 0) o.exclusion_radius = exclusion_radius;
        o.allow_self = allow_self;
        o.exec = serial ? ccmtool::Exec::serial : ccmtool::Exec::parallel;
        return o;
    };
    const auto conv = [&]() {
        if (convention == "paper") return ccmtool::DirectionConvention::paper;
        if (convention == "sugihara")
            return ccmtool::DirectionConvention::sugihara;
        throw ccmtool::MalformedInput("unknown convention '" + convention +
                                      "'");
    };

    // ---- ingest --------------------------------------------------------
    auto* ingest = app.add_subcommand("ingest", "Validate a CSV recording and "
                                                "print a summary");
    add_io(ingest);

    // ---- synth ---------------------------------------------------------
    auto* synth = app.add_subcommand(
        "synth", "Generate a ground-truth recording as CSV on stdout");
    std::string preset = "unidirectional";
    int synth_n = 1000;
    double synth_beta = 0.32;
    double switch_fraction = 0.0;
    std::string do_mode;
    int do_channel = 0;
    double do_value = 0.0;
    double do_fraction = 0.5;
    std::string synth_out;
    synth->add_option("--preset", preset,
                      "unidirectional | bidirectional | uncoupled | var")
        ->capture_default_str();
    synth->add_option("-n,--samples", synth_n, "Samples to emit")
        ->capture_default_str();
    synth->add_option("--beta", synth_beta, "Coupling strength for the "
                                            "logistic presets")
        ->capture_default_str();
    synth->add_option("--seed", seed, "Generator seed")->capture_default_str();
    synth->add_option("--switch-fraction", switch_fraction,
                      "Switch coupling off at this fraction of the series");
    synth->add_option("--do", do_mode, "Apply a do-operation: clamp | shift");
    synth->add_option("--do-channel", do_channel, "Intervened channel index")
        ->capture_default_str();
    synth->add_option("--do-value", do_value, "Clamp level / shift amount")
        ->capture_default_str();
    synth->add_option("--do-fraction", do_fraction,
                      "Intervention onset as a fraction of the series")
        ->capture_default_str();
    synth->add_option("-o,--output", synth_out, "Write CSV here instead of "
                                                "stdout");

    // ---- embed ---------------------------------------------------------
    auto* embed_cmd = app.add_subcommand(
        "embed", "Select embedding delay and dimension per channel");
    add_io(embed_cmd);
    add_embedding(embed_cmd);

    // ---- learn-dbn -----------------------------------------------------
    auto* learn_cmd = app.add_subcommand(
        "learn-dbn", "Fit the sparse lagged linear-Gaussian network");
    add_io(learn_cmd);
    int dbn_max_lag = 2;
    double dbn_lambda = 0.05;
    std::string model_out;
    bool ccm_priors = false;
    learn_cmd->add_option("--max-lag", dbn_max_lag, "Past horizon in samples")
        ->capture_default_str();
    learn_cmd->add_option("--lambda", dbn_lambda, "l1 penalty")
        ->capture_default_str();
    learn_cmd->add_flag("--ccm-priors", ccm_priors,
                        "Derive edge priors from a standard cross-map pass");
    learn_cmd->add_option("-o,--output", model_out,
                          "Model JSON path (default: stdout)");
    add_embedding(learn_cmd);
    add_kernel(learn_cmd);

    // ---- ccm -----------------------------------------------------------
    auto* ccm_cmd = app.add_subcommand(
        "ccm", "Cross-map one directed pair, optionally with a DBN model");
    add_io(ccm_cmd);
    add_pair(ccm_cmd);
    add_embedding(ccm_cmd);
    add_kernel(ccm_cmd);
    std::vector<int> lib_sizes;
    int n_draws = 8;
    ccm_cmd->add_option("--mode", mode, "standard | dbn")
        ->capture_default_str();
    ccm_cmd->add_option("--model", model_path, "Model JSON for --mode dbn");
    ccm_cmd->add_option("--sizes", lib_sizes,
                        "Library sizes for a convergence curve");
    ccm_cmd->add_option("--draws", n_draws, "Subsets per library size")
        ->capture_default_str();
    ccm_cmd->add_option("--seed", seed, "Seed for library draws")
        ->capture_default_str();
    ccm_cmd->add_option("--convention", convention, "paper | sugihara")
        ->capture_default_str();

    // ---- intervene -----------------------------------------------------
    auto* intervene_cmd = app.add_subcommand(
        "intervene", "Pre/post cross-map skill around an event");
    add_io(intervene_cmd);
    add_pair(intervene_cmd);
    add_embedding(intervene_cmd);
    add_kernel(intervene_cmd);
    std::vector<double> pre_win;
    std::vector<double> post_win;
    bool retrain_post = false;
    intervene_cmd->add_option("--mode", mode, "standard | dbn")
        ->capture_default_str();
    intervene_cmd->add_option("--max-lag", dbn_max_lag, "DBN past horizon")
        ->capture_default_str();
    intervene_cmd->add_option("--lambda", dbn_lambda, "DBN l1 penalty")
        ->capture_default_str();
    intervene_cmd
        ->add_option("--pre", pre_win, "Pre window start,end in seconds")
        ->expected(2);
    intervene_cmd
        ->add_option("--post", post_win, "Post window start,end in seconds")
        ->expected(2);
    intervene_cmd->add_flag("--retrain-post", retrain_post,
                            "Refit the DBN on the post window");
    intervene_cmd->add_option("--convention", convention, "paper | sugihara")
        ->capture_default_str();

    // ---- metrics -------------------------------------------------------
    auto* metrics_cmd = app.add_subcommand(
        "metrics", "Surrogate null and normalized predictive consistency");
    add_io(metrics_cmd);
    add_pair(metrics_cmd);
    add_embedding(metrics_cmd);
    add_kernel(metrics_cmd);
    int n_surrogates = 100;
    std::string surrogate_method = "circular_shift";
    metrics_cmd->add_option("--surrogates", n_surrogates, "Surrogate count")
        ->capture_default_str();
    metrics_cmd
        ->add_option("--method", surrogate_method,
                     "circular_shift | full_permutation")
        ->capture_default_str();
    metrics_cmd->add_option("--seed", seed, "Surrogate seed")
        ->capture_default_str();
    metrics_cmd->add_option("--model", model_path,
                            "Model JSON for a DBN-informed null");

    // ---- run -----------------------------------------------------------
    auto* run_cmd = app.add_subcommand(
        "run", "Full batch pipeline over every ordered pair and band");
    add_io(run_cmd, /*stdin_name_spec=*/true);
    add_embedding(run_cmd);
    add_kernel(run_cmd);
    std::vector<std::string> band_texts;
    std::string out_dir = "ccmtool-out";
    int workers = 0;
    bool no_priors = false;
    bool no_granger = false;
    int granger_lag = 2;
    std::string run_preset;
    run_cmd->add_option("--synth-preset", run_preset,
                        "Generate input instead of reading a CSV");
    run_cmd->add_option("--synth-samples", synth_n, "Synthetic sample count")
        ->capture_default_str();
    run_cmd->add_option("--synth-beta", synth_beta, "Synthetic coupling")
        ->capture_default_str();
    run_cmd->add_option("--switch-fraction", switch_fraction,
                        "Synthetic coupling switch-off fraction (sets the "
                        "event onset)");
    run_cmd->add_option("-b,--bands", band_texts,
                        "Bands: named (delta, theta, alpha, mu, beta, gamma), "
                        "name:low-high, or broadband");
    run_cmd->add_option("-o,--out", out_dir, "Output directory")
        ->capture_default_str();
    run_cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
    run_cmd->add_option("--workers", workers, "OpenMP thread count (0 = "
                                              "runtime default)")
        ->capture_default_str();
    std::string run_mode = "dbn";
    run_cmd->add_option("--mode", run_mode,
                        "standard (CCM only) | dbn (adds the DBN-informed "
                        "pass, default)")
        ->capture_default_str();
    run_cmd->add_flag("--no-ccm-priors", no_priors,
                      "Learn the DBN without cross-map edge priors");
    run_cmd->add_flag("--no-granger", no_granger, "Skip the Granger baseline");
    run_cmd->add_option("--granger-lag", granger_lag, "Granger lag order")
        ->capture_default_str();
    run_cmd->add_option("--max-lag", dbn_max_lag, "DBN past horizon")
        ->capture_default_str();
    run_cmd->add_option("--lambda", dbn_lambda, "DBN l1 penalty")
        ->capture_default_str();
    run_cmd->add_flag("--retrain-post", retrain_post,
                      "Refit the DBN on the post window");
    run_cmd->add_option("--surrogates", n_surrogates, "Surrogate count")
        ->capture_default_str();
    run_cmd
        ->add_option("--surrogate-method", surrogate_method,
                     "circular_shift | full_permutation")
        ->capture_default_str();
    run_cmd->add_option("--sizes", lib_sizes,
                        "Convergence library sizes (default: auto)");
    run_cmd->add_option("--draws", n_draws, "Subsets per library size")
        ->capture_default_str();
    run_cmd
        ->add_option("--pre", pre_win, "Explicit pre window start,end seconds")
        ->expected(2);
    run_cmd
        ->add_option("--post", post_win,
                     "Explicit post window start,end seconds")
        ->expected(2);
    run_cmd->add_option("--convention", convention, "paper | sugihara")
        ->capture_default_str();
    run_cmd->set_config("--config", "",
                        "INI config file; CLI flags override its keys");

    // ---- plot ----------------------------------------------------------
    auto* plot_cmd = app.add_subcommand(
        "plot", "Re-render the SVG plots from a merged report");
    std::string report_path;
    std::string plot_out = ".";
    plot_cmd->add_option("-r,--report", report_path, "report.json path")
        ->required();
    plot_cmd->add_option("-o,--out", plot_out, "Output directory")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*ingest) {
            const ccmtool::Recording rec =
                load_csv(input, use_stdin, rate, onset_opt());
            ordered_json j;
            j["channels"] = rec.n_channels();
            ordered_json labels = ordered_json::array();
            for (const auto& ch : rec.channels()) labels.push_back(ch.label());
            j["labels"] = labels;
            j["samples"] = rec.n_samples();
            j["rate"] = rec.sample_rate();
            j["duration"] = rec.duration();
            if (rec.event_onset())
                j["onset"] = *rec.event_onset();
            else
                j["onset"] = nullptr;
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*synth) {
            ccmtool::SyntheticSpec spec =
                make_preset(preset, synth_n, seed, synth_beta);
            if (switch_fraction > 0.0) {
                ccmtool::CouplingSwitch sw;
                sw.onset_fraction = switch_fraction;
                sw.coupling = Eigen::MatrixXd::Zero(spec.coupling.rows(),
                                                    spec.coupling.cols());
                spec.coupling_switch = sw;
            }
            if (!do_mode.empty()) {
                ccmtool::DoOperation op;
                op.channel = do_channel;
                op.value = do_value;
                if (do_mode == "clamp") {
                    op.mode = ccmtool::DoOperation::Mode::clamp;
                } else if (do_mode == "shift") {
                    op.mode = ccmtool::DoOperation::Mode::shift;
                } else {
                    throw ccmtool::MalformedInput("unknown do-operation '" +
                                                  do_mode + "'");
                }
                spec.intervention = op;
                spec.intervention_onset_fraction = do_fraction;
            }
            const ccmtool::Recording rec = ccmtool::generate(spec);
            if (synth_out.empty()) {
                ccmtool::write_recording_csv(rec, std::cout);
            } else {
                ccmtool::write_recording_csv(rec, synth_out);
            }
            return 0;
        }

        if (*embed_cmd) {
            const ccmtool::Recording rec =
                load_csv(input, use_stdin, rate, onset_opt());
            ordered_json out = ordered_json::array();
            for (const auto& ch : rec.channels()) {
                const ccmtool::EmbeddingParams p = embedding_params(ch);
                out.push_back({{"label", ch.label()},
                               {"delay", p.delay},
                               {"dimension", p.dimension}});
            }
            std::cout << out.dump(2) << '\n';
            return 0;
        }

        if (*learn_cmd) {
            const ccmtool::Recording rec =
                load_csv(input, use_stdin, rate, onset_opt());
            std::optional<ccmtool::EdgePriorMatrix> priors;
            if (ccm_priors) {
                const auto nc = static_cast<int>(rec.n_channels());
                Eigen::MatrixXd rho = Eigen::MatrixXd::Zero(nc, nc);
                const ccmtool::KernelConfig kernel =
                    make_kernel(bandwidth, fixed_sigma);
                for (int from = 0; from < nc; ++from)
                    for (int to = 0; to < nc; ++to) {
                        if (from == to) continue;
                        const auto& src =
                            rec.channel(static_cast<std::size_t>(from));
                        const auto& tgt =
                            rec.channel(static_cast<std::size_t>(to));
                        rho(to, from) =
                            ccmtool::cross_map(src, tgt,
                                               embedding_params(src), kernel,
                                               nullptr, nullptr,
                                               crossmap_options())
                                .rho;
                    }
                priors = ccmtool::normalize_ccm_priors(rho);
            }
            ccmtool::LearnOptions lo;
            lo.exec = serial ? ccmtool::Exec::serial : ccmtool::Exec::parallel;
            const ccmtool::DbnModel model =
                ccmtool::learn(rec, dbn_max_lag, dbn_lambda,
                               priors ? &*priors : nullptr, lo);
            if (model_out.empty())
                std::cout << ccmtool::model_to_json(model) << '\n';
            else
                ccmtool::save_model(model, model_out);
            return 0;
        }

        if (*ccm_cmd) {
            const ccmtool::Recording rec =
                load_csv(input, use_stdin, rate, onset_opt());
            const auto& src = rec.channel(rec.channel_index(source_ch));
            const auto& tgt = rec.channel(rec.channel_index(target_ch));
            const ccmtool::EmbeddingParams params = embedding_params(src);
            const ccmtool::KernelConfig kernel =
                make_kernel(bandwidth, fixed_sigma);

            std::optional<ccmtool::DbnModel> model;
            ccmtool::DbnContext ctx;
            const ccmtool::DbnContext* ctx_p = nullptr;
            if (mode == "dbn") {
                if (model_path.empty())
                    throw ccmtool::MalformedInput("--mode dbn needs --model");
                model = ccmtool::load_model(model_path);
                ctx = {&*model, &rec};
                ctx_p = &ctx;
            } else if (mode != "standard") {
                throw ccmtool::MalformedInput("unknown mode '" + mode + "'");
            }

            const ccmtool::CcmResult r = ccmtool::cross_map(
                src, tgt, params, kernel, ctx_p, nullptr, crossmap_options());
            ordered_json j = ccm_result_json(r, kernel, conv());
            if (!lib_sizes.empty()) {
                const ccmtool::ConvergenceCurve c = ccmtool::convergence(
                    src, tgt, params, kernel, ctx_p, lib_sizes, n_draws, seed,
                    ccmtool::LibraryDraw::uniform, crossmap_options());
                j["convergence"] = {{"sizes", c.library_sizes},
                                    {"rho_mean", c.rho_mean},
                                    {"rho_std", c.rho_std},
                                    {"n_draws", c.n_draws}};
            }
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*intervene_cmd) {
            const ccmtool::Recording rec =
                load_csv(input, use_stdin, rate, onset_opt());
            const auto& src = rec.channel(rec.channel_index(source_ch));
            const ccmtool::EmbeddingParams params = embedding_params(src);
            const ccmtool::KernelConfig kernel =
                make_kernel(bandwidth, fixed_sigma);

            std::optional<ccmtool::Window> wpre;
            std::optional<ccmtool::Window> wpost;
            if (!pre_win.empty()) wpre = {pre_win[0], pre_win[1]};
            if (!post_win.empty()) wpost = {post_win[0], post_win[1]};

            ccmtool::InterventionDbn idbn;
            const ccmtool::InterventionDbn* idbn_p = nullptr;
            if (mode == "dbn") {
                idbn.max_lag = dbn_max_lag;
                idbn.lambda = dbn_lambda;
                idbn.retrain_post = retrain_post;
                idbn.learn.exec =
                    serial ? ccmtool::Exec::serial : ccmtool::Exec::parallel;
                idbn_p = &idbn;
            } else if (mode != "standard") {
                throw ccmtool::MalformedInput("unknown mode '" + mode + "'");
            }

            const ccmtool::InterventionResult r =
                ccmtool::segmented_intervention(rec, source_ch, target_ch,
                                                params, kernel, idbn_p, wpre,
                                                wpost, crossmap_options());
            ordered_json j;
            j["direction"] = ccmtool::direction_label(source_ch, target_ch,
                                                      conv());
            j["scheme"] = "segmented";
            j["mode"] = mode;
            j["rho_pre"] = r.rho_pre;
            j["rho_post"] = r.rho_post;
            j["delta_rho"] = r.delta_rho;
            j["windows"] = {
                {"pre", {r.pre_window.start_s, r.pre_window.end_s}},
                {"post", {r.post_window.start_s, r.post_window.end_s}}};
            j["neighbor_shift_fraction"] = r.neighbor_shift_fraction;
            j["seed"] = seed;
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*metrics_cmd) {
            const ccmtool::Recording rec =
                load_csv(input, use_stdin, rate, onset_opt());
            const auto& src = rec.channel(rec.channel_index(source_ch));
            const auto& tgt = rec.channel(rec.channel_index(target_ch));
            const ccmtool::EmbeddingParams params = embedding_params(src);
            const ccmtool::KernelConfig kernel =
                make_kernel(bandwidth, fixed_sigma);

            std::optional<ccmtool::DbnModel> model;
            ccmtool::DbnContext ctx;
            const ccmtool::DbnContext* ctx_p = nullptr;
            if (!model_path.empty()) {
                model = ccmtool::load_model(model_path);
                ctx = {&*model, &rec};
                ctx_p = &ctx;
            }

            ccmtool::SurrogateConfig sc;
            sc.n_surrogates = n_surrogates;
            sc.seed = seed;
            if (surrogate_method == "circular_shift") {
                sc.method = ccmtool::SurrogateMethod::circular_shift;
            } else if (surrogate_method == "full_permutation") {
                sc.method = ccmtool::SurrogateMethod::full_permutation;
            } else {
                throw ccmtool::MalformedInput("unknown surrogate method '" +
                                              surrogate_method + "'");
            }

            const ccmtool::CcmResult r = ccmtool::cross_map(
                src, tgt, params, kernel, ctx_p, nullptr, crossmap_options());
            const ccmtool::SurrogateStats stats =
                ccmtool::shuffled_rho(src, tgt, params, kernel, ctx_p, sc,
                                      crossmap_options());
            ordered_json j;
            j["direction"] = ccmtool::direction_label(source_ch, target_ch,
                                                      conv());
            j["rho"] = r.rho;
            j["rho_shuffled_mean"] = stats.mean;
            j["rho_shuffled_std"] = stats.std;
            j["pc_norm"] = ccmtool::pc_norm(r.rho, stats.mean);
            j["n_surrogates"] = sc.n_surrogates;
            j["seed"] = seed;
            std::cout << j.dump(2) << '\n';
            return 0;
        }

        if (*run_cmd) {
            ccmtool::PipelineConfig cfg;
            cfg.input_csv = input;
            cfg.stdin_data = use_stdin;
            cfg.sample_rate = rate;
            cfg.event_onset = onset_opt();
            if (!run_preset.empty()) {
                ccmtool::SyntheticSpec spec =
                    make_preset(run_preset, synth_n, seed, synth_beta);
                if (switch_fraction > 0.0) {
                    ccmtool::CouplingSwitch sw;
                    sw.onset_fraction = switch_fraction;
                    sw.coupling = Eigen::MatrixXd::Zero(spec.coupling.rows(),
                                                        spec.coupling.cols());
                    spec.coupling_switch = sw;
                }
                cfg.synth = spec;
            }
            cfg.bands = parse_bands(band_texts);
            if (dimension > 0) cfg.embedding_dimension = dimension;
            if (tau > 0) cfg.embedding_delay = tau;
            cfg.max_tau = max_tau;
            cfg.max_dimension = max_e;
            cfg.kernel = make_kernel(bandwidth, fixed_sigma);
            cfg.crossmap = crossmap_options();
            if (run_mode == "standard") {
                cfg.dbn.enabled = false;
            } else if (run_mode != "dbn") {
                throw ccmtool::MalformedInput("unknown mode '" + run_mode +
                                              "'");
            }
            cfg.dbn.max_lag = dbn_max_lag;
            cfg.dbn.lambda = dbn_lambda;
            cfg.dbn.use_ccm_priors = !no_priors;
            cfg.dbn.retrain_post = retrain_post;
            if (surrogate_method == "circular_shift") {
                cfg.surrogate_method = ccmtool::SurrogateMethod::circular_shift;
            } else if (surrogate_method == "full_permutation") {
                cfg.surrogate_method =
                    ccmtool::SurrogateMethod::full_permutation;
            } else {
                throw ccmtool::MalformedInput("unknown surrogate method '" +
                                              surrogate_method + "'");
            }
            cfg.n_surrogates = n_surrogates;
            cfg.run_granger = !no_granger;
            cfg.granger_lag = granger_lag;
            cfg.convergence_sizes = lib_sizes;
            cfg.convergence_draws = n_draws;
            if (!pre_win.empty())
                cfg.pre_window = ccmtool::Window{pre_win[0], pre_win[1]};
            if (!post_win.empty())
                cfg.post_window = ccmtool::Window{post_win[0], post_win[1]};
            cfg.out_dir = out_dir;
            cfg.master_seed = seed;
            cfg.workers = workers;
            cfg.convention = conv();
            return ccmtool::run_pipeline(cfg);
        }

        if (*plot_cmd) {
            ordered_json report;
            try {
                report = ordered_json::parse(
                    ccmtool::read_text_file(report_path));
            } catch (const ccmtool::Error&) {
                throw;
            } catch (const std::exception& e) {
                throw ccmtool::MalformedReport(std::string("cannot parse "
                                                           "report: ") +
                                               e.what());
            }
            const ccmtool::PlotBundle plots =
                ccmtool::plots_from_report(report);
            namespace fs = std::filesystem;
            ccmtool::write_text_file(
                (fs::path(plot_out) / "connections.svg").string(),
                plots.connections_svg);
            ccmtool::write_text_file(
                (fs::path(plot_out) / "pre_post.svg").string(),
                plots.pre_post_svg);
            ccmtool::write_text_file(
                (fs::path(plot_out) / "convergence.svg").string(),
                plots.convergence_svg);
            return 0;
        }
    } catch (const std::exception& e) {
        return report_error(e);
    }
    return 0;
}
