#include "ccmtool/dbn.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <utility>

#include <nlohmann/json.hpp>

#include "ccmtool/errors.hpp"

namespace ccmtool {

using ordered_json = nlohmann::ordered_json;

EdgePriorMatrix::EdgePriorMatrix(Eigen::MatrixXd strengths)
    : strengths_(std::move(strengths)) {
    if (strengths_.rows() != strengths_.cols())
        throw NonSquare("prior matrix must be square");
    for (int i = 0; i < strengths_.rows(); ++i)
        for (int j = 0; j < strengths_.cols(); ++j) {
            const double s = strengths_(i, j);
            if (!(s >= 0.0 && s <= 1.0))
                throw InvalidSpec("prior strengths must lie in [0,1]");
            if (i == j && s != 0.0)
                throw InvalidSpec("prior diagonal must be zero");
        }
}

EdgePriorMatrix normalize_ccm_priors(const Eigen::MatrixXd& raw_rho) {
    if (raw_rho.rows() != raw_rho.cols())
        throw NonSquare("coupling matrix must be square");
    Eigen::MatrixXd out = raw_rho.cwiseMax(0.0);
    out.diagonal().setZero();
    const double mx = out.maxCoeff();
    if (mx > 0.0) out /= mx;
    return EdgePriorMatrix(std::move(out));
}

DbnModel::DbnModel(std::vector<std::string> labels, int max_lag, double lambda,
                   std::vector<Eigen::MatrixXd> lag_weights,
                   Eigen::VectorXd intercepts, Eigen::VectorXd noise_vars)
    : labels_(std::move(labels)), max_lag_(max_lag), lambda_(lambda),
      lag_weights_(std::move(lag_weights)), intercepts_(std::move(intercepts)),
      noise_vars_(std::move(noise_vars)) {
    const auto c = static_cast<int>(labels_.size());
    if (max_lag_ < 1) throw InvalidSpec("max_lag must be >= 1");
    if (static_cast<int>(lag_weights_.size()) != max_lag_)
        throw InvalidSpec("one weight matrix per lag required");
    for (const auto& w : lag_weights_) {
        if (w.rows() != c || w.cols() != c)
            throw InvalidSpec("weight matrix shape mismatch");
        if (!w.allFinite()) throw NonFiniteInput("non-finite weight");
    }
    if (intercepts_.size() != c || noise_vars_.size() != c)
        throw InvalidSpec("per-channel parameter shape mismatch");
    for (int i = 0; i < c; ++i)
        if (!(noise_vars_(i) > 0.0))
            throw InvalidSpec("noise variances must be positive");
}

int DbnModel::channel_index(const std::string& label) const {
    for (std::size_t i = 0; i < labels_.size(); ++i)
        if (labels_[i] == label) return static_cast<int>(i);
    throw ChannelMismatch("model has no channel labelled '" + label + "'");
}

double DbnModel::predict_mean(const Recording& rec, int channel,
                              int time_index) const {
    if (channel < 0 || channel >= n_channels())
        throw IndexOutOfRange("channel " + std::to_string(channel));
    if (time_index < max_lag_ ||
        time_index >= static_cast<int>(rec.n_samples()))
        throw IndexOutOfRange("time index " + std::to_string(time_index) +
                              " has unobservable parents");
    if (static_cast<int>(rec.n_channels()) != n_channels())
        throw ChannelMismatch("recording channel count differs from model");
    double mean = intercepts_(channel);
    for (int lag = 1; lag <= max_lag_; ++lag) {
        const auto& w = lag_weights_[static_cast<std::size_t>(lag) - 1];
        for (int from = 0; from < n_channels(); ++from) {
            const double coef = w(channel, from);
            if (coef != 0.0)
                mean += coef * rec.channel(static_cast<std::size_t>(from))
                                   [static_cast<std::size_t>(time_index - lag)];
        }
    }
    return mean;
}

double soft_threshold(double v, double t) {
    if (v > t) return v - t;
    if (v < -t) return v + t;
    return 0.0;
}

double conditional_probability(const DbnModel& model, const Recording& rec,
                               int channel, int time_index) {
    const double mean = model.predict_mean(rec, channel, time_index);
    const double var = model.noise_var(channel);
    const double y = rec.channel(static_cast<std::size_t>(channel))
                         [static_cast<std::size_t>(time_index)];
    const double r = y - mean;
    const double density =
        std::exp(-0.5 * r * r / var) / std::sqrt(2.0 * std::numbers::pi * var);
    constexpr double density_floor = 1e-12;
    return std::max(density, density_floor);
}

namespace {

// Largest eigenvalue of the (PSD) Gram matrix by power iteration.
double spectral_norm(const Eigen::MatrixXd& g) {
    const auto p = static_cast<int>(g.rows());
    Eigen::VectorXd v = Eigen::VectorXd::Ones(p) / std::sqrt(double(p));
    double lam = 0.0;
    for (int it = 0; it < 100; ++it) {
        Eigen::VectorXd w = g * v;
        const double n = w.norm();
        if (n == 0.0) return 0.0;
        v = w / n;
        lam = n;
    }
    return lam;
}

struct ChannelFit {
    Eigen::VectorXd w;
    double intercept = 0.0;
    double noise_var = 0.0;
    std::vector<double> trace;
    int iterations = 0;
};

// ISTA on 0.5*w'Gw - b'w + c0 + sum_p penalty_p*|w_p| with backtracking from
// step 1/L. The Gram form keeps each iteration O(P^2) regardless of T.
ChannelFit fit_channel(const Eigen::MatrixXd& gram, const Eigen::VectorXd& b,
                       double y_sq_mean_half, const Eigen::VectorXd& penalty,
                       double lipschitz, const LearnOptions& options) {
    const auto p = static_cast<int>(b.size());
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);

    auto smooth = [&](const Eigen::VectorXd& v) {
        return 0.5 * v.dot(gram * v) - b.dot(v) + y_sq_mean_half;
    };
    auto objective = [&](const Eigen::VectorXd& v) {
        return smooth(v) + penalty.cwiseProduct(v.cwiseAbs()).sum();
    };

    ChannelFit fit;
    double f = objective(w);
    fit.trace.push_back(f);
    const double s0 = lipschitz > 0.0 ? 1.0 / lipschitz : 1.0;

    for (int it = 0; it < options.max_iter; ++it) {
        const Eigen::VectorXd grad = gram * w - b;
        const double q_w = smooth(w);
        double s = s0;
        Eigen::VectorXd w_next(p);
        for (int bt = 0; bt < 60; ++bt) {
            for (int i = 0; i < p; ++i)
                w_next(i) = soft_threshold(w(i) - s * grad(i), s * penalty(i));
            const Eigen::VectorXd d = w_next - w;
            const double q_next = smooth(w_next);
            const double bound = q_w + grad.dot(d) + d.squaredNorm() / (2.0 * s);
            if (q_next <= bound + 1e-12 * std::max(1.0, std::abs(bound)))
                break;
            s *= 0.5;
        }
        const double f_next = objective(w_next);
        w = w_next;
        fit.trace.push_back(f_next);
        ++fit.iterations;
        if (std::abs(f - f_next) <= options.tol * std::max(1.0, std::abs(f)))
            break;
        f = f_next;
    }
    fit.w = w;
    return fit;
}

} // namespace

DbnModel learn(const Recording& rec, int max_lag, double lambda,
               const EdgePriorMatrix* priors, const LearnOptions& options,
               LearnDiagnostics* diagnostics) {
    const auto c = static_cast<int>(rec.n_channels());
    const auto n = static_cast<int>(rec.n_samples());
    if (max_lag < 1) throw InvalidSpec("max_lag must be >= 1");
    if (lambda < 0.0) throw InvalidSpec("lambda must be >= 0");
    if (n <= max_lag + c * max_lag)
        throw SeriesTooShort("need N > max_lag + channels*max_lag samples");
    if (priors && priors->size() != c)
        throw ChannelMismatch("prior matrix size differs from channel count");

    const int t_rows = n - max_lag;
    const int p_cols = c * max_lag;

    // Design: column (from*max_lag + l-1) holds channel `from` at lag l.
    Eigen::MatrixXd design(t_rows, p_cols);
    Eigen::MatrixXd targets(t_rows, c);
    for (int t = 0; t < t_rows; ++t) {
        for (int from = 0; from < c; ++from) {
            const auto& v = rec.channel(static_cast<std::size_t>(from)).values();
            for (int lag = 1; lag <= max_lag; ++lag)
                design(t, from * max_lag + lag - 1) =
                    v[static_cast<std::size_t>(max_lag + t - lag)];
            targets(t, from) = v[static_cast<std::size_t>(max_lag + t)];
        }
    }

    // Centring makes the unpenalised intercept exact.
    const Eigen::RowVectorXd col_means = design.colwise().mean();
    design.rowwise() -= col_means;
    const Eigen::RowVectorXd y_means = targets.colwise().mean();
    targets.rowwise() -= y_means;

    const Eigen::MatrixXd gram = design.transpose() * design / double(t_rows);
    const double lipschitz = spectral_norm(gram) * 1.01;

    std::vector<ChannelFit> fits(static_cast<std::size_t>(c));
    auto fit_one = [&](int to) {
        const Eigen::VectorXd b =
            design.transpose() * targets.col(to) / double(t_rows);
        const double y_half =
            0.5 * targets.col(to).squaredNorm() / double(t_rows);
        Eigen::VectorXd penalty(p_cols);
        for (int from = 0; from < c; ++from) {
            const double scale =
                priors ? lambda * (1.0 - priors->at(to, from)) : lambda;
            for (int lag = 0; lag < max_lag; ++lag)
                penalty(from * max_lag + lag) = scale;
        }
        auto fit = fit_channel(gram, b, y_half, penalty, lipschitz, options);
        fit.intercept = y_means(to) - col_means.dot(fit.w);
        const double rss =
            (targets.col(to) - design * fit.w).squaredNorm() / double(t_rows);
        fit.noise_var = std::max(rss, 1e-12);
        fits[static_cast<std::size_t>(to)] = std::move(fit);
    };

    if (options.exec == Exec::serial) {
        for (int to = 0; to < c; ++to) fit_one(to);
    } else {
        std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
        for (int to = 0; to < c; ++to) {
            try {
                fit_one(to);
            } catch (...) {
#pragma omp critical(ccmtool_learn_err)
                if (!err) err = std::current_exception();
            }
        }
        if (err) std::rethrow_exception(err);
    }

    std::vector<Eigen::MatrixXd> lag_weights(
        static_cast<std::size_t>(max_lag), Eigen::MatrixXd::Zero(c, c));
    Eigen::VectorXd intercepts(c), noise_vars(c);
    for (int to = 0; to < c; ++to) {
        const auto& fit = fits[static_cast<std::size_t>(to)];
        for (int from = 0; from < c; ++from)
            for (int lag = 0; lag < max_lag; ++lag)
                lag_weights[static_cast<std::size_t>(lag)](to, from) =
                    fit.w(from * max_lag + lag);
        intercepts(to) = fit.intercept;
        noise_vars(to) = fit.noise_var;
    }

    if (diagnostics) {
        diagnostics->objective_trace.clear();
        diagnostics->iterations.clear();
        for (const auto& fit : fits) {
            diagnostics->objective_trace.push_back(fit.trace);
            diagnostics->iterations.push_back(fit.iterations);
        }
    }

    std::vector<std::string> labels;
    labels.reserve(static_cast<std::size_t>(c));
    for (const auto& ch : rec.channels()) labels.push_back(ch.label());
    return DbnModel(std::move(labels), max_lag, lambda, std::move(lag_weights),
                    std::move(intercepts), std::move(noise_vars));
}

std::string model_to_json(const DbnModel& model) {
    ordered_json j;
    j["max_lag"] = model.max_lag();
    j["lambda"] = model.lambda();
    j["channels"] = model.labels();
    ordered_json weights = ordered_json::array();
    for (int to = 0; to < model.n_channels(); ++to)
        for (int from = 0; from < model.n_channels(); ++from)
            for (int lag = 1; lag <= model.max_lag(); ++lag) {
                const double w = model.weight(to, from, lag);
                if (w != 0.0)
                    weights.push_back(ordered_json::array({to, from, lag, w}));
            }
    j["weights"] = std::move(weights);
    ordered_json intercepts = ordered_json::array();
    ordered_json noise_vars = ordered_json::array();
    for (int i = 0; i < model.n_channels(); ++i) {
        intercepts.push_back(model.intercept(i));
        noise_vars.push_back(model.noise_var(i));
    }
    j["intercepts"] = std::move(intercepts);
    j["noise_vars"] = std::move(noise_vars);
    return j.dump(2);
}

DbnModel model_from_json(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw MalformedReport(std::string("model JSON: ") + e.what());
    }
    try {
        const int max_lag = j.at("max_lag").get<int>();
        const double lambda = j.at("lambda").get<double>();
        const auto labels = j.at("channels").get<std::vector<std::string>>();
        const auto c = static_cast<int>(labels.size());
        std::vector<Eigen::MatrixXd> lag_weights(
            static_cast<std::size_t>(max_lag), Eigen::MatrixXd::Zero(c, c));
        for (const auto& entry : j.at("weights")) {
            const int to = entry.at(0).get<int>();
            const int from = entry.at(1).get<int>();
            const int lag = entry.at(2).get<int>();
            lag_weights.at(static_cast<std::size_t>(lag) - 1)(to, from) =
                entry.at(3).get<double>();
        }
        Eigen::VectorXd intercepts(c), noise_vars(c);
        for (int i = 0; i < c; ++i) {
            intercepts(i) = j.at("intercepts").at(static_cast<std::size_t>(i)).get<double>();
            noise_vars(i) = j.at("noise_vars").at(static_cast<std::size_t>(i)).get<double>();
        }
        return DbnModel(labels, max_lag, lambda, std::move(lag_weights),
                        std::move(intercepts), std::move(noise_vars));
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        throw MalformedReport(std::string("model JSON: ") + e.what());
    }
}

void save_model(const DbnModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << model_to_json(model) << '\n';
}

DbnModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read " + path);
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return model_from_json(text);
}

} // namespace ccmtool
