#include "ccmtool/synthetic.hpp"

#include <cmath>
#include <string>

#include "ccmtool/errors.hpp"
#include "ccmtool/rng.hpp"

namespace ccmtool {

namespace {

void validate_common(const SyntheticSpec& spec) {
    if (spec.n_samples < 1) throw InvalidSpec("n_samples must be >= 1");
    if (spec.n_channels < 1) throw InvalidSpec("n_channels must be >= 1");
    if (spec.burn_in < 0) throw InvalidSpec("burn_in must be >= 0");
    if (spec.intervention) {
        const auto& iv = *spec.intervention;
        if (iv.channel < 0 || iv.channel >= spec.n_channels)
            throw InvalidSpec("intervention channel out of range");
        if (!(spec.intervention_onset_fraction > 0.0 &&
              spec.intervention_onset_fraction < 1.0))
            throw InvalidSpec("intervention onset fraction must be in (0,1)");
    }
}

double companion_spectral_radius(const std::vector<Eigen::MatrixXd>& lags,
                                 int c) {
    const auto l = static_cast<int>(lags.size());
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(c * l, c * l);
    for (int i = 0; i < l; ++i)
        comp.block(0, i * c, c, c) = lags[static_cast<std::size_t>(i)];
    if (l > 1)
        comp.block(c, 0, c * (l - 1), c * (l - 1)) =
            Eigen::MatrixXd::Identity(c * (l - 1), c * (l - 1));
    return comp.eigenvalues().cwiseAbs().maxCoeff();
}

Recording finish(std::vector<std::vector<double>> data,
                 const SyntheticSpec& spec, std::optional<double> onset) {
    std::vector<TimeSeries> channels;
    channels.reserve(data.size());
    for (int c = 0; c < spec.n_channels; ++c) {
        std::string label =
            spec.n_channels == 2 ? (c == 0 ? "x" : "y") : "ch" + std::to_string(c);
        channels.emplace_back(std::move(data[static_cast<std::size_t>(c)]), 1.0,
                              std::move(label));
    }
    return Recording(std::move(channels), onset);
}

Recording generate_logistic(const SyntheticSpec& spec) {
    const int c = spec.n_channels;
    if (spec.coupling.rows() != c || spec.coupling.cols() != c)
        throw InvalidSpec("coupling matrix must be n_channels x n_channels");
    if (static_cast<int>(spec.growth.size()) != c)
        throw InvalidSpec("growth rates must match n_channels");
    if (!spec.initial.empty() && static_cast<int>(spec.initial.size()) != c)
        throw InvalidSpec("initial state must match n_channels");
    if (spec.coupling_switch &&
        (spec.coupling_switch->coupling.rows() != c ||
         spec.coupling_switch->coupling.cols() != c))
        throw InvalidSpec("switched coupling matrix must be n_channels x n_channels");

    SplitMix64 rng(spec.seed);
    Eigen::VectorXd state(c);
    if (spec.initial.empty())
        for (int i = 0; i < c; ++i) state(i) = 0.2 + 0.6 * rng.uniform();
    else
        for (int i = 0; i < c; ++i) state(i) = spec.initial[static_cast<std::size_t>(i)];

    const int total = spec.burn_in + spec.n_samples;
    const long long do_onset =
        spec.intervention
            ? spec.burn_in + static_cast<long long>(std::floor(
                                 spec.intervention_onset_fraction * spec.n_samples))
            : -1;
    const long long switch_onset =
        spec.coupling_switch
            ? spec.burn_in + static_cast<long long>(std::floor(
                                 spec.coupling_switch->onset_fraction * spec.n_samples))
            : -1;

    std::vector<std::vector<double>> data(
        static_cast<std::size_t>(c),
        std::vector<double>(static_cast<std::size_t>(spec.n_samples)));

    for (long long t = 0; t < total; ++t) {
        if (do_onset >= 0 && t >= do_onset) {
            auto& v = state(spec.intervention->channel);
            v = spec.intervention->mode == DoOperation::Mode::clamp
                    ? spec.intervention->value
                    : v + spec.intervention->value;
        }
        for (int i = 0; i < c; ++i) {
            const double v = state(i);
            if (!(v >= 0.0 && v <= 1.0))
                throw Unstable("logistic trajectory left [0,1] at step " +
                               std::to_string(t));
            if (t >= spec.burn_in)
                data[static_cast<std::size_t>(i)]
                    [static_cast<std::size_t>(t - spec.burn_in)] = v;
        }
        const Eigen::MatrixXd& beta =
            (switch_onset >= 0 && t >= switch_onset)
                ? spec.coupling_switch->coupling
                : spec.coupling;
        Eigen::VectorXd next(c);
        for (int i = 0; i < c; ++i) {
            double drive = 0.0;
            for (int j = 0; j < c; ++j)
                if (j != i) drive += beta(i, j) * state(j);
            const double r = spec.growth[static_cast<std::size_t>(i)];
            next(i) = state(i) * (r - r * state(i) - drive);
        }
        state = next;
    }

    std::optional<double> onset;
    const long long event = std::max(do_onset, switch_onset);
    if (event >= 0) {
        const double s = static_cast<double>(event - spec.burn_in);
        if (s > 0.0 && s < spec.n_samples) onset = s; // rate is 1 Hz
    }
    return finish(std::move(data), spec, onset);
}

Recording generate_var(const SyntheticSpec& spec) {
    const int c = spec.n_channels;
    if (spec.lag_matrices.empty())
        throw InvalidSpec("sparse_var needs at least one lag matrix");
    for (const auto& a : spec.lag_matrices)
        if (a.rows() != c || a.cols() != c)
            throw InvalidSpec("lag matrix must be n_channels x n_channels");
    if (!(spec.noise_std >= 0.0)) throw InvalidSpec("noise_std must be >= 0");
    if (spec.coupling_switch)
        throw InvalidSpec("coupling_switch is only supported for coupled_logistic");
    if (companion_spectral_radius(spec.lag_matrices, c) >= 1.0)
        throw Unstable("VAR companion spectral radius >= 1");

    const auto l = static_cast<int>(spec.lag_matrices.size());
    SplitMix64 rng(spec.seed);
    const int total = spec.burn_in + spec.n_samples;

    std::vector<Eigen::VectorXd> history(
        static_cast<std::size_t>(l), Eigen::VectorXd::Zero(c));
    std::vector<std::vector<double>> data(
        static_cast<std::size_t>(c),
        std::vector<double>(static_cast<std::size_t>(spec.n_samples)));

    const long long do_onset =
        spec.intervention
            ? spec.burn_in + static_cast<long long>(std::floor(
                                 spec.intervention_onset_fraction * spec.n_samples))
            : -1;

    for (long long t = 0; t < total; ++t) {
        Eigen::VectorXd x = Eigen::VectorXd::Zero(c);
        for (int k = 0; k < l; ++k)
            x += spec.lag_matrices[static_cast<std::size_t>(k)] *
                 history[static_cast<std::size_t>(k)];
        for (int i = 0; i < c; ++i) x(i) += spec.noise_std * rng.normal();

        if (do_onset >= 0 && t >= do_onset) {
            auto& v = x(spec.intervention->channel);
            v = spec.intervention->mode == DoOperation::Mode::clamp
                    ? spec.intervention->value
                    : v + spec.intervention->value;
        }

        for (int k = l - 1; k > 0; --k)
            history[static_cast<std::size_t>(k)] = history[static_cast<std::size_t>(k) - 1];
        history[0] = x;

        if (t >= spec.burn_in)
            for (int i = 0; i < c; ++i)
                data[static_cast<std::size_t>(i)]
                    [static_cast<std::size_t>(t - spec.burn_in)] = x(i);
    }

    std::optional<double> onset;
    if (do_onset >= 0) {
        const double s = static_cast<double>(do_onset - spec.burn_in);
        if (s > 0.0 && s < spec.n_samples) onset = s;
    }
    return finish(std::move(data), spec, onset);
}

} // namespace

SyntheticSpec coupled_logistic_pair(double beta, int n_samples,
                                    std::uint64_t seed) {
    SyntheticSpec spec;
    spec.kind = SyntheticSpec::Kind::coupled_logistic;
    spec.n_samples = n_samples;
    spec.n_channels = 2;
    spec.seed = seed;
    spec.growth = {3.8, 3.5};
    spec.coupling = Eigen::MatrixXd::Zero(2, 2);
    spec.coupling(1, 0) = beta; // x drives y
    return spec;
}

Recording generate(const SyntheticSpec& spec) {
    validate_common(spec);
    switch (spec.kind) {
    case SyntheticSpec::Kind::coupled_logistic: return generate_logistic(spec);
    case SyntheticSpec::Kind::sparse_var: return generate_var(spec);
    }
    throw InvalidSpec("unknown generator kind");
}

Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>
ground_truth(const SyntheticSpec& spec) {
    const int c = spec.n_channels;
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj(c, c);
    adj.setConstant(false);
    if (spec.kind == SyntheticSpec::Kind::coupled_logistic) {
        if (spec.coupling.rows() != c || spec.coupling.cols() != c)
            throw InvalidSpec("coupling matrix must be n_channels x n_channels");
        for (int to = 0; to < c; ++to)
            for (int from = 0; from < c; ++from)
                if (to != from && spec.coupling(to, from) != 0.0)
                    adj(to, from) = true;
    } else {
        for (const auto& a : spec.lag_matrices)
            for (int to = 0; to < c; ++to)
                for (int from = 0; from < c; ++from)
                    if (a(to, from) != 0.0) adj(to, from) = true;
    }
    return adj;
}

} // namespace ccmtool
