#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "ccmtool/series.hpp"

namespace ccmtool {

/// Do-style modification applied to one channel from an onset sample onward;
/// the dynamics keep evolving from the modified state.
struct DoOperation {
    enum class Mode { clamp, shift };
    int channel = 0;
    Mode mode = Mode::clamp;
    double value = 0.0;
};

/// Structural change of the coupling matrix at a fraction of the emitted
/// samples (coupled_logistic only).
struct CouplingSwitch {
    double onset_fraction = 0.5;
    Eigen::MatrixXd coupling; ///< coupling in force from the onset onward
};

/// Ground-truth generator configuration.
///
/// coupled_logistic: x_{c,t+1} = x_{c,t} * (r_c - r_c*x_{c,t}
///                                - sum_{j != c} coupling(c,j) * x_{j,t}),
/// rejected as Unstable if any sample leaves [0,1].
///
/// sparse_var: x_t = sum_l A_l x_{t-l} + eps, eps ~ N(0, noise_std^2 I),
/// rejected as Unstable if the companion spectral radius is >= 1.
struct SyntheticSpec {
    enum class Kind { coupled_logistic, sparse_var };

    Kind kind = Kind::coupled_logistic;
    int n_samples = 1000;
    int n_channels = 2;
    std::uint64_t seed = 0;
    int burn_in = 300;

    // coupled_logistic
    Eigen::MatrixXd coupling;       ///< (to x from); diagonal ignored
    std::vector<double> growth;     ///< r per channel
    std::vector<double> initial;    ///< x_0 per channel; empty -> seeded U(0.2, 0.8)
    std::optional<CouplingSwitch> coupling_switch;

    // sparse_var
    std::vector<Eigen::MatrixXd> lag_matrices; ///< A_1 .. A_L, each (to x from)
    double noise_std = 1.0;

    // optional do-intervention during generation
    std::optional<DoOperation> intervention;
    double intervention_onset_fraction = 0.5; ///< of emitted samples
};

/// Canonical two-channel validation regime: x drives y with strength beta,
/// r_x = 3.8, r_y = 3.5. Channels are labelled "x" and "y".
SyntheticSpec coupled_logistic_pair(double beta, int n_samples,
                                    std::uint64_t seed);

/// Deterministic given the spec; event_onset is set when a switch or
/// intervention is present. Throws Unstable or InvalidSpec.
Recording generate(const SyntheticSpec& spec);

/// Planted directed structure: (to, from) true iff the generator couples
/// `from` into `to` at any lag.
Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>
ground_truth(const SyntheticSpec& spec);

} // namespace ccmtool
