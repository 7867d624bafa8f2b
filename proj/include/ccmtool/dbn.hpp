#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ccmtool/neighbors.hpp"
#include "ccmtool/series.hpp"

namespace ccmtool {

/// Per-edge prior strengths in [0, 1] with a zero diagonal; strengths(to,
/// from) is the normalised cross-map coupling from -> to. A strength of s
/// scales that edge's l1 penalty by (1 - s).
class EdgePriorMatrix {
  public:
    explicit EdgePriorMatrix(Eigen::MatrixXd strengths);

    double at(int to, int from) const { return strengths_(to, from); }
    int size() const { return static_cast<int>(strengths_.rows()); }
    const Eigen::MatrixXd& matrix() const { return strengths_; }

  private:
    Eigen::MatrixXd strengths_;
};

/// Clamp negatives to zero, zero the diagonal, rescale by the max entry
/// (all-zero input stays all-zero). Throws NonSquare.
EdgePriorMatrix normalize_ccm_priors(const Eigen::MatrixXd& raw_rho);

/// Lagged linear-Gaussian network: each channel is a Gaussian whose mean is
/// an affine function of every channel's previous max_lag samples. The parent
/// set of a channel is the set of (from, lag) pairs with nonzero weight.
class DbnModel {
  public:
    DbnModel(std::vector<std::string> labels, int max_lag, double lambda,
             std::vector<Eigen::MatrixXd> lag_weights,
             Eigen::VectorXd intercepts, Eigen::VectorXd noise_vars);

    int n_channels() const { return static_cast<int>(labels_.size()); }
    int max_lag() const { return max_lag_; }
    double lambda() const { return lambda_; }
    const std::vector<std::string>& labels() const { return labels_; }

    /// Coefficient of channel `from` at lag `lag` (1-based) on channel `to`.
    double weight(int to, int from, int lag) const {
        return lag_weights_[static_cast<std::size_t>(lag) - 1](to, from);
    }
    const Eigen::MatrixXd& lag_weight_matrix(int lag) const {
        return lag_weights_[static_cast<std::size_t>(lag) - 1];
    }
    double intercept(int c) const { return intercepts_(c); }
    double noise_var(int c) const { return noise_vars_(c); }

    int channel_index(const std::string& label) const;

    /// Conditional mean of channel c at time t given all channels' pasts.
    double predict_mean(const Recording& rec, int channel, int time_index) const;

  private:
    std::vector<std::string> labels_;
    int max_lag_;
    double lambda_;
    std::vector<Eigen::MatrixXd> lag_weights_; // [lag-1](to, from)
    Eigen::VectorXd intercepts_;
    Eigen::VectorXd noise_vars_;
};

struct LearnOptions {
    double tol = 1e-8;    ///< relative objective change at convergence
    int max_iter = 10000;
    Exec exec = Exec::parallel; ///< channels are fit independently
};

/// Objective values per accepted iteration, per channel; the proximal
/// gradient trace is monotonically nonincreasing.
struct LearnDiagnostics {
    std::vector<std::vector<double>> objective_trace;
    std::vector<int> iterations;
};

/// Sparse structure and parameters by l1-penalised least squares, solved per
/// channel with ISTA and backtracking line search from a power-iteration
/// Lipschitz estimate. With priors, edge (to, from) is penalised by
/// lambda * (1 - strengths(to, from)); intercepts are never penalised.
DbnModel learn(const Recording& rec, int max_lag, double lambda,
               const EdgePriorMatrix* priors = nullptr,
               const LearnOptions& options = {},
               LearnDiagnostics* diagnostics = nullptr);

/// Proximal map of the l1 norm: sign(v) * max(|v| - t, 0).
double soft_threshold(double v, double t);

/// Gaussian conditional density N(y_t; predicted mean, noise_var), floored
/// at 1e-12 so a far outlier cannot zero a hybrid weight. Requires
/// time_index >= max_lag.
double conditional_probability(const DbnModel& model, const Recording& rec,
                               int channel, int time_index);

/// JSON persistence; weights are stored as zero-pruned (to, from, lag, value)
/// triplets and round-trip without loss.
void save_model(const DbnModel& model, const std::string& path);
DbnModel load_model(const std::string& path);
std::string model_to_json(const DbnModel& model);
DbnModel model_from_json(const std::string& text);

} // namespace ccmtool
