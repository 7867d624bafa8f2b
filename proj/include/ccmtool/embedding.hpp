#pragma once

#include <vector>

#include "ccmtool/series.hpp"

namespace ccmtool {

struct EmbeddingParams {
    int dimension = 2; ///< E
    int delay = 1;     ///< tau, in samples
};

/// Delay-embedded state space of one series.
///
/// Row k holds [x_i, x_{i-tau}, ..., x_{i-(E-1)tau}] with i = offset + k and
/// offset = (E-1)*tau, so every coordinate is a verbatim copy of an original
/// sample: coord(k, j) == values[offset + k - j*tau].
class ShadowManifold {
  public:
    ShadowManifold(const TimeSeries& series, EmbeddingParams params);

    int rows() const { return rows_; }
    int dim() const { return params_.dimension; }
    int offset() const { return offset_; }
    EmbeddingParams params() const { return params_; }

    /// Original sample index of manifold row k.
    int time_index(int k) const { return offset_ + k; }

    const double* row(int k) const {
        return points_.data() + static_cast<std::size_t>(k) * dim();
    }
    double coord(int k, int j) const {
        return points_[static_cast<std::size_t>(k) * dim() + j];
    }

  private:
    std::vector<double> points_; // row-major, rows_ x E
    int rows_;
    int offset_;
    EmbeddingParams params_;
};

/// Construct the shadow manifold. Throws SeriesTooShort when
/// N <= (E-1)*tau.
ShadowManifold embed(const TimeSeries& series, EmbeddingParams params);

/// Delay selection: first local minimum of time-delayed mutual information
/// (equal-width histogram, ceil(sqrt(N/5)) bins per axis). The minimum must
/// clear a significance floor of 5x the expected MI of independent data,
/// otherwise (and when no minimum exists below max_lag) falls back to the
/// first lag where autocorrelation drops below 1/e.
int select_tau(const TimeSeries& series, int max_lag);

/// Dimension selection by false nearest neighbors (distance-ratio threshold
/// 15, loneliness threshold 2 sample standard deviations): smallest E whose
/// FNN fraction is below 0.05, else max_E. A neighbor pair is judged by the
/// one-step-ahead coordinate x_{i+tau}, the forward extension of the delay
/// vector.
int select_dimension(const TimeSeries& series, int tau, int max_E);

} // namespace ccmtool
