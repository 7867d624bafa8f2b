#pragma once

#include <string>
#include <utility>

#include "ccmtool/series.hpp"

namespace ccmtool {

struct GrangerResult {
    std::pair<std::string, std::string> direction; ///< (source, target)
    int lag_order = 0;
    double f_statistic = 0.0;
    double p_value = 1.0;
    double r2_restricted = 0.0;
    double r2_full = 0.0;
    double rss_restricted = 0.0;
    double rss_full = 0.0;
};

/// Linear Granger test of source -> target. Restricted model: target on an
/// intercept and its own lag_order lags. Full model: plus the source's lags.
/// F = ((RSS_r - RSS_f)/p) / (RSS_f/(T - 2p - 1)) with T regression rows.
/// An exactly fitting full model (RSS_f < 1e-12) reports F = +inf with
/// p = 0; a rank-deficient design otherwise throws SingularDesign.
GrangerResult granger(const TimeSeries& source, const TimeSeries& target,
                      int lag_order);

/// Survival function of the F distribution via the regularized incomplete
/// beta function (Lentz continued fraction), absolute accuracy 1e-10.
double f_distribution_sf(double x, double d1, double d2);

/// Skill on the same [0, 1] footing as a cross-map rho: the partial
/// correlation of the target with the source lags given its own history,
/// sqrt(max(0, (RSS_r - RSS_f) / RSS_r)). 0 when the restricted fit is
/// already exact.
double granger_skill(const GrangerResult& r);

/// Regularized incomplete beta I_x(a, b).
double reg_inc_beta(double a, double b, double x);

} // namespace ccmtool
