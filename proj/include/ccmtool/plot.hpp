#pragma once

#include <string>
#include <vector>

namespace ccmtool {

/// One bar group: significant directed connections in a band and their mean
/// strength.
struct BandConnectionSummary {
    std::string band;
    int count = 0;
    double mean_strength = 0.0;
};

struct ScatterPoint {
    double rho_pre = 0.0;
    double rho_post = 0.0;
    std::string label;
};

struct CurveSeries {
    std::string label;
    std::vector<double> sizes;
    std::vector<double> means;
    std::vector<double> stds;
};

/// All renderers return a self-contained SVG document. Output bytes are a
/// pure function of the input values; empty input renders axes plus a
/// "no data" annotation.
std::string svg_connection_bars(const std::vector<BandConnectionSummary>& bands);
std::string svg_pre_post_scatter(const std::vector<ScatterPoint>& points);
std::string svg_convergence_curves(const std::vector<CurveSeries>& curves);

} // namespace ccmtool
