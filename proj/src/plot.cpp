#include "ccmtool/plot.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ccmtool/errors.hpp"
#include "ccmtool/io.hpp"

namespace ccmtool {

namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 64.0;
constexpr double kRight = 608.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 368.0;

std::string xml_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (const char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v) { return format_double(v); }

void open_svg(std::ostringstream& s, const std::string& title) {
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth)
      << "\" height=\"" << num(kHeight) << "\" viewBox=\"0 0 " << num(kWidth)
      << ' ' << num(kHeight) << "\">\n";
    s << "<rect width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" fill=\"white\"/>\n";
    s << "<text x=\"" << num(kWidth / 2.0)
      << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"15\">"
      << xml_escape(title) << "</text>\n";
}

void draw_axes(std::ostringstream& s) {
    s << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kBottom)
      << "\" x2=\"" << num(kRight) << "\" y2=\"" << num(kBottom)
      << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\""
      << num(kLeft) << "\" y2=\"" << num(kBottom) << "\" stroke=\"black\"/>\n";
}

void no_data(std::ostringstream& s) {
    s << "<text x=\"" << num((kLeft + kRight) / 2.0) << "\" y=\""
      << num((kTop + kBottom) / 2.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"14\" fill=\"#888888\">no data</text>\n";
}

void y_ticks(std::ostringstream& s, double lo, double hi) {
    for (int i = 0; i <= 4; ++i) {
        const double f = static_cast<double>(i) / 4.0;
        const double v = lo + f * (hi - lo);
        const double y = kBottom - f * (kBottom - kTop);
        s << "<line x1=\"" << num(kLeft - 4.0) << "\" y1=\"" << num(y)
          << "\" x2=\"" << num(kLeft) << "\" y2=\"" << num(y)
          << "\" stroke=\"black\"/>\n";
        s << "<text x=\"" << num(kLeft - 8.0) << "\" y=\"" << num(y + 4.0)
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"11\">"
          << num(std::round(v * 1000.0) / 1000.0) << "</text>\n";
    }
}

const char* kPalette[6] = {"#31688e", "#35b779", "#e57a44",
                           "#7a5195", "#bc5090", "#444444"};

} // namespace

std::string svg_connection_bars(const std::vector<BandConnectionSummary>& bands) {
    std::ostringstream s;
    open_svg(s, "Connections per band");
    draw_axes(s);
    if (bands.empty()) {
        no_data(s);
        s << "</svg>\n";
        return s.str();
    }
    int max_count = 1;
    for (const auto& b : bands) max_count = std::max(max_count, b.count);

    const double group_w = (kRight - kLeft) / static_cast<double>(bands.size());
    y_ticks(s, 0.0, static_cast<double>(max_count));
    for (std::size_t i = 0; i < bands.size(); ++i) {
        const double x0 = kLeft + group_w * static_cast<double>(i);
        const double count_h = (kBottom - kTop) *
                               static_cast<double>(bands[i].count) /
                               static_cast<double>(max_count);
        const double strength =
            std::clamp(bands[i].mean_strength, 0.0, 1.0);
        const double strength_h = (kBottom - kTop) * strength;
        // Left bar: connection count. Right bar: mean strength on [0, 1].
        s << "<rect x=\"" << num(x0 + group_w * 0.15) << "\" y=\""
          << num(kBottom - count_h) << "\" width=\"" << num(group_w * 0.3)
          << "\" height=\"" << num(count_h) << "\" fill=\"" << kPalette[0]
          << "\"/>\n";
        s << "<rect x=\"" << num(x0 + group_w * 0.55) << "\" y=\""
          << num(kBottom - strength_h) << "\" width=\"" << num(group_w * 0.3)
          << "\" height=\"" << num(strength_h) << "\" fill=\"" << kPalette[1]
          << "\"/>\n";
        s << "<text x=\"" << num(x0 + group_w / 2.0) << "\" y=\""
          << num(kBottom + 18.0)
          << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"12\">"
          << xml_escape(bands[i].band) << "</text>\n";
    }
    s << "<text x=\"" << num(kLeft) << "\" y=\"" << num(kHeight - 12.0)
      << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
      << kPalette[0] << "\">count</text>\n";
    s << "<text x=\"" << num(kLeft + 60.0) << "\" y=\"" << num(kHeight - 12.0)
      << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
      << kPalette[1] << "\">mean strength</text>\n";
    s << "</svg>\n";
    return s.str();
}

std::string svg_pre_post_scatter(const std::vector<ScatterPoint>& points) {
    std::ostringstream s;
    open_svg(s, "Cross-map skill before vs after intervention");
    draw_axes(s);
    if (points.empty()) {
        no_data(s);
        s << "</svg>\n";
        return s.str();
    }
    const double lo = -1.0;
    const double hi = 1.0;
    const auto px = [&](double v) {
        return kLeft + (v - lo) / (hi - lo) * (kRight - kLeft);
    };
    const auto py = [&](double v) {
        return kBottom - (v - lo) / (hi - lo) * (kBottom - kTop);
    };
    y_ticks(s, lo, hi);
    // Identity line: points below it lost skill after the intervention.
    s << "<line x1=\"" << num(px(lo)) << "\" y1=\"" << num(py(lo))
      << "\" x2=\"" << num(px(hi)) << "\" y2=\"" << num(py(hi))
      << "\" stroke=\"#bbbbbb\" stroke-dasharray=\"4 3\"/>\n";
    for (const auto& p : points) {
        s << "<circle cx=\"" << num(px(std::clamp(p.rho_pre, lo, hi)))
          << "\" cy=\"" << num(py(std::clamp(p.rho_post, lo, hi)))
          << "\" r=\"4\" fill=\"" << kPalette[0]
          << "\" fill-opacity=\"0.75\"><title>" << xml_escape(p.label)
          << "</title></circle>\n";
    }
    s << "<text x=\"" << num((kLeft + kRight) / 2.0) << "\" y=\""
      << num(kHeight - 12.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">rho pre</text>\n";
    s << "<text x=\"18\" y=\"" << num((kTop + kBottom) / 2.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\" transform=\"rotate(-90 18 "
      << num((kTop + kBottom) / 2.0) << ")\">rho post</text>\n";
    s << "</svg>\n";
    return s.str();
}

std::string svg_convergence_curves(const std::vector<CurveSeries>& curves) {
    std::ostringstream s;
    open_svg(s, "Cross-map skill vs library size");
    draw_axes(s);
    bool any = false;
    for (const auto& c : curves) any = any || !c.sizes.empty();
    if (!any) {
        no_data(s);
        s << "</svg>\n";
        return s.str();
    }
    double xmax = 1.0;
    for (const auto& c : curves)
        for (const double v : c.sizes) xmax = std::max(xmax, v);
    const double ylo = -1.0;
    const double yhi = 1.0;
    const auto px = [&](double v) {
        return kLeft + v / xmax * (kRight - kLeft);
    };
    const auto py = [&](double v) {
        return kBottom - (v - ylo) / (yhi - ylo) * (kBottom - kTop);
    };
    y_ticks(s, ylo, yhi);
    for (std::size_t ci = 0; ci < curves.size(); ++ci) {
        const auto& c = curves[ci];
        if (c.sizes.empty()) continue;
        const char* color = kPalette[ci % 6];
        std::ostringstream pts;
        for (std::size_t i = 0; i < c.sizes.size(); ++i) {
            if (i) pts << ' ';
            pts << num(px(c.sizes[i])) << ','
                << num(py(std::clamp(c.means[i], ylo, yhi)));
        }
        s << "<polyline points=\"" << pts.str()
          << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        for (std::size_t i = 0; i < c.sizes.size(); ++i) {
            const double x = px(c.sizes[i]);
            const double lo_v = std::clamp(c.means[i] - c.stds[i], ylo, yhi);
            const double hi_v = std::clamp(c.means[i] + c.stds[i], ylo, yhi);
            s << "<line x1=\"" << num(x) << "\" y1=\"" << num(py(lo_v))
              << "\" x2=\"" << num(x) << "\" y2=\"" << num(py(hi_v))
              << "\" stroke=\"" << color << "\"/>\n";
        }
        s << "<text x=\"" << num(kRight - 4.0) << "\" y=\""
          << num(kTop + 16.0 * static_cast<double>(ci + 1))
          << "\" text-anchor=\"end\" font-family=\"sans-serif\" "
             "font-size=\"11\" fill=\""
          << color << "\">" << xml_escape(c.label) << "</text>\n";
    }
    s << "<text x=\"" << num((kLeft + kRight) / 2.0) << "\" y=\""
      << num(kHeight - 12.0)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">library size</text>\n";
    s << "</svg>\n";
    return s.str();
}

} // namespace ccmtool
