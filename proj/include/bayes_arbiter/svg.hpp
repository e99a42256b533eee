#pragma once

// Minimal SVG ribbon plots: for each series, nested filled bands between
// quantile curves plus a centre polyline, on an optionally log10-scaled x axis.
// Output depends only on the input numbers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "format.hpp"

namespace bayes_arbiter::svg {

struct Band {
    std::vector<double> lower;
    std::vector<double> upper;
    double opacity = 0.25;
};

struct RibbonSeries {
    std::string label;
    std::string color = "#1f77b4";
    std::vector<double> x;
    std::vector<Band> bands;
    std::vector<double> center;
    bool dashed = false;
};

struct PlotSpec {
    std::string title;
    std::string x_label = "n";
    std::string y_label;
    bool log_x = true;
    std::optional<std::pair<double, double>> y_range;
    int width = 640;
    int height = 420;
};

namespace detail {

inline std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
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

inline std::string num(double v) { return fmt_fixed(v, 2); }

} // namespace detail

inline std::string render_ribbon_plot(const PlotSpec& spec, const std::vector<RibbonSeries>& series) {
    using detail::num;
    const double left = 70, right = 150, top = 40, bottom = 55;
    const double pw = spec.width - left - right, ph = spec.height - top - bottom;

    auto tx = [&](double x) { return spec.log_x ? std::log10(x) : x; };
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (double x : s.x) {
            xmin = std::min(xmin, tx(x));
            xmax = std::max(xmax, tx(x));
        }
        auto scan = [&](const std::vector<double>& v) {
            for (double y : v)
                if (std::isfinite(y)) {
                    ymin = std::min(ymin, y);
                    ymax = std::max(ymax, y);
                }
        };
        scan(s.center);
        for (const auto& b : s.bands) {
            scan(b.lower);
            scan(b.upper);
        }
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1;
    if (xmax <= xmin) xmax = xmin + 1;
    if (spec.y_range) {
        ymin = spec.y_range->first;
        ymax = spec.y_range->second;
    } else if (!std::isfinite(ymin)) {
        ymin = 0, ymax = 1;
    } else {
        const double pad = ymax > ymin ? 0.05 * (ymax - ymin) : 0.5;
        ymin -= pad;
        ymax += pad;
    }
    auto px = [&](double x) { return left + (tx(x) - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) {
        y = std::clamp(y, ymin, ymax);
        return top + (ymax - y) / (ymax - ymin) * ph;
    };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
        << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << num(left + pw / 2) << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"15\">" << detail::escape(spec.title) << "</text>\n";

    // axes and ticks
    out << "<g stroke=\"black\" stroke-width=\"1\" fill=\"none\">\n";
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(left + pw) << "\" y2=\""
        << num(top + ph) << "\"/>\n";
    out << "<line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left) << "\" y2=\""
        << num(top + ph) << "\"/>\n";
    out << "</g>\n<g font-family=\"sans-serif\" font-size=\"11\">\n";
    if (spec.log_x) {
        for (int e = static_cast<int>(std::ceil(xmin - 1e-9)); e <= static_cast<int>(std::floor(xmax + 1e-9)); ++e) {
            const double x = left + (e - xmin) / (xmax - xmin) * pw;
            out << "<line x1=\"" << num(x) << "\" y1=\"" << num(top + ph) << "\" x2=\"" << num(x) << "\" y2=\""
                << num(top + ph + 5) << "\" stroke=\"black\"/>\n";
            out << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
                << fmt_g10(std::pow(10.0, e)) << "</text>\n";
        }
    } else {
        for (int i = 0; i <= 4; ++i) {
            const double v = xmin + (xmax - xmin) * i / 4.0;
            const double x = left + pw * i / 4.0;
            out << "<text x=\"" << num(x) << "\" y=\"" << num(top + ph + 18) << "\" text-anchor=\"middle\">"
                << fmt_g10(v) << "</text>\n";
        }
    }
    for (int i = 0; i <= 4; ++i) {
        const double v = ymin + (ymax - ymin) * i / 4.0;
        const double y = py(v);
        out << "<line x1=\"" << num(left - 5) << "\" y1=\"" << num(y) << "\" x2=\"" << num(left) << "\" y2=\""
            << num(y) << "\" stroke=\"black\"/>\n";
        out << "<text x=\"" << num(left - 8) << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">"
            << fmt_g10(std::round(v * 1e4) / 1e4) << "</text>\n";
    }
    out << "<text x=\"" << num(left + pw / 2) << "\" y=\"" << num(spec.height - 12.0)
        << "\" text-anchor=\"middle\" font-size=\"13\">" << detail::escape(spec.x_label) << "</text>\n";
    out << "<text x=\"16\" y=\"" << num(top + ph / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
        << "transform=\"rotate(-90 16 " << num(top + ph / 2) << ")\">" << detail::escape(spec.y_label)
        << "</text>\n</g>\n";

    for (const auto& s : series) {
        for (const auto& b : s.bands) {
            out << "<polygon fill=\"" << s.color << "\" fill-opacity=\"" << fmt_fixed(b.opacity, 2)
                << "\" stroke=\"none\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) out << num(px(s.x[i])) << ',' << num(py(b.upper[i])) << ' ';
            for (std::size_t i = s.x.size(); i-- > 0;) out << num(px(s.x[i])) << ',' << num(py(b.lower[i])) << ' ';
            out << "\"/>\n";
        }
        if (!s.center.empty()) {
            out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"2\"";
            if (s.dashed) out << " stroke-dasharray=\"5,4\"";
            out << " points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i) out << num(px(s.x[i])) << ',' << num(py(s.center[i])) << ' ';
            out << "\"/>\n";
        }
    }

    // legend
    double ly = top + 10;
    out << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
    for (const auto& s : series) {
        out << "<rect x=\"" << num(left + pw + 14) << "\" y=\"" << num(ly - 9) << "\" width=\"14\" height=\"10\" fill=\""
            << s.color << "\"/>\n";
        out << "<text x=\"" << num(left + pw + 34) << "\" y=\"" << num(ly) << "\">" << detail::escape(s.label)
            << "</text>\n";
        ly += 18;
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

} // namespace bayes_arbiter::svg
