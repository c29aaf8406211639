#pragma once

// Minimal SVG line plots for metric curves.

#include <algorithm>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "emerge/format.hpp"

namespace emerge::tools {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

inline std::string svg_line_plot(const std::vector<Series>& series, const std::string& title, double y_min,
                                 double y_max) {
    constexpr double width = 640, height = 400, margin = 50;
    const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
    double x_max = 1.0;
    for (const auto& s : series)
        for (double x : s.x) x_max = std::max(x_max, x);
    auto px = [&](double x) { return margin + (width - 2 * margin) * x / x_max; };
    auto py = [&](double y) {
        const double t = (std::clamp(y, y_min, y_max) - y_min) / (y_max - y_min);
        return height - margin - (height - 2 * margin) * t;
    };
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\">" << title
       << "</text>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
       << height - margin << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
       << "\" stroke=\"black\"/>\n";
    for (double tick : {y_min, 0.5 * (y_min + y_max), y_max})
        os << "<text x=\"" << margin - 6 << "\" y=\"" << py(tick) + 4
           << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << format_double(tick)
           << "</text>\n";
    os << "<text x=\"" << width - margin << "\" y=\"" << height - margin + 18
       << "\" text-anchor=\"end\" font-size=\"11\" font-family=\"sans-serif\">" << format_double(x_max)
       << "</text>\n";
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        const char* color = colors[k % std::size(colors)];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            os << (i ? " " : "") << format_double(px(s.x[i])) << ',' << format_double(py(s.y[i]));
        os << "\"/>\n";
        os << "<text x=\"" << margin + 10 << "\" y=\"" << margin + 14 * static_cast<double>(k + 1)
           << "\" font-size=\"11\" font-family=\"sans-serif\" fill=\"" << color << "\">" << s.name << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace emerge::tools
