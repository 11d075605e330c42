#include "gpc/svg.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>

namespace gpc {

namespace {

constexpr double kWidth = 800.0, kHeight = 500.0;
constexpr double kLeft = 80.0, kRight = 20.0, kTop = 40.0, kBottom = 60.0;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fixed(double v, int precision = 2) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, precision);
    std::string s(buf, res.ptr);
    if (s == "-0.00" || s == "-0.0" || s == "-0") s.erase(0, 1);
    return s;
}

std::string tick_label(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 4);
    return std::string(buf, res.ptr);
}

std::string escape(const std::string& s) {
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

}  // namespace

std::string line_chart_svg(const std::string& title, const std::string& x_label, const std::string& y_label,
                           const std::vector<double>& x, const std::vector<PlotSeries>& series) {
    for (const auto& s : series)
        if (s.y.size() != x.size()) throw std::invalid_argument("series '" + s.label + "' does not match x");

    double xmin = 0.0, xmax = 1.0, ymin = 0.0, ymax = 0.0;
    bool have_y = false;
    if (!x.empty()) {
        xmin = *std::min_element(x.begin(), x.end());
        xmax = *std::max_element(x.begin(), x.end());
    }
    for (const auto& s : series)
        for (double v : s.y) {
            if (!std::isfinite(v)) continue;
            if (!have_y) ymin = ymax = v;
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
            have_y = true;
        }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double v) { return kLeft + (v - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double v) { return kTop + (ymax - v) / (ymax - ymin) * ph; };

    std::string out;
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" viewBox=\"0 0 800 500\">\n";
    out += "<rect x=\"0\" y=\"0\" width=\"800\" height=\"500\" fill=\"white\"/>\n";
    out += "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           escape(title) + "</text>\n";
    out += "<rect x=\"" + fixed(kLeft) + "\" y=\"" + fixed(kTop) + "\" width=\"" + fixed(pw) + "\" height=\"" +
           fixed(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        out += "<text x=\"" + fixed(px(xv)) + "\" y=\"" + fixed(kTop + ph + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(xv) + "</text>\n";
        out += "<text x=\"" + fixed(kLeft - 6) + "\" y=\"" + fixed(py(yv) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + tick_label(yv) + "</text>\n";
    }
    if (ymin < 0.0 && ymax > 0.0)
        out += "<line x1=\"" + fixed(kLeft) + "\" y1=\"" + fixed(py(0.0)) + "\" x2=\"" + fixed(kLeft + pw) +
               "\" y2=\"" + fixed(py(0.0)) + "\" stroke=\"#999999\" stroke-dasharray=\"4 4\"/>\n";
    out += "<text x=\"" + fixed(kLeft + pw / 2) + "\" y=\"" + fixed(kHeight - 15) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" + escape(x_label) + "</text>\n";
    out += "<text x=\"18\" y=\"" + fixed(kTop + ph / 2) + "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"13\" transform=\"rotate(-90 18 " + fixed(kTop + ph / 2) + ")\">" + escape(y_label) +
           "</text>\n";

    const std::size_t n = x.size();
    const std::size_t stride = n > 1000 ? (n + 999) / 1000 : 1;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const char* color = kColors[s % (sizeof kColors / sizeof kColors[0])];
        out += "<polyline fill=\"none\" stroke=\"";
        out += color;
        out += "\" stroke-width=\"1.5\" points=\"";
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < n; i += stride) idx.push_back(i);
        if (n > 0 && idx.back() != n - 1) idx.push_back(n - 1);
        bool first = true;
        for (std::size_t k : idx) {
            const double v = series[s].y[k];
            if (!std::isfinite(v)) continue;
            if (!first) out += ' ';
            out += fixed(px(x[k])) + "," + fixed(py(v));
            first = false;
        }
        out += "\"/>\n";
        const double ly = kTop + 16 + 16.0 * static_cast<double>(s);
        out += "<line x1=\"" + fixed(kLeft + 10) + "\" y1=\"" + fixed(ly - 4) + "\" x2=\"" + fixed(kLeft + 30) +
               "\" y2=\"" + fixed(ly - 4) + "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + fixed(kLeft + 36) + "\" y=\"" + fixed(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(series[s].label) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace gpc
