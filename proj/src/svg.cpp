#include "stagechain/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "stagechain/error.hpp"

namespace stagechain::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
constexpr int kPaletteSize = 6;

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char ch : s) {
        switch (ch) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            case '\'': out += "&apos;"; break;
            default: out += ch;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Axis {
    double lo, hi;       // data range after padding
    double tick_step;
    double tick_start;
};

Axis make_axis(double lo, double hi) {
    if (hi <= lo) {
        const double pad = std::max(1e-9, std::fabs(lo) * 1e-3 + 1e-9);
        lo -= pad;
        hi += pad;
    } else {
        const double pad = 0.05 * (hi - lo);
        lo -= pad;
        hi += pad;
    }
    const double span = hi - lo;
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    double step = 10.0 * mag;
    if (frac <= 1.0) step = mag;
    else if (frac <= 2.0) step = 2.0 * mag;
    else if (frac <= 5.0) step = 5.0 * mag;
    const double start = std::ceil(lo / step) * step;
    return {lo, hi, step, start};
}

} // namespace

std::string render(const Chart& chart) {
    double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo;
    double ylo = xlo, yhi = -xlo;
    for (const auto& s : chart.series) {
        const std::size_t n = std::min(s.x.size(), s.y.size());
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xlo = std::min(xlo, s.x[i]);
            xhi = std::max(xhi, s.x[i]);
            ylo = std::min(ylo, s.y[i]);
            yhi = std::max(yhi, s.y[i]);
        }
    }
    if (!std::isfinite(xlo) || !std::isfinite(ylo))
        throw Error("svg.EmptyChart", "no finite data points to plot");

    const Axis ax = make_axis(xlo, xhi);
    const Axis ay = make_axis(ylo, yhi);
    const double ml = 70, mr = 20, mt = 42, mb = 52;
    const double W = chart.width, H = chart.height;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto px = [&](double x) { return ml + (x - ax.lo) / (ax.hi - ax.lo) * pw; };
    auto py = [&](double y) { return mt + ph - (y - ay.lo) / (ay.hi - ay.lo) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << W << ' '
       << H << "\" width=\"" << W << "\" height=\"" << H << "\">\n"
       << "<rect width=\"" << W << "\" height=\"" << H
       << "\" fill=\"white\"/>\n";
    if (!chart.title.empty())
        os << "<text x=\"" << W / 2
           << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" "
              "font-size=\"16\">"
           << escape(chart.title) << "</text>\n";

    // Grid and ticks.
    os << "<g font-family=\"sans-serif\" font-size=\"11\" fill=\"#333\">\n";
    for (double t = ax.tick_start; t <= ax.hi + 1e-12 * std::fabs(ax.tick_step);
         t += ax.tick_step) {
        const double x = px(t);
        os << "<line x1=\"" << num(x) << "\" y1=\"" << mt << "\" x2=\"" << num(x)
           << "\" y2=\"" << mt + ph << "\" stroke=\"#ddd\"/>\n"
           << "<text x=\"" << num(x) << "\" y=\"" << mt + ph + 16
           << "\" text-anchor=\"middle\">" << num(t) << "</text>\n";
    }
    for (double t = ay.tick_start; t <= ay.hi + 1e-12 * std::fabs(ay.tick_step);
         t += ay.tick_step) {
        const double y = py(t);
        os << "<line x1=\"" << ml << "\" y1=\"" << num(y) << "\" x2=\"" << ml + pw
           << "\" y2=\"" << num(y) << "\" stroke=\"#ddd\"/>\n"
           << "<text x=\"" << ml - 6 << "\" y=\"" << num(y + 4)
           << "\" text-anchor=\"end\">" << num(t) << "</text>\n";
    }
    os << "</g>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw
       << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"#333\"/>\n";
    if (!chart.x_label.empty())
        os << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 12
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
              "font-size=\"13\">"
           << escape(chart.x_label) << "</text>\n";
    if (!chart.y_label.empty())
        os << "<text x=\"16\" y=\"" << mt + ph / 2
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
              "font-size=\"13\" transform=\"rotate(-90 16 "
           << mt + ph / 2 << ")\">" << escape(chart.y_label) << "</text>\n";

    // Series.
    for (std::size_t si = 0; si < chart.series.size(); ++si) {
        const auto& s = chart.series[si];
        const char* color = kPalette[si % kPaletteSize];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.points) {
            os << "<g fill=\"" << color << "\">\n";
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                os << "<circle cx=\"" << num(px(s.x[i])) << "\" cy=\""
                   << num(py(s.y[i])) << "\" r=\"2\"/>\n";
            }
            os << "</g>\n";
        } else {
            bool open = false;
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
                    if (open) {
                        os << "\"/>\n";
                        open = false;
                    }
                    continue;
                }
                if (!open) {
                    os << "<polyline fill=\"none\" stroke=\"" << color
                       << "\" stroke-width=\"1.5\" points=\"";
                    open = true;
                }
                os << num(px(s.x[i])) << ',' << num(py(s.y[i])) << ' ';
            }
            if (open) os << "\"/>\n";
        }
    }

    // Legend when more than one labeled series.
    std::size_t labeled = 0;
    for (const auto& s : chart.series)
        if (!s.label.empty()) ++labeled;
    if (labeled > 1) {
        double ly = mt + 14;
        os << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
        for (std::size_t si = 0; si < chart.series.size(); ++si) {
            const auto& s = chart.series[si];
            if (s.label.empty()) continue;
            const char* color = kPalette[si % kPaletteSize];
            os << "<line x1=\"" << ml + pw - 110 << "\" y1=\"" << num(ly - 4)
               << "\" x2=\"" << ml + pw - 90 << "\" y2=\"" << num(ly - 4)
               << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
               << "<text x=\"" << ml + pw - 84 << "\" y=\"" << num(ly) << "\">"
               << escape(s.label) << "</text>\n";
            ly += 16;
        }
        os << "</g>\n";
    }

    os << "</svg>\n";
    return os.str();
}

void write_chart(std::ostream& os, const Chart& chart) { os << render(chart); }

} // namespace stagechain::svg
