#include "voco/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "voco/errors.hpp"

namespace voco {

namespace {

constexpr int kW = 640, kH = 400, kPad = 50;
const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};

std::ofstream open_svg(const std::string& path, const std::string& title) {
    std::ofstream os(path);
    if (!os) throw IoError("svg: cannot open " + path);
    os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kW << "' height='" << kH << "'>\n"
       << "<rect width='100%' height='100%' fill='white'/>\n"
       << "<text x='" << kW / 2 << "' y='24' text-anchor='middle' font-size='16' "
          "font-family='sans-serif'>" << title << "</text>\n";
    return os;
}

void axes(std::ofstream& os, double lo, double hi) {
    os << "<line x1='" << kPad << "' y1='" << kH - kPad << "' x2='" << kW - kPad
       << "' y2='" << kH - kPad << "' stroke='black'/>\n"
       << "<line x1='" << kPad << "' y1='" << kH - kPad << "' x2='" << kPad
       << "' y2='" << kPad << "' stroke='black'/>\n"
       << "<text x='8' y='" << kPad + 6 << "' font-size='11' font-family='sans-serif'>"
       << hi << "</text>\n"
       << "<text x='8' y='" << kH - kPad << "' font-size='11' font-family='sans-serif'>"
       << lo << "</text>\n";
}

} // namespace

void svg_line_chart(const std::string& path, const std::string& title,
                    const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    double lo = 0.0, hi = 1e-12;
    std::size_t maxn = 1;
    for (const auto& [name, v] : series)
        for (double x : v) { lo = std::min(lo, x); hi = std::max(hi, x); }
    for (const auto& [name, v] : series) maxn = std::max(maxn, v.size());
    if (hi <= lo) hi = lo + 1.0;

    auto os = open_svg(path, title);
    axes(os, lo, hi);
    int ci = 0;
    for (const auto& [name, v] : series) {
        const char* color = kColors[ci % 6];
        os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
        for (std::size_t i = 0; i < v.size(); ++i) {
            double px = kPad + (kW - 2.0 * kPad) * (maxn > 1 ? static_cast<double>(i) / (maxn - 1) : 0.5);
            double py = kH - kPad - (kH - 2.0 * kPad) * (v[i] - lo) / (hi - lo);
            os << px << "," << py << " ";
        }
        os << "'/>\n<text x='" << kW - kPad + 2 << "' y='" << kPad + 16 * (ci + 1)
           << "' font-size='11' fill='" << color << "' font-family='sans-serif'>" << name << "</text>\n";
        ++ci;
    }
    os << "</svg>\n";
}

void svg_bar_chart(const std::string& path, const std::string& title,
                   const std::vector<std::string>& labels, const std::vector<double>& values) {
    double hi = 1e-12;
    for (double v : values) hi = std::max(hi, v);
    auto os = open_svg(path, title);
    axes(os, 0.0, hi);
    const std::size_t n = values.size();
    const double bw = (kW - 2.0 * kPad) / std::max<std::size_t>(1, n);
    for (std::size_t i = 0; i < n; ++i) {
        double h = (kH - 2.0 * kPad) * values[i] / hi;
        os << "<rect x='" << kPad + i * bw + bw * 0.15 << "' y='" << kH - kPad - h
           << "' width='" << bw * 0.7 << "' height='" << h << "' fill='" << kColors[i % 6] << "'/>\n"
           << "<text x='" << kPad + i * bw + bw * 0.5 << "' y='" << kH - kPad + 14
           << "' text-anchor='middle' font-size='10' font-family='sans-serif'>"
           << (i < labels.size() ? labels[i] : "") << "</text>\n";
    }
    os << "</svg>\n";
}

void svg_histogram(const std::string& path, const std::string& title,
                   const std::vector<double>& values, int bins) {
    if (bins < 1) bins = 10;
    double lo = 0.0, hi = 1e-12;
    for (double v : values) { lo = std::min(lo, v); hi = std::max(hi, v); }
    if (hi <= lo) hi = lo + 1.0;
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    for (double v : values) {
        int b = std::min(bins - 1, static_cast<int>((v - lo) / (hi - lo) * bins));
        counts[static_cast<std::size_t>(std::max(0, b))] += 1.0;
    }
    std::vector<std::string> labels(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.2f", lo + (hi - lo) * (b + 0.5) / bins);
        labels[static_cast<std::size_t>(b)] = buf;
    }
    svg_bar_chart(path, title, labels, counts);
}

} // namespace voco
