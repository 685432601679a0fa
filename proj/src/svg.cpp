// SPDX-License-Identifier: Apache-2.0
#include "spk/svg.hpp"

#include <algorithm>
#include <cstdio>
#include <map>

#include "spk/error.hpp"

namespace spk {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 64, kRight = 180, kTop = 24, kBottom = 56;
constexpr const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                   "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
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

std::string emit_svg_lines(std::span<const ResultRow> rows) {
    if (rows.empty()) throw ArgumentError("cannot plot an empty result set");

    // strategy -> ratio -> (sum acc1, count); std::map keeps the output order fixed.
    std::map<std::string, std::map<double, std::pair<double, std::size_t>>> series;
    for (const auto& r : rows) {
        auto& cell = series[r.strategy][r.keep_ratio];
        cell.first += r.acc1;
        cell.second += 1;
    }
    double xmin = rows.front().keep_ratio, xmax = xmin;
    for (const auto& r : rows) {
        xmin = std::min(xmin, r.keep_ratio);
        xmax = std::max(xmax, r.keep_ratio);
    }
    if (xmax - xmin < 1e-9) {
        xmin -= 0.1;
        xmax += 0.1;
    }
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return kTop + (1.0 - y) * ph; };

    std::string s;
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kWidth) + "\" height=\"" + num(kHeight) +
         "\" viewBox=\"0 0 " + num(kWidth) + " " + num(kHeight) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s += "<g stroke=\"black\" stroke-width=\"1\">\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(0)) + "\" x2=\"" + num(kLeft + pw) + "\" y2=\"" +
         num(py(0)) + "\"/>\n";
    s += "<line x1=\"" + num(kLeft) + "\" y1=\"" + num(py(0)) + "\" x2=\"" + num(kLeft) + "\" y2=\"" + num(py(1)) +
         "\"/>\n";
    s += "</g>\n";
    for (int i = 0; i <= 5; ++i) {
        const double y = i / 5.0;
        s += "<text x=\"" + num(kLeft - 8) + "\" y=\"" + num(py(y) + 4) + "\" text-anchor=\"end\">" + num(y) +
             "</text>\n";
        const double x = xmin + (xmax - xmin) * i / 5.0;
        s += "<text x=\"" + num(px(x)) + "\" y=\"" + num(py(0) + 18) + "\" text-anchor=\"middle\">" + num(x) +
             "</text>\n";
    }
    s += "<text x=\"" + num(kLeft + pw / 2) + "\" y=\"" + num(kHeight - 12) +
         "\" text-anchor=\"middle\">keep ratio</text>\n";
    s += "<text x=\"16\" y=\"" + num(kTop + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
         num(kTop + ph / 2) + ")\">top-1 accuracy</text>\n";

    std::size_t k = 0;
    for (const auto& [name, points] : series) {
        const char* color = kColors[k % std::size(kColors)];
        std::string pts;
        for (const auto& [x, acc] : points) {
            if (!pts.empty()) pts += ' ';
            pts += num(px(x)) + "," + num(py(acc.first / static_cast<double>(acc.second)));
        }
        s += "<g class=\"series\" data-strategy=\"" + escape(name) + "\">\n";
        s += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"" + pts +
             "\"/>\n";
        for (const auto& [x, acc] : points) {
            s += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(acc.first / static_cast<double>(acc.second))) +
                 "\" r=\"3\" fill=\"" + color + "\"/>\n";
        }
        s += "</g>\n";
        const double ly = kTop + 10 + 18.0 * static_cast<double>(k);
        const double lx = kLeft + pw + 16;
        s += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly) + "\" x2=\"" + num(lx + 20) + "\" y2=\"" + num(ly) +
             "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
        s += "<text x=\"" + num(lx + 26) + "\" y=\"" + num(ly + 4) + "\">" + escape(name) + "</text>\n";
        ++k;
    }
    s += "</svg>\n";
    return s;
}

}  // namespace spk
