// Copyright 2026 The TAL Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "tal/harness/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tal/common.hpp"
#include "tal/models/network.hpp"

namespace tal {

namespace {

constexpr double kWidth = 900.0;
constexpr double kHeight = 540.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 20.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 60.0;

std::string escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string color(std::size_t i, std::size_t n) {
    char buf[48];
    const double hue = 360.0 * static_cast<double>(i) / static_cast<double>(std::max<std::size_t>(n, 1));
    std::snprintf(buf, sizeof buf, "hsl(%.0f,65%%,45%%)", hue);
    return buf;
}

double nice_step(double span) {
    const double raw = span / 6.0;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double m : {1.0, 2.0, 5.0, 10.0}) {
        if (raw <= m * mag) return m * mag;
    }
    return 10.0 * mag;
}

}  // namespace

std::string render_line_plot(const std::string& title, const std::vector<PlotSeries>& series,
                             const std::vector<PlotPoint>& points) {
    double x_max = 1.0;
    double y_lo = INFINITY;
    double y_hi = -INFINITY;
    for (const auto& s : series) {
        x_max = std::max(x_max, static_cast<double>(s.values.size()) - 1.0);
        for (double v : s.values) {
            y_lo = std::min(y_lo, v);
            y_hi = std::max(y_hi, v);
        }
    }
    for (const auto& p : points) {
        x_max = std::max(x_max, p.x);
        y_lo = std::min(y_lo, p.y);
        y_hi = std::max(y_hi, p.y);
    }
    if (!std::isfinite(y_lo)) {
        y_lo = 0.0;
        y_hi = 1.0;
    }
    if (y_hi - y_lo < 1e-9) {
        y_lo -= 1.0;
        y_hi += 1.0;
    }
    const double y_step = nice_step(y_hi - y_lo);
    y_lo = std::floor(y_lo / y_step) * y_step;
    y_hi = std::ceil(y_hi / y_step) * y_step;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + plot_w * x / x_max; };
    auto py = [&](double y) { return kTop + plot_h * (y_hi - y) / (y_hi - y_lo); };

    std::ostringstream svg;
    svg.setf(std::ios::fixed);
    svg.precision(2);
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
        << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
        << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
        << "</text>\n";

    svg << "<g stroke=\"#ddd\" stroke-width=\"1\">\n";
    for (double y = y_lo; y <= y_hi + 1e-9; y += y_step) {
        svg << "<line x1=\"" << kLeft << "\" y1=\"" << py(y) << "\" x2=\"" << kLeft + plot_w << "\" y2=\"" << py(y)
            << "\"/>\n";
    }
    svg << "</g>\n<g fill=\"#333\">\n";
    for (double y = y_lo; y <= y_hi + 1e-9; y += y_step) {
        svg << "<text x=\"" << kLeft - 8 << "\" y=\"" << py(y) + 4 << "\" text-anchor=\"end\">" << std::round(y * 10) / 10
            << "</text>\n";
    }
    const double x_step = nice_step(x_max);
    for (double x = 0.0; x <= x_max + 1e-9; x += x_step) {
        svg << "<text x=\"" << px(x) << "\" y=\"" << kTop + plot_h + 18 << "\" text-anchor=\"middle\">" << x
            << "</text>\n";
    }
    svg << "</g>\n"
        << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\"" << plot_h
        << "\" fill=\"none\" stroke=\"#333\"/>\n"
        << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 15
        << "\" text-anchor=\"middle\">day of season</text>\n"
        << "<text x=\"18\" y=\"" << kTop + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
        << kTop + plot_h / 2 << ")\">LTE50 (&#176;C)</text>\n";

    svg << "<g fill=\"none\" stroke-width=\"1.2\" stroke-opacity=\"0.8\">\n";
    for (std::size_t i = 0; i < series.size(); ++i) {
        svg << "<polyline stroke=\"" << color(i, series.size()) << "\" points=\"";
        for (std::size_t d = 0; d < series[i].values.size(); ++d) {
            svg << (d ? " " : "") << px(static_cast<double>(d)) << ',' << py(series[i].values[d]);
        }
        svg << "\"><title>" << escape(series[i].label) << "</title></polyline>\n";
    }
    svg << "</g>\n<g fill=\"black\">\n";
    for (const auto& p : points) {
        svg << "<circle cx=\"" << px(p.x) << "\" cy=\"" << py(p.y) << "\" r=\"3.5\"/>\n";
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

std::vector<PlotPoint> lte50_samples(const SeasonSeries& season) {
    std::vector<PlotPoint> points;
    for (std::size_t d = 0; d < season.length(); ++d) {
        if (season.days[d].lte) points.push_back({static_cast<double>(d), season.days[d].lte->lte50});
    }
    return points;
}

std::vector<std::string> emit_plots(const ModelParams& model, const std::vector<std::pair<std::string, TaskSet>>& sets,
                                    const SeasonSeries& season, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("emit_plots: cannot create '" + out_dir + "': " + ec.message());
    const SeasonSeries* one[] = {&season};
    const auto points = lte50_samples(season);
    std::vector<std::string> written;
    for (const auto& [name, set] : sets) {
        std::vector<PlotSeries> curves;
        for (const auto& entry : set.entries) {
            const Tensor out = predict(model, entry.handle, one)[0];
            PlotSeries s{entry.label, {}};
            for (std::size_t d = 0; d < out.rows(); ++d) s.values.push_back(out(d, 1));
            curves.push_back(std::move(s));
        }
        const std::string title = name + " entries, " + season.task_id + " season " + season.season_label;
        const std::string path = (std::filesystem::path(out_dir) / (name + ".svg")).string();
        std::ofstream file(path, std::ios::binary);
        if (!file) throw Error("emit_plots: cannot open '" + path + "' for writing");
        file << render_line_plot(title, curves, points);
        if (!file) throw Error("emit_plots: write to '" + path + "' failed");
        written.push_back(path);
    }
    return written;
}

}  // namespace tal
