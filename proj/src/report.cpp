#include "reclab/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>

#include "reclab/errors.hpp"
#include "reclab/noisy_choice.hpp"

namespace reclab {

namespace {

double quantile_sorted(const std::vector<double>& v, double p) {
    const double h = (static_cast<double>(v.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    const double frac = h - static_cast<double>(lo);
    const double q = v[lo] + frac * (v[hi] - v[lo]);
    return std::clamp(q, v[lo], v[hi]);
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};

} // namespace

Quartiles quartiles(std::vector<double> values) {
    if (values.empty()) {
        throw ConfigError("quartiles of an empty sample");
    }
    std::sort(values.begin(), values.end());
    Quartiles q{quantile_sorted(values, 0.25), quantile_sorted(values, 0.5),
                quantile_sorted(values, 0.75)};
    q.median = std::max(q.median, q.q25);
    q.q75 = std::max(q.q75, q.median);
    return q;
}

Cell make_cell(double x, const std::vector<double>& values) {
    return Cell{x, values.size(), quartiles(values)};
}

nlohmann::json RunReport::to_json() const {
    nlohmann::json cells_json = nlohmann::json::array();
    for (const auto& c : cells) {
        cells_json.push_back({{"x", c.x},
                              {"replicates", c.replicates},
                              {"q25", c.stats.q25},
                              {"median", c.stats.median},
                              {"q75", c.stats.q75}});
    }
    nlohmann::json j{{"format_version", kReportFormatVersion},
                     {"command", command},
                     {"config", config},
                     {"seeds", seeds},
                     {"notes", notes},
                     {"sweep_variable", sweep_variable},
                     {"metric", metric},
                     {"cells", cells_json},
                     {"results", results}};
    if (wall_seconds) {
        j["wall_seconds"] = *wall_seconds;
    }
    return j;
}

std::string render_svg(const Chart& chart) {
    constexpr double W = 640, H = 400, L = 70, R = 160, T = 40, B = 50;
    double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
    auto ty = [&](double y) { return chart.log_y ? std::log10(std::max(y, 1e-300)) : y; };
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (chart.log_y && s.y[i] <= 0)) {
                continue;
            }
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, ty(s.y[i]));
            ymax = std::max(ymax, ty(s.y[i]));
        }
    }
    if (!(xmin <= xmax)) {
        xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    }
    if (xmax == xmin) {
        xmax = xmin + 1;
    }
    if (ymax == ymin) {
        ymax = ymin + 1;
    }
    const double pw = W - L - R, ph = H - T - B;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return T + ph - (ty(y) - ymin) / (ymax - ymin) * ph; };

    std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" "
                      "font-family=\"sans-serif\" font-size=\"11\">\n";
    out += "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
    out += "<text x=\"" + fmt(W / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" +
           xml_escape(chart.title) + "</text>\n";
    out += "<line x1=\"" + fmt(L) + "\" y1=\"" + fmt(T + ph) + "\" x2=\"" + fmt(L + pw) +
           "\" y2=\"" + fmt(T + ph) + "\" stroke=\"black\"/>\n";
    out += "<line x1=\"" + fmt(L) + "\" y1=\"" + fmt(T) + "\" x2=\"" + fmt(L) + "\" y2=\"" +
           fmt(T + ph) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double fx = xmin + (xmax - xmin) * t / 4.0;
        const double fy = ymin + (ymax - ymin) * t / 4.0;
        const double xpos = L + pw * t / 4.0;
        const double ypos = T + ph - ph * t / 4.0;
        out += "<text x=\"" + fmt(xpos) + "\" y=\"" + fmt(T + ph + 16) +
               "\" text-anchor=\"middle\">" + fmt(fx, "%.4g") + "</text>\n";
        out += "<text x=\"" + fmt(L - 6) + "\" y=\"" + fmt(ypos + 4) + "\" text-anchor=\"end\">" +
               (chart.log_y ? "1e" + fmt(fy, "%.2g") : fmt(fy, "%.4g")) + "</text>\n";
    }
    out += "<text x=\"" + fmt(L + pw / 2) + "\" y=\"" + fmt(H - 12) +
           "\" text-anchor=\"middle\">" + xml_escape(chart.x_label) + "</text>\n";
    out += "<text x=\"16\" y=\"" + fmt(T + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " +
           fmt(T + ph / 2) + ")\">" + xml_escape(chart.y_label) + "</text>\n";
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* colour = kPalette[k % std::size(kPalette)];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i]) || (chart.log_y && s.y[i] <= 0)) {
                continue;
            }
            if (!pts.empty()) {
                pts += ' ';
            }
            pts += fmt(px(s.x[i]), "%.2f") + "," + fmt(py(s.y[i]), "%.2f");
        }
        out += "<polyline fill=\"none\" stroke=\"" + std::string(colour) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        const double ly = T + 14.0 * static_cast<double>(k);
        out += "<line x1=\"" + fmt(W - R + 10) + "\" y1=\"" + fmt(ly) + "\" x2=\"" +
               fmt(W - R + 30) + "\" y2=\"" + fmt(ly) + "\" stroke=\"" + colour +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"" + fmt(W - R + 35) + "\" y=\"" + fmt(ly + 4) + "\">" +
               xml_escape(s.name) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ConfigError("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw ConfigError("failed writing " + path.string());
    }
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
    }
    write_text(dir / "report.json", report.to_json().dump(2) + "\n");
    if (!report.csv.empty()) {
        write_text(dir / (report.command + ".csv"), report.csv);
    }
    if (report.chart) {
        write_text(dir / (report.command + ".svg"), render_svg(*report.chart));
    }
}

} // namespace reclab
