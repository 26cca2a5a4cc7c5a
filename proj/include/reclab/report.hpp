#pragma once

// Run reports: per-cell quartile summaries, CSV tables and static SVG line
// charts. Everything here is deterministic text so reruns compare bytewise.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace reclab {

inline constexpr int kReportFormatVersion = 1;

struct Quartiles {
    double q25 = 0.0;
    double median = 0.0;
    double q75 = 0.0;
};

/// Linear-interpolation quantiles (R type 7). Throws on an empty sample.
Quartiles quartiles(std::vector<double> values);

struct Cell {
    double x = 0.0;
    std::size_t replicates = 0;
    Quartiles stats;
};

Cell make_cell(double x, const std::vector<double>& values);

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<Series> series;
};

struct RunReport {
    std::string command;
    nlohmann::json config = nlohmann::json::object();
    nlohmann::json seeds = nlohmann::json::object();
    std::vector<std::string> notes;
    std::string sweep_variable;
    std::string metric;
    std::vector<Cell> cells;
    nlohmann::json results = nlohmann::json::object();
    std::optional<double> wall_seconds;

    std::string csv;
    std::optional<Chart> chart;

    nlohmann::json to_json() const;
};

/// Static line chart with axes, ticks and a legend.
std::string render_svg(const Chart& chart);

/// Writes report.json, <command>.csv and, when a chart is attached,
/// <command>.svg into `dir` (created if needed).
void write_report(const RunReport& report, const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace reclab
