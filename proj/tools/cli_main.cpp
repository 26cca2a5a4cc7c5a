#include "cli_main.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "reclab/config.hpp"
#include "reclab/errors.hpp"
#include "reclab/experiments.hpp"
#include "reclab/parallel.hpp"

namespace reclab {

namespace {

using Runner = std::function<RunReport(const nlohmann::json&, const Overrides&)>;

const std::map<std::string, Runner>& runners() {
    static const std::map<std::string, Runner> table{
        {"fit", run_fit},
        {"consistency", run_consistency},
        {"recovery", run_recovery},
        {"theorem2", run_theorem2_demo},
        {"ce-continuity", run_ce_continuity},
        {"nonid", run_nonidentification_demo},
        {"separation", run_separation},
        {"vc", run_vc},
        {"uniqueness", run_dense_uniqueness_check},
        {"bound", run_bound},
    };
    return table;
}

std::string usage() {
    std::string s = "usage: reclab <command> --config FILE [--out DIR] [--seed N] "
                    "[--replicates N] [--threads N] [--timing]\ncommands:";
    for (const auto& c : command_names()) {
        s += " " + c;
    }
    return s + "\n";
}

} // namespace

int cli_main(int argc, char** argv, std::ostream& out, std::ostream& err) {
    if (argc < 2) {
        err << usage();
        return 2;
    }
    const std::string command = argv[1];
    if (command == "-h" || command == "--help") {
        out << usage();
        return 0;
    }
    const auto& names = command_names();
    if (std::find(names.begin(), names.end(), command) == names.end()) {
        err << "unknown command \"" << command << "\"\n" << usage();
        return 2;
    }

    CLI::App app("reclab " + command);
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> replicates;
    std::size_t threads = 0;
    bool timing = false;
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "base seed override");
    app.add_option("--replicates", replicates, "replicate count override");
    app.add_option("--threads", threads, "worker threads (default 1)");
    app.add_flag("--timing", timing, "record wall time in report.json");
    try {
        app.parse(argc - 1, argv + 1);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n" << usage();
        return 2;
    }

    try {
        if (threads > 0) {
            set_thread_count(threads);
        }
        const nlohmann::json cfg = load_config(config_path);
        const Overrides ov{seed, replicates};
        const auto start = std::chrono::steady_clock::now();
        RunReport report;
        std::string dataset;
        if (command == "gen") {
            report = run_gen(cfg, ov, &dataset);
        } else {
            report = runners().at(command)(cfg, ov);
        }
        if (timing) {
            report.wall_seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
        write_report(report, out_dir);
        if (command == "gen") {
            write_text(std::filesystem::path(out_dir) / "dataset.jsonl", dataset);
        }
        out << "wrote " << out_dir << "/report.json\n";
        return 0;
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ShapeError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const DomainViolation& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NumericalGuardError& e) {
        err << "numerical guard: " << e.what() << "\n";
        return 3;
    }
}

} // namespace reclab
