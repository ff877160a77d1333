#include "frontal/parallel.hpp"
#include "frontal/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Singular points, total absolute curvature and height-function counts of frontals"};
    app.set_version_flag("--version", frontal::kToolVersion);

    std::string command;
    std::string scene;
    std::string output;
    std::vector<std::string> params;
    frontal::RunOptions opt;

    app.add_option("command", command, "singular | tau | morse | verify | all | catalog")
        ->required()
        ->check(CLI::IsMember({"singular", "tau", "morse", "verify", "all", "catalog"}));
    app.add_option("scene", scene, "scene file or catalog name (all: omit to run the whole catalog)");
    app.add_option("--tol", opt.tol, "absolute tolerance on the normalized curvature parts")
        ->check(CLI::PositiveNumber);
    app.add_option("--grid", opt.grid, "tracing cells per axis")->check(CLI::Range(8, 4096));
    app.add_option("--samples", opt.samples, "Monte Carlo directions")->check(CLI::Range(1, 10000000));
    app.add_option("--seed", opt.seed, "Monte Carlo seed");
    app.add_option("--threads", opt.threads, "worker threads, 0 for all cores")->check(CLI::NonNegativeNumber);
    app.add_flag("--allow-second-kind", opt.allow_second_kind, "integrate across second-kind points");
    app.add_option("--emit-csv", opt.emit_csv, "directory for CSV plot data");
    app.add_option("--param", params, "scene parameter override name=value")->take_all();
    app.add_option("-o,--output", output, "write the report to this file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : frontal::kExitInput;
    }

    for (const auto& p : params) {
        const auto eq = p.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::cerr << "--param expects name=value, got '" << p << "'\n";
            return frontal::kExitInput;
        }
        try {
            std::size_t used = 0;
            const std::string value = p.substr(eq + 1);
            opt.parameters[p.substr(0, eq)] = std::stod(value, &used);
            if (used != value.size())
                throw std::invalid_argument(value);
        } catch (const std::exception&) {
            std::cerr << "--param value is not a number: '" << p << "'\n";
            return frontal::kExitInput;
        }
    }
    frontal::set_thread_count(opt.threads);

    frontal::RunOutcome outcome;
    if (command == "catalog")
        outcome.report = frontal::catalog_listing();
    else if (scene.empty() && command == "all")
        outcome = frontal::run_catalog(command, opt);
    else if (scene.empty()) {
        std::cerr << "a scene file or catalog name is required\n";
        return frontal::kExitInput;
    } else
        outcome = frontal::run(command, scene, opt);

    const std::string text = frontal::format_json(outcome.report);
    if (output.empty()) {
        std::cout << text;
    } else {
        std::ofstream out(output, std::ios::binary);
        if (!out) {
            std::cerr << "cannot write '" << output << "'\n";
            return frontal::kExitInput;
        }
        out << text;
    }
    if (outcome.report.is_object() && outcome.report.contains("error"))
        std::cerr << outcome.report["error"]["message"].get<std::string>() << "\n";
    return outcome.exit_code;
}
