#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "bitemp/cli.hpp"

namespace {

const std::map<std::string, std::string> kDescriptions{
    {"simulate", "simulate valid-time histories and, with a transaction model, timelines"},
    {"export-bitemporal", "write bi-temporal record tables"},
    {"import-bitemporal", "read the observed record table and list its revisions"},
    {"value", "present values and their decomposition per path"},
    {"reserve", "reserve at run.t"},
    {"validate", "check record tables or simulated timelines against the structure assumptions"},
    {"residuals", "martingale residual back-test"},
    {"check-config", "validate the configuration only"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Bi-temporal multi-state valuation"};
    app.require_subcommand(1, 1);
    bitemp::CliOptions opt;
    for (const auto& name : bitemp::cli_commands()) {
        auto* sub = app.add_subcommand(name, kDescriptions.at(name));
        sub->add_option("--config", opt.config, "JSON run configuration")->required();
        if (name == "check-config") continue;
        sub->add_option("--out", opt.out, "output directory");
        sub->add_option("--seed", opt.seed, "seed override");
        sub->add_option("--paths", opt.paths, "number of paths");
        sub->add_option("--grid", opt.grid, "time grid t0:t1:n");
        sub->add_option("--workers", opt.workers, "worker threads (0: all cores)");
        sub->add_option("--method", opt.method, "reserve method: statewise, rbns or monte-carlo");
        sub->add_option("--t", opt.t, "evaluation time");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }
    return bitemp::run_command(app.get_subcommands().front()->get_name(), opt, std::cout, std::cerr);
}
