#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace bitemp {

struct CliOptions {
    std::string config;
    std::string out = ".";
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<std::string> grid;
    std::optional<unsigned> workers;
    std::optional<std::string> method;
    std::optional<double> t;
};

const std::vector<std::string>& cli_commands();

// Runs one command. Returns 0 on success, 1 on config validation failure
// and 2 on runtime errors. Messages go to `log` and `err`.
int run_command(const std::string& command, const CliOptions& opt, std::ostream& log, std::ostream& err);

}  // namespace bitemp
