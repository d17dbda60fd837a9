#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bitemp/cashflow.hpp"
#include "bitemp/mpp.hpp"
#include "bitemp/temporal.hpp"
#include "bitemp/transaction_model.hpp"

namespace bitemp {

// Command-specific settings from the "run" section. Unset fields fall back
// to per-command defaults.
struct RunSettings {
    std::uint64_t seed = 1;
    std::size_t n_paths = 1000;
    std::optional<std::string> grid;
    double t = 0.0;
    std::optional<StateId> initial;
    std::string method = "statewise";
    std::optional<StateId> state;
    std::optional<std::string> observed;  // bi-temporal CSV, resolved against the config directory
    unsigned workers = 0;
    std::string conditioning = "accept_reject";
    std::string law = "conditional_independence";
    std::size_t max_attempts = 0;
    // Intensities replaced in the simulating model of "residuals".
    std::vector<std::pair<std::pair<StateId, StateId>, PiecewiseConstant>> truth;
};

struct RunConfig {
    std::string path;
    StateSpace states;
    IntensitySpec valid;
    std::optional<TransactionModelConfig> transaction;
    PaymentSpec payments;
    Accumulation kappa;
    RunSettings run;

    // Valid-time model with the run.truth overrides applied.
    IntensitySpec truth() const;
};

struct ConfigIssue {
    std::size_t line = 0;  // 0 when no line applies
    std::string pointer;   // JSON pointer of the offending value
    std::string message;
};

// "file:line: pointer: message"
std::string format_issue(const std::string& file, const ConfigIssue& issue);

struct ConfigLoad {
    std::optional<RunConfig> config;  // set only when issues is empty
    std::vector<ConfigIssue> issues;
};

ConfigLoad parse_config(const std::string& text, const std::string& path = "<config>");
// Throws std::runtime_error when the file cannot be read.
ConfigLoad load_config(const std::string& path);

}  // namespace bitemp
