#include "bitemp/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "bitemp/bitemporal.hpp"
#include "bitemp/cashflow.hpp"
#include "bitemp/config.hpp"
#include "bitemp/dynamics.hpp"
#include "bitemp/valuation.hpp"
#include "csv.hpp"

namespace bitemp {

namespace fs = std::filesystem;

const std::vector<std::string>& cli_commands() {
    static const std::vector<std::string> c{"simulate", "export-bitemporal", "import-bitemporal", "value",
                                            "reserve",  "validate",          "residuals",         "check-config"};
    return c;
}

namespace {

// Failures the user fixes in the config file, reported with exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::ofstream open_out(const CliOptions& opt, const std::string& name, std::ostream& log) {
    fs::create_directories(opt.out);
    fs::path p = fs::path(opt.out) / name;
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    log << "wrote " << p.string() << '\n';
    return f;
}

const TransactionModelConfig& need_transaction(const RunConfig& cfg) {
    if (!cfg.transaction) throw ConfigError(cfg.path + ": model.transaction is required for this command");
    return *cfg.transaction;
}

StateId initial_state(const RunConfig& cfg) { return cfg.run.initial.value_or(0); }

std::string history_text(const MppHistory& h, const StateSpace& space) {
    std::string s = space.name(h.initial);
    for (const auto& e : h.events) s += ';' + space.name(e.state) + '@' + format_time(e.time);
    return s;
}

// Record tables come either bare (one timeline) or with a leading path
// column (several timelines).
std::vector<std::pair<std::size_t, std::vector<BitemporalRecord>>> read_tables(const std::string& file,
                                                                              StateSpace& space) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + file);
    std::string header;
    std::getline(in, header);
    if (!header.empty() && header.back() == '\r') header.pop_back();
    std::vector<std::pair<std::size_t, std::vector<BitemporalRecord>>> out;
    if (header.rfind("path,", 0) != 0) {
        in.seekg(0);
        out.push_back({0, read_records_csv(in, space)});
        return out;
    }
    const std::string bare = header.substr(5);
    std::map<std::size_t, std::string> bodies;
    std::string line;
    std::size_t n = 1;
    while (std::getline(in, line)) {
        ++n;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::runtime_error(file + ":" + std::to_string(n) + ": missing fields");
        std::size_t path = 0;
        try {
            path = std::stoul(line.substr(0, comma));
        } catch (const std::exception&) {
            throw std::runtime_error(file + ":" + std::to_string(n) + ": bad path id");
        }
        bodies[path] += line.substr(comma + 1) + '\n';
    }
    for (auto& [path, body] : bodies) {
        std::istringstream ss(bare + '\n' + body);
        out.push_back({path, read_records_csv(ss, space)});
    }
    return out;
}

void write_tables(std::ostream& out, const std::vector<std::pair<std::size_t, std::vector<BitemporalRecord>>>& tables,
                  const StateSpace& space, bool with_path) {
    if (!with_path) {
        write_records_csv(out, tables.front().second, space);
        return;
    }
    bool first = true;
    for (const auto& [path, rows] : tables) {
        std::ostringstream ss;
        write_records_csv(ss, rows, space);
        std::istringstream lines(ss.str());
        std::string line;
        std::getline(lines, line);
        if (first) out << "path," << line << '\n';
        first = false;
        while (std::getline(lines, line)) out << path << ',' << line << '\n';
    }
}

// Timelines named by run.observed, or simulated ones when absent.
std::vector<std::pair<std::size_t, TransactionTimeline>> timelines(const RunConfig& cfg, std::uint64_t seed,
                                                                   std::size_t n) {
    std::vector<std::pair<std::size_t, TransactionTimeline>> out;
    if (cfg.run.observed) {
        StateSpace space = cfg.states;
        auto tables = read_tables(*cfg.run.observed, space);
        if (space.size() != cfg.states.size())
            throw ConfigError(*cfg.run.observed + ": record table uses states not declared in the model");
        for (auto& [path, rows] : tables) out.push_back({path, import_records(rows)});
        return out;
    }
    const auto& tm = need_transaction(cfg);
    for (std::size_t i = 0; i < n; ++i) out.push_back({i, simulate_timeline(tm, seed, i)});
    return out;
}

TimeGrid grid_or(const CliOptions& opt, const RunConfig& cfg, const TimeGrid& fallback) {
    if (opt.grid) return TimeGrid::parse(*opt.grid);
    if (cfg.run.grid) return TimeGrid::parse(*cfg.run.grid);
    return fallback;
}

void write_report(std::ostream& out, const ValidationReport& report) {
    out << "assumption,message,times\n";
    for (const auto& v : report) {
        std::string times;
        for (double t : v.times) times += (times.empty() ? "" : ";") + format_time(t);
        out << v.assumption << ',' << v.message << ',' << times << '\n';
    }
}

int cmd_simulate(const RunConfig& cfg, const CliOptions& opt, std::uint64_t seed, std::size_t n, std::ostream& log) {
    std::vector<MppHistory> paths;
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng(seed, Purpose::valid_path, i);
        paths.push_back(simulate_path(cfg.valid, initial_state(cfg), cfg.payments.horizon(), rng));
    }
    auto f = open_out(opt, "histories.csv", log);
    write_history_csv(f, paths, cfg.states);
    if (cfg.transaction) {
        std::vector<std::pair<std::size_t, std::vector<BitemporalRecord>>> tables;
        for (std::size_t i = 0; i < n; ++i) tables.push_back({i, export_records(simulate_timeline(*cfg.transaction, seed, i))});
        auto g = open_out(opt, "timelines.csv", log);
        write_tables(g, tables, cfg.states, true);
    }
    return 0;
}

int cmd_export(const RunConfig& cfg, const CliOptions& opt, std::uint64_t seed, std::size_t n, std::ostream& log) {
    std::vector<std::pair<std::size_t, std::vector<BitemporalRecord>>> tables;
    for (const auto& [path, tl] : timelines(cfg, seed, n)) tables.push_back({path, export_records(tl)});
    auto f = open_out(opt, "records.csv", log);
    write_tables(f, tables, cfg.states, !cfg.run.observed);
    return 0;
}

int cmd_import(const RunConfig& cfg, const CliOptions& opt, std::ostream& log) {
    if (!cfg.run.observed) throw ConfigError(cfg.path + ": run.observed names the record table to import");
    StateSpace space = cfg.states;
    auto tables = read_tables(*cfg.run.observed, space);
    auto f = open_out(opt, "revisions.csv", log);
    f << "path,time,z_state,history\n";
    std::vector<std::pair<std::size_t, std::vector<BitemporalRecord>>> again;
    for (const auto& [path, rows] : tables) {
        TransactionTimeline tl = import_records(rows);
        f << path << ",0," << space.name(tl.initial_z()) << ',' << history_text(tl.initial_history(), space) << '\n';
        for (const auto& r : tl.revisions())
            f << path << ',' << format_time(r.time) << ',' << space.name(r.z_state) << ','
              << history_text(r.history, space) << '\n';
        again.push_back({path, export_records(tl)});
    }
    std::ifstream probe(*cfg.run.observed);
    std::string header;
    std::getline(probe, header);
    auto g = open_out(opt, "records.csv", log);
    write_tables(g, again, space, header.rfind("path,", 0) == 0);
    return 0;
}

int cmd_validate(const RunConfig& cfg, const CliOptions& opt, std::uint64_t seed, std::size_t n, std::ostream& log) {
    ValidationReport all;
    if (cfg.run.observed) {
        StateSpace space = cfg.states;
        for (const auto& [path, rows] : read_tables(*cfg.run.observed, space)) {
            (void)path;
            auto rep = validate_records(rows);
            all.insert(all.end(), rep.begin(), rep.end());
        }
    } else {
        for (const auto& [path, tl] : timelines(cfg, seed, n)) {
            (void)path;
            auto rep = validate_assumptions(tl);
            all.insert(all.end(), rep.begin(), rep.end());
        }
    }
    auto f = open_out(opt, "violations.csv", log);
    write_report(f, all);
    log << all.size() << " violation(s)\n";
    return 0;
}

int cmd_value(const RunConfig& cfg, const CliOptions& opt, std::uint64_t seed, std::size_t n, std::ostream& log) {
    TimeGrid grid = grid_or(opt, cfg, TimeGrid({opt.t.value_or(cfg.run.t)}));
    auto f = open_out(opt, "value.csv", log);
    f << "path,t,pv_valid,pv_transaction,correction,correction_telescoped\n";
    for (const auto& [path, tl] : timelines(cfg, seed, n)) {
        for (double t : grid) {
            auto r = decompose_present_value(tl, cfg.payments, cfg.kappa, t);
            f << path << ',' << format_time(t) << ',' << format_time(r.pv_valid) << ','
              << format_time(r.pv_transaction) << ',' << format_time(r.correction) << ','
              << format_time(r.correction_telescoped) << '\n';
        }
    }
    return 0;
}

int cmd_reserve(const RunConfig& cfg, const CliOptions& opt, std::uint64_t seed, std::size_t n, unsigned workers,
                std::ostream& log) {
    const std::string method = opt.method.value_or(cfg.run.method);
    TimeGrid grid = grid_or(opt, cfg, TimeGrid({opt.t.value_or(cfg.run.t)}));
    const StateId j = cfg.run.state.value_or(initial_state(cfg));
    // Buffered so that a failing method leaves no partial file behind.
    std::ostringstream rows, lines;
    auto row = [&](const std::string& state, double t, const ReserveEstimate& e) {
        lines << "reserve in " << state << " at " << format_time(t) << ": " << format_time(e.value) << '\n';
        rows << format_time(t) << ',' << to_string(e.method) << ',' << format_time(e.value) << ','
             << format_time(e.std_error) << ',' << e.n_paths << '\n';
    };
    if (method == "statewise") {
        StatewiseReserveTable table(cfg.valid, cfg.payments, cfg.kappa);
        for (double t : grid) row(cfg.states.name(j), t, {table.value(j, t), Method::ode, 0.0, 0});
    } else if (method == "rbns") {
        const auto& tm = need_transaction(cfg);
        if (!cfg.run.observed) throw ConfigError(cfg.path + ": run.observed is required for the rbns method");
        RbnsReserve rbns(tm, cfg.payments, cfg.kappa);
        auto tls = timelines(cfg, seed, n);
        for (double t : grid) {
            TransactionTimeline seen = tls.front().second.prefix(t);
            row(cfg.states.name(seen.z_at(t)), t, rbns(seen, t));
        }
    } else if (method == "monte-carlo") {
        if (cfg.run.observed) {
            const auto& tm = need_transaction(cfg);
            auto tls = timelines(cfg, seed, n);
            TransactionMcOptions mo;
            mo.n = n;
            mo.seed = seed;
            mo.workers = workers;
            mo.max_attempts = cfg.run.max_attempts;
            mo.conditioning = cfg.run.conditioning == "restart" ? Conditioning::restart : Conditioning::accept_reject;
            mo.law = cfg.run.law == "z_chain" ? FutureLaw::z_chain : FutureLaw::conditional_independence;
            for (double t : grid) {
                TransactionTimeline seen = tls.front().second.prefix(t);
                row(cfg.states.name(seen.z_at(t)), t, mc_reserve(tm, cfg.payments, cfg.kappa, seen, t, mo));
            }
        } else {
            McOptions mo{n, seed, workers};
            for (double t : grid) row(cfg.states.name(j), t, mc_reserve(cfg.valid, cfg.payments, cfg.kappa, j, t, mo));
        }
    } else {
        throw ConfigError("unknown reserve method \"" + method + "\"");
    }
    auto f = open_out(opt, "reserve.csv", log);
    f << "t,method,value,std_error,n_paths\n" << rows.str();
    log << lines.str();
    return 0;
}

int cmd_residuals(const RunConfig& cfg, const CliOptions& opt, std::uint64_t seed, std::size_t n, unsigned workers,
                  std::ostream& log) {
    const double T = cfg.payments.horizon();
    TimeGrid grid = grid_or(opt, cfg, TimeGrid::linspace(T / 20, T, 20));
    BacktestOptions bo{n, seed, workers};
    auto rep = backtest_residuals(cfg.valid, cfg.truth(), initial_state(cfg), cfg.payments, cfg.kappa, grid, bo);
    auto f = open_out(opt, "residuals.csv", log);
    write_residual_csv(f, rep);
    log << "inside 3 sigma at " << format_time(rep.inside_fraction()) << " of grid points\n";
    return 0;
}

}  // namespace

int run_command(const std::string& command, const CliOptions& opt, std::ostream& log, std::ostream& err) {
    if (std::find(cli_commands().begin(), cli_commands().end(), command) == cli_commands().end()) {
        err << "unknown command \"" << command << "\"\n";
        return 2;
    }
    ConfigLoad load;
    try {
        load = load_config(opt.config);
    } catch (const std::exception& e) {
        err << e.what() << '\n';
        return 1;
    }
    if (!load.issues.empty()) {
        for (const auto& i : load.issues) err << format_issue(opt.config, i) << '\n';
        return 1;
    }
    if (command == "check-config") {
        log << opt.config << ": no violations\n";
        return 0;
    }
    const RunConfig& cfg = *load.config;
    const std::uint64_t seed = opt.seed.value_or(cfg.run.seed);
    const std::size_t n = opt.paths.value_or(cfg.run.n_paths);
    const unsigned workers = opt.workers.value_or(cfg.run.workers);
    try {
        if (command == "simulate") return cmd_simulate(cfg, opt, seed, n, log);
        if (command == "export-bitemporal") return cmd_export(cfg, opt, seed, n, log);
        if (command == "import-bitemporal") return cmd_import(cfg, opt, log);
        if (command == "validate") return cmd_validate(cfg, opt, seed, n, log);
        if (command == "value") return cmd_value(cfg, opt, seed, n, log);
        if (command == "reserve") return cmd_reserve(cfg, opt, seed, n, workers, log);
        return cmd_residuals(cfg, opt, seed, n, workers, log);
    } catch (const ConfigError& e) {
        err << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << command << ": " << e.what() << '\n';
        return 2;
    }
}

}  // namespace bitemp
