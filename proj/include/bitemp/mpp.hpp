#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "bitemp/random.hpp"
#include "bitemp/temporal.hpp"

namespace bitemp {

using StateId = std::size_t;

class StateSpace {
public:
    StateSpace() = default;
    explicit StateSpace(std::vector<std::string> names);

    std::size_t size() const { return names_.size(); }
    StateId id(const std::string& label) const;  // throws on unknown labels
    bool contains(const std::string& label) const;
    const std::string& name(StateId j) const { return names_.at(j); }
    const std::vector<std::string>& names() const { return names_; }
    StateId add(const std::string& label);  // returns the existing id if present

private:
    std::vector<std::string> names_;
};

struct Mark {
    StateId label = 0;
    double last_jump_time = 0.0;
    bool operator==(const Mark&) const = default;
};

struct Event {
    double time = 0.0;
    StateId state = 0;
    bool operator==(const Event&) const = default;
};

// Marked point process history of a pure-jump process. Event times are
// strictly increasing and positive.
struct MppHistory {
    StateId initial = 0;
    std::vector<Event> events;

    Mark initial_mark() const { return {initial, 0.0}; }
    Mark mark(std::size_t n) const { return {events[n].state, events[n].time}; }
    StateId state_before(std::size_t n) const { return n == 0 ? initial : events[n - 1].state; }
    StateId final_state() const { return events.empty() ? initial : events.back().state; }
    void check() const;  // throws when times are not strictly increasing and positive

    bool operator==(const MppHistory&) const = default;
};

MppHistory history_at(const MppHistory& h, double t);
Mark evaluate_pdp(const MppHistory& h, double t);
std::size_t count_transitions(const MppHistory& h, StateId j, StateId k, double t);

// Transition intensities lambda_jk(t), piecewise constant in t.
class IntensitySpec {
public:
    IntensitySpec() = default;
    explicit IntensitySpec(std::size_t n_states);

    std::size_t size() const { return n_; }
    void set(StateId j, StateId k, PiecewiseConstant rate);
    const PiecewiseConstant& rate(StateId j, StateId k) const { return rates_[j * n_ + k]; }
    double operator()(StateId j, StateId k, double t) const { return rate(j, k)(t); }
    double total(StateId j, double t) const;
    bool is_absorbing(StateId j) const;
    bool is_zero() const;

    // Sorted union of breakpoints over all rates, and over the exit rates of j.
    const std::vector<double>& breakpoints() const { return all_breaks_; }
    const std::vector<double>& row_breakpoints(StateId j) const { return row_breaks_[j]; }
    // Total exit rate on the piece [row_breakpoints(j)[p], next).
    double row_total(StateId j, std::size_t p) const { return row_totals_[j][p]; }

private:
    void rebuild(StateId j);

    std::size_t n_ = 0;
    std::vector<PiecewiseConstant> rates_;
    std::vector<std::vector<double>> row_breaks_;
    std::vector<std::vector<double>> row_totals_;
    std::vector<double> all_breaks_;
};

// Competing-exponentials simulation of the Markov chain from (start, initial)
// up to horizon. Events before or at start are never produced.
MppHistory simulate_path(const IntensitySpec& spec, StateId initial, double horizon, RngStream& rng,
                         double start = 0.0);
MppHistory simulate_path(const IntensitySpec& spec, StateId initial, double horizon, std::uint64_t seed);

// History CSV: path_id,time,from_label,to_label (one row per event).
void write_history_csv(std::ostream& out, const std::vector<MppHistory>& paths, const StateSpace& space);
// Paths without rows start in `initial` and have no events.
std::vector<MppHistory> read_history_csv(std::istream& in, const StateSpace& space, StateId initial,
                                         std::size_t n_paths);

}  // namespace bitemp
