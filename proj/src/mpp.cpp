#include "bitemp/mpp.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "csv.hpp"

namespace bitemp {

namespace {
constexpr std::size_t kMaxEvents = 1'000'000;
}

StateSpace::StateSpace(std::vector<std::string> names) {
    for (auto& n : names) {
        if (contains(n)) throw std::invalid_argument("duplicate state '" + n + "'");
        names_.push_back(std::move(n));
    }
}

StateId StateSpace::id(const std::string& label) const {
    auto it = std::find(names_.begin(), names_.end(), label);
    if (it == names_.end()) throw std::invalid_argument("unknown state '" + label + "'");
    return static_cast<StateId>(it - names_.begin());
}

bool StateSpace::contains(const std::string& label) const {
    return std::find(names_.begin(), names_.end(), label) != names_.end();
}

StateId StateSpace::add(const std::string& label) {
    auto it = std::find(names_.begin(), names_.end(), label);
    if (it != names_.end()) return static_cast<StateId>(it - names_.begin());
    names_.push_back(label);
    return names_.size() - 1;
}

void MppHistory::check() const {
    double prev = 0.0;
    for (const auto& e : events) {
        if (!(e.time > prev) || !std::isfinite(e.time))
            throw std::invalid_argument("event times must be positive and strictly increasing");
        prev = e.time;
    }
}

MppHistory history_at(const MppHistory& h, double t) {
    MppHistory out;
    out.initial = h.initial;
    for (const auto& e : h.events) {
        if (e.time > t) break;
        out.events.push_back(e);
    }
    return out;
}

Mark evaluate_pdp(const MppHistory& h, double t) {
    Mark m = h.initial_mark();
    for (std::size_t n = 0; n < h.events.size() && h.events[n].time <= t; ++n) m = h.mark(n);
    return m;
}

std::size_t count_transitions(const MppHistory& h, StateId j, StateId k, double t) {
    std::size_t count = 0;
    for (std::size_t n = 0; n < h.events.size() && h.events[n].time <= t; ++n)
        if (h.state_before(n) == j && h.events[n].state == k) ++count;
    return count;
}

IntensitySpec::IntensitySpec(std::size_t n_states)
    : n_(n_states), rates_(n_states * n_states), row_breaks_(n_states, {0.0}), row_totals_(n_states, {0.0}),
      all_breaks_{0.0} {}

void IntensitySpec::set(StateId j, StateId k, PiecewiseConstant rate) {
    if (j >= n_ || k >= n_) throw std::invalid_argument("intensity references unknown state");
    if (j == k) throw std::invalid_argument("diagonal intensities are implied");
    for (double v : rate.values())
        if (v < 0 || !std::isfinite(v)) throw std::invalid_argument("negative or non-finite intensity");
    rates_[j * n_ + k] = std::move(rate);
    rebuild(j);
    std::vector<double> all;
    for (const auto& r : row_breaks_) all.insert(all.end(), r.begin(), r.end());
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    all_breaks_ = std::move(all);
}

void IntensitySpec::rebuild(StateId j) {
    std::vector<double> br;
    for (StateId k = 0; k < n_; ++k) {
        const auto& b = rate(j, k).breakpoints();
        br.insert(br.end(), b.begin(), b.end());
    }
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    std::vector<double> tot(br.size(), 0.0);
    for (std::size_t p = 0; p < br.size(); ++p)
        for (StateId k = 0; k < n_; ++k)
            if (k != j) tot[p] += rate(j, k)(br[p]);
    row_breaks_[j] = std::move(br);
    row_totals_[j] = std::move(tot);
}

double IntensitySpec::total(StateId j, double t) const {
    double s = 0.0;
    for (StateId k = 0; k < n_; ++k)
        if (k != j) s += rate(j, k)(t);
    return s;
}

bool IntensitySpec::is_absorbing(StateId j) const {
    for (StateId k = 0; k < n_; ++k)
        if (k != j && !rate(j, k).is_zero()) return false;
    return true;
}

bool IntensitySpec::is_zero() const {
    for (StateId j = 0; j < n_; ++j)
        if (!is_absorbing(j)) return false;
    return true;
}

MppHistory simulate_path(const IntensitySpec& spec, StateId initial, double horizon, RngStream& rng, double start) {
    if (!std::isfinite(horizon)) throw std::invalid_argument("non-finite time");
    if (initial >= spec.size()) throw std::invalid_argument("initial state outside the state space");
    MppHistory h;
    h.initial = initial;
    StateId j = initial;
    double s = start;
    while (s < horizon) {
        const auto& br = spec.row_breakpoints(j);
        double budget = rng.exponential();
        std::size_t p = static_cast<std::size_t>(std::upper_bound(br.begin(), br.end(), s) - br.begin()) - 1;
        double jump = horizon;
        bool jumped = false;
        double lo = s;
        while (lo < horizon) {
            double hi = p + 1 < br.size() ? br[p + 1] : horizon;
            double rate = spec.row_total(j, p);
            double len = std::min(hi, horizon) - lo;
            if (rate > 0 && rate * len >= budget) {
                jump = lo + budget / rate;
                jumped = true;
                break;
            }
            budget -= rate * len;
            lo = std::min(hi, horizon);
            ++p;
            if (p >= br.size()) break;
        }
        if (!jumped || jump >= horizon) break;
        double piece_start = lo;  // rates are constant on [piece_start, jump]
        if (!(jump > s)) throw std::runtime_error("explosive intensities: jump times stopped increasing");
        // Destination proportional to lambda_jk at the jump time.
        double total = spec.total(j, piece_start);
        double u = rng.uniform() * total;
        StateId dest = j;
        for (StateId k = 0; k < spec.size(); ++k) {
            if (k == j) continue;
            double r = spec(j, k, piece_start);
            if (r <= 0) continue;
            dest = k;
            if (u < r) break;
            u -= r;
        }
        h.events.push_back({jump, dest});
        if (h.events.size() > kMaxEvents) throw std::runtime_error("explosive intensities: event cap exceeded");
        j = dest;
        s = jump;
    }
    return h;
}

MppHistory simulate_path(const IntensitySpec& spec, StateId initial, double horizon, std::uint64_t seed) {
    RngStream rng(seed, Purpose::valid_path, 0);
    return simulate_path(spec, initial, horizon, rng);
}

void write_history_csv(std::ostream& out, const std::vector<MppHistory>& paths, const StateSpace& space) {
    out << "path_id,time,from_label,to_label\n";
    for (std::size_t p = 0; p < paths.size(); ++p) {
        const auto& h = paths[p];
        for (std::size_t n = 0; n < h.events.size(); ++n)
            out << p << ',' << format_time(h.events[n].time) << ',' << space.name(h.state_before(n)) << ','
                << space.name(h.events[n].state) << '\n';
    }
}

std::vector<MppHistory> read_history_csv(std::istream& in, const StateSpace& space, StateId initial,
                                         std::size_t n_paths) {
    std::vector<MppHistory> paths(n_paths);
    for (auto& p : paths) p.initial = initial;
    for (const auto& row : csv::read(in, "path_id,time,from_label,to_label")) {
        double id = parse_double(row[0]);
        if (id < 0 || id != std::floor(id) || id >= static_cast<double>(n_paths))
            throw std::runtime_error("path_id out of range: " + row[0]);
        auto& h = paths[static_cast<std::size_t>(id)];
        StateId from = space.id(row[2]);
        if (h.events.empty()) h.initial = from;
        else if (h.events.back().state != from)
            throw std::runtime_error("history row breaks continuity at path " + row[0]);
        h.events.push_back({parse_double(row[1]), space.id(row[3])});
    }
    for (const auto& h : paths) h.check();
    return paths;
}

}  // namespace bitemp
