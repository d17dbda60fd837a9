#include "bitemp/bitemporal.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <set>
#include <stdexcept>
#include <tuple>

#include "csv.hpp"

namespace bitemp {

namespace {

struct Segment {
    StateId state;
    double from;
    Bound till;
    bool operator==(const Segment&) const = default;
};

std::vector<Segment> segments(const MppHistory& h) {
    std::vector<Segment> out;
    double from = 0.0;
    StateId state = h.initial;
    for (const auto& e : h.events) {
        out.push_back({state, from, Bound(e.time)});
        from = e.time;
        state = e.state;
    }
    out.push_back({state, from, Bound::unbounded()});
    return out;
}

bool ahead_of(const MppHistory& h, double t) { return !h.events.empty() && h.events.back().time > t; }

}  // namespace

TransactionTimeline TransactionTimeline::create(StateId initial_z, MppHistory initial_history,
                                                std::vector<RevisionEvent> revisions) {
    auto tl = unchecked(initial_z, std::move(initial_history), std::move(revisions));
    auto report = validate_assumptions(tl);
    if (!report.empty()) throw std::invalid_argument("timeline violates " + report.front().assumption + ": " +
                                                     report.front().message);
    return tl;
}

TransactionTimeline TransactionTimeline::unchecked(StateId initial_z, MppHistory initial_history,
                                                   std::vector<RevisionEvent> revisions) {
    TransactionTimeline tl;
    tl.initial_z_ = initial_z;
    tl.initial_history_ = std::move(initial_history);
    tl.revisions_ = std::move(revisions);
    return tl;
}

std::optional<std::size_t> TransactionTimeline::revision_at(double t) const {
    auto it = std::upper_bound(revisions_.begin(), revisions_.end(), t,
                               [](double x, const RevisionEvent& r) { return x < r.time; });
    if (it == revisions_.begin()) return std::nullopt;
    return static_cast<std::size_t>(it - revisions_.begin()) - 1;
}

const MppHistory& TransactionTimeline::carried(double t) const {
    auto i = revision_at(t);
    return i ? revisions_[*i].history : initial_history_;
}

StateId TransactionTimeline::z_at(double t) const {
    auto i = revision_at(t);
    return i ? revisions_[*i].z_state : initial_z_;
}

const MppHistory& TransactionTimeline::carried_before(double s) const {
    auto it = std::lower_bound(revisions_.begin(), revisions_.end(), s,
                               [](const RevisionEvent& r, double x) { return r.time < x; });
    if (it == revisions_.begin()) return initial_history_;
    return std::prev(it)->history;
}

const MppHistory& TransactionTimeline::finalized() const {
    return revisions_.empty() ? initial_history_ : revisions_.back().history;
}

TransactionTimeline TransactionTimeline::prefix(double t) const {
    TransactionTimeline p = *this;
    auto i = revision_at(t);
    p.revisions_.resize(i ? *i + 1 : 0);
    return p;
}

MppHistory as_of(const TransactionTimeline& tl, double t, double s) { return history_at(tl.carried(t), std::min(s, t)); }

double absorption_time(const TransactionTimeline& tl) { return tl.absorption(); }

ValidationReport validate_assumptions(const TransactionTimeline& tl) {
    ValidationReport report;
    const auto& revs = tl.revisions();
    if (!tl.initial_history().events.empty())
        report.push_back({"(i)", "history ahead of transaction time", {0.0, tl.initial_history().events.front().time}});
    double prev = 0.0;
    for (std::size_t n = 0; n < revs.size(); ++n) {
        const auto& r = revs[n];
        if (!std::isfinite(r.time)) {
            report.push_back({"(ii)", "revision at non-finite time", {r.time}});
            continue;
        }
        if (!(r.time > prev)) report.push_back({"(i)", "revision times not strictly increasing", {prev, r.time}});
        prev = r.time;
        try {
            r.history.check();
        } catch (const std::invalid_argument&) {
            report.push_back({"(i)", "malformed revised history", {r.time}});
        }
        if (ahead_of(r.history, r.time)) {
            report.push_back({"(i)", "history ahead of transaction time", {r.time, r.history.events.back().time}});
            if (n + 1 == revs.size())
                report.push_back({"(iii)", "finalized history extends past absorption", {r.time}});
        }
    }
    return report;
}

std::vector<BitemporalRecord> export_records(const TransactionTimeline& tl) {
    struct Open {
        Segment seg;
        double recorded;
    };
    std::vector<BitemporalRecord> out;
    std::vector<Open> open;
    auto step = [&](const MppHistory& h, double t) {
        auto segs = segments(h);
        std::vector<Open> next;
        for (const auto& o : open) {
            if (std::find(segs.begin(), segs.end(), o.seg) != segs.end()) next.push_back(o);
            else out.push_back({o.seg.state, o.seg.from, o.seg.till, o.recorded, Bound(t)});
        }
        for (const auto& s : segs) {
            bool kept = std::any_of(open.begin(), open.end(), [&](const Open& o) { return o.seg == s; });
            if (!kept) next.push_back({s, t});
        }
        open = std::move(next);
    };
    step(tl.initial_history(), 0.0);
    for (const auto& r : tl.revisions()) step(r.history, r.time);
    for (const auto& o : open) out.push_back({o.seg.state, o.seg.from, o.seg.till, o.recorded, Bound::unbounded()});
    std::sort(out.begin(), out.end(), [](const BitemporalRecord& a, const BitemporalRecord& b) {
        return std::tie(a.recorded, a.valid_from) < std::tie(b.recorded, b.valid_from);
    });
    return out;
}

namespace {

// Believed history from the rows live at transaction time t.
MppHistory snapshot(const std::vector<BitemporalRecord>& rows, double t) {
    std::vector<const BitemporalRecord*> live;
    for (const auto& r : rows)
        if (r.recorded <= t && r.superseded.after(t)) live.push_back(&r);
    std::sort(live.begin(), live.end(),
              [](const BitemporalRecord* a, const BitemporalRecord* b) { return a->valid_from < b->valid_from; });
    auto fail = [t]() { return std::runtime_error("inconsistent snapshot at " + format_time(t)); };
    if (live.empty() || live.front()->valid_from != 0.0) throw fail();
    MppHistory h;
    h.initial = live.front()->state;
    for (std::size_t i = 0; i + 1 < live.size(); ++i) {
        const auto& till = live[i]->valid_till;
        if (till.is_unbounded() || till.time() != live[i + 1]->valid_from) throw fail();
        StateId prev = h.final_state();
        if (live[i + 1]->state != prev) h.events.push_back({live[i + 1]->valid_from, live[i + 1]->state});
    }
    if (!live.back()->valid_till.is_unbounded()) throw fail();
    return h;
}

}  // namespace

TransactionTimeline import_records(const std::vector<BitemporalRecord>& rows) {
    std::set<double> recorded;
    std::set<double> changes;
    for (const auto& r : rows) {
        if (!(Bound(r.recorded) < r.superseded))
            throw std::runtime_error("empty transaction interval at " + format_time(r.recorded));
        if (!(Bound(r.valid_from) < r.valid_till))
            throw std::runtime_error("empty valid interval at " + format_time(r.valid_from));
        recorded.insert(r.recorded);
        changes.insert(r.recorded);
        if (!r.superseded.is_unbounded()) changes.insert(r.superseded.time());
    }
    if (recorded.empty() || *recorded.begin() != 0.0) throw std::runtime_error("inconsistent snapshot at 0");
    // Snapshots must be well formed at every time the live set changes,
    // including supersessions without a replacement row.
    for (double t : changes)
        if (!recorded.count(t)) snapshot(rows, t);

    MppHistory initial = snapshot(rows, 0.0);
    StateId initial_z = evaluate_pdp(initial, 0.0).label;
    std::vector<RevisionEvent> revs;
    for (double t : recorded) {
        if (t == 0.0) continue;
        MppHistory h = snapshot(rows, t);
        revs.push_back({t, evaluate_pdp(h, t).label, std::move(h)});
    }
    return TransactionTimeline::unchecked(initial_z, std::move(initial), std::move(revs));
}

ValidationReport validate_records(const std::vector<BitemporalRecord>& rows) {
    ValidationReport report;
    using Key = std::tuple<StateId, double, bool, double>;
    std::map<Key, std::vector<const BitemporalRecord*>> same;
    for (const auto& r : rows) {
        Key k{r.state, r.valid_from, r.valid_till.is_unbounded(),
              r.valid_till.is_unbounded() ? 0.0 : r.valid_till.time()};
        same[k].push_back(&r);
    }
    for (auto& [k, group] : same) {
        std::sort(group.begin(), group.end(),
                  [](const BitemporalRecord* a, const BitemporalRecord* b) { return a->recorded < b->recorded; });
        for (std::size_t i = 0; i + 1 < group.size(); ++i)
            if (Bound(group[i + 1]->recorded) > group[i]->superseded)
                report.push_back({"records", "non-monotone supersession",
                                  {group[i]->superseded.time(), group[i + 1]->recorded}});
    }
    try {
        auto more = validate_assumptions(import_records(rows));
        report.insert(report.end(), more.begin(), more.end());
    } catch (const std::runtime_error& e) {
        report.push_back({"records", e.what(), {}});
    }
    return report;
}

void write_records_csv(std::ostream& out, const std::vector<BitemporalRecord>& rows, const StateSpace& space) {
    out << "state,valid_from,valid_till,recorded,superseded\n";
    for (const auto& r : rows)
        out << space.name(r.state) << ',' << format_time(r.valid_from) << ',' << format_bound(r.valid_till) << ','
            << format_time(r.recorded) << ',' << format_bound(r.superseded) << '\n';
}

std::vector<BitemporalRecord> read_records_csv(std::istream& in, StateSpace& space) {
    std::vector<BitemporalRecord> rows;
    for (const auto& f : csv::read(in, "state,valid_from,valid_till,recorded,superseded")) {
        if (f[0].empty()) throw std::runtime_error("empty state label in bi-temporal CSV");
        rows.push_back({space.add(f[0]), parse_bound(f[1]).time(), parse_bound(f[2]), parse_bound(f[3]).time(),
                        parse_bound(f[4])});
    }
    return rows;
}

}  // namespace bitemp
