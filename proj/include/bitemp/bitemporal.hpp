#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "bitemp/mpp.hpp"
#include "bitemp/temporal.hpp"

namespace bitemp {

// A jump of Z at `time` carrying the complete revised valid-time history.
struct RevisionEvent {
    double time = 0.0;
    StateId z_state = 0;
    MppHistory history;
    bool operator==(const RevisionEvent&) const = default;
};

// Transaction-time process: Z together with the believed history H^t_t.
class TransactionTimeline {
public:
    // Builds and checks the bi-temporal structure assumptions; throws
    // std::invalid_argument on violation.
    static TransactionTimeline create(StateId initial_z, MppHistory initial_history,
                                      std::vector<RevisionEvent> revisions);
    // No checks; used by the importer and by counterexample tests.
    static TransactionTimeline unchecked(StateId initial_z, MppHistory initial_history,
                                         std::vector<RevisionEvent> revisions);

    StateId initial_z() const { return initial_z_; }
    const MppHistory& initial_history() const { return initial_history_; }
    const std::vector<RevisionEvent>& revisions() const { return revisions_; }

    // Index of the last revision at or before t, or nullopt before the first.
    std::optional<std::size_t> revision_at(double t) const;
    // Carried history H^t_t (untruncated) and Z_t.
    const MppHistory& carried(double t) const;
    StateId z_at(double t) const;
    // History carried just before s (the H^{s-}_{s-} of a revision at s).
    const MppHistory& carried_before(double s) const;
    const MppHistory& finalized() const;
    double absorption() const { return revisions_.empty() ? 0.0 : revisions_.back().time; }

    // Prefix observed up to t: revisions at or before t.
    TransactionTimeline prefix(double t) const;

    bool operator==(const TransactionTimeline&) const = default;

private:
    StateId initial_z_ = 0;
    MppHistory initial_history_;
    std::vector<RevisionEvent> revisions_;
};

MppHistory as_of(const TransactionTimeline& tl, double t, double s);
double absorption_time(const TransactionTimeline& tl);

struct Violation {
    std::string assumption;  // "(i)", "(ii)", "(iii)" or "records"
    std::string message;
    std::vector<double> times;
};
using ValidationReport = std::vector<Violation>;

ValidationReport validate_assumptions(const TransactionTimeline& tl);

struct BitemporalRecord {
    StateId state = 0;
    double valid_from = 0.0;
    Bound valid_till = Bound::unbounded();
    double recorded = 0.0;
    Bound superseded = Bound::unbounded();
    bool operator==(const BitemporalRecord&) const = default;
};

std::vector<BitemporalRecord> export_records(const TransactionTimeline& tl);
TransactionTimeline import_records(const std::vector<BitemporalRecord>& rows);
// Checks on raw rows that are invisible after import (resurrected rows),
// followed by the timeline checks.
ValidationReport validate_records(const std::vector<BitemporalRecord>& rows);

// Bi-temporal CSV: state,valid_from,valid_till,recorded,superseded.
void write_records_csv(std::ostream& out, const std::vector<BitemporalRecord>& rows, const StateSpace& space);
// Unknown labels are added to `space`.
std::vector<BitemporalRecord> read_records_csv(std::istream& in, StateSpace& space);

}  // namespace bitemp
