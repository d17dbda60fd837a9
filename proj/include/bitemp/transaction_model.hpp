#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include "bitemp/bitemporal.hpp"
#include "bitemp/mpp.hpp"

namespace bitemp {

// Roles of the five states of the disability model with uncertain origin.
struct FiveStateRoles {
    StateId active = 0;
    std::array<StateId, 2> disabled{1, 2};
    StateId reactivated = 3;
    StateId dead = 4;

    bool is_disabled(StateId s) const { return s == disabled[0] || s == disabled[1]; }
    int disabled_index(StateId s) const;  // 0 or 1; throws otherwise
};

struct TransactionModelConfig {
    FiveStateRoles roles;
    IntensitySpec valid;  // valid-time intensities on the five states
    // misclassification[k][m]: probability the origin is first reported as
    // disabled[m] when the onset intensity that fired was a -> disabled[k].
    std::array<std::array<double, 2>, 2> misclassification{{{1.0, 0.0}, {0.0, 1.0}}};
    std::array<PiecewiseConstant, 2> flip;  // flip[0]: i1 -> i2, flip[1]: i2 -> i1
    double horizon = 1.0;
    bool conditional_independence = false;

    void check() const;                   // throws std::invalid_argument
    IntensitySpec z_intensities() const;  // intensities of the Z chain
};

// First event of h into a disabled state, if any.
std::optional<std::size_t> onset_index(const MppHistory& h, const FiveStateRoles& roles);
// h with the disability onset mark replaced by `origin`.
MppHistory relabel_onset(MppHistory h, const FiveStateRoles& roles, StateId origin);

// Turns a sequence of Z jumps into revisions of the believed history.
class TimelineBuilder {
public:
    TimelineBuilder(const FiveStateRoles& roles, StateId initial);
    // Continues after the last revision of `prefix`.
    TimelineBuilder(const FiveStateRoles& roles, const TransactionTimeline& prefix);

    // Z jumps to z at `time`: disabled -> disabled relabels the onset mark;
    // anything else appends (time, z) to the believed history.
    void apply(double time, StateId z);
    // Revision at `time` carrying an arbitrary replacement history.
    void revise(double time, StateId z, MppHistory history);

    StateId z() const { return z_; }
    const MppHistory& history() const { return history_; }
    double last_time() const { return revisions_.empty() ? 0.0 : revisions_.back().time; }

    // Adds the settlement revision at the horizon unless Z already sits in an
    // absorbing state; eta is then the horizon.
    TransactionTimeline finish(double horizon, bool absorbed) &&;

private:
    FiveStateRoles roles_;
    StateId initial_z_;
    MppHistory initial_history_;
    StateId z_;
    MppHistory history_;
    std::vector<RevisionEvent> revisions_;
};

// Simulates the Z chain and the revisions it drives. `index` selects the
// path stream under `seed`.
TransactionTimeline simulate_timeline(const TransactionModelConfig& model, std::uint64_t seed,
                                      std::uint64_t index = 0);
TransactionTimeline simulate_timeline(const TransactionModelConfig& model, const IntensitySpec& z_spec,
                                      RngStream& rng);

}  // namespace bitemp
