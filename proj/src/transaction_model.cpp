#include "bitemp/transaction_model.hpp"

#include <cmath>
#include <stdexcept>

namespace bitemp {

int FiveStateRoles::disabled_index(StateId s) const {
    if (s == disabled[0]) return 0;
    if (s == disabled[1]) return 1;
    throw std::invalid_argument("state is not a disabled state");
}

void TransactionModelConfig::check() const {
    const std::size_t n = valid.size();
    StateId ids[] = {roles.active, roles.disabled[0], roles.disabled[1], roles.reactivated, roles.dead};
    for (StateId s : ids)
        if (s >= n) throw std::invalid_argument("role refers to a state outside the model");
    for (const auto& row : misclassification) {
        double sum = 0.0;
        for (double p : row) {
            if (p < 0 || p > 1 || !std::isfinite(p))
                throw std::invalid_argument("misclassification probabilities must lie in [0, 1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-12) throw std::invalid_argument("misclassification rows must sum to 1");
    }
    for (const auto& f : flip)
        for (double v : f.values())
            if (v < 0) throw std::invalid_argument("negative flip intensity");
    if (!(horizon > 0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive and finite");
    if (!valid.is_absorbing(roles.dead)) throw std::invalid_argument("dead state must be absorbing");
}

IntensitySpec TransactionModelConfig::z_intensities() const {
    IntensitySpec z(valid.size());
    const StateId a = roles.active;
    for (StateId j = 0; j < valid.size(); ++j)
        for (StateId k = 0; k < valid.size(); ++k)
            if (j != k && !(j == a && roles.is_disabled(k))) z.set(j, k, valid.rate(j, k));
    for (int m = 0; m < 2; ++m) {
        std::vector<std::pair<double, PiecewiseConstant>> terms;
        for (int k = 0; k < 2; ++k) terms.emplace_back(misclassification[k][m], valid.rate(a, roles.disabled[k]));
        z.set(a, roles.disabled[m], weighted_sum(terms));
    }
    z.set(roles.disabled[0], roles.disabled[1], flip[0]);
    z.set(roles.disabled[1], roles.disabled[0], flip[1]);
    return z;
}

std::optional<std::size_t> onset_index(const MppHistory& h, const FiveStateRoles& roles) {
    for (std::size_t n = 0; n < h.events.size(); ++n)
        if (roles.is_disabled(h.events[n].state)) return n;
    return std::nullopt;
}

MppHistory relabel_onset(MppHistory h, const FiveStateRoles& roles, StateId origin) {
    auto n = onset_index(h, roles);
    if (!n) throw std::invalid_argument("history has no disability onset");
    h.events[*n].state = origin;
    return h;
}

TimelineBuilder::TimelineBuilder(const FiveStateRoles& roles, StateId initial)
    : roles_(roles), initial_z_(initial), z_(initial) {
    initial_history_.initial = initial;
    history_ = initial_history_;
}

TimelineBuilder::TimelineBuilder(const FiveStateRoles& roles, const TransactionTimeline& prefix)
    : roles_(roles), initial_z_(prefix.initial_z()), initial_history_(prefix.initial_history()),
      revisions_(prefix.revisions()) {
    z_ = revisions_.empty() ? initial_z_ : revisions_.back().z_state;
    history_ = prefix.finalized();
}

void TimelineBuilder::apply(double time, StateId z) {
    if (roles_.is_disabled(z_) && roles_.is_disabled(z)) history_ = relabel_onset(std::move(history_), roles_, z);
    else history_.events.push_back({time, z});
    z_ = z;
    revisions_.push_back({time, z_, history_});
}

void TimelineBuilder::revise(double time, StateId z, MppHistory history) {
    z_ = z;
    history_ = std::move(history);
    revisions_.push_back({time, z_, history_});
}

TransactionTimeline TimelineBuilder::finish(double horizon, bool absorbed) && {
    if (!absorbed && last_time() < horizon) revisions_.push_back({horizon, z_, history_});
    return TransactionTimeline::unchecked(initial_z_, std::move(initial_history_), std::move(revisions_));
}

TransactionTimeline simulate_timeline(const TransactionModelConfig& model, const IntensitySpec& z_spec,
                                      RngStream& rng) {
    MppHistory zpath = simulate_path(z_spec, model.roles.active, model.horizon, rng);
    TimelineBuilder b(model.roles, model.roles.active);
    for (const auto& e : zpath.events) b.apply(e.time, e.state);
    bool absorbed = z_spec.is_absorbing(b.z());
    return std::move(b).finish(model.horizon, absorbed);
}

TransactionTimeline simulate_timeline(const TransactionModelConfig& model, std::uint64_t seed, std::uint64_t index) {
    RngStream rng(seed, Purpose::timeline, index);
    return simulate_timeline(model, model.z_intensities(), rng);
}

}  // namespace bitemp
