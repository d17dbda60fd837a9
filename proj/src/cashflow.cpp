#include "bitemp/cashflow.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <tuple>

#include "csv.hpp"

namespace bitemp {

PaymentSpec::PaymentSpec(std::size_t n_states, double horizon)
    : n_(n_states), horizon_(horizon), rate_(n_states), atoms_(n_states), trans_(n_states * n_states), dur_(n_states) {
    if (!(horizon > 0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive and finite");
}

void PaymentSpec::set_sojourn_rate(StateId j, PiecewiseConstant rate) { rate_.at(j) = std::move(rate); }

void PaymentSpec::add_sojourn_atom(StateId j, double time, double amount) {
    if (!std::isfinite(time) || time < 0 || !std::isfinite(amount))
        throw std::invalid_argument("sojourn atom needs finite time and amount");
    auto& list = atoms_.at(j);
    for (const auto& a : list)
        if (a.time == time) throw std::invalid_argument("two sojourn atoms at the same time for one state");
    list.push_back({time, amount});
    std::sort(list.begin(), list.end(), [](const PaymentAtom& a, const PaymentAtom& b) { return a.time < b.time; });
}

void PaymentSpec::set_transition(StateId j, StateId k, PiecewiseConstant amount) {
    if (j >= n_ || k >= n_ || j == k) throw std::invalid_argument("transition payment needs two distinct states");
    trans_[j * n_ + k] = std::move(amount);
}

void PaymentSpec::set_duration_rate(StateId j, PiecewiseConstant rate) { dur_.at(j) = std::move(rate); }

bool PaymentSpec::duration_dependent() const {
    return std::any_of(dur_.begin(), dur_.end(), [](const PiecewiseConstant& f) { return !f.is_zero(); });
}

std::vector<double> PaymentSpec::breakpoints() const {
    std::vector<double> out{0.0, horizon_};
    for (const auto& f : rate_) out.insert(out.end(), f.breakpoints().begin(), f.breakpoints().end());
    for (const auto& f : trans_) out.insert(out.end(), f.breakpoints().begin(), f.breakpoints().end());
    for (const auto& list : atoms_)
        for (const auto& a : list) out.push_back(a.time);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    while (!out.empty() && out.back() > horizon_) out.pop_back();
    return out;
}

PaymentSpec PaymentSpec::scaled(double c) const {
    PaymentSpec s = *this;
    for (auto& f : s.rate_) f = f.scaled(c);
    for (auto& f : s.trans_) f = f.scaled(c);
    for (auto& f : s.dur_) f = f.scaled(c);
    for (auto& list : s.atoms_)
        for (auto& a : list) a.amount *= c;
    return s;
}

std::string to_string(AtomTag tag) {
    switch (tag) {
        case AtomTag::sojourn: return "sojourn";
        case AtomTag::transition: return "transition";
        case AtomTag::backpay: return "backpay";
    }
    return "?";
}

void CashFlowLedger::normalize() {
    // Overlapping segments (e.g. a duration rate on top of a sojourn rate)
    // are summed on each elementary piece.
    std::vector<double> cuts;
    for (const auto& s : segments) {
        cuts.push_back(s.from);
        cuts.push_back(s.to);
    }
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::vector<RateSegment> merged;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double a = cuts[i], b = cuts[i + 1];
        double rate = 0.0;
        for (const auto& s : segments)
            if (s.from <= a && s.to >= b) rate += s.rate;
        if (rate == 0.0) continue;
        if (!merged.empty() && merged.back().to == a && merged.back().rate == rate) merged.back().to = b;
        else merged.push_back({a, b, rate});
    }
    segments = std::move(merged);
    std::erase_if(atoms, [](const LedgerAtom& a) { return a.amount == 0.0; });
    std::stable_sort(atoms.begin(), atoms.end(), [](const LedgerAtom& a, const LedgerAtom& b) {
        return std::tie(a.time, a.tag) < std::tie(b.time, b.tag);
    });
}

CashFlowLedger CashFlowLedger::restricted(double lo, double hi) const {
    CashFlowLedger out;
    for (const auto& s : segments) {
        double a = std::max(s.from, lo), b = std::min(s.to, hi);
        if (b > a) out.segments.push_back({a, b, s.rate});
    }
    for (const auto& x : atoms)
        if (x.time >= lo && x.time < hi) out.atoms.push_back(x);
    return out;
}

void CashFlowLedger::append(const CashFlowLedger& other) {
    segments.insert(segments.end(), other.segments.begin(), other.segments.end());
    atoms.insert(atoms.end(), other.atoms.begin(), other.atoms.end());
}

namespace {

void add_rate(CashFlowLedger& out, const PiecewiseConstant& f, double shift, double lo, double hi) {
    // f is evaluated at (v - shift); its breakpoints move by `shift`.
    const auto& b = f.breakpoints();
    const auto& v = f.values();
    for (std::size_t i = 0; i < b.size(); ++i) {
        double a = std::max(lo, b[i] + shift);
        double e = (i + 1 < b.size()) ? std::min(hi, b[i + 1] + shift) : hi;
        if (e > a && v[i] != 0.0) out.segments.push_back({a, e, v[i]});
    }
}

}  // namespace

CashFlowLedger valid_ledger(const MppHistory& h, const PaymentSpec& spec) {
    CashFlowLedger out;
    const double T = spec.horizon();
    const std::size_t n = h.events.size();
    for (std::size_t i = 0; i <= n; ++i) {
        double from = i == 0 ? 0.0 : h.events[i - 1].time;
        double to = i == n ? T : std::min(T, h.events[i].time);
        if (from >= T) break;
        StateId y = i == 0 ? h.initial : h.events[i - 1].state;
        add_rate(out, spec.sojourn_rate(y), 0.0, from, to);
        if (!spec.duration_rate(y).is_zero()) add_rate(out, spec.duration_rate(y), from, from, to);
    }
    // Sojourn atoms follow the left-limit state X_{s-}.
    for (StateId j = 0; j < spec.size(); ++j)
        for (const auto& a : spec.sojourn_atoms(j)) {
            if (a.time > T) break;
            StateId before = h.initial;
            for (const auto& e : h.events) {
                if (e.time >= a.time) break;
                before = e.state;
            }
            if (before == j) out.atoms.push_back({a.time, a.amount, AtomTag::sojourn});
        }
    for (std::size_t i = 0; i < n && h.events[i].time <= T; ++i) {
        double amt = spec.transition(h.state_before(i), h.events[i].state)(h.events[i].time);
        if (amt != 0.0) out.atoms.push_back({h.events[i].time, amt, AtomTag::transition});
    }
    out.normalize();
    return out;
}

double discounted_value(const CashFlowLedger& ledger, const Accumulation& kappa, const Window& w) {
    double total = 0.0;
    for (const auto& s : ledger.segments) {
        double a = std::max(s.from, w.lo), b = std::min(s.to, w.hi);
        if (b > a) total += s.rate * kappa.inverse_integral(a, b);
    }
    for (const auto& x : ledger.atoms)
        if (w.contains(x.time)) total += x.amount / kappa(x.time);
    return total;
}

double backpay_at(const TransactionTimeline& tl, double s, const PaymentSpec& spec, const Accumulation& kappa) {
    auto idx = tl.revision_at(s);
    if (!idx || tl.revisions()[*idx].time != s) return 0.0;
    const MppHistory& now = tl.revisions()[*idx].history;
    const MppHistory& before = tl.carried_before(s);
    if (now == before) return 0.0;
    Window w = Window::closed_open(0.0, s);
    double diff = discounted_value(valid_ledger(now, spec), kappa, w) - discounted_value(valid_ledger(before, spec), kappa, w);
    return kappa(s) * diff;
}

CashFlowLedger transaction_ledger(const TransactionTimeline& tl, const PaymentSpec& spec, const Accumulation& kappa) {
    CashFlowLedger out;
    const auto& revs = tl.revisions();
    double lo = 0.0;
    const MppHistory* current = &tl.initial_history();
    for (std::size_t n = 0; n <= revs.size(); ++n) {
        double hi = n < revs.size() ? revs[n].time : std::numeric_limits<double>::infinity();
        if (hi > lo) out.append(valid_ledger(*current, spec).restricted(lo, hi));
        if (n == revs.size()) break;
        double beta = backpay_at(tl, revs[n].time, spec, kappa);
        if (beta != 0.0) out.atoms.push_back({revs[n].time, beta, AtomTag::backpay});
        current = &revs[n].history;
        lo = hi;
    }
    out.normalize();
    return out;
}

void write_ledger_csv(std::ostream& out, const CashFlowLedger& ledger) {
    out << "kind,from,to,time,amount,tag\n";
    for (const auto& s : ledger.segments)
        out << "rate," << format_time(s.from) << ',' << format_time(s.to) << ",," << format_time(s.rate) << ",\n";
    for (const auto& a : ledger.atoms)
        out << "atom,,," << format_time(a.time) << ',' << format_time(a.amount) << ',' << to_string(a.tag) << '\n';
}

CashFlowLedger read_ledger_csv(std::istream& in) {
    CashFlowLedger ledger;
    for (const auto& f : csv::read(in, "kind,from,to,time,amount,tag")) {
        if (f[0] == "rate") {
            ledger.segments.push_back({parse_double(f[1]), parse_double(f[2]), parse_double(f[4])});
        } else if (f[0] == "atom") {
            AtomTag tag;
            if (f[5] == "sojourn") tag = AtomTag::sojourn;
            else if (f[5] == "transition") tag = AtomTag::transition;
            else if (f[5] == "backpay") tag = AtomTag::backpay;
            else throw std::runtime_error("unknown atom tag '" + f[5] + "'");
            ledger.atoms.push_back({parse_double(f[3]), parse_double(f[4]), tag});
        } else {
            throw std::runtime_error("unknown ledger row kind '" + f[0] + "'");
        }
    }
    return ledger;
}

}  // namespace bitemp
