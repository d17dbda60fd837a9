#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "bitemp/bitemporal.hpp"
#include "bitemp/mpp.hpp"
#include "bitemp/temporal.hpp"

namespace bitemp {

struct PaymentAtom {
    double time = 0.0;
    double amount = 0.0;
};

// Payment functions of the usual state/transition form.
class PaymentSpec {
public:
    PaymentSpec() = default;
    PaymentSpec(std::size_t n_states, double horizon);

    std::size_t size() const { return n_; }
    double horizon() const { return horizon_; }

    void set_sojourn_rate(StateId j, PiecewiseConstant rate);
    void add_sojourn_atom(StateId j, double time, double amount);
    void set_transition(StateId j, StateId k, PiecewiseConstant amount);
    // Extra rate in state j as a function of the duration since entering j.
    void set_duration_rate(StateId j, PiecewiseConstant rate);

    const PiecewiseConstant& sojourn_rate(StateId j) const { return rate_[j]; }
    const std::vector<PaymentAtom>& sojourn_atoms(StateId j) const { return atoms_[j]; }
    const PiecewiseConstant& transition(StateId j, StateId k) const { return trans_[j * n_ + k]; }
    const PiecewiseConstant& duration_rate(StateId j) const { return dur_[j]; }
    bool duration_dependent() const;

    // Sorted union of the time breakpoints and atom times (horizon included).
    std::vector<double> breakpoints() const;
    PaymentSpec scaled(double c) const;

private:
    std::size_t n_ = 0;
    double horizon_ = 0.0;
    std::vector<PiecewiseConstant> rate_;
    std::vector<std::vector<PaymentAtom>> atoms_;
    std::vector<PiecewiseConstant> trans_;
    std::vector<PiecewiseConstant> dur_;
};

struct RateSegment {
    double from = 0.0;
    double to = 0.0;
    double rate = 0.0;
    bool operator==(const RateSegment&) const = default;
};

enum class AtomTag { sojourn, transition, backpay };
std::string to_string(AtomTag tag);

struct LedgerAtom {
    double time = 0.0;
    double amount = 0.0;
    AtomTag tag = AtomTag::sojourn;
    bool operator==(const LedgerAtom&) const = default;
};

// Dated payment stream: absolutely continuous part plus atoms.
struct CashFlowLedger {
    std::vector<RateSegment> segments;  // disjoint, ordered
    std::vector<LedgerAtom> atoms;      // ordered by time

    // Sorts, drops zero pieces and merges contiguous segments of equal rate.
    void normalize();
    // Payments with time in [lo, hi).
    CashFlowLedger restricted(double lo, double hi) const;
    void append(const CashFlowLedger& other);
    bool operator==(const CashFlowLedger&) const = default;
};

CashFlowLedger valid_ledger(const MppHistory& h, const PaymentSpec& spec);
double discounted_value(const CashFlowLedger& ledger, const Accumulation& kappa, const Window& window);
CashFlowLedger transaction_ledger(const TransactionTimeline& tl, const PaymentSpec& spec, const Accumulation& kappa);
double backpay_at(const TransactionTimeline& tl, double s, const PaymentSpec& spec, const Accumulation& kappa);

// Ledger CSV: kind,from,to,time,amount,tag.
void write_ledger_csv(std::ostream& out, const CashFlowLedger& ledger);
CashFlowLedger read_ledger_csv(std::istream& in);

}  // namespace bitemp
