#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "bitemp/bitemporal.hpp"
#include "bitemp/cashflow.hpp"
#include "bitemp/mpp.hpp"
#include "bitemp/ode.hpp"
#include "bitemp/temporal.hpp"
#include "bitemp/transaction_model.hpp"

namespace bitemp {

inline constexpr double kOdeStep = 1.0 / 3650.0;

// ---------------------------------------------------------------- present values

double present_value(const CashFlowLedger& ledger, const Accumulation& kappa, double t);

enum class Timeline { valid, transaction };

// Closed-form representations using finalized and as-of histories only.
double pv_by_representation(const TransactionTimeline& tl, const PaymentSpec& spec, const Accumulation& kappa,
                            double t, Timeline which);

struct PresentValueReport {
    double t = 0.0;
    double pv_valid = 0.0;
    double pv_transaction = 0.0;  // from the transaction ledger
    double correction = 0.0;      // kappa(t)(B°(X^eta_[0,t]) - B°(X^t_[0,t]))
    double correction_telescoped = 0.0;
};

PresentValueReport decompose_present_value(const TransactionTimeline& tl, const PaymentSpec& spec,
                                      const Accumulation& kappa, double t);

// ---------------------------------------------------------------- reserves

enum class Method { closed_form, ode, monte_carlo, formula };
std::string to_string(Method m);

struct ReserveEstimate {
    double value = 0.0;
    Method method = Method::ode;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};

// State-wise valid-time reserves V_j(t) from the Thiele equations.
class StatewiseReserveTable {
public:
    StatewiseReserveTable(const IntensitySpec& model, const PaymentSpec& spec, const Accumulation& kappa,
                          double step = kOdeStep);

    // The duration u is accepted for interface symmetry and ignored; the
    // constructor rejects duration-dependent payments.
    double value(StateId j, double t, double u = 0.0) const;
    Eigen::VectorXd values(double t) const { return sol_.value(t); }
    double horizon() const { return horizon_; }
    const BackwardSolution& solution() const { return sol_; }

private:
    double horizon_;
    BackwardSolution sol_;
};

double statewise_reserve(const IntensitySpec& model, const PaymentSpec& spec, const Accumulation& kappa, StateId j,
                         double t);

// P(final origin = disabled[k] | Z_t = z) on the extended chain.
class OriginProbabilityTable {
public:
    explicit OriginProbabilityTable(const TransactionModelConfig& tmodel, double step = kOdeStep);
    std::array<double, 2> at(StateId z_now, double t) const;

private:
    FiveStateRoles roles_;
    BackwardSolution sol_;  // components P11, P12, P21, P22
};

// The onset argument does not enter under the Markov Z chain; it is checked
// against t only.
std::array<double, 2> origin_probabilities(const TransactionModelConfig& tmodel, StateId z_now, double onset,
                                           double t);

// kappa(t)(B°(relabel(h, origin)_[0,t]) - B°(h_[0,t])): the value on [0, t]
// of re-labelling the disability onset of the believed history h.
double relabel_correction(const MppHistory& h, const FiveStateRoles& roles, StateId origin, const PaymentSpec& spec,
                          const Accumulation& kappa, double t);

// Explicit RBNS reserve: sum_k p_k (V_{i_k}(t) + relabel correction).
class RbnsReserve {
public:
    RbnsReserve(const TransactionModelConfig& tmodel, const PaymentSpec& spec, const Accumulation& kappa);
    ReserveEstimate operator()(const TransactionTimeline& observed, double t) const;
    const StatewiseReserveTable& statewise() const { return valid_; }
    const OriginProbabilityTable& origins() const { return origin_; }

private:
    TransactionModelConfig tmodel_;
    PaymentSpec spec_;
    Accumulation kappa_;
    StatewiseReserveTable valid_;
    OriginProbabilityTable origin_;
};

ReserveEstimate rbns_reserve(const TransactionModelConfig& tmodel, const PaymentSpec& spec, const Accumulation& kappa,
                             const TransactionTimeline& observed, double t);

// Exact transaction-time reserve for the five-state Z chain itself, without
// the conditional-independence assumption. Solves jointly for the origin
// probabilities, the future-value functions W_k of the disabled Z states and
// the reserves of a, r and d.
class ExactTransactionReserve {
public:
    ExactTransactionReserve(const TransactionModelConfig& tmodel, const PaymentSpec& spec, const Accumulation& kappa,
                            double step = kOdeStep);

    // Reserve given Z_t = z and believed history h at t.
    double value(StateId z, const MppHistory& h, double t) const;
    double value(const TransactionTimeline& observed, double t) const;
    // Components at t: origin probabilities of disabled[j], W_j, V_a, V_r, V_d.
    std::array<double, 2> origin(int j, double t) const;
    double future(int j, double t) const;  // W_j
    double active(double t) const;
    double reactivated(double t) const;
    double dead(double t) const;
    const TransactionModelConfig& model() const { return tmodel_; }
    const PaymentSpec& payments() const { return spec_; }
    const Accumulation& accumulation() const { return kappa_; }
    const BackwardSolution& solution() const { return sol_; }

private:
    TransactionModelConfig tmodel_;
    PaymentSpec spec_;
    Accumulation kappa_;
    BackwardSolution sol_;
};

// ---------------------------------------------------------------- Monte Carlo

struct McOptions {
    std::size_t n = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 0;  // 0: hardware concurrency
};

// Valid time: Markov restart from (j, t).
ReserveEstimate mc_reserve(const IntensitySpec& model, const PaymentSpec& spec, const Accumulation& kappa, StateId j,
                           double t, const McOptions& opt);

enum class Conditioning {
    restart,        // continue the Z chain from (Z_t, carried history)
    accept_reject,  // re-simulate from the last observed jump and keep paths matching the prefix
};

enum class FutureLaw {
    z_chain,                   // X^eta is whatever the Z chain finally settles on
    conditional_independence,  // origin from the Z chain, valid-time future from the valid model
};

struct TransactionMcOptions : McOptions {
    Conditioning conditioning = Conditioning::restart;
    FutureLaw law = FutureLaw::z_chain;
    std::size_t max_attempts = 0;  // accept/reject budget; 0: 1000 * n
};

// Transaction time: averages the ledger-based P(t) over continuations of
// the observed prefix.
ReserveEstimate mc_reserve(const TransactionModelConfig& tmodel, const PaymentSpec& spec, const Accumulation& kappa,
                           const TransactionTimeline& observed, double t, const TransactionMcOptions& opt);

}  // namespace bitemp
