#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "bitemp/bitemporal.hpp"
#include "bitemp/cashflow.hpp"
#include "bitemp/mpp.hpp"
#include "bitemp/temporal.hpp"
#include "bitemp/valuation.hpp"

namespace bitemp {

struct SumsAtRisk {
    double t = 0.0;
    StateId from = 0;
    StateId to = 0;
    double payment_diff = 0.0;
    double reserve_diff = 0.0;
    double total = 0.0;
};

SumsAtRisk sums_at_risk_markov(const StatewiseReserveTable& table, const PaymentSpec& spec, double t, StateId j,
                               StateId k);
SumsAtRisk sums_at_risk_markov(const IntensitySpec& model, const PaymentSpec& spec, const Accumulation& kappa,
                               double t, StateId j, StateId k);

struct ResidualPath {
    TimeGrid grid;
    std::vector<double> residuals;  // M at each grid point
    // max over the grid of |reserve rebuilt from the dynamics - reserve|
    double reconstruction_error = 0.0;
};

// Valid time: M for paths of the Markov model. The compensator densities
// are integrated once per state on the ODE nodes and shared by all paths.
// Holds references; the arguments must outlive the engine.
class ValidResidualEngine {
public:
    ValidResidualEngine(const IntensitySpec& model, const StatewiseReserveTable& table, const PaymentSpec& spec,
                        const Accumulation& kappa);
    ResidualPath operator()(const MppHistory& path, const TimeGrid& grid) const;

private:
    // Trapezoid integral of the compensator density of state j over [a, b],
    // plain and discounted.
    std::pair<double, double> integral(StateId j, double a, double b) const;
    std::pair<double, double> trapezoid(StateId j, double a, double b) const;
    double density(StateId j, double s, double coeff_at, bool left) const;

    const IntensitySpec& model_;
    const StatewiseReserveTable& table_;
    const PaymentSpec& spec_;
    const Accumulation& kappa_;
    std::vector<double> nodes_;
    std::vector<std::vector<double>> cum_, cumd_;
};

ResidualPath residual_path(const MppHistory& path, const IntensitySpec& model, const StatewiseReserveTable& table,
                           const PaymentSpec& spec, const Accumulation& kappa, const TimeGrid& grid);
ResidualPath residual_path(const MppHistory& path, const IntensitySpec& model, const PaymentSpec& spec,
                           const Accumulation& kappa, const TimeGrid& grid);

// Transaction time: M for a timeline of the five-state Z chain, with sums at
// risk that include backpay.
ResidualPath residual_path(const TransactionTimeline& tl, const ExactTransactionReserve& reserve,
                           const TimeGrid& grid);

struct BacktestReport {
    TimeGrid grid;
    std::vector<double> mean;
    std::vector<double> std_error;
    std::vector<bool> inside;  // |mean| <= 3 std_error
    std::size_t n_paths = 0;
    double inside_fraction() const;
};

struct BacktestOptions {
    std::size_t n = 10000;
    std::uint64_t seed = 1;
    unsigned workers = 0;
};

// Simulates paths from `truth` and computes residuals against reserves of
// `model`; pass the same spec twice to test under the null.
BacktestReport backtest_residuals(const IntensitySpec& model, const IntensitySpec& truth, StateId initial,
                                  const PaymentSpec& spec, const Accumulation& kappa, const TimeGrid& grid,
                                  const BacktestOptions& opt);

// Residual CSV: t,mean,std_error,inside_3sigma.
void write_residual_csv(std::ostream& out, const BacktestReport& rep);

}  // namespace bitemp
