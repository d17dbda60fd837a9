#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "bitemp/dynamics.hpp"
#include "support.hpp"

using namespace bitemp;
using namespace testing_support;

namespace {

const FiveStateRates busy{0.2, 0.3, 0.05, 0.3, 0.1, 0.5, 0.05, 0.1};

PaymentSpec rich_payments(double horizon) {
    auto spec = five_state_payments(horizon);
    spec.set_transition(A, I1, PiecewiseConstant(3.0));
    spec.set_transition(I2, R, PiecewiseConstant({0.0, 4.0}, {1.0, 0.5}));
    return spec;
}

// Compensator density of state j built from the table, for quadrature oracles.
double compensator(const IntensitySpec& m, const PaymentSpec& p, const StatewiseReserveTable& tab, StateId j, double s) {
    double c = 0;
    for (StateId k = 0; k < m.size(); ++k)
        if (k != j) c += m(j, k, s) * (p.transition(j, k)(s) + tab.value(k, s) - tab.value(j, s));
    return c;
}

}  // namespace

TEST_CASE("sums at risk") {
    auto model = five_state_valid();
    auto spec = five_state_payments(10.0);
    auto k = Accumulation::constant(0.03);
    StatewiseReserveTable tab(model, spec, k);
    CHECK_THROWS(sums_at_risk_markov(tab, spec, 0.5, A, A));
    auto death = sums_at_risk_markov(tab, spec, 0.5, A, D);
    CHECK(death.total == doctest::Approx(-tab.value(A, 0.5)).epsilon(1e-14));
    auto rich = rich_payments(10.0);
    StatewiseReserveTable rt(model, rich, k);
    auto s = sums_at_risk_markov(model, rich, k, 0.5, A, I1);
    CHECK(s.payment_diff == 3.0);
    CHECK(std::abs(s.total - (3.0 + rt.value(I1, 0.5) - rt.value(A, 0.5))) <= 1e-10);
    CHECK(s.total == s.payment_diff + s.reserve_diff);
}

TEST_CASE("deterministic paths have zero residuals") {
    IntensitySpec none(5);
    auto spec = five_state_payments(5.0);
    spec.add_sojourn_atom(A, 2.0, 4.0);
    auto k = Accumulation::constant(0.03);
    auto rp = residual_path(MppHistory{A, {}}, none, spec, k, TimeGrid::linspace(0.0, 5.0, 11));
    for (double m : rp.residuals) CHECK(m == 0.0);
    CHECK(rp.reconstruction_error <= 1e-9);

    auto rep = backtest_residuals(none, none, A, spec, k, TimeGrid::linspace(0.5, 5.0, 10), BacktestOptions{50, 1, 0});
    for (double m : rep.mean) CHECK(m == 0.0);
}

TEST_CASE("path without jumps follows the compensator") {
    auto model = five_state_valid(busy);
    auto spec = rich_payments(10.0);
    auto k = Accumulation(ForceOfInterest({0.0, 3.0}, {0.03, 0.01}));
    StatewiseReserveTable tab(model, spec, k);
    auto grid = TimeGrid::linspace(0.0, 6.0, 13);
    auto rp = residual_path(MppHistory{A, {}}, model, tab, spec, k, grid);
    for (std::size_t g = 0; g < grid.size(); ++g) {
        double oracle = 0;
        // the reserve is smooth inside each interest piece
        for (auto [a, b] : {std::pair{0.0, std::min(grid[g], 3.0)}, {3.0, std::max(grid[g], 3.0)}})
            if (b > a) oracle -= simpson([&](double s) { return compensator(model, spec, tab, A, s); }, a, b, 200);
        CHECK(std::abs(rp.residuals[g] - oracle) <= 1e-6);
    }
    CHECK(rp.residuals[0] == 0.0);
    CHECK(rp.reconstruction_error <= 1e-6);
}

TEST_CASE("a jump moves the residual by its sum at risk") {
    auto model = five_state_valid();
    auto spec = rich_payments(10.0);
    auto k = Accumulation::constant(0.03);
    StatewiseReserveTable tab(model, spec, k);
    TimeGrid grid({0.2, 0.4, 1.0});
    auto rp = residual_path(MppHistory{A, {{0.4, I1}}}, model, tab, spec, k, grid);
    auto quiet = residual_path(MppHistory{A, {}}, model, tab, spec, k, grid);
    CHECK(rp.residuals[0] == quiet.residuals[0]);
    const double jump = sums_at_risk_markov(tab, spec, 0.4, A, I1).total;
    CHECK(rp.residuals[1] - quiet.residuals[1] == doctest::Approx(jump).epsilon(1e-12));
    const double after = -simpson([&](double s) { return compensator(model, spec, tab, I1, s); }, 0.4, 1.0, 200);
    CHECK(std::abs(rp.residuals[2] - rp.residuals[1] - after) <= 1e-6);
    CHECK(rp.reconstruction_error <= 1e-6);
}

TEST_CASE("reconstruction and start value on simulated paths") {
    auto model = five_state_valid(busy);
    auto spec = rich_payments(10.0);
    spec.add_sojourn_atom(R, 5.0, 2.0);
    auto k = Accumulation(ForceOfInterest({0.0, 3.0}, {0.03, 0.01}));
    StatewiseReserveTable tab(model, spec, k);
    ValidResidualEngine engine(model, tab, spec, k);
    auto grid = TimeGrid::linspace(0.0, 10.0, 21);
    double worst = 0;
    for (std::uint64_t i = 0; i < 300; ++i) {
        auto rp = engine(simulate_path(model, A, 10.0, i), grid);
        CHECK(rp.residuals[0] == 0.0);
        worst = std::max(worst, rp.reconstruction_error);
    }
    CHECK(worst <= 1e-6);
    CHECK_THROWS(engine(MppHistory{A, {}}, TimeGrid({0.0, 11.0})));
}

TEST_CASE("residuals are linear in the payments") {
    auto model = five_state_valid(busy);
    auto spec = rich_payments(10.0);
    auto twice = spec.scaled(2.0);
    auto k = Accumulation::constant(0.03);
    auto grid = TimeGrid::linspace(0.5, 10.0, 20);
    StatewiseReserveTable t1(model, spec, k), t2(model, twice, k);
    for (std::uint64_t i = 0; i < 50; ++i) {
        auto path = simulate_path(model, A, 10.0, i);
        auto r1 = residual_path(path, model, t1, spec, k, grid);
        auto r2 = residual_path(path, model, t2, twice, k, grid);
        for (std::size_t g = 0; g < grid.size(); ++g) CHECK(r2.residuals[g] == 2.0 * r1.residuals[g]);
    }
}

TEST_CASE("backtest under the model and under doubled mortality") {
    auto model = five_state_valid();
    auto spec = five_state_payments(10.0);
    auto k = Accumulation::constant(0.03);
    auto grid = TimeGrid::linspace(0.5, 10.0, 20);
    auto null = backtest_residuals(model, model, A, spec, k, grid, BacktestOptions{10000, 20200101, 0});
    CHECK(null.n_paths == 10000);
    CHECK(null.inside_fraction() >= 0.9);

    FiveStateRates q;
    q.a_d *= 2;
    q.i1_d *= 2;
    q.i2_d *= 2;
    q.r_d *= 2;
    auto wrong = backtest_residuals(model, five_state_valid(q), A, spec, k, grid, BacktestOptions{10000, 20200101, 0});
    CHECK_FALSE(wrong.inside.back());
    CHECK(wrong.inside_fraction() < null.inside_fraction());

    auto again = backtest_residuals(model, model, A, spec, k, grid, BacktestOptions{10000, 20200101, 1});
    CHECK(again.mean == null.mean);
    CHECK_THROWS(backtest_residuals(model, model, A, spec, k, grid, BacktestOptions{1, 1, 0}));

    std::ostringstream out;
    write_residual_csv(out, null);
    CHECK(out.str().rfind("t,mean,std_error,inside_3sigma\n", 0) == 0);
}

TEST_CASE("transaction-time residuals") {
    auto m = five_state_transaction(1.0, busy, 0.8, 0.6);
    auto spec = five_state_payments(1.0);
    spec.set_transition(A, I1, PiecewiseConstant(2.0));
    auto k = Accumulation::constant(0.03);
    ExactTransactionReserve reserve(m, spec, k);
    auto grid = TimeGrid::linspace(0.0, 1.0, 11);
    double worst = 0, sum = 0, sum2 = 0;
    const int n = 200;
    for (int i = 0; i < n; ++i) {
        auto tl = simulate_timeline(m, 13, static_cast<std::uint64_t>(i));
        auto rp = residual_path(tl, reserve, grid);
        CHECK(rp.residuals[0] == 0.0);
        worst = std::max(worst, rp.reconstruction_error);
        sum += rp.residuals.back();
        sum2 += rp.residuals.back() * rp.residuals.back();
    }
    CHECK(worst <= 1e-6);
    const double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / (n - 1));
    CHECK(std::abs(mean) <= 3 * se);

    // the Jessie reclassification carries the backpay as payment
    TimelineBuilder b(FiveStateRoles{}, A);
    b.apply(1.0 / 3.0, I2);
    b.apply(0.5, I1);
    auto jessie = std::move(b).finish(1.0, false);
    auto rp = residual_path(jessie, reserve, grid);
    CHECK(rp.reconstruction_error <= 1e-6);
}
