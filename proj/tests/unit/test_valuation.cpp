#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "bitemp/valuation.hpp"
#include "support.hpp"

using namespace bitemp;
using namespace testing_support;

namespace {

const double third = 1.0 / 3.0;

TransactionTimeline jessie() {
    TimelineBuilder b(FiveStateRoles{}, A);
    b.apply(third, I2);
    b.apply(0.5, I1);
    return std::move(b).finish(1.0, false);
}

// Onset at 0.25 first reported as i2; nothing else known.
TransactionTimeline reported_i2(double onset = 0.25) {
    return TransactionTimeline::create(A, MppHistory{A, {}}, {{onset, I2, MppHistory{A, {{onset, I2}}}}});
}

const FiveStateRates busy{0.2, 0.3, 0.05, 0.3, 0.1, 0.5, 0.05, 0.1};

}  // namespace

TEST_CASE("present value examples") {
    auto zero = Accumulation::constant(0.0);
    CashFlowLedger rate{{{0.0, 1.0, 1.0}}, {}};
    CHECK(present_value(rate, zero, 0.25) == doctest::Approx(0.75).epsilon(1e-14));
    CHECK(present_value(rate, zero, 1.0) == 0.0);
    CashFlowLedger atom{{}, {{0.5, 10.0, AtomTag::sojourn}}};
    CHECK(present_value(atom, Accumulation::constant(0.03), 0.4) == doctest::Approx(9.970045).epsilon(1e-7));
    CHECK(present_value(atom, Accumulation::constant(0.03), 0.4) ==
          doctest::Approx(10 * std::exp(-0.003)).epsilon(1e-14));
    // strictly prospective
    CHECK(present_value(atom, zero, 0.5) == 0.0);
}

TEST_CASE("Jessie representations and decomposition") {
    auto tl = jessie();
    auto spec = five_state_payments(1.0);
    auto zero = Accumulation::constant(0.0);
    const double pv = pv_by_representation(tl, spec, zero, 0.45, Timeline::valid);
    const double ptv = pv_by_representation(tl, spec, zero, 0.45, Timeline::transaction);
    CHECK(ptv - pv == doctest::Approx((2.0 - 1.0) * (0.45 - third)).epsilon(1e-12));
    CHECK(ptv - pv == doctest::Approx(0.116667).epsilon(1e-6));
    auto rep = decompose_present_value(tl, spec, zero, 0.45);
    CHECK(rep.correction == doctest::Approx(0.116667).epsilon(1e-6));
    CHECK(rep.correction_telescoped == doctest::Approx(rep.correction).epsilon(1e-12));
    CHECK(rep.pv_valid == doctest::Approx(pv).epsilon(1e-12));
    CHECK(rep.pv_transaction == doctest::Approx(ptv).epsilon(1e-12));
}

TEST_CASE("no misreporting means no correction") {
    TimelineBuilder b(FiveStateRoles{}, A);
    b.apply(0.3, I1);
    b.apply(0.6, R);
    auto tl = std::move(b).finish(1.0, false);
    auto spec = five_state_payments(1.0);
    for (double t : {0.1, 0.3, 0.45, 0.8}) {
        auto rep = decompose_present_value(tl, spec, Accumulation::constant(0.03), t);
        CHECK(rep.correction == 0.0);
        CHECK(rep.pv_transaction == doctest::Approx(rep.pv_valid).epsilon(1e-14));
    }
}

TEST_CASE("pathwise identities on simulated timelines") {
    auto model = five_state_transaction(10.0, busy, 0.8, 0.6);
    auto spec = five_state_payments(10.0);
    spec.set_transition(A, I1, PiecewiseConstant(3.0));
    spec.set_transition(I2, R, PiecewiseConstant({0.0, 5.0}, {1.0, 2.0}));
    spec.add_sojourn_atom(I1, 4.0, 2.5);
    Accumulation k(ForceOfInterest({0.0, 3.0}, {0.03, 0.01}));
    auto grid = TimeGrid::linspace(0.5, 10.0, 20);
    double worst1 = 0, worst2 = 0, worst3 = 0;
    for (std::uint64_t i = 0; i < 1000; ++i) {
        auto tl = simulate_timeline(model, 31, i);
        auto tled = transaction_ledger(tl, spec, k);
        auto vled = valid_ledger(tl.finalized(), spec);
        const double eta = absorption_time(tl);
        for (double t : grid) {
            auto rep = decompose_present_value(tl, spec, k, t);
            worst1 = std::max(worst1, std::abs(rep.pv_transaction - rep.pv_valid - rep.correction));
            worst2 = std::max(worst2, std::abs(rep.correction - rep.correction_telescoped));
            const double rep_t = pv_by_representation(tl, spec, k, t, Timeline::transaction);
            const double rep_v = pv_by_representation(tl, spec, k, t, Timeline::valid);
            worst3 = std::max({worst3, std::abs(rep_t - present_value(tled, k, t)),
                               std::abs(rep_v - present_value(vled, k, t))});
            if (t >= eta) {
                CHECK(std::abs(rep_t - present_value(vled, k, t)) <= 1e-9);
                CHECK(std::abs(rep_v - present_value(vled, k, t)) <= 1e-9);
            }
        }
    }
    CHECK(worst1 <= 1e-9);
    CHECK(worst2 <= 1e-10);
    CHECK(worst3 <= 1e-9);
}

TEST_CASE("single-decrement annuity") {
    IntensitySpec m(2);
    m.set(0, 1, PiecewiseConstant(0.02));
    for (double r : {0.0, 0.03})
        for (double T : {1.0, 10.0}) {
            PaymentSpec p(2, T);
            p.set_sojourn_rate(0, PiecewiseConstant(1.0));
            const double closed = r + 0.02 > 0 ? (1 - std::exp(-(r + 0.02) * T)) / (r + 0.02) : T;
            const double v = statewise_reserve(m, p, Accumulation::constant(r), 0, 0.0);
            CHECK(std::abs(v / closed - 1) <= 1e-10);
        }
    PaymentSpec p(2, 10.0);
    p.set_sojourn_rate(0, PiecewiseConstant(1.0));
    CHECK(statewise_reserve(m, p, Accumulation::constant(0.03), 0, 0.0) == doctest::Approx(7.869387).epsilon(1e-7));
    CHECK(statewise_reserve(m, p, Accumulation::constant(0.03), 1, 3.0) == 0.0);
    CHECK(statewise_reserve(m, p, Accumulation::constant(0.03), 0, 10.0) == 0.0);
    CHECK_THROWS(statewise_reserve(m, p, Accumulation::constant(0.03), 0, 10.5));
    p.set_duration_rate(0, PiecewiseConstant({0.0, 1.0}, {0.0, 1.0}));
    CHECK_THROWS_WITH(statewise_reserve(m, p, Accumulation::constant(0.03), 0, 0.0),
                      "duration-dependent payments unsupported");
}

TEST_CASE("sojourn atoms enter as jumps of the reserve") {
    IntensitySpec m(2);
    m.set(0, 1, PiecewiseConstant(0.1));
    PaymentSpec p(2, 2.0);
    p.add_sojourn_atom(0, 1.0, 5.0);
    StatewiseReserveTable tab(m, p, Accumulation::constant(0.02));
    // survive to 1 and receive 5, discounted
    CHECK(tab.value(0, 0.0) == doctest::Approx(5 * std::exp(-0.12)).epsilon(1e-12));
    CHECK(tab.value(0, 1.0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(tab.solution().left_value(1.0)(0) == doctest::Approx(5.0).epsilon(1e-12));
}

TEST_CASE("statewise reserves against a Thiele-free oracle") {
    // benefit 1 in i1 with exits at 0.33: V = (1 - e^{-(r+0.33)(T-t)})/(r+0.33)
    auto model = five_state_valid();
    auto spec = five_state_payments(10.0, 0.0, 1.0, 0.0);
    auto k = Accumulation::constant(0.03);
    for (double t : {0.0, 2.5, 9.0}) {
        const double c = 0.03 + 0.33;
        CHECK(statewise_reserve(model, spec, k, I1, t) == doctest::Approx((1 - std::exp(-c * (10 - t))) / c).epsilon(1e-10));
    }
}

TEST_CASE("benefits-only reserves are non-negative") {
    auto model = five_state_valid(busy);
    auto spec = five_state_payments(10.0, 0.0, 2.0, 1.0);
    spec.set_transition(A, D, PiecewiseConstant(5.0));
    StatewiseReserveTable tab(model, spec, Accumulation(ForceOfInterest({0.0, 4.0}, {0.05, -0.01})));
    for (double t : TimeGrid::linspace(0.0, 10.0, 201))
        for (StateId j = 0; j < 5; ++j) CHECK(tab.value(j, t) >= 0.0);
}

TEST_CASE("Monte Carlo agrees with the Thiele solution") {
    auto model = five_state_valid();
    auto spec = five_state_payments(10.0);
    spec.set_transition(A, I1, PiecewiseConstant(1.0));
    auto k = Accumulation::constant(0.03);
    const double ode = statewise_reserve(model, spec, k, A, 0.0);
    auto mc = mc_reserve(model, spec, k, A, 0.0, McOptions{1000000, 3, 0});
    CHECK(mc.method == Method::monte_carlo);
    CHECK(mc.n_paths == 1000000);
    CHECK(std::abs(mc.value - ode) <= 3 * mc.std_error);
    auto mid = mc_reserve(model, spec, k, I2, 4.0, McOptions{200000, 4, 0});
    CHECK(std::abs(mid.value - statewise_reserve(model, spec, k, I2, 4.0)) <= 3 * mid.std_error);
}

TEST_CASE("Monte Carlo bookkeeping") {
    IntensitySpec none(5);
    PaymentSpec p(5, 1.0);
    p.set_sojourn_rate(A, PiecewiseConstant(1.0));
    auto est = mc_reserve(none, p, Accumulation::constant(0.0), A, 0.3, McOptions{500, 1, 0});
    CHECK(est.value == doctest::Approx(0.7).epsilon(1e-14));
    CHECK(est.std_error == 0.0);

    auto model = five_state_valid(busy);
    auto spec = five_state_payments(10.0);
    auto k = Accumulation::constant(0.03);
    auto small = mc_reserve(model, spec, k, A, 0.0, McOptions{40000, 8, 0});
    auto big = mc_reserve(model, spec, k, A, 0.0, McOptions{80000, 8, 0});
    CHECK(small.std_error / big.std_error == doctest::Approx(std::sqrt(2.0)).epsilon(0.1));

    auto one = mc_reserve(model, spec, k, A, 1.0, McOptions{5000, 9, 1});
    auto four = mc_reserve(model, spec, k, A, 1.0, McOptions{5000, 9, 4});
    CHECK(one.value == four.value);
    CHECK(one.std_error == four.std_error);
    CHECK_THROWS(mc_reserve(model, spec, k, A, 11.0, McOptions{10, 1, 0}));
}

TEST_CASE("origin probabilities") {
    auto still = five_state_transaction(10.0, {}, 0.0, 0.0);
    for (double t : {0.0, 3.0, 9.9}) {
        auto p = origin_probabilities(still, I1, 0.0, t);
        CHECK(p[0] == 1.0);
        CHECK(p[1] == 0.0);
        CHECK(origin_probabilities(still, I2, 0.0, t)[1] == 1.0);
    }
    auto fast = five_state_transaction(10.0, FiveStateRates{0.04, 0.08, 0.02, 0.1, 0.0, 0.1, 0.0, 0.02}, 1e3, 1e3);
    for (double t : {0.0, 5.0, 9.0}) {
        CHECK(std::abs(origin_probabilities(fast, I1, 0.0, t)[0] - 0.5) <= 1e-3);
        CHECK(std::abs(origin_probabilities(fast, I2, 0.0, t)[0] - 0.5) <= 1e-3);
    }
    auto m = five_state_transaction(10.0);
    auto p = origin_probabilities(m, I2, 0.5, 2.0);
    CHECK(p[0] + p[1] == 1.0);
    CHECK_THROWS(origin_probabilities(m, A, 0.0, 1.0));
    CHECK_THROWS(origin_probabilities(m, I1, 2.0, 1.0));
}

namespace {

// From i1 at t: flips at nu against exits; the origin is the disabled state
// occupied at exit or at the horizon.
double origin_oracle(std::mt19937_64& gen, double t, double horizon, double nu, double exit1, double exit2, int n) {
    std::exponential_distribution<double> e(1.0);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int hits = 0;
    for (int i = 0; i < n; ++i) {
        int z = 0;
        double s = t;
        for (;;) {
            const double out = z == 0 ? exit1 : exit2;
            s += e(gen) / (out + nu);
            if (s > horizon || u(gen) * (out + nu) < out) break;
            z = 1 - z;
        }
        hits += z == 0;
    }
    return double(hits) / n;
}

}  // namespace

TEST_CASE("origin probabilities agree with a direct simulator") {
    auto m = five_state_transaction(10.0, FiveStateRates{0.04, 0.08, 0.02, 0.3, 0.02, 0.3, 0.02, 0.02}, 0.5, 0.5);
    std::mt19937_64 gen(2024);
    const int n = 200000;
    for (double t : {1.0, 8.0}) {
        const double p = origin_probabilities(m, I1, 0.0, t)[0];
        const double f = origin_oracle(gen, t, 10.0, 0.5, 0.32, 0.32, n);
        CHECK(std::abs(p - f) <= 3 * std::sqrt(p * (1 - p) / n));
    }
    // origin-dependent exits: i1 leaves at 0.4, i2 at 0.55
    auto asym = five_state_transaction(10.0, busy, 0.5, 0.5);
    const double p = origin_probabilities(asym, I1, 0.0, 2.0)[0];
    const double f = origin_oracle(gen, 2.0, 10.0, 0.5, 0.4, 0.55, n);
    CHECK(std::abs(p - f) <= 3 * std::sqrt(p * (1 - p) / n));
}

TEST_CASE("RBNS reserve collapses under symmetry") {
    FiveStateRates sym{0.04, 0.08, 0.02, 0.3, 0.03, 0.3, 0.03, 0.02};
    auto m = five_state_transaction(10.0, sym, 0.5, 0.5, true);
    auto spec = five_state_payments(10.0, -0.1, 1.5, 1.5);
    auto k = Accumulation::constant(0.03);
    RbnsReserve rbns(m, spec, k);
    auto obs = reported_i2();
    for (double t : {0.25, 0.5, 3.0, 9.5}) {
        auto est = rbns(obs, t);
        CHECK(est.method == Method::formula);
        CHECK(est.std_error == 0.0);
        CHECK(std::abs(est.value - statewise_reserve(m.valid, spec, k, I1, t)) <= 1e-8);
    }
}

TEST_CASE("equal benefit rates give the weighted average of statewise reserves") {
    auto m = five_state_transaction(10.0, busy, 0.8, 0.6, true);
    auto spec = five_state_payments(10.0, -0.1, 1.5, 1.5);
    auto k = Accumulation::constant(0.03);
    RbnsReserve rbns(m, spec, k);
    auto obs = reported_i2();
    for (double t : {0.5, 4.0}) {
        auto p = rbns.origins().at(I2, t);
        CHECK(p[0] + p[1] == 1.0);
        const double avg = p[0] * rbns.statewise().value(I1, t) + p[1] * rbns.statewise().value(I2, t);
        CHECK(rbns(obs, t).value == doctest::Approx(avg).epsilon(1e-13));
    }
    // outside the disabled block the formula is the statewise reserve
    CHECK(rbns(obs, 0.2).value == rbns.statewise().value(A, 0.2));
    CHECK_THROWS(RbnsReserve(five_state_transaction(10.0), spec, k));
}

TEST_CASE("RBNS formula against accept/reject Monte Carlo") {
    auto m = five_state_transaction(2.0, {}, 0.5, 0.5, true);
    auto spec = five_state_payments(2.0);
    auto k = Accumulation::constant(0.03);
    auto obs = reported_i2();
    const double formula = rbns_reserve(m, spec, k, obs, 0.5).value;
    TransactionMcOptions opt;
    opt.n = 20000;
    opt.seed = 77;
    opt.conditioning = Conditioning::accept_reject;
    opt.law = FutureLaw::conditional_independence;
    auto mc = mc_reserve(m, spec, k, obs, 0.5, opt);
    CHECK(mc.n_paths == 20000);
    CHECK(std::abs(mc.value - formula) <= 3 * mc.std_error);
}

TEST_CASE("exact transaction reserve against restart Monte Carlo") {
    auto m = five_state_transaction(3.0, busy, 0.8, 0.6);
    auto spec = five_state_payments(3.0);
    spec.set_transition(A, I1, PiecewiseConstant(2.0));
    auto k = Accumulation::constant(0.03);
    ExactTransactionReserve exact(m, spec, k);
    auto obs = reported_i2(0.4);
    TransactionMcOptions opt;
    opt.n = 100000;
    opt.seed = 5;
    for (double t : {0.2, 1.0}) {
        auto mc = mc_reserve(m, spec, k, obs, t, opt);
        CHECK(std::abs(mc.value - exact.value(obs, t)) <= 3 * mc.std_error);
    }
    // with no flips or misclassification the exact reserve is the statewise one
    auto plain = five_state_transaction(3.0, busy, 0.0, 0.0);
    plain.misclassification = {{{1.0, 0.0}, {0.0, 1.0}}};
    ExactTransactionReserve flat(plain, spec, k);
    StatewiseReserveTable tab(plain.valid, spec, k);
    for (double t : {0.0, 1.5}) {
        CHECK(flat.active(t) == doctest::Approx(tab.value(A, t)).epsilon(1e-10));
        CHECK(flat.future(0, t) == doctest::Approx(tab.value(I1, t)).epsilon(1e-10));
        CHECK(flat.future(1, t) == doctest::Approx(tab.value(I2, t)).epsilon(1e-10));
    }
}

TEST_CASE("unreachable conditioning is an error") {
    // onsets impossible, yet an onset was observed
    auto m = five_state_transaction(2.0, FiveStateRates{0.0, 0.0, 0.05, 0.3, 0.03, 0.5, 0.05, 0.02}, 0.5, 0.5, true);
    TransactionMcOptions opt;
    opt.n = 10;
    opt.conditioning = Conditioning::accept_reject;
    opt.max_attempts = 2000;
    CHECK_THROWS_WITH(mc_reserve(m, five_state_payments(2.0), Accumulation::constant(0.0), reported_i2(), 0.5, opt),
                      "conditioning event unreachable");
}
