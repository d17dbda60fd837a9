#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "bitemp/mpp.hpp"
#include "bitemp/random.hpp"
#include "support.hpp"

using namespace bitemp;

TEST_CASE("philox known answers") {
    // Random123 kat_vectors for philox4x32_10.
    auto z = philox4x32({0, 0, 0, 0}, {0, 0});
    CHECK(z == std::array<std::uint32_t, 4>{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
    auto f = philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff});
    CHECK(f == std::array<std::uint32_t, 4>{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
    auto p = philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0});
    CHECK(p == std::array<std::uint32_t, 4>{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams are keyed by seed, purpose and index") {
    RngStream a(1, Purpose::valid_path, 0), b(1, Purpose::valid_path, 0);
    for (int i = 0; i < 10; ++i) CHECK(a.next_u32() == b.next_u32());
    RngStream c(1, Purpose::valid_path, 1), d(1, Purpose::timeline, 0), e(2, Purpose::valid_path, 0);
    RngStream a2(1, Purpose::valid_path, 0);
    auto x = a2.next_u32();
    CHECK(x != c.next_u32());
    CHECK(x != d.next_u32());
    CHECK(x != e.next_u32());
}

TEST_CASE("uniforms stay inside (0, 1) and have the right moments") {
    RngStream r(9, Purpose::valid_path, 3);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        double u = r.uniform();
        REQUIRE(u > 0.0);
        REQUIRE(u < 1.0);
        s += u;
        s2 += u * u;
    }
    CHECK(std::abs(s / n - 0.5) < 4 * std::sqrt(1.0 / 12 / n));
    CHECK(std::abs(s2 / n - 1.0 / 3) < 0.003);
}

TEST_CASE("history truncation and evaluation") {
    MppHistory h{0, {{0.5, 1}, {1.2, 2}}};
    CHECK(history_at(h, 1.0).events.size() == 1);
    CHECK(history_at(h, 0.0).events.empty());
    CHECK(history_at(h, 2.0).events.size() == 2);

    MppHistory g{0, {{0.5, 1}}};
    CHECK(evaluate_pdp(g, 0.3).label == 0);
    CHECK(evaluate_pdp(g, 0.5).label == 1);
    CHECK(evaluate_pdp(g, 0.5).last_jump_time == 0.5);
    CHECK(evaluate_pdp(g, 7.0).label == 1);
    for (double t : {0.0, 0.4, 0.5, 0.9, 1.2, 5.0}) CHECK(evaluate_pdp(h, t) == evaluate_pdp(history_at(h, t), t));

    MppHistory c{0, {{0.4, 1}, {0.6, 2}}};
    CHECK(count_transitions(MppHistory{}, 0, 1, 10.0) == 0);
    CHECK(count_transitions(c, 1, 2, 0.5) == 0);
    CHECK(count_transitions(c, 1, 2, 0.6) == 1);
    CHECK(count_transitions(c, 0, 1, 0.6) == 1);
}

TEST_CASE("histories reject ties and non-positive times") {
    CHECK_THROWS((MppHistory{0, {{0.5, 1}, {0.5, 2}}}.check()));
    CHECK_THROWS((MppHistory{0, {{0.0, 1}}}.check()));
    CHECK_NOTHROW((MppHistory{0, {{0.5, 1}, {0.6, 2}}}.check()));
}

TEST_CASE("intensity specs") {
    IntensitySpec s(3);
    CHECK(s.is_zero());
    s.set(0, 1, PiecewiseConstant({0.0, 2.0}, {0.1, 0.3}));
    s.set(0, 2, PiecewiseConstant(0.2));
    CHECK(s.total(0, 1.0) == doctest::Approx(0.3));
    CHECK(s.total(0, 2.0) == doctest::Approx(0.5));
    CHECK(s.is_absorbing(2));
    CHECK_FALSE(s.is_absorbing(0));
    CHECK_THROWS(s.set(0, 0, PiecewiseConstant(1.0)));
    CHECK_THROWS(s.set(0, 1, PiecewiseConstant(-1.0)));
    CHECK_THROWS(s.set(0, 5, PiecewiseConstant(1.0)));
    StateSpace names({"a", "b"});
    CHECK_THROWS_WITH(names.id("zz"), "unknown state 'zz'");
}

TEST_CASE("zero rates give no events") {
    IntensitySpec s(2);
    for (std::uint64_t seed = 0; seed < 20; ++seed) CHECK(simulate_path(s, 0, 10.0, seed).events.empty());
}

TEST_CASE("first jump time of a single exit has mean 2 at rate 0.5") {
    IntensitySpec s(2);
    s.set(0, 1, PiecewiseConstant(0.5));
    const int n = 100000;
    double sum = 0;
    for (int i = 0; i < n; ++i) {
        auto h = simulate_path(s, 0, 100.0, static_cast<std::uint64_t>(i));
        REQUIRE(h.events.size() <= 1);
        // P(no jump before 100) is e^-50; treat as the horizon
        sum += h.events.empty() ? 100.0 : h.events[0].time;
    }
    CHECK(std::abs(sum / n - 2.0) <= 3 * 2.0 / std::sqrt(n));
}

TEST_CASE("competing risks split in proportion to the rates") {
    IntensitySpec s(3);
    s.set(0, 1, PiecewiseConstant(0.1));
    s.set(0, 2, PiecewiseConstant(0.3));
    const int n = 100000;
    int hits = 0, jumps = 0;
    for (int i = 0; i < n; ++i) {
        auto h = simulate_path(s, 0, 1000.0, static_cast<std::uint64_t>(i));
        if (h.events.empty()) continue;
        ++jumps;
        hits += h.events[0].state == 2;
    }
    REQUIRE(jumps == n);
    CHECK(std::abs(hits / double(n) - 0.75) <= 3 * std::sqrt(0.75 * 0.25 / n));
}

TEST_CASE("sojourns pass a Kolmogorov-Smirnov test against the total hazard") {
    IntensitySpec s(3);
    s.set(0, 1, PiecewiseConstant(0.7));
    s.set(0, 2, PiecewiseConstant(0.5));
    s.set(1, 2, PiecewiseConstant(2.0));
    const int n = 100000;
    std::vector<double> first, second;
    for (int i = 0; i < n; ++i) {
        RngStream rng(77, Purpose::valid_path, static_cast<std::uint64_t>(i));
        auto h = simulate_path(s, 0, 1e6, rng);
        first.push_back(h.events.at(0).time);
        if (h.events[0].state == 1) second.push_back(h.events.at(1).time - h.events[0].time);
    }
    auto ks = [](std::vector<double> x, double rate) {
        std::sort(x.begin(), x.end());
        double d = 0;
        const double m = static_cast<double>(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            double F = 1 - std::exp(-rate * x[i]);
            d = std::max({d, std::abs(F - i / m), std::abs((i + 1) / m - F)});
        }
        return d * std::sqrt(m);
    };
    // 0.001 critical value of the Kolmogorov distribution
    CHECK(ks(first, 1.2) < 1.949);
    CHECK(ks(second, 2.0) < 1.949);
}

TEST_CASE("simulated histories are strictly ordered and reproducible") {
    auto model = testing_support::five_state_valid();
    for (std::uint64_t seed = 0; seed < 2000; ++seed) {
        auto h = simulate_path(model, 0, 30.0, seed);
        CHECK_NOTHROW(h.check());
        for (const auto& e : h.events) CHECK(e.time <= 30.0);
        CHECK(h == simulate_path(model, 0, 30.0, seed));
    }
}

TEST_CASE("piecewise rates switch on at their breakpoint") {
    IntensitySpec s(2);
    s.set(0, 1, PiecewiseConstant({0.0, 1.0}, {0.0, 5.0}));
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        auto h = simulate_path(s, 0, 10.0, seed);
        REQUIRE(h.events.size() == 1);
        CHECK(h.events[0].time > 1.0);
    }
}

TEST_CASE("simulation from a later start produces no earlier events") {
    auto model = testing_support::five_state_valid();
    for (std::uint64_t i = 0; i < 200; ++i) {
        RngStream rng(5, Purpose::valid_path, i);
        auto h = simulate_path(model, 1, 10.0, rng, 4.0);
        for (const auto& e : h.events) CHECK(e.time > 4.0);
    }
}

TEST_CASE("explosive rates are reported") {
    IntensitySpec s(2);
    s.set(0, 1, PiecewiseConstant(1e9));
    s.set(1, 0, PiecewiseConstant(1e9));
    CHECK_THROWS_WITH_AS(simulate_path(s, 0, 10.0, 1), doctest::Contains("explosive"), std::runtime_error);
}

TEST_CASE("history CSV round trip") {
    auto model = testing_support::five_state_valid();
    auto names = testing_support::five_states();
    std::vector<MppHistory> paths;
    for (std::uint64_t i = 0; i < 50; ++i) paths.push_back(simulate_path(model, 0, 20.0, i));
    std::stringstream ss;
    write_history_csv(ss, paths, names);
    CHECK(ss.str().rfind("path_id,time,from_label,to_label\n", 0) == 0);
    auto back = read_history_csv(ss, names, 0, paths.size());
    CHECK(back == paths);
}
