#pragma once

// Shared builders for the test binaries.

#include <cmath>
#include <functional>
#include <string>

#include "bitemp/cashflow.hpp"
#include "bitemp/mpp.hpp"
#include "bitemp/temporal.hpp"
#include "bitemp/transaction_model.hpp"

namespace testing_support {

using namespace bitemp;

enum : StateId { A = 0, I1 = 1, I2 = 2, R = 3, D = 4 };

inline StateSpace five_states() { return StateSpace({"a", "i1", "i2", "r", "d"}); }

struct FiveStateRates {
    double a_i1 = 0.04, a_i2 = 0.08, a_d = 0.02;
    double i1_r = 0.3, i1_d = 0.03, i2_r = 0.5, i2_d = 0.05, r_d = 0.02;
};

inline IntensitySpec five_state_valid(const FiveStateRates& q = {}) {
    IntensitySpec s(5);
    auto set = [&](StateId j, StateId k, double x) {
        if (x != 0.0) s.set(j, k, PiecewiseConstant(x));
    };
    set(A, I1, q.a_i1);
    set(A, I2, q.a_i2);
    set(A, D, q.a_d);
    set(I1, R, q.i1_r);
    set(I1, D, q.i1_d);
    set(I2, R, q.i2_r);
    set(I2, D, q.i2_d);
    set(R, D, q.r_d);
    return s;
}

inline TransactionModelConfig five_state_transaction(double horizon, const FiveStateRates& q = {}, double flip12 = 0.5,
                                                     double flip21 = 0.5, bool ci = false) {
    TransactionModelConfig m;
    m.valid = five_state_valid(q);
    m.misclassification = {{{0.7, 0.3}, {0.2, 0.8}}};
    m.flip = {PiecewiseConstant(flip12), PiecewiseConstant(flip21)};
    m.horizon = horizon;
    m.conditional_independence = ci;
    return m;
}

inline PaymentSpec five_state_payments(double horizon, double premium = -0.1, double b1 = 2.0, double b2 = 1.0) {
    PaymentSpec p(5, horizon);
    p.set_sojourn_rate(A, PiecewiseConstant(premium));
    p.set_sojourn_rate(I1, PiecewiseConstant(b1));
    p.set_sojourn_rate(I2, PiecewiseConstant(b2));
    return p;
}

// Composite Simpson on [a, b] with n (even) panels.
inline double simpson(const std::function<double(double)>& f, double a, double b, int n = 2000) {
    double h = (b - a) / n, s = f(a) + f(b);
    for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4 : 2);
    return s * h / 3;
}

inline bool close(double x, double y, double tol) { return std::abs(x - y) <= tol; }

}  // namespace testing_support
