#include "bitemp/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "bitemp/parallel.hpp"

namespace bitemp {

// ---------------------------------------------------------------- present values

double present_value(const CashFlowLedger& ledger, const Accumulation& kappa, double t) {
    return kappa(t) * discounted_value(ledger, kappa, Window::after(t));
}

double pv_by_representation(const TransactionTimeline& tl, const PaymentSpec& spec, const Accumulation& kappa,
                            double t, Timeline which) {
    CashFlowLedger final_ledger = valid_ledger(tl.finalized(), spec);
    double total = discounted_value(final_ledger, kappa, Window::all());
    const Window past = Window::closed(0.0, t);
    double known = which == Timeline::valid ? discounted_value(final_ledger, kappa, past)
                                            : discounted_value(valid_ledger(as_of(tl, t, t), spec), kappa, past);
    return kappa(t) * (total - known);
}

PresentValueReport decompose_present_value(const TransactionTimeline& tl, const PaymentSpec& spec,
                                      const Accumulation& kappa, double t) {
    PresentValueReport rep;
    rep.t = t;
    CashFlowLedger final_ledger = valid_ledger(tl.finalized(), spec);
    rep.pv_valid = present_value(final_ledger, kappa, t);
    rep.pv_transaction = present_value(transaction_ledger(tl, spec, kappa), kappa, t);
    const Window past = Window::closed(0.0, t);
    const double k = kappa(t);
    rep.correction = k * (discounted_value(final_ledger, kappa, past) -
                          discounted_value(valid_ledger(as_of(tl, t, t), spec), kappa, past));
    double telescoped = 0.0;
    for (const auto& r : tl.revisions()) {
        if (r.time <= t) continue;
        const MppHistory& before = tl.carried_before(r.time);
        if (before == r.history) continue;
        telescoped += k * (discounted_value(valid_ledger(r.history, spec), kappa, past) -
                           discounted_value(valid_ledger(before, spec), kappa, past));
    }
    rep.correction_telescoped = telescoped;
    return rep;
}

// ---------------------------------------------------------------- reserves

std::string to_string(Method m) {
    switch (m) {
        case Method::closed_form: return "closed_form";
        case Method::ode: return "ode";
        case Method::monte_carlo: return "monte_carlo";
        case Method::formula: return "formula";
    }
    return "?";
}

namespace {

// Piece boundaries on [0, T]: every breakpoint of rates, payments and interest.
std::vector<double> piece_cuts(const IntensitySpec& model, const PaymentSpec& spec, const Accumulation& kappa,
                               std::vector<double> extra = {}) {
    const double T = spec.horizon();
    std::vector<double> cuts = spec.breakpoints();
    cuts.insert(cuts.end(), model.breakpoints().begin(), model.breakpoints().end());
    const auto& fb = kappa.force().rate().breakpoints();
    cuts.insert(cuts.end(), fb.begin(), fb.end());
    cuts.insert(cuts.end(), extra.begin(), extra.end());
    cuts.push_back(0.0);
    cuts.push_back(T);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    std::erase_if(cuts, [T](double c) { return c < 0 || c > T; });
    return cuts;
}

std::vector<double> atom_times(const PaymentSpec& spec) {
    std::vector<double> out;
    for (StateId j = 0; j < spec.size(); ++j)
        for (const auto& a : spec.sojourn_atoms(j))
            if (a.time <= spec.horizon()) out.push_back(a.time);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

double atom_at(const PaymentSpec& spec, StateId j, double s) {
    for (const auto& a : spec.sojourn_atoms(j))
        if (a.time == s) return a.amount;
    return 0.0;
}

BackwardSolution solve_thiele(const IntensitySpec& model, const PaymentSpec& spec, const Accumulation& kappa,
                              double step) {
    const std::size_t J = model.size();
    if (spec.size() != J) throw std::invalid_argument("payment spec and model disagree on the number of states");
    if (spec.duration_dependent()) throw std::runtime_error("duration-dependent payments unsupported");
    auto cuts = piece_cuts(model, spec, kappa);
    std::vector<LinearPiece> pieces;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double s = cuts[p];
        const double r = kappa.force().rate()(s);
        LinearPiece pc{s, cuts[p + 1], Eigen::MatrixXd::Zero(J, J), Eigen::VectorXd::Zero(J)};
        for (StateId j = 0; j < J; ++j) {
            pc.A(j, j) += r;
            pc.g(j) -= spec.sojourn_rate(j)(s);
            for (StateId k = 0; k < J; ++k) {
                if (k == j) continue;
                double lam = model(j, k, s);
                if (lam == 0.0) continue;
                pc.A(j, j) += lam;
                pc.A(j, k) -= lam;
                pc.g(j) -= lam * spec.transition(j, k)(s);
            }
        }
        pieces.push_back(std::move(pc));
    }
    std::vector<LinearJump> jumps;
    for (double s : atom_times(spec)) {
        LinearJump jp{s, Eigen::MatrixXd::Zero(J, J), Eigen::VectorXd::Zero(J)};
        for (StateId j = 0; j < J; ++j) jp.d(j) = atom_at(spec, j, s);
        jumps.push_back(std::move(jp));
    }
    return BackwardSolution(std::move(pieces), jumps, Eigen::VectorXd::Zero(J), step);
}

}  // namespace

StatewiseReserveTable::StatewiseReserveTable(const IntensitySpec& model, const PaymentSpec& spec,
                                             const Accumulation& kappa, double step)
    : horizon_(spec.horizon()), sol_(solve_thiele(model, spec, kappa, step)) {}

double StatewiseReserveTable::value(StateId j, double t, double) const {
    if (t > horizon_) throw std::invalid_argument("reserve time beyond horizon");
    if (j >= static_cast<std::size_t>(sol_.value(0.0).size())) throw std::invalid_argument("unknown state");
    return sol_.value(j, t);
}

double statewise_reserve(const IntensitySpec& model, const PaymentSpec& spec, const Accumulation& kappa, StateId j,
                         double t) {
    if (t > spec.horizon()) throw std::invalid_argument("reserve time beyond horizon");
    return StatewiseReserveTable(model, spec, kappa).value(j, t);
}

namespace {

// Exit intensity of disabled[j] towards every non-disabled state.
double exit_rate(const TransactionModelConfig& m, int j, double s) {
    double e = 0.0;
    StateId from = m.roles.disabled[j];
    for (StateId k = 0; k < m.valid.size(); ++k)
        if (k != from && !m.roles.is_disabled(k)) e += m.valid(from, k, s);
    return e;
}

// Rows/columns of the origin-probability block: P(j,k) at index 2j+k.
void fill_origin_block(const TransactionModelConfig& m, double s, Eigen::MatrixXd& A, Eigen::VectorXd& g) {
    for (int j = 0; j < 2; ++j) {
        const int l = 1 - j;
        const double nu = m.flip[j](s);
        const double e = exit_rate(m, j, s);
        for (int k = 0; k < 2; ++k) {
            const int row = 2 * j + k;
            A(row, row) += nu + e;
            A(row, 2 * l + k) -= nu;
            g(row) -= e * (j == k ? 1.0 : 0.0);
        }
    }
}

}  // namespace

OriginProbabilityTable::OriginProbabilityTable(const TransactionModelConfig& tmodel, double step)
    : roles_(tmodel.roles) {
    tmodel.check();
    std::vector<double> extra = tmodel.flip[0].breakpoints();
    extra.insert(extra.end(), tmodel.flip[1].breakpoints().begin(), tmodel.flip[1].breakpoints().end());
    extra.insert(extra.end(), tmodel.valid.breakpoints().begin(), tmodel.valid.breakpoints().end());
    extra.push_back(0.0);
    extra.push_back(tmodel.horizon);
    std::sort(extra.begin(), extra.end());
    extra.erase(std::unique(extra.begin(), extra.end()), extra.end());
    std::erase_if(extra, [&](double c) { return c > tmodel.horizon; });
    std::vector<LinearPiece> pieces;
    for (std::size_t p = 0; p + 1 < extra.size(); ++p) {
        LinearPiece pc{extra[p], extra[p + 1], Eigen::MatrixXd::Zero(4, 4), Eigen::VectorXd::Zero(4)};
        fill_origin_block(tmodel, extra[p], pc.A, pc.g);
        pieces.push_back(std::move(pc));
    }
    Eigen::VectorXd terminal(4);
    terminal << 1, 0, 0, 1;
    sol_ = BackwardSolution(std::move(pieces), {}, terminal, step);
}

std::array<double, 2> OriginProbabilityTable::at(StateId z_now, double t) const {
    if (!roles_.is_disabled(z_now)) throw std::invalid_argument("z_now is not a disabled state");
    const int j = roles_.disabled_index(z_now);
    Eigen::VectorXd p = sol_.value(t);
    double a = p(2 * j), b = p(2 * j + 1);
    double p0 = a / (a + b);
    return {p0, 1.0 - p0};
}

std::array<double, 2> origin_probabilities(const TransactionModelConfig& tmodel, StateId z_now, double onset,
                                           double t) {
    if (onset > t) throw std::invalid_argument("onset after evaluation time");
    if (!tmodel.roles.is_disabled(z_now)) throw std::invalid_argument("z_now is not a disabled state");
    return OriginProbabilityTable(tmodel).at(z_now, t);
}

double relabel_correction(const MppHistory& h, const FiveStateRoles& roles, StateId origin, const PaymentSpec& spec,
                          const Accumulation& kappa, double t) {
    auto n = onset_index(h, roles);
    if (!n) throw std::invalid_argument("history has no disability onset");
    if (h.events[*n].state == origin) return 0.0;
    const Window past = Window::closed(0.0, t);
    return kappa(t) * (discounted_value(valid_ledger(relabel_onset(h, roles, origin), spec), kappa, past) -
                       discounted_value(valid_ledger(h, spec), kappa, past));
}

RbnsReserve::RbnsReserve(const TransactionModelConfig& tmodel, const PaymentSpec& spec, const Accumulation& kappa)
    : tmodel_(tmodel), spec_(spec), kappa_(kappa), valid_(tmodel.valid, spec, kappa), origin_(tmodel) {
    if (!tmodel.conditional_independence)
        throw std::invalid_argument("the RBNS formula needs conditional_independence declared in the model");
}

ReserveEstimate RbnsReserve::operator()(const TransactionTimeline& observed, double t) const {
    const StateId z = observed.z_at(t);
    ReserveEstimate est{0.0, Method::formula, 0.0, 0};
    if (!tmodel_.roles.is_disabled(z)) {
        est.value = valid_.value(z, t);
        return est;
    }
    const MppHistory h = as_of(observed, t, t);
    auto p = origin_.at(z, t);
    for (int k = 0; k < 2; ++k) {
        StateId ik = tmodel_.roles.disabled[k];
        est.value += p[k] * (valid_.value(ik, t) + relabel_correction(h, tmodel_.roles, ik, spec_, kappa_, t));
    }
    return est;
}

ReserveEstimate rbns_reserve(const TransactionModelConfig& tmodel, const PaymentSpec& spec, const Accumulation& kappa,
                             const TransactionTimeline& observed, double t) {
    return RbnsReserve(tmodel, spec, kappa)(observed, t);
}

namespace {

// Component layout of the exact transaction-time system.
constexpr int kW = 4, kVa = 6, kVr = 7, kVd = 8, kDim = 9;

void check_five_state(const TransactionModelConfig& m) {
    const auto& R = m.roles;
    const std::size_t J = m.valid.size();
    for (StateId j = 0; j < J; ++j)
        for (StateId k = 0; k < J; ++k) {
            if (j == k || m.valid.rate(j, k).is_zero()) continue;
            bool ok = (j == R.active && (R.is_disabled(k) || k == R.dead)) ||
                      (R.is_disabled(j) && (k == R.reactivated || k == R.dead)) ||
                      (j == R.reactivated && k == R.dead);
            if (!ok) throw std::runtime_error("unsupported model class: transition outside the five-state example");
        }
    if (J != 5) throw std::runtime_error("unsupported model class: the exact reserve needs exactly five states");
}

}  // namespace

ExactTransactionReserve::ExactTransactionReserve(const TransactionModelConfig& tmodel, const PaymentSpec& spec,
                                                 const Accumulation& kappa, double step)
    : tmodel_(tmodel), spec_(spec), kappa_(kappa) {
    tmodel.check();
    check_five_state(tmodel);
    if (spec.duration_dependent()) throw std::runtime_error("duration-dependent payments unsupported");
    if (std::abs(spec.horizon() - tmodel.horizon) > 0)
        throw std::invalid_argument("payment horizon and model horizon differ");
    const auto& R = tmodel.roles;
    std::vector<double> extra = tmodel.flip[0].breakpoints();
    extra.insert(extra.end(), tmodel.flip[1].breakpoints().begin(), tmodel.flip[1].breakpoints().end());
    auto cuts = piece_cuts(tmodel.valid, spec, kappa, extra);
    std::vector<LinearPiece> pieces;
    for (std::size_t p = 0; p + 1 < cuts.size(); ++p) {
        const double s = cuts[p];
        LinearPiece pc{s, cuts[p + 1], Eigen::MatrixXd::Zero(kDim, kDim), Eigen::VectorXd::Zero(kDim)};
        auto& A = pc.A;
        auto& g = pc.g;
        const double r = kappa.force().rate()(s);
        fill_origin_block(tmodel, s, A, g);
        auto lam = [&](StateId j, StateId k) { return tmodel.valid(j, k, s); };
        auto pay = [&](StateId j, StateId k) { return spec.transition(j, k)(s); };
        for (int j = 0; j < 2; ++j) {
            const StateId ij = R.disabled[j];
            const int w = kW + j, wl = kW + 1 - j;
            const double nu = tmodel.flip[j](s);
            const double rho = lam(ij, R.reactivated), delta = lam(ij, R.dead);
            A(w, w) += r + nu + rho + delta;
            A(w, wl) -= nu;
            for (int k = 0; k < 2; ++k) A(w, 2 * j + k) -= spec.sojourn_rate(R.disabled[k])(s);
            A(w, kVr) -= rho;
            A(w, kVd) -= delta;
            g(w) -= rho * pay(ij, R.reactivated) + delta * pay(ij, R.dead);
        }
        {
            const StateId a = R.active;
            const double mu = lam(a, R.dead);
            A(kVa, kVa) += r + mu;
            g(kVa) -= spec.sojourn_rate(a)(s) + mu * pay(a, R.dead);
            A(kVa, kVd) -= mu;
            for (int m = 0; m < 2; ++m) {
                double q = 0.0;
                for (int k = 0; k < 2; ++k) q += lam(a, R.disabled[k]) * tmodel.misclassification[k][m];
                A(kVa, kVa) += q;
                A(kVa, kW + m) -= q;
                for (int k = 0; k < 2; ++k) A(kVa, 2 * m + k) -= q * pay(a, R.disabled[k]);
            }
        }
        {
            const double lrd = lam(R.reactivated, R.dead);
            A(kVr, kVr) += r + lrd;
            A(kVr, kVd) -= lrd;
            g(kVr) -= spec.sojourn_rate(R.reactivated)(s) + lrd * pay(R.reactivated, R.dead);
        }
        A(kVd, kVd) += r;
        g(kVd) -= spec.sojourn_rate(R.dead)(s);
        pieces.push_back(std::move(pc));
    }
    std::vector<LinearJump> jumps;
    for (double s : atom_times(spec)) {
        LinearJump jp{s, Eigen::MatrixXd::Zero(kDim, kDim), Eigen::VectorXd::Zero(kDim)};
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k) jp.D(kW + j, 2 * j + k) = atom_at(spec, R.disabled[k], s);
        jp.d(kVa) = atom_at(spec, R.active, s);
        jp.d(kVr) = atom_at(spec, R.reactivated, s);
        jp.d(kVd) = atom_at(spec, R.dead, s);
        jumps.push_back(std::move(jp));
    }
    Eigen::VectorXd terminal = Eigen::VectorXd::Zero(kDim);
    terminal(0) = 1.0;
    terminal(3) = 1.0;
    sol_ = BackwardSolution(std::move(pieces), jumps, terminal, step);
}

std::array<double, 2> ExactTransactionReserve::origin(int j, double t) const {
    Eigen::VectorXd y = sol_.value(t);
    return {y(2 * j), y(2 * j + 1)};
}

double ExactTransactionReserve::future(int j, double t) const { return sol_.value(kW + j, t); }
double ExactTransactionReserve::active(double t) const { return sol_.value(kVa, t); }
double ExactTransactionReserve::reactivated(double t) const { return sol_.value(kVr, t); }
double ExactTransactionReserve::dead(double t) const { return sol_.value(kVd, t); }

double ExactTransactionReserve::value(StateId z, const MppHistory& h, double t) const {
    const auto& R = tmodel_.roles;
    if (t > spec_.horizon()) throw std::invalid_argument("reserve time beyond horizon");
    Eigen::VectorXd y = sol_.value(t);
    if (z == R.active) return y(kVa);
    if (z == R.reactivated) return y(kVr);
    if (z == R.dead) return y(kVd);
    const int j = R.disabled_index(z);
    double v = y(kW + j);
    for (int k = 0; k < 2; ++k)
        v += y(2 * j + k) * relabel_correction(h, R, R.disabled[k], spec_, kappa_, t);
    return v;
}

double ExactTransactionReserve::value(const TransactionTimeline& observed, double t) const {
    return value(observed.z_at(t), as_of(observed, t, t), t);
}

// ---------------------------------------------------------------- Monte Carlo

namespace {

ReserveEstimate summarize(const std::vector<double>& x, Method m) {
    ReserveEstimate est{0.0, m, 0.0, x.size()};
    if (x.empty()) return est;
    auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    if (*lo == *hi) {
        est.value = *lo;
        return est;
    }
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    est.value = mean;
    est.std_error = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
    return est;
}

}  // namespace

ReserveEstimate mc_reserve(const IntensitySpec& model, const PaymentSpec& spec, const Accumulation& kappa, StateId j,
                           double t, const McOptions& opt) {
    if (opt.n == 0) throw std::invalid_argument("need at least one path");
    if (t > spec.horizon()) throw std::invalid_argument("reserve time beyond horizon");
    std::vector<double> x(opt.n);
    parallel_for(0, opt.n, opt.workers, [&](std::size_t i) {
        RngStream rng(opt.seed, Purpose::reserve_valid, i);
        MppHistory h = simulate_path(model, j, spec.horizon(), rng, t);
        x[i] = present_value(valid_ledger(h, spec), kappa, t);
    });
    return summarize(x, Method::monte_carlo);
}

namespace {

// Final origin implied by a Z continuation that starts in a disabled state:
// the last disabled state occupied before leaving the disabled block.
StateId settled_origin(const FiveStateRoles& R, StateId start, const MppHistory& zcont) {
    StateId origin = start;
    for (const auto& e : zcont.events) {
        if (!R.is_disabled(e.state)) break;
        origin = e.state;
    }
    return origin;
}

class TransactionSampler {
public:
    TransactionSampler(const TransactionModelConfig& m, const PaymentSpec& spec, const Accumulation& kappa,
                       const TransactionTimeline& observed, double t, FutureLaw law)
        : m_(m), spec_(spec), kappa_(kappa), zspec_(m.z_intensities()), observed_(observed.prefix(t)), t_(t),
          law_(law) {}

    // Restart from (Z_t, carried history).
    double restart(RngStream& rng) const { return complete(observed_, rng); }

    // Re-simulates from just before the last observed jump; nullopt on rejection.
    std::optional<double> accept_reject(RngStream& rng) const {
        const auto& revs = observed_.revisions();
        if (revs.empty()) {
            MppHistory probe = simulate_path(zspec_, observed_.initial_z(), m_.horizon, rng);
            if (!probe.events.empty() && probe.events.front().time <= t_) return std::nullopt;
            return finish_from(TimelineBuilder(m_.roles, observed_), observed_.initial_z(), probe, rng);
        }
        const auto& last = revs.back();
        const StateId before = revs.size() >= 2 ? revs[revs.size() - 2].z_state : observed_.initial_z();
        const double T = last.time;
        double total = zspec_.total(before, T);
        if (!(total > 0)) return std::nullopt;
        double u = rng.uniform() * total;
        StateId dest = before;
        for (StateId k = 0; k < zspec_.size(); ++k) {
            if (k == before) continue;
            double r = zspec_(before, k, T);
            if (r <= 0) continue;
            dest = k;
            if (u < r) break;
            u -= r;
        }
        if (dest != last.z_state) return std::nullopt;
        MppHistory cont = simulate_path(zspec_, dest, m_.horizon, rng, T);
        if (!cont.events.empty() && cont.events.front().time <= t_) return std::nullopt;
        TimelineBuilder b(m_.roles, observed_.prefix(std::nextafter(T, 0.0)));
        b.apply(T, dest);
        if (b.history() != last.history)
            throw std::runtime_error("observed revision is not reachable under the transaction model");
        return finish_from(std::move(b), dest, cont, rng);
    }

private:
    double complete(const TransactionTimeline& prefix, RngStream& rng) const {
        const StateId z = prefix.z_at(t_);
        MppHistory cont = simulate_path(zspec_, z, m_.horizon, rng, t_);
        return finish_from(TimelineBuilder(m_.roles, prefix), z, cont, rng);
    }

    double finish_from(TimelineBuilder b, StateId z, const MppHistory& cont, RngStream& rng) const {
        const auto& R = m_.roles;
        if (law_ == FutureLaw::conditional_independence && R.is_disabled(z)) {
            // The Z chain only decides the origin; the valid-time future is
            // drawn from the valid model in that origin.
            StateId origin = settled_origin(R, z, cont);
            MppHistory future = simulate_path(m_.valid, origin, m_.horizon, rng, t_);
            MppHistory h = relabel_onset(b.history(), R, origin);
            StateId zz = origin;
            for (const auto& e : future.events) {
                h.events.push_back(e);
                zz = e.state;
                b.revise(e.time, zz, h);
            }
            if (future.events.empty() && origin != z) b.revise(m_.horizon, origin, h);
            TransactionTimeline tl = std::move(b).finish(m_.horizon, zz == R.dead);
            return present_value(transaction_ledger(tl, spec_, kappa_), kappa_, t_);
        }
        for (const auto& e : cont.events) b.apply(e.time, e.state);
        bool absorbed = zspec_.is_absorbing(b.z());
        TransactionTimeline tl = std::move(b).finish(m_.horizon, absorbed);
        return present_value(transaction_ledger(tl, spec_, kappa_), kappa_, t_);
    }

    const TransactionModelConfig& m_;
    const PaymentSpec& spec_;
    const Accumulation& kappa_;
    IntensitySpec zspec_;
    TransactionTimeline observed_;
    double t_;
    FutureLaw law_;
};

}  // namespace

ReserveEstimate mc_reserve(const TransactionModelConfig& tmodel, const PaymentSpec& spec, const Accumulation& kappa,
                           const TransactionTimeline& observed, double t, const TransactionMcOptions& opt) {
    tmodel.check();
    if (opt.n == 0) throw std::invalid_argument("need at least one path");
    if (t > tmodel.horizon) throw std::invalid_argument("reserve time beyond horizon");
    if (opt.conditioning == Conditioning::restart) {
        TransactionSampler sampler(tmodel, spec, kappa, observed, t, opt.law);
        std::vector<double> x(opt.n);
        parallel_for(0, opt.n, opt.workers, [&](std::size_t i) {
            RngStream rng(opt.seed, Purpose::reserve_transaction, i);
            x[i] = sampler.restart(rng);
        });
        return summarize(x, Method::monte_carlo);
    }
    const std::size_t budget = opt.max_attempts ? opt.max_attempts : 1000 * opt.n;
    const std::size_t block = 8192;
    std::vector<double> accepted;
    TransactionSampler sampler(tmodel, spec, kappa, observed, t, opt.law);
    for (std::size_t start = 0; start < budget && accepted.size() < opt.n; start += block) {
        const std::size_t end = std::min(budget, start + block);
        std::vector<std::optional<double>> out(end - start);
        parallel_for(start, end, opt.workers, [&](std::size_t i) {
            RngStream rng(opt.seed, Purpose::conditional, i);
            out[i - start] = sampler.accept_reject(rng);
        });
        for (const auto& v : out) {
            if (accepted.size() == opt.n) break;
            if (v) accepted.push_back(*v);
        }
    }
    if (accepted.empty()) throw std::runtime_error("conditioning event unreachable");
    return summarize(accepted, Method::monte_carlo);
}

}  // namespace bitemp
