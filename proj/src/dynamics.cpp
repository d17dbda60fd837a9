#include "bitemp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "bitemp/parallel.hpp"

namespace bitemp {

SumsAtRisk sums_at_risk_markov(const StatewiseReserveTable& table, const PaymentSpec& spec, double t, StateId j,
                               StateId k) {
    if (j == k) throw std::invalid_argument("sums at risk need two distinct states");
    SumsAtRisk s;
    s.t = t;
    s.from = j;
    s.to = k;
    s.payment_diff = spec.transition(j, k)(t);
    s.reserve_diff = table.value(k, t) - table.value(j, t);
    s.total = s.payment_diff + s.reserve_diff;
    return s;
}

SumsAtRisk sums_at_risk_markov(const IntensitySpec& model, const PaymentSpec& spec, const Accumulation& kappa,
                               double t, StateId j, StateId k) {
    if (j == k) throw std::invalid_argument("sums at risk need two distinct states");
    return sums_at_risk_markov(StatewiseReserveTable(model, spec, kappa), spec, t, j, k);
}

namespace {

std::vector<double> merge_nodes(std::vector<double> nodes, double end) {
    std::sort(nodes.begin(), nodes.end());
    nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
    std::erase_if(nodes, [end](double x) { return x < 0 || x > end; });
    if (nodes.empty() || nodes.front() != 0.0) nodes.insert(nodes.begin(), 0.0);
    return nodes;
}

void check_grid(const TimeGrid& grid, double horizon) {
    if (grid.size() == 0) throw std::invalid_argument("empty residual grid");
    if (grid[0] < 0 || grid.points().back() > horizon) throw std::invalid_argument("residual grid outside [0, horizon]");
}

// Walks the integration nodes, adding jump sums at risk and subtracting the
// trapezoid compensator. `at_node(u)` handles a jump at u and returns its sum
// at risk (0 if none); `density(u, left)` is the compensator density at u
// (left limit of the reserve when `left`); `reserve(t)` and `paid(t)` feed
// the reconstruction check.
template <class AtNode, class Density, class Reserve, class Paid>
ResidualPath walk(const TimeGrid& grid, const std::vector<double>& nodes, const Accumulation& kappa, double v0,
                  AtNode&& at_node, Density&& density, Reserve&& reserve, Paid&& paid) {
    ResidualPath out;
    out.grid = grid;
    out.residuals.assign(grid.size(), 0.0);
    double M = 0.0, Md = 0.0;
    std::size_t g = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double u = nodes[i];
        double jump = at_node(u);
        M += jump;
        Md += jump / kappa(u);
        while (g < grid.size() && grid[g] == u) {
            out.residuals[g] = M;
            double rebuilt = kappa(u) * (v0 - paid(u) + Md);
            out.reconstruction_error = std::max(out.reconstruction_error, std::abs(rebuilt - reserve(u)));
            ++g;
        }
        if (i + 1 == nodes.size()) break;
        const double v = nodes[i + 1];
        double cu = density(u, v, false), cv = density(u, v, true);
        M -= 0.5 * (v - u) * (cu + cv);
        Md -= 0.5 * (v - u) * (cu / kappa(u) + cv / kappa(v));
    }
    return out;
}

}  // namespace

ValidResidualEngine::ValidResidualEngine(const IntensitySpec& model, const StatewiseReserveTable& table,
                                         const PaymentSpec& spec, const Accumulation& kappa)
    : model_(model), table_(table), spec_(spec), kappa_(kappa) {
    if (model.size() != spec.size()) throw std::invalid_argument("model and payments disagree on the state count");
    const double T = spec.horizon();
    std::vector<double> nodes = table.solution().nodes();
    auto pb = spec.breakpoints();
    nodes.insert(nodes.end(), pb.begin(), pb.end());
    nodes.insert(nodes.end(), model.breakpoints().begin(), model.breakpoints().end());
    nodes.push_back(T);
    nodes_ = merge_nodes(std::move(nodes), T);

    const std::size_t J = model.size();
    cum_.assign(J, std::vector<double>(nodes_.size(), 0.0));
    cumd_ = cum_;
    for (StateId j = 0; j < J; ++j)
        for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
            auto [p, d] = trapezoid(j, nodes_[i], nodes_[i + 1]);
            cum_[j][i + 1] = cum_[j][i] + p;
            cumd_[j][i + 1] = cumd_[j][i] + d;
        }
}

// Rates and payments are evaluated at `coeff_at`, the left end of the node
// interval, where they are constant up to the next node.
double ValidResidualEngine::density(StateId j, double s, double coeff_at, bool left) const {
    const auto& sol = table_.solution();
    Eigen::VectorXd V = left ? sol.left_value(s) : sol.value(s);
    double c = 0.0;
    for (StateId k = 0; k < model_.size(); ++k) {
        if (k == j) continue;
        double lam = model_(j, k, coeff_at);
        if (lam != 0.0) c += lam * (spec_.transition(j, k)(coeff_at) + V(k) - V(j));
    }
    return c;
}

std::pair<double, double> ValidResidualEngine::trapezoid(StateId j, double a, double b) const {
    if (b <= a) return {0.0, 0.0};
    double ca = density(j, a, a, false), cb = density(j, b, a, true);
    return {0.5 * (b - a) * (ca + cb), 0.5 * (b - a) * (ca / kappa_(a) + cb / kappa_(b))};
}

std::pair<double, double> ValidResidualEngine::integral(StateId j, double a, double b) const {
    if (b <= a) return {0.0, 0.0};
    auto ia = static_cast<std::size_t>(std::lower_bound(nodes_.begin(), nodes_.end(), a) - nodes_.begin());
    auto ib = static_cast<std::size_t>(std::upper_bound(nodes_.begin(), nodes_.end(), b) - nodes_.begin());
    if (ib == 0 || ia >= ib) return trapezoid(j, a, b);  // inside one node interval
    --ib;
    auto head = trapezoid(j, a, nodes_[ia]);
    auto tail = trapezoid(j, nodes_[ib], b);
    return {head.first + (cum_[j][ib] - cum_[j][ia]) + tail.first,
            head.second + (cumd_[j][ib] - cumd_[j][ia]) + tail.second};
}

ResidualPath ValidResidualEngine::operator()(const MppHistory& path, const TimeGrid& grid) const {
    check_grid(grid, spec_.horizon());
    const auto& sol = table_.solution();
    const CashFlowLedger ledger = valid_ledger(path, spec_);
    ResidualPath out;
    out.grid = grid;
    out.residuals.assign(grid.size(), 0.0);
    const double v0 = sol.value(path.initial, 0.0);
    double M = 0.0, Md = 0.0, cur = 0.0;
    StateId j = path.initial;
    std::size_t e = 0;
    auto advance = [&](double to) {
        auto [p, d] = integral(j, cur, to);
        M -= p;
        Md -= d;
        cur = to;
    };
    for (std::size_t g = 0; g < grid.size(); ++g) {
        const double tg = grid[g];
        for (; e < path.events.size() && path.events[e].time <= tg; ++e) {
            const double tau = path.events[e].time;
            const StateId k = path.events[e].state;
            advance(tau);
            Eigen::VectorXd V = sol.value(tau);
            double jump = spec_.transition(j, k)(tau) + V(k) - V(j);
            M += jump;
            Md += jump / kappa_(tau);
            j = k;
        }
        advance(tg);
        out.residuals[g] = M;
        double paid = discounted_value(ledger, kappa_, Window{0.0, tg, false, true});
        double rebuilt = kappa_(tg) * (v0 - paid + Md);
        out.reconstruction_error = std::max(out.reconstruction_error, std::abs(rebuilt - sol.value(j, tg)));
    }
    return out;
}

ResidualPath residual_path(const MppHistory& path, const IntensitySpec& model, const StatewiseReserveTable& table,
                           const PaymentSpec& spec, const Accumulation& kappa, const TimeGrid& grid) {
    return ValidResidualEngine(model, table, spec, kappa)(path, grid);
}

ResidualPath residual_path(const MppHistory& path, const IntensitySpec& model, const PaymentSpec& spec,
                           const Accumulation& kappa, const TimeGrid& grid) {
    StatewiseReserveTable table(model, spec, kappa);
    return residual_path(path, model, table, spec, kappa, grid);
}

namespace {

double atoms_at(const CashFlowLedger& l, double s) {
    double sum = 0.0;
    for (const auto& a : l.atoms)
        if (a.time == s) sum += a.amount;
    return sum;
}

}  // namespace

ResidualPath residual_path(const TransactionTimeline& tl, const ExactTransactionReserve& reserve,
                           const TimeGrid& grid) {
    const auto& m = reserve.model();
    const auto& spec = reserve.payments();
    const auto& kappa = reserve.accumulation();
    const auto& R = m.roles;
    check_grid(grid, spec.horizon());
    const IntensitySpec zspec = m.z_intensities();
    const double end = grid.points().back();
    std::vector<double> nodes = grid.points();
    for (const auto& r : tl.revisions()) nodes.push_back(r.time);
    const auto& ode = reserve.solution().nodes();
    nodes.insert(nodes.end(), ode.begin(), ode.end());
    auto pb = spec.breakpoints();
    nodes.insert(nodes.end(), pb.begin(), pb.end());
    nodes.insert(nodes.end(), zspec.breakpoints().begin(), zspec.breakpoints().end());
    nodes = merge_nodes(std::move(nodes), end);

    const CashFlowLedger tledger = transaction_ledger(tl, spec, kappa);
    StateId z = tl.initial_z();
    MppHistory h = tl.initial_history();
    CashFlowLedger hl = valid_ledger(h, spec);
    std::size_t next = 0;

    // Sum at risk of a jump (z, h) -> (zeta, h2) at s, excluding nothing:
    // payments at s under the new belief plus backpay, minus what the old
    // belief pays at s, plus the change of reserve.
    auto sum_at_risk = [&](double s, StateId zeta, const MppHistory& h2, double left_reserve) {
        CashFlowLedger l2 = valid_ledger(h2, spec);
        const Window before = Window::closed_open(0.0, s);
        double backpay =
            (h2 == h) ? 0.0 : kappa(s) * (discounted_value(l2, kappa, before) - discounted_value(hl, kappa, before));
        double payment = backpay + atoms_at(l2, s) - atoms_at(hl, s);
        return payment + reserve.value(zeta, h2, s) - left_reserve;
    };
    auto revised = [&](double s, StateId zeta) {
        if (R.is_disabled(z) && R.is_disabled(zeta)) return relabel_onset(h, R, zeta);
        MppHistory h2 = h;
        h2.events.push_back({s, zeta});
        return h2;
    };

    auto at_node = [&](double u) {
        double total = 0.0;
        while (next < tl.revisions().size() && tl.revisions()[next].time == u) {
            const auto& rv = tl.revisions()[next];
            ++next;
            if (rv.z_state == z && rv.history == h) continue;  // settlement without news
            total += sum_at_risk(u, rv.z_state, rv.history, reserve.value(z, h, u));
            z = rv.z_state;
            h = rv.history;
            hl = valid_ledger(h, spec);
        }
        return total;
    };
    auto density = [&](double u, double v, bool left) {
        const double s = left ? v : u;
        double base = reserve.value(z, h, s);
        double c = 0.0;
        for (StateId zeta = 0; zeta < zspec.size(); ++zeta) {
            if (zeta == z) continue;
            double lam = zspec(z, zeta, u);
            if (lam == 0.0) continue;
            c += lam * sum_at_risk(s, zeta, revised(s, zeta), base);
        }
        return c;
    };
    auto current = [&](double u) { return reserve.value(z, h, u); };
    auto paid = [&](double u) { return discounted_value(tledger, kappa, Window{0.0, u, false, true}); };
    return walk(grid, nodes, kappa, reserve.value(tl.initial_z(), tl.initial_history(), 0.0), at_node, density,
                current, paid);
}

double BacktestReport::inside_fraction() const {
    if (inside.empty()) return 0.0;
    return static_cast<double>(std::count(inside.begin(), inside.end(), true)) / static_cast<double>(inside.size());
}

BacktestReport backtest_residuals(const IntensitySpec& model, const IntensitySpec& truth, StateId initial,
                                  const PaymentSpec& spec, const Accumulation& kappa, const TimeGrid& grid,
                                  const BacktestOptions& opt) {
    if (opt.n < 2) throw std::invalid_argument("backtest needs at least two paths");
    check_grid(grid, spec.horizon());
    const StatewiseReserveTable table(model, spec, kappa);
    const ValidResidualEngine engine(model, table, spec, kappa);
    const std::size_t G = grid.size();
    std::vector<double> res(opt.n * G);
    parallel_for(0, opt.n, opt.workers, [&](std::size_t i) {
        RngStream rng(opt.seed, Purpose::backtest, i);
        MppHistory path = simulate_path(truth, initial, spec.horizon(), rng);
        ResidualPath rp = engine(path, grid);
        std::copy(rp.residuals.begin(), rp.residuals.end(), res.begin() + static_cast<std::ptrdiff_t>(i * G));
    });
    BacktestReport rep;
    rep.grid = grid;
    rep.n_paths = opt.n;
    const double n = static_cast<double>(opt.n);
    for (std::size_t g = 0; g < G; ++g) {
        double sum = 0.0;
        for (std::size_t i = 0; i < opt.n; ++i) sum += res[i * G + g];
        double mean = sum / n;
        double ss = 0.0;
        for (std::size_t i = 0; i < opt.n; ++i) ss += (res[i * G + g] - mean) * (res[i * G + g] - mean);
        double se = std::sqrt(ss / (n - 1) / n);
        rep.mean.push_back(mean);
        rep.std_error.push_back(se);
        rep.inside.push_back(std::abs(mean) <= 3 * se);
    }
    return rep;
}

void write_residual_csv(std::ostream& out, const BacktestReport& rep) {
    out << "t,mean,std_error,inside_3sigma\n";
    for (std::size_t g = 0; g < rep.grid.size(); ++g)
        out << format_time(rep.grid[g]) << ',' << format_time(rep.mean[g]) << ',' << format_time(rep.std_error[g])
            << ',' << (rep.inside[g] ? "true" : "false") << '\n';
}

}  // namespace bitemp
