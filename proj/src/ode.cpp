#include "bitemp/ode.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bitemp {

BackwardSolution::BackwardSolution(std::vector<LinearPiece> pieces, const std::vector<LinearJump>& jumps,
                                   const Eigen::VectorXd& terminal, double max_step)
    : pieces_(std::move(pieces)), terminal_(terminal) {
    if (pieces_.empty()) throw std::invalid_argument("backward system needs at least one piece");
    if (!(max_step > 0)) throw std::invalid_argument("step must be positive");
    for (std::size_t p = 0; p < pieces_.size(); ++p) {
        const auto& pc = pieces_[p];
        if (!(pc.to > pc.from)) throw std::invalid_argument("empty ODE piece");
        if (p > 0 && pc.from != pieces_[p - 1].to) throw std::invalid_argument("ODE pieces must be contiguous");
        double len = pc.to - pc.from;
        auto m = static_cast<std::size_t>(std::ceil(len / max_step - 1e-9));
        if (m == 0) m = 1;
        for (std::size_t i = 0; i < m; ++i) {
            nodes_.push_back(pc.from + len * static_cast<double>(i) / static_cast<double>(m));
            piece_of_.push_back(p);
        }
    }
    nodes_.push_back(pieces_.back().to);
    for (const auto& j : jumps) {
        bool on_boundary = j.time == pieces_.back().to;
        for (const auto& pc : pieces_) on_boundary |= j.time == pc.from;
        if (!on_boundary) throw std::invalid_argument("jump time is not a piece boundary");
    }

    auto apply_jump = [&](double t, const Eigen::VectorXd& y) {
        Eigen::VectorXd out = y;
        for (const auto& j : jumps)
            if (j.time == t) out += j.D * y + j.d;
        return out;
    };

    const std::size_t N = nodes_.size();
    right_.assign(N, Eigen::VectorXd());
    left_.assign(N, Eigen::VectorXd());
    right_[N - 1] = terminal;
    left_[N - 1] = apply_jump(nodes_[N - 1], terminal);
    for (std::size_t n = N - 1; n-- > 0;) {
        const auto& pc = pieces_[piece_of_[n]];
        auto f = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd { return pc.A * y + pc.g; };
        double h = -(nodes_[n + 1] - nodes_[n]);
        const Eigen::VectorXd& y = left_[n + 1];
        Eigen::VectorXd k1 = f(y);
        Eigen::VectorXd k2 = f(y + 0.5 * h * k1);
        Eigen::VectorXd k3 = f(y + 0.5 * h * k2);
        Eigen::VectorXd k4 = f(y + h * k3);
        right_[n] = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        left_[n] = apply_jump(nodes_[n], right_[n]);
    }
}

std::size_t BackwardSolution::interval(double t) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    return static_cast<std::size_t>(it - nodes_.begin()) - 1;
}

Eigen::VectorXd BackwardSolution::value(double t) const {
    if (t < 0 || !std::isfinite(t)) throw std::invalid_argument("reserve time outside [0, horizon]");
    if (t >= horizon()) return t == horizon() ? right_.back() : terminal_;
    std::size_t n = interval(t);
    if (t == nodes_[n]) return right_[n];
    const auto& pc = pieces_[piece_of_[n]];
    double H = nodes_[n + 1] - nodes_[n];
    double s = (t - nodes_[n]) / H;
    const Eigen::VectorXd& y0 = right_[n];
    const Eigen::VectorXd& y1 = left_[n + 1];
    Eigen::VectorXd f0 = pc.A * y0 + pc.g;
    Eigen::VectorXd f1 = pc.A * y1 + pc.g;
    double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * H * f0 + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * H * f1;
}

Eigen::VectorXd BackwardSolution::left_value(double t) const {
    if (t > horizon()) return terminal_;
    std::size_t n = interval(t);
    if (n < nodes_.size() && nodes_[n] == t) return left_[n];
    return value(t);
}

Eigen::VectorXd BackwardSolution::derivative(double t) const {
    std::size_t n = t >= horizon() ? nodes_.size() - 2 : interval(t);
    const auto& pc = pieces_[piece_of_[n]];
    return pc.A * value(t) + pc.g;
}

}  // namespace bitemp
