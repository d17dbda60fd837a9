#pragma once

#include <vector>

#include <Eigen/Dense>

namespace bitemp {

// y' = A y + g on [from, to).
struct LinearPiece {
    double from = 0.0;
    double to = 0.0;
    Eigen::MatrixXd A;
    Eigen::VectorXd g;
};

// Jump condition y(t-) = y(t) + D y(t) + d.
struct LinearJump {
    double time = 0.0;
    Eigen::MatrixXd D;
    Eigen::VectorXd d;
};

// Backward RK4 solution of a piecewise linear system, stored on the step
// nodes and interpolated by cubic Hermite using the right-hand side.
class BackwardSolution {
public:
    BackwardSolution() = default;
    BackwardSolution(std::vector<LinearPiece> pieces, const std::vector<LinearJump>& jumps,
                     const Eigen::VectorXd& terminal, double max_step);

    double horizon() const { return nodes_.empty() ? 0.0 : nodes_.back(); }
    // Right-continuous value y(t); beyond the horizon the terminal value.
    Eigen::VectorXd value(double t) const;
    Eigen::VectorXd left_value(double t) const;  // y(t-)
    double value(std::size_t component, double t) const { return value(t)[static_cast<Eigen::Index>(component)]; }
    // A y(t) + g on the piece containing (t, t + dt).
    Eigen::VectorXd derivative(double t) const;
    const std::vector<double>& nodes() const { return nodes_; }

private:
    std::size_t interval(double t) const;  // n with nodes_[n] <= t < nodes_[n+1]

    std::vector<LinearPiece> pieces_;
    std::vector<double> nodes_;
    std::vector<std::size_t> piece_of_;  // piece index of interval n
    std::vector<Eigen::VectorXd> right_;
    std::vector<Eigen::VectorXd> left_;
    Eigen::VectorXd terminal_;
};

}  // namespace bitemp
