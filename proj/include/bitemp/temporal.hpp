#pragma once

#include <compare>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

namespace bitemp {

// Either a finite, non-negative instant or the "unbounded" timestamp used
// for open valid-till / superseded columns.
class Bound {
public:
    Bound() = default;
    explicit Bound(double t);
    static Bound unbounded() { Bound b; b.unbounded_ = true; return b; }

    bool is_unbounded() const { return unbounded_; }
    double time() const;  // throws on the unbounded value

    bool operator==(const Bound& o) const {
        return unbounded_ == o.unbounded_ && (unbounded_ || t_ == o.t_);
    }
    std::partial_ordering operator<=>(const Bound& o) const;
    bool after(double t) const { return unbounded_ || t_ > t; }

private:
    double t_ = 0.0;
    bool unbounded_ = false;
};

// Right-continuous step function on [0, inf): value v[i] on [b[i], b[i+1]).
class PiecewiseConstant {
public:
    PiecewiseConstant() : PiecewiseConstant(0.0) {}
    explicit PiecewiseConstant(double value);
    PiecewiseConstant(std::vector<double> breakpoints, std::vector<double> values);

    double operator()(double t) const;
    std::size_t piece(double t) const;  // index of the piece containing t
    const std::vector<double>& breakpoints() const { return b_; }
    const std::vector<double>& values() const { return v_; }
    bool is_zero() const;
    bool is_constant() const { return v_.size() == 1; }

    PiecewiseConstant scaled(double c) const;

private:
    std::vector<double> b_;
    std::vector<double> v_;
};

// Pointwise sum of weighted step functions.
PiecewiseConstant weighted_sum(const std::vector<std::pair<double, PiecewiseConstant>>& terms);

// Piecewise-constant force of interest r(s).
class ForceOfInterest {
public:
    ForceOfInterest() : ForceOfInterest(0.0) {}
    explicit ForceOfInterest(double rate);
    ForceOfInterest(std::vector<double> breakpoints, std::vector<double> rates);

    const PiecewiseConstant& rate() const { return r_; }
    // Integral of r over [0, t].
    double integral(double t) const;

private:
    PiecewiseConstant r_;
    std::vector<double> cum_;  // integral up to each breakpoint
};

// kappa(t) = exp(int_0^t r).
class Accumulation {
public:
    Accumulation() = default;
    explicit Accumulation(ForceOfInterest force) : force_(std::move(force)) {}
    static Accumulation constant(double r) { return Accumulation(ForceOfInterest(r)); }

    const ForceOfInterest& force() const { return force_; }
    double operator()(double t) const;

    // int_a^b dv / kappa(v), exact.
    double inverse_integral(double a, double b) const;

private:
    ForceOfInterest force_;
};

double accumulate(const Accumulation& k, double t);
double accumulate(const Accumulation& k, const Bound& t);
double discount_factor(const Accumulation& k, double t, double s);

class TimeGrid {
public:
    TimeGrid() = default;
    explicit TimeGrid(std::vector<double> points);
    // n equally spaced points from t0 to t1 inclusive ("t0:t1:n").
    static TimeGrid linspace(double t0, double t1, std::size_t n);
    static TimeGrid parse(const std::string& text);

    const std::vector<double>& points() const { return p_; }
    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t i) const { return p_[i]; }
    auto begin() const { return p_.begin(); }
    auto end() const { return p_.end(); }

private:
    std::vector<double> p_;
};

// Interval on the time axis with explicit closedness; hi may be +inf.
struct Window {
    double lo = 0.0;
    double hi = std::numeric_limits<double>::infinity();
    bool lo_closed = true;
    bool hi_closed = false;

    static Window closed(double a, double b) { return {a, b, true, true}; }
    static Window closed_open(double a, double b) { return {a, b, true, false}; }
    static Window after(double t) { return {t, std::numeric_limits<double>::infinity(), false, false}; }
    static Window all() { return {}; }

    bool contains(double t) const {
        return (lo_closed ? t >= lo : t > lo) && (hi_closed ? t <= hi : t < hi);
    }
};

// Shortest decimal text that parses back to the same double.
std::string format_time(double t);
std::string format_bound(const Bound& b);
double parse_double(const std::string& text);
Bound parse_bound(const std::string& text);

}  // namespace bitemp
