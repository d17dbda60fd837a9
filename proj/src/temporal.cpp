#include "bitemp/temporal.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <stdexcept>
#include <system_error>

namespace bitemp {

Bound::Bound(double t) : t_(t) {
    if (!std::isfinite(t)) throw std::invalid_argument("non-finite time");
    if (t < 0) throw std::invalid_argument("negative time " + format_time(t));
}

double Bound::time() const {
    if (unbounded_) throw std::invalid_argument("non-finite time");
    return t_;
}

std::partial_ordering Bound::operator<=>(const Bound& o) const {
    if (unbounded_ && o.unbounded_) return std::partial_ordering::equivalent;
    if (unbounded_) return std::partial_ordering::greater;
    if (o.unbounded_) return std::partial_ordering::less;
    return t_ <=> o.t_;
}

PiecewiseConstant::PiecewiseConstant(double value) : b_{0.0}, v_{value} {
    if (!std::isfinite(value)) throw std::invalid_argument("non-finite rate");
}

PiecewiseConstant::PiecewiseConstant(std::vector<double> breakpoints, std::vector<double> values)
    : b_(std::move(breakpoints)), v_(std::move(values)) {
    if (b_.empty() || b_.size() != v_.size())
        throw std::invalid_argument("piecewise function needs one value per breakpoint");
    if (b_.front() != 0.0) throw std::invalid_argument("first breakpoint must be 0");
    for (std::size_t i = 1; i < b_.size(); ++i)
        if (!(b_[i] > b_[i - 1]) || !std::isfinite(b_[i]))
            throw std::invalid_argument("breakpoints must be finite and strictly increasing");
    for (double v : v_)
        if (!std::isfinite(v)) throw std::invalid_argument("non-finite rate");
}

std::size_t PiecewiseConstant::piece(double t) const {
    auto it = std::upper_bound(b_.begin(), b_.end(), t);
    return it == b_.begin() ? 0 : static_cast<std::size_t>(it - b_.begin()) - 1;
}

double PiecewiseConstant::operator()(double t) const { return v_[piece(t)]; }

bool PiecewiseConstant::is_zero() const {
    return std::all_of(v_.begin(), v_.end(), [](double v) { return v == 0.0; });
}

PiecewiseConstant PiecewiseConstant::scaled(double c) const {
    std::vector<double> v = v_;
    for (double& x : v) x *= c;
    return PiecewiseConstant(b_, std::move(v));
}

PiecewiseConstant weighted_sum(const std::vector<std::pair<double, PiecewiseConstant>>& terms) {
    std::vector<double> br{0.0};
    for (const auto& [w, f] : terms) br.insert(br.end(), f.breakpoints().begin(), f.breakpoints().end());
    std::sort(br.begin(), br.end());
    br.erase(std::unique(br.begin(), br.end()), br.end());
    std::vector<double> v(br.size(), 0.0);
    for (std::size_t i = 0; i < br.size(); ++i)
        for (const auto& [w, f] : terms) v[i] += w * f(br[i]);
    return PiecewiseConstant(std::move(br), std::move(v));
}

ForceOfInterest::ForceOfInterest(double rate) : r_(rate), cum_{0.0} {}

ForceOfInterest::ForceOfInterest(std::vector<double> breakpoints, std::vector<double> rates)
    : r_(std::move(breakpoints), std::move(rates)) {
    const auto& b = r_.breakpoints();
    const auto& v = r_.values();
    cum_.assign(b.size(), 0.0);
    for (std::size_t i = 1; i < b.size(); ++i) cum_[i] = cum_[i - 1] + v[i - 1] * (b[i] - b[i - 1]);
}

double ForceOfInterest::integral(double t) const {
    if (!std::isfinite(t)) throw std::invalid_argument("non-finite time");
    std::size_t i = r_.piece(t);
    return cum_[i] + r_.values()[i] * (t - r_.breakpoints()[i]);
}

double Accumulation::operator()(double t) const { return std::exp(force_.integral(t)); }

double Accumulation::inverse_integral(double a, double b) const {
    if (!(b > a)) return 0.0;
    const auto& bp = force_.rate().breakpoints();
    const auto& rv = force_.rate().values();
    double total = 0.0;
    std::size_t i = force_.rate().piece(a);
    double lo = a;
    while (lo < b) {
        double hi = (i + 1 < bp.size()) ? std::min(b, bp[i + 1]) : b;
        double len = hi - lo;
        double r = rv[i];
        double part = (r == 0.0) ? len : -std::expm1(-r * len) / r;
        total += std::exp(-force_.integral(lo)) * part;
        lo = hi;
        ++i;
    }
    return total;
}

double accumulate(const Accumulation& k, double t) { return k(t); }

double accumulate(const Accumulation& k, const Bound& t) { return k(t.time()); }

double discount_factor(const Accumulation& k, double t, double s) {
    if (!std::isfinite(t) || !std::isfinite(s)) throw std::invalid_argument("non-finite time");
    const auto& f = k.force();
    return std::exp(f.integral(t) - f.integral(s));
}

TimeGrid::TimeGrid(std::vector<double> points) : p_(std::move(points)) {
    for (std::size_t i = 0; i < p_.size(); ++i) {
        if (!std::isfinite(p_[i])) throw std::invalid_argument("grid points must be finite");
        if (i > 0 && !(p_[i] > p_[i - 1])) throw std::invalid_argument("grid must be strictly increasing");
    }
}

TimeGrid TimeGrid::linspace(double t0, double t1, std::size_t n) {
    if (n == 0) throw std::invalid_argument("grid needs at least one point");
    if (n == 1) return TimeGrid({t0});
    std::vector<double> p(n);
    for (std::size_t i = 0; i < n; ++i)
        p[i] = (i + 1 == n) ? t1 : t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(n - 1);
    return TimeGrid(std::move(p));
}

TimeGrid TimeGrid::parse(const std::string& text) {
    auto c1 = text.find(':');
    auto c2 = c1 == std::string::npos ? c1 : text.find(':', c1 + 1);
    if (c2 == std::string::npos) throw std::invalid_argument("grid must look like t0:t1:steps, got '" + text + "'");
    double t0 = parse_double(text.substr(0, c1));
    double t1 = parse_double(text.substr(c1 + 1, c2 - c1 - 1));
    double n = parse_double(text.substr(c2 + 1));
    if (n < 1 || n != std::floor(n)) throw std::invalid_argument("grid step count must be a positive integer");
    if (n > 1 && !(t1 > t0)) throw std::invalid_argument("grid end must exceed start");
    return linspace(t0, t1, static_cast<std::size_t>(n));
}

std::string format_time(double t) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, t);
    return std::string(buf, res.ptr);
}

std::string format_bound(const Bound& b) { return b.is_unbounded() ? "inf" : format_time(b.time()); }

double parse_double(const std::string& text) {
    std::size_t a = text.find_first_not_of(" \t\r");
    std::size_t b = text.find_last_not_of(" \t\r");
    if (a == std::string::npos) throw std::invalid_argument("empty number");
    const char* first = text.data() + a;
    const char* last = text.data() + b + 1;
    if (*first == '+') ++first;
    double v = 0.0;
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc() || res.ptr != last)
        throw std::invalid_argument("not a number: '" + text + "'");
    return v;
}

Bound parse_bound(const std::string& text) {
    std::size_t a = text.find_first_not_of(" \t\r");
    std::size_t b = text.find_last_not_of(" \t\r");
    if (a != std::string::npos && text.substr(a, b - a + 1) == "inf") return Bound::unbounded();
    return Bound(parse_double(text));
}

}  // namespace bitemp
