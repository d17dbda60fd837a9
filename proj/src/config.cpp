#include "bitemp/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace bitemp {

using nlohmann::json;

std::string format_issue(const std::string& file, const ConfigIssue& issue) {
    std::string s = file + ':' + std::to_string(issue.line) + ": ";
    if (!issue.pointer.empty()) s += issue.pointer + ": ";
    return s + issue.message;
}

IntensitySpec RunConfig::truth() const {
    IntensitySpec t = valid;
    for (const auto& [jk, rate] : run.truth) t.set(jk.first, jk.second, rate);
    return t;
}

namespace {

// Forward iterator over the config text that remembers how far the parser
// has read, so SAX events can be mapped to line numbers.
struct TrackingIterator {
    using iterator_category = std::forward_iterator_tag;
    using value_type = char;
    using difference_type = std::ptrdiff_t;
    using pointer = const char*;
    using reference = const char&;

    const char* p = nullptr;
    std::size_t* furthest = nullptr;
    const char* base = nullptr;

    reference operator*() const {
        auto off = static_cast<std::size_t>(p - base) + 1;
        if (off > *furthest) *furthest = off;
        return *p;
    }
    TrackingIterator& operator++() { ++p; return *this; }
    TrackingIterator operator++(int) { auto c = *this; ++p; return c; }
    bool operator==(const TrackingIterator& o) const { return p == o.p; }
};

class LineSax {
public:
    LineSax(const std::string& text, std::size_t* furthest, json& root) : text_(text), furthest_(furthest), dom_(root) {}

    bool null() { element(); return dom_.null(); }
    bool boolean(bool v) { element(); return dom_.boolean(v); }
    bool number_integer(json::number_integer_t v) { element(); return dom_.number_integer(v); }
    bool number_unsigned(json::number_unsigned_t v) { element(); return dom_.number_unsigned(v); }
    bool number_float(json::number_float_t v, const std::string& s) { element(); return dom_.number_float(v, s); }
    bool string(std::string& v) { element(); return dom_.string(v); }
    bool binary(json::binary_t& v) { element(); return dom_.binary(v); }
    bool start_object(std::size_t n) {
        element();
        frames_.push_back({false, 0, {}});
        return dom_.start_object(n);
    }
    bool key(std::string& k) {
        frames_.back().key = k;
        lines_[pointer()] = line();
        return dom_.key(k);
    }
    bool end_object() { frames_.pop_back(); return dom_.end_object(); }
    bool start_array(std::size_t n) {
        element();
        frames_.push_back({true, 0, {}});
        return dom_.start_array(n);
    }
    bool end_array() { frames_.pop_back(); return dom_.end_array(); }
    bool parse_error(std::size_t pos, const std::string&, const nlohmann::detail::exception& ex) {
        error_line_ = line_at(pos);
        error_ = ex.what();
        return false;
    }

    const std::map<std::string, std::size_t>& lines() const { return lines_; }
    std::size_t error_line() const { return error_line_; }
    const std::string& error() const { return error_; }

private:
    struct Frame {
        bool array;
        std::size_t index;
        std::string key;
    };

    std::size_t line_at(std::size_t consumed) const {
        std::size_t end = std::min(consumed > 0 ? consumed - 1 : 0, text_.size());
        return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(end), '\n'));
    }
    std::size_t line() const { return line_at(*furthest_); }

    std::string pointer() const {
        std::string s;
        for (const auto& f : frames_) {
            s += '/';
            if (f.array) {
                s += std::to_string(f.index);
            } else {
                for (char c : f.key) s += c == '~' ? "~0" : c == '/' ? "~1" : std::string(1, c);
            }
        }
        return s;
    }
    // Records the position of an array element; object members were
    // recorded at their key.
    void element() {
        if (frames_.empty()) {
            lines_[""] = line();
        } else if (frames_.back().array) {
            lines_[pointer()] = line();
            ++frames_.back().index;
        }
    }

    const std::string& text_;
    std::size_t* furthest_;
    nlohmann::detail::json_sax_dom_parser<json> dom_;
    std::vector<Frame> frames_;
    std::map<std::string, std::size_t> lines_;
    std::size_t error_line_ = 0;
    std::string error_;
};

// Walks the parsed document, collecting every violation instead of stopping
// at the first.
class Reader {
public:
    explicit Reader(const std::map<std::string, std::size_t>& lines) : lines_(lines) {}

    std::vector<ConfigIssue> issues;

    void fail(const std::string& ptr, const std::string& msg) {
        std::size_t line = 0;
        // Fall back to the closest enclosing value that has a line.
        for (std::string p = ptr;; p = p.substr(0, p.rfind('/'))) {
            auto it = lines_.find(p);
            if (it != lines_.end()) {
                line = it->second;
                break;
            }
            if (p.empty()) break;
        }
        issues.push_back({line, ptr, msg});
    }

    const json* member(const json& obj, const std::string& ptr, const char* name, bool required) {
        if (obj.contains(name)) return &obj[name];
        if (required) fail(ptr, std::string("missing field \"") + name + "\"");
        return nullptr;
    }

    std::optional<double> number(const json& v, const std::string& ptr) {
        if (!v.is_number()) {
            fail(ptr, "expected a number");
            return std::nullopt;
        }
        double x = v.get<double>();
        if (!std::isfinite(x)) {
            fail(ptr, "expected a finite number");
            return std::nullopt;
        }
        return x;
    }

    std::optional<std::string> text(const json& v, const std::string& ptr) {
        if (!v.is_string()) {
            fail(ptr, "expected a string");
            return std::nullopt;
        }
        return v.get<std::string>();
    }

    std::optional<StateId> state(const json& v, const std::string& ptr, const StateSpace& space) {
        auto s = text(v, ptr);
        if (!s) return std::nullopt;
        if (!space.contains(*s)) {
            fail(ptr, "undeclared state \"" + *s + "\"");
            return std::nullopt;
        }
        return space.id(*s);
    }

    std::optional<std::uint64_t> count(const json& v, const std::string& ptr) {
        if (!v.is_number_unsigned()) {
            fail(ptr, "expected a non-negative integer");
            return std::nullopt;
        }
        return v.get<std::uint64_t>();
    }

    // A number, or {"breakpoints": [...], "values": [...]}.
    std::optional<PiecewiseConstant> step(const json& v, const std::string& ptr, bool non_negative,
                                          const char* values_key = "values") {
        if (v.is_number()) {
            auto x = number(v, ptr);
            if (!x) return std::nullopt;
            if (non_negative && *x < 0) {
                fail(ptr, "negative rate");
                return std::nullopt;
            }
            return PiecewiseConstant(*x);
        }
        if (!v.is_object()) {
            fail(ptr, "expected a number or an object with breakpoints and values");
            return std::nullopt;
        }
        const json* b = member(v, ptr, "breakpoints", true);
        const json* vals = member(v, ptr, values_key, true);
        if (!b || !vals) return std::nullopt;
        auto bs = numbers(*b, ptr + "/breakpoints");
        auto vs = numbers(*vals, ptr + "/" + values_key);
        if (!bs || !vs) return std::nullopt;
        bool ok = true;
        if (non_negative)
            for (std::size_t i = 0; i < vs->size(); ++i)
                if ((*vs)[i] < 0) {
                    fail(ptr + "/" + values_key + "/" + std::to_string(i), "negative rate");
                    ok = false;
                }
        if (!ok) return std::nullopt;
        try {
            return PiecewiseConstant(*bs, *vs);
        } catch (const std::exception& e) {
            fail(ptr, e.what());
            return std::nullopt;
        }
    }

    std::optional<std::vector<double>> numbers(const json& v, const std::string& ptr) {
        if (!v.is_array()) {
            fail(ptr, "expected an array of numbers");
            return std::nullopt;
        }
        std::vector<double> out;
        bool ok = true;
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto x = number(v[i], ptr + "/" + std::to_string(i));
            if (x) out.push_back(*x);
            else ok = false;
        }
        if (!ok) return std::nullopt;
        return out;
    }

    const json* array(const json& obj, const std::string& ptr, const char* name, bool required) {
        const json* a = member(obj, ptr, name, required);
        if (a && !a->is_array()) {
            fail(ptr + "/" + name, "expected an array");
            return nullptr;
        }
        return a;
    }

    // Flags keys that no schema entry consumes; typos otherwise pass silently.
    void known(const json& obj, const std::string& ptr, std::initializer_list<const char*> keys) {
        for (const auto& [k, v] : obj.items())
            if (std::none_of(keys.begin(), keys.end(), [&](const char* x) { return k == x; }))
                fail(ptr + "/" + k, "unknown field");
    }

private:
    const std::map<std::string, std::size_t>& lines_;
};

void read_transitions(Reader& r, const json& arr, const std::string& ptr, const StateSpace& space,
                      std::vector<std::pair<std::pair<StateId, StateId>, PiecewiseConstant>>& out,
                      const char* value_key, bool non_negative) {
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const std::string p = ptr + "/" + std::to_string(i);
        const json& e = arr[i];
        if (!e.is_object()) {
            r.fail(p, "expected an object");
            continue;
        }
        r.known(e, p, {"from", "to", value_key});
        const json* f = r.member(e, p, "from", true);
        const json* t = r.member(e, p, "to", true);
        const json* v = r.member(e, p, value_key, true);
        std::optional<StateId> from, to;
        if (f) from = r.state(*f, p + "/from", space);
        if (t) to = r.state(*t, p + "/to", space);
        std::optional<PiecewiseConstant> rate;
        if (v) rate = r.step(*v, p + "/" + value_key, non_negative);
        if (from && to && *from == *to) {
            r.fail(p, "transition from a state to itself");
            continue;
        }
        if (from && to && rate) out.push_back({{*from, *to}, *rate});
    }
}

void read_model(Reader& r, const json& m, RunConfig& cfg, std::optional<double> horizon) {
    const std::string ptr = "/model";
    r.known(m, ptr, {"states", "intensities", "transaction"});
    const json* states = r.array(m, ptr, "states", true);
    if (states) {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < states->size(); ++i) {
            auto s = r.text((*states)[i], ptr + "/states/" + std::to_string(i));
            if (!s) continue;
            if (std::find(names.begin(), names.end(), *s) != names.end())
                r.fail(ptr + "/states/" + std::to_string(i), "duplicate state \"" + *s + "\"");
            else
                names.push_back(*s);
        }
        if (names.empty()) r.fail(ptr + "/states", "no states declared");
        cfg.states = StateSpace(names);
    }
    cfg.valid = IntensitySpec(cfg.states.size());
    if (const json* arr = r.array(m, ptr, "intensities", true)) {
        std::vector<std::pair<std::pair<StateId, StateId>, PiecewiseConstant>> rates;
        read_transitions(r, *arr, ptr + "/intensities", cfg.states, rates, "rate", true);
        for (auto& [jk, rate] : rates) cfg.valid.set(jk.first, jk.second, rate);
    }

    const json* tr = r.member(m, ptr, "transaction", false);
    if (!tr) return;
    const std::string tp = ptr + "/transaction";
    if (!tr->is_object()) {
        r.fail(tp, "expected an object");
        return;
    }
    r.known(*tr, tp, {"active", "disabled", "reactivated", "dead", "misclassification", "flip",
                      "conditional_independence"});
    TransactionModelConfig t;
    bool ok = true;
    auto role = [&](const char* name, StateId& out) {
        const json* v = r.member(*tr, tp, name, true);
        std::optional<StateId> s;
        if (v) s = r.state(*v, tp + "/" + name, cfg.states);
        if (s) out = *s;
        else ok = false;
    };
    role("active", t.roles.active);
    role("reactivated", t.roles.reactivated);
    role("dead", t.roles.dead);
    if (const json* d = r.array(*tr, tp, "disabled", true)) {
        if (d->size() != 2) {
            r.fail(tp + "/disabled", "expected exactly two disabled states");
            ok = false;
        } else {
            for (std::size_t k = 0; k < 2; ++k) {
                auto s = r.state((*d)[k], tp + "/disabled/" + std::to_string(k), cfg.states);
                if (s) t.roles.disabled[k] = *s;
                else ok = false;
            }
        }
    } else {
        ok = false;
    }
    if (const json* mc = r.member(*tr, tp, "misclassification", false)) {
        const std::string mp = tp + "/misclassification";
        if (!mc->is_array() || mc->size() != 2) {
            r.fail(mp, "expected a 2x2 matrix");
            ok = false;
        } else {
            for (std::size_t k = 0; k < 2; ++k) {
                auto row = r.numbers((*mc)[k], mp + "/" + std::to_string(k));
                if (!row || row->size() != 2) {
                    if (row) r.fail(mp + "/" + std::to_string(k), "expected two entries");
                    ok = false;
                    continue;
                }
                if ((*row)[0] < 0 || (*row)[1] < 0 || std::abs((*row)[0] + (*row)[1] - 1.0) > 1e-12) {
                    r.fail(mp + "/" + std::to_string(k), "row is not a probability vector");
                    ok = false;
                }
                t.misclassification[k] = {(*row)[0], (*row)[1]};
            }
        }
    }
    if (const json* f = r.array(*tr, tp, "flip", true)) {
        if (f->size() != 2) {
            r.fail(tp + "/flip", "expected [rate i1 -> i2, rate i2 -> i1]");
            ok = false;
        } else {
            for (std::size_t k = 0; k < 2; ++k) {
                auto s = r.step((*f)[k], tp + "/flip/" + std::to_string(k), true);
                if (s) t.flip[k] = *s;
                else ok = false;
            }
        }
    } else {
        ok = false;
    }
    if (const json* ci = r.member(*tr, tp, "conditional_independence", false)) {
        if (!ci->is_boolean()) r.fail(tp + "/conditional_independence", "expected a boolean");
        else t.conditional_independence = ci->get<bool>();
    }
    if (!ok || !r.issues.empty() || !horizon) return;
    t.valid = cfg.valid;
    t.horizon = *horizon;
    try {
        t.check();
    } catch (const std::exception& e) {
        r.fail(tp, e.what());
        return;
    }
    cfg.transaction = t;
}

std::optional<double> read_horizon(Reader& r, const json& p) {
    const json* h = r.member(p, "/payments", "horizon", true);
    if (!h) return std::nullopt;
    auto x = r.number(*h, "/payments/horizon");
    if (x && *x <= 0) {
        r.fail("/payments/horizon", "horizon must be positive");
        return std::nullopt;
    }
    return x;
}

void read_payments(Reader& r, const json& p, RunConfig& cfg, double horizon) {
    const std::string ptr = "/payments";
    r.known(p, ptr, {"horizon", "sojourn", "atoms", "transitions", "duration"});
    PaymentSpec spec(cfg.states.size(), horizon);
    auto state_rates = [&](const char* name, bool duration) {
        const json* arr = r.array(p, ptr, name, false);
        if (!arr) return;
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string ep = ptr + "/" + name + "/" + std::to_string(i);
            const json& e = (*arr)[i];
            if (!e.is_object()) {
                r.fail(ep, "expected an object");
                continue;
            }
            r.known(e, ep, {"state", "rate"});
            const json* s = r.member(e, ep, "state", true);
            const json* v = r.member(e, ep, "rate", true);
            std::optional<StateId> j;
            std::optional<PiecewiseConstant> rate;
            if (s) j = r.state(*s, ep + "/state", cfg.states);
            if (v) rate = r.step(*v, ep + "/rate", false);
            if (!j || !rate) continue;
            if (duration) spec.set_duration_rate(*j, *rate);
            else spec.set_sojourn_rate(*j, *rate);
        }
    };
    state_rates("sojourn", false);
    state_rates("duration", true);
    if (const json* arr = r.array(p, ptr, "atoms", false)) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const std::string ep = ptr + "/atoms/" + std::to_string(i);
            const json& e = (*arr)[i];
            if (!e.is_object()) {
                r.fail(ep, "expected an object");
                continue;
            }
            r.known(e, ep, {"state", "time", "amount"});
            const json* s = r.member(e, ep, "state", true);
            const json* tm = r.member(e, ep, "time", true);
            const json* a = r.member(e, ep, "amount", true);
            std::optional<StateId> j;
            std::optional<double> time, amount;
            if (s) j = r.state(*s, ep + "/state", cfg.states);
            if (tm) time = r.number(*tm, ep + "/time");
            if (a) amount = r.number(*a, ep + "/amount");
            if (!j || !time || !amount) continue;
            try {
                spec.add_sojourn_atom(*j, *time, *amount);
            } catch (const std::exception& ex) {
                r.fail(ep, ex.what());
            }
        }
    }
    if (const json* arr = r.array(p, ptr, "transitions", false)) {
        std::vector<std::pair<std::pair<StateId, StateId>, PiecewiseConstant>> amounts;
        read_transitions(r, *arr, ptr + "/transitions", cfg.states, amounts, "amount", false);
        for (auto& [jk, a] : amounts) spec.set_transition(jk.first, jk.second, a);
    }
    cfg.payments = spec;
}

// Either "rate" (a number or breakpoints/values) or "force", a list of
// {from, rate} segments starting at 0.
void read_interest(Reader& r, const json& i, RunConfig& cfg) {
    const std::string ptr = "/interest";
    r.known(i, ptr, {"rate", "force"});
    if (i.contains("rate") == i.contains("force")) {
        r.fail(ptr, "give exactly one of \"rate\" and \"force\"");
        return;
    }
    if (const json* v = r.member(i, ptr, "rate", false)) {
        auto pc = r.step(*v, ptr + "/rate", false);
        if (pc) cfg.kappa = Accumulation(ForceOfInterest(pc->breakpoints(), pc->values()));
        return;
    }
    const json* arr = r.array(i, ptr, "force", true);
    if (!arr) return;
    std::vector<double> from, rate;
    bool ok = true;
    for (std::size_t k = 0; k < arr->size(); ++k) {
        const std::string sp = ptr + "/force/" + std::to_string(k);
        const json& seg = (*arr)[k];
        if (!seg.is_object()) {
            r.fail(sp, "expected an object");
            ok = false;
            continue;
        }
        r.known(seg, sp, {"from", "rate"});
        const json* f = r.member(seg, sp, "from", true);
        const json* v = r.member(seg, sp, "rate", true);
        std::optional<double> fx, vx;
        if (f) fx = r.number(*f, sp + "/from");
        if (v) vx = r.number(*v, sp + "/rate");
        if (!fx || !vx) {
            ok = false;
            continue;
        }
        from.push_back(*fx);
        rate.push_back(*vx);
    }
    if (!ok) return;
    try {
        cfg.kappa = Accumulation(ForceOfInterest(from, rate));
    } catch (const std::exception& e) {
        r.fail(ptr + "/force", e.what());
    }
}

void read_run(Reader& r, const json& run, RunConfig& cfg) {
    const std::string ptr = "/run";
    r.known(run, ptr, {"seed", "n_paths", "grid", "t", "initial", "method", "state", "observed", "workers",
                       "conditioning", "law", "max_attempts", "truth"});
    RunSettings& s = cfg.run;
    if (const json* v = r.member(run, ptr, "seed", false))
        if (auto x = r.count(*v, ptr + "/seed")) s.seed = *x;
    if (const json* v = r.member(run, ptr, "n_paths", false))
        if (auto x = r.count(*v, ptr + "/n_paths")) {
            if (*x == 0) r.fail(ptr + "/n_paths", "n_paths must be positive");
            s.n_paths = *x;
        }
    if (const json* v = r.member(run, ptr, "workers", false))
        if (auto x = r.count(*v, ptr + "/workers")) s.workers = static_cast<unsigned>(*x);
    if (const json* v = r.member(run, ptr, "max_attempts", false))
        if (auto x = r.count(*v, ptr + "/max_attempts")) s.max_attempts = *x;
    if (const json* v = r.member(run, ptr, "grid", false))
        if (auto x = r.text(*v, ptr + "/grid")) {
            try {
                TimeGrid::parse(*x);
                s.grid = *x;
            } catch (const std::exception& e) {
                r.fail(ptr + "/grid", e.what());
            }
        }
    if (const json* v = r.member(run, ptr, "t", false))
        if (auto x = r.number(*v, ptr + "/t")) {
            if (*x < 0) r.fail(ptr + "/t", "evaluation time must be non-negative");
            s.t = *x;
        }
    if (const json* v = r.member(run, ptr, "initial", false)) s.initial = r.state(*v, ptr + "/initial", cfg.states);
    if (const json* v = r.member(run, ptr, "state", false)) s.state = r.state(*v, ptr + "/state", cfg.states);
    if (const json* v = r.member(run, ptr, "observed", false))
        if (auto x = r.text(*v, ptr + "/observed")) s.observed = *x;
    auto choice = [&](const char* name, std::string& out, std::initializer_list<const char*> allowed) {
        const json* v = r.member(run, ptr, name, false);
        if (!v) return;
        auto x = r.text(*v, ptr + "/" + name);
        if (!x) return;
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return *x == a; })) {
            std::string list;
            for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
            r.fail(ptr + "/" + name, "expected one of " + list);
            return;
        }
        out = *x;
    };
    choice("method", s.method, {"statewise", "rbns", "monte-carlo"});
    choice("conditioning", s.conditioning, {"restart", "accept_reject"});
    choice("law", s.law, {"z_chain", "conditional_independence"});
    if (const json* arr = r.array(run, ptr, "truth", false))
        read_transitions(r, *arr, ptr + "/truth", cfg.states, s.truth, "rate", true);
}

}  // namespace

ConfigLoad parse_config(const std::string& text, const std::string& path) {
    ConfigLoad out;
    json root;
    std::size_t furthest = 0;
    LineSax sax(text, &furthest, root);
    TrackingIterator first{text.data(), &furthest, text.data()};
    TrackingIterator last{text.data() + text.size(), &furthest, text.data()};
    if (!json::sax_parse(first, last, &sax)) {
        out.issues.push_back({sax.error_line(), "", sax.error()});
        return out;
    }
    Reader r(sax.lines());
    if (!root.is_object()) {
        r.fail("", "expected a JSON object");
        out.issues = r.issues;
        return out;
    }
    r.known(root, "", {"model", "payments", "interest", "run"});
    RunConfig cfg;
    cfg.path = path;
    const json* model = r.member(root, "", "model", true);
    const json* payments = r.member(root, "", "payments", true);
    std::optional<double> horizon;
    if (payments) {
        if (payments->is_object()) horizon = read_horizon(r, *payments);
        else r.fail("/payments", "expected an object");
    }
    if (model) {
        if (model->is_object()) read_model(r, *model, cfg, horizon);
        else r.fail("/model", "expected an object");
    }
    if (payments && payments->is_object() && horizon) read_payments(r, *payments, cfg, *horizon);
    if (const json* i = r.member(root, "", "interest", false)) {
        if (i->is_object()) read_interest(r, *i, cfg);
        else r.fail("/interest", "expected an object");
    }
    if (const json* run = r.member(root, "", "run", false)) {
        if (run->is_object()) read_run(r, *run, cfg);
        else r.fail("/run", "expected an object");
    }
    if (cfg.run.observed) {
        std::filesystem::path p(*cfg.run.observed);
        if (p.is_relative()) p = std::filesystem::path(path).parent_path() / p;
        cfg.run.observed = p.string();
    }
    out.issues = r.issues;
    if (out.issues.empty()) out.config = std::move(cfg);
    return out;
}

ConfigLoad load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

}  // namespace bitemp
