#pragma once

// Run configuration: flat `key = value` text with dotted sections.
//
//   # comment
//   domain.L = pi/2
//   coeffs.k = 2
//   stepper.scheme = cn
//
// Reals accept products and quotients of numbers and `pi` ("pi/2", "2*pi").
// Lists are comma separated. Unknown keys, repeated keys and bad values are
// errors that name the line and the field.

#include "benney/stepper.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace benney {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0, std::string field = {}, const std::string& origin = {})
        : std::runtime_error(prefix(origin, line, field) + what), line_(line), field_(std::move(field)) {}
    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    static std::string prefix(const std::string& origin, int line, const std::string& field) {
        std::string p = origin;
        if (line > 0) p += (p.empty() ? "line " : ":") + std::to_string(line);
        if (!field.empty()) p += (p.empty() ? "" : " ") + ("(" + field + ")");
        return p.empty() ? p : p + ": ";
    }
    int line_;
    std::string field_;
};

inline constexpr int config_max_modes = 64;

enum class IcKind { PolyBump, Gaussian, Zero };

struct RunConfig {
    // domain
    DomainKind domain_kind = DomainKind::BoundedInterval;
    double L = 1.0;
    // equation
    Coefficients coeffs{};
    NonlinearMode nonlinear = NonlinearMode::SkewSplit;
    // discretization
    int n = 128;
    double dt = 0.0;  // 0: default step
    double t_end = 0.5;
    StepperConfig stepper{};
    // initial condition
    IcKind ic_kind = IcKind::PolyBump;
    double amplitude = 0.1;
    double threshold_fraction = 0.0;  // > 0: amplitude = fraction * smallness threshold
    double x0 = 0.5;
    double sigma = 0.1;
    // diagnostics
    double fit_start = 0.0;
    double fit_end = 0.0;  // 0: t_end
    double envelope_tol = 0.05;
    double ut_tol = 0.10;
    // output
    std::string out_dir = "out";
    bool snapshots = false;
    std::uint64_t seed = 1;
    // verify
    int verify_samples = 200;
    int verify_seeds = 1;
    int verify_modes = 8;
    int verify_n = 128;
    // sweep axes; empty means the base value
    std::vector<double> sweep_L;
    std::vector<int> sweep_k;
    std::vector<double> sweep_amplitude;
    // galerkin-compare
    std::vector<int> galerkin_modes{8, 12, 16};
    double galerkin_rtol = 1e-8;
    int galerkin_reference_n = 512;

    bool operator==(const RunConfig& o) const;
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    if (trim(s).empty()) return out;
    std::size_t start = 0;
    while (true) {
        const auto comma = s.find(',', start);
        out.push_back(trim(std::string_view(s).substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return out;
}

inline double parse_atom(std::string_view a) {
    if (a == "pi") return std::numbers::pi;
    double v = 0.0;
    const auto* end = a.data() + a.size();
    auto [p, ec] = std::from_chars(a.data(), end, v);
    if (ec != std::errc() || p != end) throw std::invalid_argument("not a number: '" + std::string(a) + "'");
    return v;
}

/// number | pi, joined by * and /, with an optional leading sign.
inline double parse_real(const std::string& text) {
    std::string s;
    for (char c : text)
        if (c != ' ' && c != '\t') s += c;
    if (s.empty()) throw std::invalid_argument("empty value");
    double sign = 1.0;
    std::size_t i = 0;
    if (s[0] == '-' || s[0] == '+') {
        sign = s[0] == '-' ? -1.0 : 1.0;
        i = 1;
    }
    double value = 0.0;
    char op = '*';
    bool first = true;
    while (i <= s.size()) {
        std::size_t j = i;
        while (j < s.size() && s[j] != '*' && s[j] != '/') ++j;
        const double a = parse_atom(std::string_view(s).substr(i, j - i));
        if (first) value = a;
        else if (op == '*') value *= a;
        else value /= a;
        first = false;
        if (j >= s.size()) break;
        op = s[j];
        i = j + 1;
    }
    value *= sign;
    if (!std::isfinite(value)) throw std::invalid_argument("value is not finite");
    return value;
}

template <class Int>
Int parse_integer(const std::string& s) {
    Int v{};
    const auto t = trim(s);
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || p != t.data() + t.size() || t.empty())
        throw std::invalid_argument("not an integer: '" + t + "'");
    return v;
}

inline bool parse_bool(const std::string& s) {
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw std::invalid_argument("not a boolean: '" + s + "'");
}

inline std::string format_real(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

template <class T, class F>
std::string join(const std::vector<T>& v, F fmt) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt(v[i]);
    return s;
}

template <class E>
E parse_enum(const std::string& s, std::initializer_list<std::pair<const char*, E>> names) {
    std::string allowed;
    for (const auto& [name, e] : names) {
        if (s == name) return e;
        allowed += (allowed.empty() ? "" : ", ") + std::string(name);
    }
    throw std::invalid_argument("'" + s + "' is not one of " + allowed);
}

}  // namespace detail

inline std::string to_string(IcKind k) {
    switch (k) {
        case IcKind::PolyBump: return "polybump";
        case IcKind::Gaussian: return "gaussian";
        case IcKind::Zero: return "zero";
    }
    return "?";
}

/// One configurable key: name, default documentation, text accessors.
struct ConfigField {
    std::string key;
    std::string doc;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, const std::string&)> set;
};

inline const std::vector<ConfigField>& config_fields() {
    using namespace detail;
    auto real = [](double RunConfig::* m) {
        return std::pair{std::function<std::string(const RunConfig&)>([m](const RunConfig& c) { return format_real(c.*m); }),
                         std::function<void(RunConfig&, const std::string&)>(
                             [m](RunConfig& c, const std::string& s) { c.*m = parse_real(s); })};
    };
    auto integer = [](int RunConfig::* m) {
        return std::pair{std::function<std::string(const RunConfig&)>(
                             [m](const RunConfig& c) { return std::to_string(c.*m); }),
                         std::function<void(RunConfig&, const std::string&)>(
                             [m](RunConfig& c, const std::string& s) { c.*m = parse_integer<int>(s); })};
    };
    auto field = [](std::string key, std::string doc, auto accessors) {
        return ConfigField{std::move(key), std::move(doc), accessors.first, accessors.second};
    };
    auto custom = [](std::string key, std::string doc, std::function<std::string(const RunConfig&)> g,
                     std::function<void(RunConfig&, const std::string&)> s) {
        return ConfigField{std::move(key), std::move(doc), std::move(g), std::move(s)};
    };

    static const std::vector<ConfigField> fields = {
        custom("domain.kind", "bounded | halfline (default bounded)",
               [](const RunConfig& c) { return to_string(c.domain_kind); },
               [](RunConfig& c, const std::string& s) {
                   c.domain_kind = parse_enum<DomainKind>(
                       s, {{"bounded", DomainKind::BoundedInterval}, {"halfline", DomainKind::TruncatedHalfLine}});
               }),
        field("domain.L", "interval length or half-line truncation (default 1)", real(&RunConfig::L)),
        custom("coeffs.eta", "D^5 coefficient (default -1)", [](const RunConfig& c) { return format_real(c.coeffs.eta); },
               [](RunConfig& c, const std::string& s) { c.coeffs.eta = parse_real(s); }),
        custom("coeffs.beta", "D^4 coefficient (default 1)", [](const RunConfig& c) { return format_real(c.coeffs.beta); },
               [](RunConfig& c, const std::string& s) { c.coeffs.beta = parse_real(s); }),
        custom("coeffs.alpha", "D^3 coefficient (default 1)",
               [](const RunConfig& c) { return format_real(c.coeffs.alpha); },
               [](RunConfig& c, const std::string& s) { c.coeffs.alpha = parse_real(s); }),
        custom("coeffs.gamma", "D^2 coefficient (default 1)",
               [](const RunConfig& c) { return format_real(c.coeffs.gamma); },
               [](RunConfig& c, const std::string& s) { c.coeffs.gamma = parse_real(s); }),
        custom("coeffs.k", "nonlinearity exponent, 1..8 (default 1)",
               [](const RunConfig& c) { return std::to_string(c.coeffs.k); },
               [](RunConfig& c, const std::string& s) { c.coeffs.k = parse_integer<int>(s); }),
        custom("model.nonlinear", "skew | conservative | off (default skew)",
               [](const RunConfig& c) { return to_string(c.nonlinear); },
               [](RunConfig& c, const std::string& s) {
                   c.nonlinear = parse_enum<NonlinearMode>(s, {{"skew", NonlinearMode::SkewSplit},
                                                               {"conservative", NonlinearMode::Conservative},
                                                               {"off", NonlinearMode::Off}});
               }),
        field("grid.n", "number of cells, >= 16 (default 128)", integer(&RunConfig::n)),
        field("stepper.dt", "time step, 0 for 0.25 h min(1, 1/sup|u0|^k) (default 0)", real(&RunConfig::dt)),
        field("stepper.t_end", "final time (default 0.5)", real(&RunConfig::t_end)),
        custom("stepper.scheme", "ie | cn (default ie)", [](const RunConfig& c) {
                   return c.stepper.scheme == Scheme::CrankNicolson_AB2 ? std::string("cn") : std::string("ie");
               },
               [](RunConfig& c, const std::string& s) {
                   c.stepper.scheme = parse_enum<Scheme>(
                       s, {{"ie", Scheme::ImplicitEuler_ExplicitEuler}, {"cn", Scheme::CrankNicolson_AB2}});
               }),
        custom("stepper.tolerance", "backward error bound of the banded solve, <= 1e-10 (default 1e-10)",
               [](const RunConfig& c) { return format_real(c.stepper.tolerance); },
               [](RunConfig& c, const std::string& s) { c.stepper.tolerance = parse_real(s); }),
        custom("stepper.refinement_passes", "iterative refinement passes (default 2)",
               [](const RunConfig& c) { return std::to_string(c.stepper.refinement_passes); },
               [](RunConfig& c, const std::string& s) { c.stepper.refinement_passes = parse_integer<int>(s); }),
        custom("stepper.startup_steps", "cn only: leading steps split into two implicit half steps (default 0)",
               [](const RunConfig& c) { return std::to_string(c.stepper.startup_steps); },
               [](RunConfig& c, const std::string& s) { c.stepper.startup_steps = parse_integer<int>(s); }),
        custom("stepper.snapshot_stride", "keep every stride-th state, 0 keeps first and last (default 0)",
               [](const RunConfig& c) { return std::to_string(c.stepper.snapshot_stride); },
               [](RunConfig& c, const std::string& s) { c.stepper.snapshot_stride = parse_integer<int>(s); }),
        custom("stepper.blowup_factor", "blow-up ceiling as a multiple of sup|u0| (default 1e6)",
               [](const RunConfig& c) { return format_real(c.stepper.blowup_factor); },
               [](RunConfig& c, const std::string& s) { c.stepper.blowup_factor = parse_real(s); }),
        custom("ic.kind", "polybump | gaussian | zero (default polybump)",
               [](const RunConfig& c) { return to_string(c.ic_kind); },
               [](RunConfig& c, const std::string& s) {
                   c.ic_kind = parse_enum<IcKind>(
                       s, {{"polybump", IcKind::PolyBump}, {"gaussian", IcKind::Gaussian}, {"zero", IcKind::Zero}});
               }),
        field("ic.amplitude", "amplitude c of c x^2 (L-x)^3 (default 0.1)", real(&RunConfig::amplitude)),
        field("ic.threshold_fraction", "> 0 replaces the amplitude by this fraction of the smallness threshold (default 0)",
              real(&RunConfig::threshold_fraction)),
        field("ic.x0", "gaussian centre as a fraction of L (default 0.5)", real(&RunConfig::x0)),
        field("ic.sigma", "gaussian width as a fraction of L (default 0.1)", real(&RunConfig::sigma)),
        field("diagnostics.fit_start", "decay fit window start (default 0)", real(&RunConfig::fit_start)),
        field("diagnostics.fit_end", "decay fit window end, 0 for t_end (default 0)", real(&RunConfig::fit_end)),
        field("diagnostics.envelope_tol", "slack of the energy envelopes (default 0.05)", real(&RunConfig::envelope_tol)),
        field("diagnostics.ut_tol", "slack of the u_t envelopes (default 0.10)", real(&RunConfig::ut_tol)),
        custom("output.dir", "output directory (default out)", [](const RunConfig& c) { return c.out_dir; },
               [](RunConfig& c, const std::string& s) {
                   if (s.empty()) throw std::invalid_argument("empty directory");
                   c.out_dir = s;
               }),
        custom("output.snapshots", "write binary state snapshots (default false)",
               [](const RunConfig& c) { return std::string(c.snapshots ? "true" : "false"); },
               [](RunConfig& c, const std::string& s) { c.snapshots = parse_bool(s); }),
        custom("run.seed", "seed of the randomized oracles (default 1)",
               [](const RunConfig& c) { return std::to_string(c.seed); },
               [](RunConfig& c, const std::string& s) { c.seed = parse_integer<std::uint64_t>(s); }),
        field("verify.samples", "samples per seed (default 200)", integer(&RunConfig::verify_samples)),
        field("verify.seeds", "consecutive seeds starting at run.seed (default 1)", integer(&RunConfig::verify_seeds)),
        field("verify.modes", "bump-basis modes per sample (default 8)", integer(&RunConfig::verify_modes)),
        field("verify.n", "grid cells of the samples (default 128)", integer(&RunConfig::verify_n)),
        custom("sweep.L", "list of lengths (default: domain.L)",
               [](const RunConfig& c) { return join(c.sweep_L, format_real); },
               [](RunConfig& c, const std::string& s) {
                   c.sweep_L.clear();
                   for (const auto& v : split_list(s)) c.sweep_L.push_back(parse_real(v));
               }),
        custom("sweep.k", "list of exponents (default: coeffs.k)",
               [](const RunConfig& c) { return join(c.sweep_k, [](int v) { return std::to_string(v); }); },
               [](RunConfig& c, const std::string& s) {
                   c.sweep_k.clear();
                   for (const auto& v : split_list(s)) c.sweep_k.push_back(parse_integer<int>(v));
               }),
        custom("sweep.amplitude", "list of amplitudes (default: ic.amplitude)",
               [](const RunConfig& c) { return join(c.sweep_amplitude, format_real); },
               [](RunConfig& c, const std::string& s) {
                   c.sweep_amplitude.clear();
                   for (const auto& v : split_list(s)) c.sweep_amplitude.push_back(parse_real(v));
               }),
        custom("galerkin.modes", "truncation sizes (default 8,12,16)",
               [](const RunConfig& c) { return join(c.galerkin_modes, [](int v) { return std::to_string(v); }); },
               [](RunConfig& c, const std::string& s) {
                   c.galerkin_modes.clear();
                   for (const auto& v : split_list(s)) c.galerkin_modes.push_back(parse_integer<int>(v));
               }),
        field("galerkin.rtol", "local error tolerance, <= 1e-8 (default 1e-8)", real(&RunConfig::galerkin_rtol)),
        field("galerkin.reference_n", "cells of the finite-difference reference (default 512)",
              integer(&RunConfig::galerkin_reference_n)),
    };
    return fields;
}

/// Canonical text: every key in table order, reals at 17 significant digits.
inline std::string serialize(const RunConfig& c) {
    std::string s;
    for (const auto& f : config_fields()) s += f.key + " = " + f.get(c) + "\n";
    return s;
}

inline bool RunConfig::operator==(const RunConfig& o) const { return serialize(*this) == serialize(o); }

/// FNV-1a over the canonical text.
inline std::uint64_t config_hash(const RunConfig& c) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : serialize(c)) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hash_hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline void validate(const RunConfig& c) {
    auto fail = [](const std::string& field, const std::string& what) { throw ConfigError(what, 0, field); };
    if (!(c.L > 0.0)) fail("domain.L", "must be positive");
    if (c.coeffs.k < 1 || c.coeffs.k > 8) fail("coeffs.k", "must be in 1..8");
    if (c.n < min_grid_cells) fail("grid.n", "must be at least " + std::to_string(min_grid_cells));
    if (c.dt < 0.0) fail("stepper.dt", "must be non-negative");
    if (!(c.t_end > 0.0)) fail("stepper.t_end", "must be positive");
    if (!(c.stepper.tolerance > 0.0) || c.stepper.tolerance > 1e-10) fail("stepper.tolerance", "must be in (0, 1e-10]");
    if (c.stepper.refinement_passes < 0) fail("stepper.refinement_passes", "must be non-negative");
    if (c.stepper.startup_steps < 0) fail("stepper.startup_steps", "must be non-negative");
    if (c.stepper.snapshot_stride < 0) fail("stepper.snapshot_stride", "must be non-negative");
    if (!(c.stepper.blowup_factor > 1.0)) fail("stepper.blowup_factor", "must exceed 1");
    if (c.threshold_fraction < 0.0) fail("ic.threshold_fraction", "must be non-negative");
    if (c.ic_kind == IcKind::Gaussian && !(c.sigma > 0.0)) fail("ic.sigma", "must be positive");
    if (c.fit_start < 0.0 || c.fit_end < 0.0) fail("diagnostics.fit_start", "fit window must be non-negative");
    if (c.envelope_tol < 0.0) fail("diagnostics.envelope_tol", "must be non-negative");
    if (c.ut_tol < 0.0) fail("diagnostics.ut_tol", "must be non-negative");
    if (c.verify_samples < 1) fail("verify.samples", "must be positive");
    if (c.verify_seeds < 1) fail("verify.seeds", "must be positive");
    if (c.verify_modes < 1 || c.verify_modes > config_max_modes) fail("verify.modes", "must be in 1..64");
    if (c.verify_n < min_grid_cells) fail("verify.n", "must be at least " + std::to_string(min_grid_cells));
    for (double v : c.sweep_L)
        if (!(v > 0.0)) fail("sweep.L", "lengths must be positive");
    for (int v : c.sweep_k)
        if (v < 1 || v > 8) fail("sweep.k", "exponents must be in 1..8");
    for (int v : c.galerkin_modes)
        if (v < 1 || v > config_max_modes) fail("galerkin.modes", "sizes must be in 1..64");
    if (!(c.galerkin_rtol > 0.0) || c.galerkin_rtol > 1e-8) fail("galerkin.rtol", "must be in (0, 1e-8]");
    if (c.galerkin_reference_n < min_grid_cells) fail("galerkin.reference_n", "must be at least 16");
}

/// Parses configuration text on top of the defaults. `origin` prefixes messages.
inline RunConfig parse_config(const std::string& text, const std::string& origin = "config") {
    RunConfig c;
    std::map<std::string, const ConfigField*> index;
    for (const auto& f : config_fields()) index[f.key] = &f;
    std::map<std::string, int> seen;
    std::istringstream in(text);
    std::string raw;
    int line = 0;
    while (std::getline(in, raw)) {
        ++line;
        const auto hash = raw.find('#');
        const std::string body = detail::trim(std::string_view(raw).substr(0, hash));
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError("expected 'key = value'", line, {}, origin);
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        const auto it = index.find(key);
        if (it == index.end()) throw ConfigError("unknown key", line, key, origin);
        if (auto s = seen.find(key); s != seen.end())
            throw ConfigError("repeated key (first set on line " + std::to_string(s->second) + ")", line, key, origin);
        seen[key] = line;
        try {
            it->second->set(c, value);
        } catch (const std::exception& e) {
            throw ConfigError(e.what(), line, key, origin);
        }
    }
    try {
        validate(c);
    } catch (const ConfigError& e) {
        const auto s = seen.find(e.field());
        const std::string what = e.what();
        throw ConfigError(what.substr(what.find(": ") + 2), s == seen.end() ? 0 : s->second, e.field(), origin);
    }
    return c;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

// --- resolution to a problem ------------------------------------------------

inline DomainDescriptor domain_of(const RunConfig& c) {
    return c.domain_kind == DomainKind::BoundedInterval ? DomainDescriptor::bounded(c.L) : DomainDescriptor::half_line(c.L);
}

inline InitialCondition initial_condition_of(const RunConfig& c, double amplitude) {
    switch (c.ic_kind) {
        case IcKind::PolyBump: return InitialCondition::poly_bump(amplitude);
        case IcKind::Gaussian: return InitialCondition::gaussian(amplitude, c.x0, c.sigma);
        case IcKind::Zero: return InitialCondition::poly_bump(0.0);
    }
    return {};
}

inline ProblemSpec problem_of(const RunConfig& c) {
    ProblemSpec s;
    s.domain = domain_of(c);
    s.coeffs = c.coeffs;
    s.n = c.n;
    s.dt = c.dt;
    s.t_end = c.t_end;
    s.ic = initial_condition_of(c, c.amplitude);
    s.nonlinear_mode = c.nonlinear;
    return s;
}

}  // namespace benney
