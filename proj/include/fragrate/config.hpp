#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "direct_solver.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "inverse_solver.hpp"
#include "io.hpp"
#include "kernels.hpp"
#include "transport_group.hpp"

namespace fragrate {

// One flat `key = value` file drives every command. Lines starting with '#'
// and trailing '# ...' are comments; list values are comma separated.
struct RunConfig {
    std::string diffeomorphism = "exp";
    std::string probability = "equal-mitosis";
    double k = 2.0;
    double s = 0.0;

    std::optional<double> x_min, x_max, z_min, z_max;
    std::size_t n = 512;

    std::string g = "reference";
    std::string B = "reference";
    std::string n0 = "gaussian:8:1";

    double t_max = 250.0;
    std::size_t n_steps = 10000;
    std::string scheme = "muscl";

    std::string filter = "tikhonov";
    std::optional<double> alpha;  // empty: parameter rule from noise.epsilon
    double j = 1.0;
    double m = 10.0;

    std::optional<double> xi_lo, xi_hi;

    double epsilon = 0.0;
    std::uint64_t seed = 1;
    double tau_rel = 1e-3;

    double error_x_lo = 0.0;
    double error_x_hi = 3.0;

    std::vector<double> sweep_eps;
    std::vector<std::string> sweep_filters{"tikhonov", "landweber"};
    std::size_t sweep_seeds = 5;

    std::vector<double> check_j{0.0, 1.0};
    double check_alpha_max = 0.1;
    std::size_t check_samples = 0;  // 0: four per frequency bin
    std::vector<double> lemma_alphas{1.0, 4.0, 16.0, 64.0};
    std::vector<double> lemma_ms{0.0, 1.0, 2.0, 5.0};
    std::size_t lemma_points = 20001;

    std::string output_dir = "out";
};

namespace detail {

inline double cfg_double(const std::string& key, const std::string& v) {
    try {
        return io::parse_double(v, key);
    } catch (const Error&) {
        throw ConfigError(key, "expected a number, got '" + v + "'");
    }
}

inline std::size_t cfg_count(const std::string& key, const std::string& v) {
    const double d = cfg_double(key, v);
    if (!(d >= 0.0) || d != std::floor(d) || d > 1e15) throw ConfigError(key, "expected a nonnegative integer, got '" + v + "'");
    return static_cast<std::size_t>(d);
}

inline std::vector<double> cfg_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    if (io::trim(v).empty()) return out;
    for (const auto& part : io::split(v, ',')) out.push_back(cfg_double(key, part));
    return out;
}

inline std::vector<std::string> cfg_words(const std::string& v) {
    std::vector<std::string> out;
    if (io::trim(v).empty()) return out;
    for (const auto& part : io::split(v, ',')) out.push_back(io::trim(part));
    return out;
}

// name[:p1[:p2]] with numeric parameters
inline std::pair<std::string, std::vector<double>> split_named(const std::string& key, const std::string& spec) {
    auto parts = io::split(spec, ':');
    std::vector<double> params;
    for (std::size_t i = 1; i < parts.size(); ++i) params.push_back(cfg_double(key, parts[i]));
    return {io::trim(parts.empty() ? spec : parts[0]), params};
}

}  // namespace detail

inline RunConfig parse_config(std::istream& in) {
    RunConfig c;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"diffeomorphism", [&](auto&, auto& v) { c.diffeomorphism = v; }},
        {"probability", [&](auto&, auto& v) { c.probability = v; }},
        {"k", [&](auto& k, auto& v) { c.k = detail::cfg_double(k, v); }},
        {"s", [&](auto& k, auto& v) { c.s = detail::cfg_double(k, v); }},
        {"grid.x_min", [&](auto& k, auto& v) { c.x_min = detail::cfg_double(k, v); }},
        {"grid.x_max", [&](auto& k, auto& v) { c.x_max = detail::cfg_double(k, v); }},
        {"grid.z_min", [&](auto& k, auto& v) { c.z_min = detail::cfg_double(k, v); }},
        {"grid.z_max", [&](auto& k, auto& v) { c.z_max = detail::cfg_double(k, v); }},
        {"grid.n", [&](auto& k, auto& v) { c.n = detail::cfg_count(k, v); }},
        {"model.g", [&](auto&, auto& v) { c.g = v; }},
        {"model.B", [&](auto&, auto& v) { c.B = v; }},
        {"model.n0", [&](auto&, auto& v) { c.n0 = v; }},
        {"time.t_max", [&](auto& k, auto& v) { c.t_max = detail::cfg_double(k, v); }},
        {"time.n_steps", [&](auto& k, auto& v) { c.n_steps = detail::cfg_count(k, v); }},
        {"time.scheme", [&](auto&, auto& v) { c.scheme = v; }},
        {"filter.kind", [&](auto&, auto& v) { c.filter = v; }},
        {"filter.alpha",
         [&](auto& k, auto& v) {
             if (v == "auto") c.alpha.reset();
             else c.alpha = detail::cfg_double(k, v);
         }},
        {"filter.j", [&](auto& k, auto& v) { c.j = detail::cfg_double(k, v); }},
        {"filter.m", [&](auto& k, auto& v) { c.m = detail::cfg_double(k, v); }},
        {"band.xi_lo", [&](auto& k, auto& v) { c.xi_lo = detail::cfg_double(k, v); }},
        {"band.xi_hi", [&](auto& k, auto& v) { c.xi_hi = detail::cfg_double(k, v); }},
        {"noise.epsilon", [&](auto& k, auto& v) { c.epsilon = detail::cfg_double(k, v); }},
        {"noise.seed", [&](auto& k, auto& v) { c.seed = detail::cfg_count(k, v); }},
        {"invert.tau_rel", [&](auto& k, auto& v) { c.tau_rel = detail::cfg_double(k, v); }},
        {"error.x_lo", [&](auto& k, auto& v) { c.error_x_lo = detail::cfg_double(k, v); }},
        {"error.x_hi", [&](auto& k, auto& v) { c.error_x_hi = detail::cfg_double(k, v); }},
        {"sweep.eps", [&](auto& k, auto& v) { c.sweep_eps = detail::cfg_list(k, v); }},
        {"sweep.filters", [&](auto&, auto& v) { c.sweep_filters = detail::cfg_words(v); }},
        {"sweep.seeds", [&](auto& k, auto& v) { c.sweep_seeds = detail::cfg_count(k, v); }},
        {"check.j", [&](auto& k, auto& v) { c.check_j = detail::cfg_list(k, v); }},
        {"check.alpha_max", [&](auto& k, auto& v) { c.check_alpha_max = detail::cfg_double(k, v); }},
        {"check.n_samples", [&](auto& k, auto& v) { c.check_samples = detail::cfg_count(k, v); }},
        {"check.lemma_alphas", [&](auto& k, auto& v) { c.lemma_alphas = detail::cfg_list(k, v); }},
        {"check.lemma_ms", [&](auto& k, auto& v) { c.lemma_ms = detail::cfg_list(k, v); }},
        {"check.lemma_points", [&](auto& k, auto& v) { c.lemma_points = detail::cfg_count(k, v); }},
        {"output.dir", [&](auto&, auto& v) { c.output_dir = v; }},
    };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = io::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        const std::string key = io::trim(line.substr(0, eq));
        const std::string value = io::trim(line.substr(eq + 1));
        auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError(key, "unknown key");
        it->second(key, value);
    }
    return c;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("config", "cannot open " + path.string());
    return parse_config(f);
}

// Built-in coefficient maps.
//   g:  reference (x e^{-(x+1/x)}), linear (x), constant:c
//   B:  reference (x^2 e^{-(x+1/x)}), zero, constant:c, power:c:p (c x^p)
//   n0: gaussian:c:w (e^{-(x-c)^2 / (2 w^2)}), reference (gaussian:8:1)
inline RealMap named_map(const std::string& field, const std::string& spec) {
    auto [name, p] = detail::split_named(field, spec);
    auto need = [&, name = name, &p = p](std::size_t k) {
        if (p.size() != k) throw ConfigError(field, "'" + name + "' takes " + std::to_string(k) + " parameter(s)");
    };
    if (field == "model.g") {
        if (name == "reference") return [](double x) { return x * std::exp(-(x + 1.0 / x)); };
        if (name == "linear") return [](double x) { return x; };
    }
    if (field == "model.B") {
        if (name == "reference") return [](double x) { return x * x * std::exp(-(x + 1.0 / x)); };
        if (name == "zero") return [](double) { return 0.0; };
        if (name == "power") {
            need(2);
            const double a = p[0], q = p[1];
            return [a, q](double x) { return a * std::pow(x, q); };
        }
    }
    if (field == "model.n0") {
        if (name == "reference") return [](double x) { return std::exp(-(x - 8.0) * (x - 8.0) / 2.0); };
        if (name == "gaussian") {
            need(2);
            const double c = p[0], w = p[1];
            if (!(w > 0.0)) throw ConfigError(field, "gaussian width must be positive");
            return [c, w](double x) { return std::exp(-(x - c) * (x - c) / (2.0 * w * w)); };
        }
    }
    if (name == "constant" && field != "model.n0") {
        need(1);
        const double a = p[0];
        return [a](double) { return a; };
    }
    throw ConfigError(field, "unknown built-in '" + spec + "'");
}

// Config turned into library objects.
struct ResolvedConfig {
    RunConfig raw;
    Diffeomorphism d;
    GridPtr grid;
    KernelConfig kernel;
    ModelCoefficients model;
    EvolveOptions evolve;
    FrequencyBand band;
};

inline ResolvedConfig resolve(const RunConfig& c) {
    ResolvedConfig r;
    r.raw = c;
    try {
        r.d = diffeomorphism_by_name(c.diffeomorphism);
    } catch (const InvalidArgument& e) {
        throw ConfigError("diffeomorphism", e.what());
    }
    if (c.n < 8 || !is_power_of_two(c.n)) throw ConfigError("grid.n", "must be a power of two >= 8, got " + std::to_string(c.n));
    double z_lo, z_hi;
    if (c.x_min || c.x_max) {
        if (c.z_min || c.z_max) throw ConfigError("grid", "give either x or z bounds, not both");
        const double lo = c.x_min.value_or(0.006), hi = c.x_max.value_or(6.0);
        if (!(lo > 0.0)) throw ConfigError("grid.x_min", "must be positive");
        if (!(hi > lo)) throw ConfigError("grid.x_max", "must exceed grid.x_min");
        z_lo = r.d.rho_inv(lo);
        z_hi = r.d.rho_inv(hi);
    } else if (c.z_min || c.z_max) {
        if (!c.z_min || !c.z_max) throw ConfigError("grid", "z bounds need both grid.z_min and grid.z_max");
        z_lo = *c.z_min;
        z_hi = *c.z_max;
        if (!(z_hi > z_lo)) throw ConfigError("grid.z_max", "must exceed grid.z_min");
    } else {
        z_lo = r.d.rho_inv(0.006);
        z_hi = r.d.rho_inv(6.0);
    }
    try {
        r.grid = build_grid(z_lo, z_hi, c.n, r.d);
    } catch (const InvalidArgument& e) {
        throw ConfigError("grid", e.what());
    }
    try {
        r.kernel.p = probability_by_name(c.probability, r.d);
    } catch (const InvalidArgument& e) {
        throw ConfigError("probability", e.what());
    }
    if (!(c.k >= 1.0)) throw ConfigError("k", "must be >= 1");
    if (!std::isfinite(c.s)) throw ConfigError("s", "must be finite");
    r.kernel.k = c.k;
    r.kernel.d = r.d;
    r.kernel.s = c.s;
    r.model.g = named_map("model.g", c.g);
    r.model.B = named_map("model.B", c.B);
    r.model.n0 = named_map("model.n0", c.n0);
    r.model.kernel = r.kernel;
    if (!(c.t_max > 0.0)) throw ConfigError("time.t_max", "must be positive");
    if (c.n_steps < 10) throw ConfigError("time.n_steps", "must be at least 10");
    r.evolve.t_max = c.t_max;
    r.evolve.n_steps = c.n_steps;
    if (c.scheme == "muscl") r.evolve.scheme = TransportScheme::muscl;
    else if (c.scheme == "upwind") r.evolve.scheme = TransportScheme::upwind;
    else throw ConfigError("time.scheme", "expected muscl or upwind, got '" + c.scheme + "'");
    try {
        filter_kind_from(c.filter);
    } catch (const InvalidArgument& e) {
        throw ConfigError("filter.kind", e.what());
    }
    for (const auto& f : c.sweep_filters) {
        try {
            filter_kind_from(f);
        } catch (const InvalidArgument& e) {
            throw ConfigError("sweep.filters", e.what());
        }
    }
    if (c.alpha && !(*c.alpha > 0.0)) throw ConfigError("filter.alpha", "must be positive or 'auto'");
    if (!(c.m > 0.0)) throw ConfigError("filter.m", "must be positive");
    if (!(c.epsilon >= 0.0)) throw ConfigError("noise.epsilon", "must be nonnegative");
    for (double e : c.sweep_eps)
        if (!(e > 0.0)) throw ConfigError("sweep.eps", "noise levels must be positive");
    if (!std::is_sorted(c.sweep_eps.begin(), c.sweep_eps.end())) throw ConfigError("sweep.eps", "must be ascending");
    if (!(c.tau_rel >= 0.0)) throw ConfigError("invert.tau_rel", "must be nonnegative");
    if (!(c.error_x_hi > c.error_x_lo)) throw ConfigError("error.x_hi", "must exceed error.x_lo");
    if (c.xi_lo || c.xi_hi) {
        if (!c.xi_lo || !c.xi_hi) throw ConfigError("band", "needs both band.xi_lo and band.xi_hi");
        if (!(*c.xi_hi > *c.xi_lo)) throw ConfigError("band.xi_hi", "must exceed band.xi_lo");
        r.band = FrequencyBand(*c.xi_lo, *c.xi_hi);
    } else {
        r.band = default_band(*r.grid);
    }
    return r;
}

inline FilterSpec filter_from(const ResolvedConfig& rc) {
    const RunConfig& c = rc.raw;
    FilterSpec f;
    f.kind = filter_kind_from(c.filter);
    f.j = c.j;
    f.m = c.m;
    if (c.alpha) {
        f.alpha = *c.alpha;
    } else {
        if (!(c.epsilon > 0.0)) throw ConfigError("filter.alpha", "'auto' needs noise.epsilon > 0");
        try {
            f.alpha = optimal_alpha(f.kind, c.epsilon, c.m);
        } catch (const SideConditionError& e) {
            throw ConfigError("noise.epsilon", e.what());
        }
    }
    return f;
}

inline SweepOptions sweep_options_from(const ResolvedConfig& rc) {
    const RunConfig& c = rc.raw;
    SweepOptions o;
    o.eps_list = c.sweep_eps;
    o.filters.clear();
    for (const auto& f : c.sweep_filters) o.filters.push_back(filter_kind_from(f));
    o.seeds_per_eps = c.sweep_seeds;
    o.base_seed = c.seed;
    o.m = c.m;
    o.j = c.j;
    o.band = rc.band;
    o.tau_rel = c.tau_rel;
    o.x_lo = c.error_x_lo;
    o.x_hi = c.error_x_hi;
    return o;
}

}  // namespace fragrate
