#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include "config.hpp"
#include "direct_solver.hpp"
#include "errors.hpp"
#include "experiment.hpp"
#include "inverse_solver.hpp"
#include "io.hpp"
#include "kernels.hpp"

namespace fragrate {

// Exit codes
constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNotConverged = 2;  // direct
constexpr int kExitRowsFailed = 2;    // sweep
constexpr int kExitCheckFailed = 3;   // check

struct CommandOptions {
    std::string config;
    std::optional<std::string> out_dir;
    bool plot = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> n_csv;
    std::optional<double> lambda;
    unsigned threads = 0;
};

namespace detail {

inline ResolvedConfig load(const CommandOptions& o) {
    RunConfig c = load_config(o.config);
    if (o.seed) c.seed = *o.seed;
    return resolve(c);
}

inline std::filesystem::path out_dir(const CommandOptions& o, const ResolvedConfig& rc) {
    return o.out_dir ? std::filesystem::path(*o.out_dir) : std::filesystem::path(rc.raw.output_dir);
}

inline unsigned thread_cap(const CommandOptions& o) {
    if (o.threads) return o.threads;
    if (const char* env = std::getenv("FRAGRATE_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return 0;
}

inline std::string b2s(bool b) { return b ? "true" : "false"; }

inline DirectResult solve_direct(const ResolvedConfig& rc) {
    try {
        return evolve_to_eigenpair(rc.model, rc.grid, rc.evolve);
    } catch (const CflViolation& e) {
        throw ConfigError("time.n_steps", e.what());
    }
}

}  // namespace detail

// Eigenpair of the growth-fragmentation problem. Writes N.csv and eigen.meta.
inline int cmd_direct(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    try {
        const ResolvedConfig rc = detail::load(o);
        const DirectResult res = detail::solve_direct(rc);
        const auto dir = detail::out_dir(o, rc);
        const Grid& g = *rc.grid;
        const auto N = res.eigen.N.real_part();
        const auto resid = eigen_residual(res.eigen, rc.model, rc.evolve.scheme);
        io::write_xy_csv(dir / "N.csv", "x", "N", g.x(), N);
        io::write_meta(dir / "eigen.meta",
                       {{"lambda", io::fmt17(res.eigen.lambda)},
                        {"converged", detail::b2s(res.report.converged)},
                        {"profile_change", io::fmt17(res.report.profile_change)},
                        {"lambda_spread", io::fmt17(res.report.lambda_spread)},
                        {"eigen_residual", io::fmt17(resid.relative)},
                        {"mass", io::fmt17(rectangle_mass(N, g))},
                        {"cfl", io::fmt17(res.report.cfl)},
                        {"dt", io::fmt17(res.report.dt)},
                        {"steps", std::to_string(res.report.steps)},
                        {"scheme", rc.raw.scheme},
                        {"zero_extended", detail::b2s(res.report.zero_extended)}});
        if (o.plot) {
            try {
                io::write_atomically(dir / "N.svg",
                                     io::svg_chart({{"N", "#1f77b4", g.x(), N}}, "stable size distribution", "x", "N",
                                                   false, false));
            } catch (const std::exception& e) {
                err << "plot skipped: " << e.what() << '\n';
            }
        }
        out << "lambda = " << io::fmt17(res.eigen.lambda) << "\nconverged = " << detail::b2s(res.report.converged)
            << " (relative change " << res.report.profile_change << ")\nwrote " << (dir / "N.csv").string() << '\n';
        return res.report.converged ? kExitOk : kExitNotConverged;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

// Reconstruction of H = B N and B from N (and lambda). Writes H.csv, B.csv, diagnostics.meta.
inline int cmd_invert(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    try {
        const ResolvedConfig rc = detail::load(o);
        if (!o.n_csv) throw ConfigError("--n-csv", "invert needs the N samples");
        const std::filesystem::path csv(*o.n_csv);
        auto [x, y] = io::read_xy_csv(csv);
        const Grid& g = *rc.grid;
        if (x.size() != g.size()) throw Error("grid mismatch: " + csv.string() + " has " + std::to_string(x.size()) +
                                              " rows, config grid has " + std::to_string(g.size()));
        for (std::size_t i = 0; i < x.size(); ++i)
            if (std::abs(x[i] - g.x()[i]) > 1e-12 * std::abs(g.x()[i]))
                throw Error("grid mismatch at row " + std::to_string(i + 1) + ": x = " + io::fmt17(x[i]) +
                            ", config grid has " + io::fmt17(g.x()[i]));
        double lambda = 0.0;
        if (o.lambda) {
            lambda = *o.lambda;
        } else {
            const auto meta_path = csv.parent_path() / "eigen.meta";
            bool found = false;
            if (std::filesystem::exists(meta_path))
                for (const auto& [k, v] : io::read_meta(meta_path))
                    if (k == "lambda") {
                        lambda = io::parse_double(v, meta_path.string());
                        found = true;
                    }
            if (!found) throw ConfigError("--lambda", "not given and no eigen.meta next to the N file");
        }
        Eigenpair data{SampledFunction::real(rc.grid, y), lambda};
        if (rc.raw.epsilon > 0.0) {
            auto noisy = add_noise(data, {rc.raw.epsilon, rc.raw.seed});
            data = Eigenpair{noisy.N, noisy.lambda};
        }
        const FilterSpec spec = filter_from(rc);
        const Reconstruction rec = reconstruct_H(data.N, data.lambda, rc.model.g, spec, rc.kernel, rc.band, rc.raw.tau_rel);
        const auto dir = detail::out_dir(o, rc);
        io::write_xy_csv(dir / "H.csv", "x", "H", g.x(), rec.H.real_part());
        io::write_xy_csv(dir / "B.csv", "x", "B", g.x(), rec.B.real_part());
        io::Meta meta{{"filter", to_string(spec.kind)},
                      {"alpha", io::fmt17(spec.alpha)},
                      {"j", io::fmt17(spec.j)},
                      {"m", io::fmt17(spec.m)},
                      {"epsilon", io::fmt17(rc.raw.epsilon)},
                      {"lambda_used", io::fmt17(data.lambda)}};
        for (const auto& [k, v] : rec.diagnostics.values) meta.emplace_back(k, io::fmt17(v));
        // Errors against the configured B, for reference
        const auto B_true = sample(rc.model.B, rc.grid);
        std::vector<cplx> h(g.size());
        for (std::size_t i = 0; i < h.size(); ++i) h[i] = B_true[i] * y[i];
        const SampledFunction H_true(rc.grid, std::move(h));
        meta.emplace_back("error_H", io::fmt17(l2_error(rec.H, H_true, rc.raw.error_x_lo, rc.raw.error_x_hi)));
        meta.emplace_back("error_B", io::fmt17(l2_error(rec.B, B_true, rc.raw.error_x_lo, rc.raw.error_x_hi)));
        for (const auto& w : rec.diagnostics.warnings) meta.emplace_back("warning", w);
        io::write_meta(dir / "diagnostics.meta", meta);
        if (o.plot) {
            try {
                io::write_atomically(dir / "B.svg", io::svg_chart({{"reconstructed B", "#d62728", g.x(), rec.B.real_part()},
                                                                  {"model B", "#555555", g.x(), B_true.real_part()}},
                                                                 "fragmentation rate", "x", "B", false, false));
            } catch (const std::exception& e) {
                err << "plot skipped: " << e.what() << '\n';
            }
        }
        for (const auto& w : rec.diagnostics.warnings) err << "warning: " << w << '\n';
        out << "filter = " << to_string(spec.kind) << ", alpha = " << io::fmt17(spec.alpha) << "\nwrote "
            << (dir / "H.csv").string() << " and " << (dir / "B.csv").string() << '\n';
        return kExitOk;
    } catch (const HypothesisFailure& e) {
        err << "error: hypothesis failure: " << e.what() << '\n';
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

// Noise sweep over sweep.eps x sweep.filters x sweep.seeds. Writes sweep.csv and slopes.meta.
inline int cmd_sweep(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    try {
        const ResolvedConfig rc = detail::load(o);
        if (rc.raw.sweep_eps.empty()) throw ConfigError("sweep.eps", "empty noise list");
        if (rc.raw.sweep_seeds == 0) throw ConfigError("sweep.seeds", "must be at least 1");
        if (rc.raw.sweep_filters.empty()) throw ConfigError("sweep.filters", "empty filter list");
        const DirectResult direct = detail::solve_direct(rc);
        SweepOptions opt = sweep_options_from(rc);
        opt.threads = detail::thread_cap(o);
        const SweepResult res = sweep(direct.eigen, rc.model, opt);
        const auto dir = detail::out_dir(o, rc);
        io::Table t;
        t.header = {"epsilon", "filter", "alpha", "seed", "error_H", "error_B", "status"};
        for (const auto& r : res.rows)
            t.rows.push_back({io::fmt17(r.epsilon), to_string(r.filter), io::fmt17(r.alpha), std::to_string(r.seed),
                              r.failed ? "nan" : io::fmt17(r.error_H), r.failed ? "nan" : io::fmt17(r.error_B),
                              r.failed ? "failed" : "ok"});
        io::write_atomically(dir / "sweep.csv", t.str());
        io::Meta meta{{"lambda", io::fmt17(direct.eigen.lambda)},
                      {"direct_converged", detail::b2s(direct.report.converged)},
                      {"rows", std::to_string(res.rows.size())},
                      {"failed_rows", std::to_string(std::count_if(res.rows.begin(), res.rows.end(),
                                                                   [](const SweepRow& r) { return r.failed; }))}};
        for (const auto& [k, s] : res.slopes) {
            meta.emplace_back(to_string(k) + ".slope_small_eps", io::fmt17(s.slope_small));
            meta.emplace_back(to_string(k) + ".slope_full", io::fmt17(s.slope_full));
            for (std::size_t i = 0; i < s.eps.size(); ++i)
                meta.emplace_back(to_string(k) + ".median_error_H@" + io::fmt17(s.eps[i]), io::fmt17(s.median_error_H[i]));
        }
        for (const auto& r : res.rows)
            if (r.failed) meta.emplace_back("failure", to_string(r.filter) + " eps=" + io::fmt17(r.epsilon) + ": " + r.message);
        io::write_meta(dir / "slopes.meta", meta);
        if (o.plot) {
            try {
                std::vector<io::Series> series;
                const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c"};
                std::size_t ci = 0;
                for (const auto& [k, s] : res.slopes)
                    series.push_back({to_string(k), colors[ci++ % 3], s.eps, s.median_error_H});
                io::write_atomically(dir / "sweep.svg", io::svg_chart(series, "median error of H against noise level",
                                                                      "epsilon", "error_H", true, true));
            } catch (const std::exception& e) {
                err << "plot skipped: " << e.what() << '\n';
            }
        }
        for (const auto& [k, s] : res.slopes)
            out << std::left << std::setw(22) << to_string(k) << " slope (smallest decade) = " << s.slope_small
                << ", full range = " << s.slope_full << '\n';
        out << "wrote " << (dir / "sweep.csv").string() << " (" << res.rows.size() << " rows)\n";
        return res.any_failed() ? kExitRowsFailed : kExitOk;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

// Integrability, invertibility hypotheses and the Landweber filter estimates.
inline int cmd_check(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    try {
        const ResolvedConfig rc = detail::load(o);
        const RunConfig& c = rc.raw;
        bool ok = true;
        out << std::setprecision(10);
        out << "probability " << rc.kernel.p.name << ", k = " << c.k << ", s = " << c.s << ", rho = " << rc.d.name
            << ", band [" << rc.band.xi_lo << ", " << rc.band.xi_hi << "]\n";
        const auto integ = check_integrability(rc.kernel.p, c.s, rc.d);
        out << "integrability            value " << integ.value << "  " << (integ.passed ? "pass" : "FAIL") << '\n';
        if (!integ.passed) {
            err << "error: " << integrability_message(c.s, integ) << '\n';
            return kExitCheckFailed;
        }
        const std::size_t ns = c.check_samples ? c.check_samples : default_samples(rc.band, *rc.grid);
        const auto lb = check_hypothesis_lower_bound(rc.kernel, rc.band, ns);
        out << "min |k F P - 1|          " << lb.min_value << " at xi = " << lb.argmin_xi << "  "
            << (lb.passed ? "pass" : "FAIL") << '\n';
        ok = ok && lb.passed;
        KernelConfig unit = rc.kernel;
        unit.k = 1.0;
        const auto lb1 = check_hypothesis_lower_bound(unit, rc.band, ns);
        out << "min |F P - 1|            " << lb1.min_value << " at xi = " << lb1.argmin_xi << "  (reported)\n";
        const double mod = single_atom_bound(rc.kernel);
        if (!std::isnan(mod)) out << "||k F P| - 1| (one atom) " << mod << "  (reported)\n";
        if (rc.kernel.p.atoms.size() == 1 && !rc.kernel.p.has_density() && rc.d.name == "exp" &&
            rc.kernel.p.atoms[0].location == 0.5)
            out << "|2^{2 - pi s} - 1|       " << std::abs(std::pow(2.0, 2.0 - M_PI * c.s) - 1.0) << "  (reported)\n";
        for (double j : c.check_j) {
            const auto qr = check_hypothesis_qr(rc.kernel, rc.band, j, c.check_alpha_max, ns);
            out << "min |k F P - 1 + (2 pi i xi + " << j << ") alpha|, alpha <= " << c.check_alpha_max << ": "
                << qr.min_value << " at xi = " << qr.argmin_xi << ", alpha = " << qr.argmin_alpha << "  "
                << (qr.passed ? "pass" : "FAIL") << '\n';
            ok = ok && qr.passed;
        }
        const auto xs = log_spaced(1e-3, 1e6, c.lemma_points);
        const auto lemma = lemma_bounds_check(c.lemma_alphas, c.lemma_ms, xs);
        out << "Landweber filter estimates (reported, not part of the exit status)\n";
        for (const auto& r : lemma.first)
            out << "  alpha " << std::setw(5) << r.alpha << "  sup x(1 - z^alpha)/sqrt(alpha) = " << r.A << "  "
                << (r.passed ? "pass" : "FAIL") << '\n';
        for (const auto& r : lemma.second) {
            out << "  m " << r.m << ", alpha " << r.alpha << ": ";
            if (r.skipped) {
                out << r.note << '\n';
                continue;
            }
            out << "sup x^-m z^alpha = " << r.sup << " (x = " << r.x_at_sup << "), (m/2alpha)^m = " << r.bound << " "
                << (r.passed ? "pass" : "FAIL") << ", (m/2alpha)^(m/2) = " << r.squared_bound << " "
                << (r.squared_passed ? "pass" : "FAIL") << '\n';
        }
        out << (ok ? "all hypotheses pass\n" : "hypothesis failure\n");
        return ok ? kExitOk : kExitCheckFailed;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

}  // namespace fragrate
