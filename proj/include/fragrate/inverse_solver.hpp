#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "direct_solver.hpp"
#include "errors.hpp"
#include "group_fourier.hpp"
#include "kernels.hpp"
#include "transport_group.hpp"

namespace fragrate {

enum class FilterKind { tikhonov, quasi_reversibility, landweber };

inline std::string to_string(FilterKind k) {
    switch (k) {
        case FilterKind::tikhonov: return "tikhonov";
        case FilterKind::quasi_reversibility: return "quasi-reversibility";
        case FilterKind::landweber: return "landweber";
    }
    return "?";
}

inline FilterKind filter_kind_from(std::string_view s) {
    if (s == "tikhonov") return FilterKind::tikhonov;
    if (s == "quasi-reversibility" || s == "qr") return FilterKind::quasi_reversibility;
    if (s == "landweber") return FilterKind::landweber;
    throw InvalidArgument("unknown filter '" + std::string(s) + "'");
}

struct FilterSpec {
    FilterKind kind = FilterKind::tikhonov;
    double alpha = 1e-2;
    double j = 1.0;   // quasi-reversibility shift
    double m = 10.0;  // smoothness order for the Landweber parameter rule
};

struct FilterValues {
    std::vector<cplx> f;
    std::vector<cplx> h;
};

// Filters multiplying F(d/dx gN) (f) and lambda F N (h). Throws HypothesisFailure
// when the denominator drops to the floor at one of the xi.
inline FilterValues filter_values(const FilterSpec& spec, const KernelConfig& cfg, std::span<const double> xi) {
    if (!(spec.alpha >= 0.0) || !std::isfinite(spec.alpha)) throw InvalidArgument("filter alpha must be nonnegative");
    auto den = kernel_symbol(cfg, xi);
    FilterValues out;
    out.f.resize(xi.size());
    out.h.resize(xi.size());
    for (std::size_t c = 0; c < xi.size(); ++c) {
        cplx d = den[c];
        if (spec.kind == FilterKind::quasi_reversibility) d += cplx(spec.j, 2.0 * M_PI * xi[c]) * spec.alpha;
        if (!(std::abs(d) > kHypothesisFloor)) throw HypothesisFailure(xi[c], std::abs(d));
        const cplx h = 1.0 / d;
        out.h[c] = h;
        switch (spec.kind) {
            case FilterKind::tikhonov: out.f[c] = h / (1.0 + spec.alpha * std::abs(xi[c])); break;
            case FilterKind::landweber: {
                const double z = xi[c] * xi[c] / (1.0 + xi[c] * xi[c]);
                out.f[c] = h * (1.0 - std::pow(z, spec.alpha));
                break;
            }
            case FilterKind::quasi_reversibility: out.f[c] = h; break;
        }
    }
    return out;
}

struct Diagnostics {
    std::map<std::string, double> values;
    std::vector<std::string> warnings;
};

struct Reconstruction {
    SampledFunction H;
    SampledFunction B;
    FrequencyBand band;
    FilterSpec filter;
    Diagnostics diagnostics;
};

inline SampledFunction truncated_divide(const SampledFunction& H, const SampledFunction& N, double tau) {
    require_same_grid(H, N);
    if (!(tau >= 0.0)) throw InvalidArgument("division threshold must be nonnegative");
    std::vector<cplx> b(H.size(), 0.0);
    for (std::size_t i = 0; i < b.size(); ++i)
        if (N[i].real() > tau) b[i] = H[i] / N[i].real();
    return SampledFunction(H.grid_ptr(), std::move(b));
}

inline double default_tau(const SampledFunction& N, double tau_rel = 1e-3) {
    double peak = 0.0;
    for (const auto& c : N.values()) peak = std::max(peak, c.real());
    return tau_rel * peak;
}

inline SampledFunction truncated_divide(const SampledFunction& H, const SampledFunction& N) {
    return truncated_divide(H, N, default_tau(N));
}

// F H_alpha = f L(N) + h lambda F N on the band, zero elsewhere, with
// L(N) the quasi-multiplication form of F(d/dx gN).
inline Reconstruction reconstruct_H(const SampledFunction& N_in, double lambda_in, const RealMap& g,
                                    const FilterSpec& spec, const KernelConfig& cfg, const FrequencyBand& band,
                                    double tau_rel = 1e-3) {
    if (!std::isfinite(lambda_in)) throw InvalidArgument("lambda must be finite");
    const Grid& grid = N_in.grid();
    std::vector<double> gs(grid.size());
    for (std::size_t i = 0; i < gs.size(); ++i) {
        gs[i] = g(grid.x()[i]);
        if (!std::isfinite(gs[i])) throw NonFiniteError(i, "growth rate");
    }
    Spectrum L = derivative_spectrum(N_in.times(gs), cfg.s);
    Spectrum FN = forward(N_in, cfg.s);
    const auto mask = band_mask(FN, band);
    std::vector<double> xi_in;
    for (std::size_t c = 0; c < mask.size(); ++c)
        if (mask[c]) xi_in.push_back(FN.xi[c]);
    // the symbol must stay away from zero on the whole band, not only at the grid frequencies
    const bool qr = spec.kind == FilterKind::quasi_reversibility;
    const auto scan = detail::scan_symbol(cfg, band, qr ? spec.j : 0.0, qr ? spec.alpha : 0.0,
                                          default_samples(band, grid));
    if (!scan.passed) throw HypothesisFailure(scan.argmin_xi, scan.min_value);
    const auto fv = filter_values(spec, cfg, xi_in);

    Diagnostics diag;
    diag.values["hypothesis_min"] = scan.min_value;
    double den_min = INFINITY;
    Spectrum FH = FN;
    for (std::size_t c = 0, q = 0; c < mask.size(); ++c) {
        if (!mask[c]) {
            FH.values[c] = 0.0;
            continue;
        }
        FH.values[c] = fv.f[q] * L.values[c] + fv.h[q] * lambda_in * FN.values[c];
        den_min = std::min(den_min, 1.0 / std::abs(fv.h[q]));
        ++q;
    }
    FH.truncation_warning = false;
    diag.values["alpha"] = spec.alpha;
    diag.values["band_xi_lo"] = band.xi_lo;
    diag.values["band_xi_hi"] = band.xi_hi;
    diag.values["band_samples"] = static_cast<double>(xi_in.size());
    diag.values["min_denominator"] = den_min;
    diag.values["lambda"] = lambda_in;
    diag.values["truncation_N"] = FN.truncation_warning ? 1.0 : 0.0;
    diag.values["truncation_gN"] = L.truncation_warning ? 1.0 : 0.0;
    if (FN.truncation_warning) diag.warnings.push_back("N does not decay at the grid ends");
    if (L.truncation_warning) diag.warnings.push_back("g N does not decay at the grid ends");
    SampledFunction H = inverse(FH);
    SampledFunction B = truncated_divide(H, N_in, default_tau(N_in, tau_rel));
    diag.values["tau"] = default_tau(N_in, tau_rel);
    return {std::move(H), std::move(B), band, spec, std::move(diag)};
}

// g / (1 + alpha (e^{g^2} + e^{g^2 T1} + e^{g^2 T2})), T1 = d_rho_inv^2, T2 = (d2_rho_inv / d_rho_inv)^2
inline RealMap regularize_g(RealMap g, double alpha, const Diffeomorphism& d) {
    if (!(alpha > 0.0)) throw InvalidArgument("alpha_g must be positive");
    return [g = std::move(g), alpha, d](double x) {
        const double gv = g(x);
        if (gv == 0.0) return 0.0;
        const double j1 = d.d_rho_inv(x), j2 = d.d2_rho_inv(x);
        const double g2 = gv * gv;
        const double t1 = j1 * j1, t2 = (j2 / j1) * (j2 / j1);
        const double e = std::exp(g2) + std::exp(g2 * t1) + std::exp(g2 * t2);
        if (!std::isfinite(e)) return 0.0;
        return gv / (1.0 + alpha * e);
    };
}

inline Reconstruction reconstruct_H_unbounded(const SampledFunction& N_in, double lambda_in, const RealMap& g,
                                              const FilterSpec& spec, const KernelConfig& cfg,
                                              const FrequencyBand& band, double alpha_g, double tau_rel = 1e-3) {
    Reconstruction rec = reconstruct_H(N_in, lambda_in, regularize_g(g, alpha_g, cfg.d), spec, cfg, band, tau_rel);
    // alpha_g * C * || d/dx (g E N) ||, C = sup over the band of |1 / (k F P - 1)|
    const Grid& grid = N_in.grid();
    std::vector<cplx> gen(grid.size());
    bool finite = true;
    for (std::size_t i = 0; i < gen.size(); ++i) {
        const double x = grid.x()[i];
        const double gv = g(x), j1 = grid.d_rho_inv()[i], j2 = grid.d2_rho_inv()[i];
        const double g2 = gv * gv;
        const double e = std::exp(g2) + std::exp(g2 * j1 * j1) + std::exp(g2 * (j2 / j1) * (j2 / j1));
        gen[i] = gv * e * N_in[i];
        if (!std::isfinite(gen[i].real())) finite = false;
    }
    double norm = INFINITY;
    if (finite) norm = l2_norm(derivative_spectrum(SampledFunction(N_in.grid_ptr(), gen), cfg.s));
    const double C = 1.0 / rec.diagnostics.values["min_denominator"];
    rec.diagnostics.values["alpha_g"] = alpha_g;
    rec.diagnostics.values["unbounded_norm"] = norm;
    rec.diagnostics.values["unbounded_bound"] = alpha_g * C * norm;
    if (!(norm <= 1e9)) rec.diagnostics.warnings.push_back("N decays too slowly: || d/dx(g E N) || = " + std::to_string(norm));
    return rec;
}

namespace detail {

// Three-point derivative on the nonuniform x-grid, one-sided at the ends.
inline std::vector<cplx> dx_stencil(const std::vector<cplx>& f, const std::vector<double>& x) {
    const std::size_t n = f.size();
    std::vector<cplx> d(n);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hm = x[i] - x[i - 1], hp = x[i + 1] - x[i];
        d[i] = (hm * hm * f[i + 1] - hp * hp * f[i - 1] + (hp * hp - hm * hm) * f[i]) / (hm * hp * (hm + hp));
    }
    auto one_sided = [&](std::size_t a, std::size_t b, std::size_t c) {
        const double h1 = x[b] - x[a], h2 = x[c] - x[a];
        return (-(h1 + h2) / (h1 * h2)) * f[a] + (h2 / (h1 * (h2 - h1))) * f[b] - (h1 / (h2 * (h2 - h1))) * f[c];
    };
    d[0] = one_sided(0, 1, 2);
    {
        const double h1 = x[n - 2] - x[n - 1], h2 = x[n - 3] - x[n - 1];
        d[n - 1] = (-(h1 + h2) / (h1 * h2)) * f[n - 1] + (h2 / (h1 * (h2 - h1))) * f[n - 2] -
                   (h1 / (h2 * (h2 - h1))) * f[n - 3];
    }
    return d;
}

}  // namespace detail

// || S_alpha + k K(H) - H - (d/dx(gN) + lambda N) || / || d/dx(gN) + lambda N ||
inline double qr_residual(const Reconstruction& rec, const SampledFunction& N_in, double lambda_in, const RealMap& g,
                          const KernelConfig& cfg) {
    if (rec.filter.kind != FilterKind::quasi_reversibility)
        throw WrongFilterError("qr_residual needs a quasi-reversibility reconstruction, got " + to_string(rec.filter.kind));
    require_same_grid(rec.H, N_in);
    const Grid& grid = N_in.grid();
    const std::size_t n = grid.size();
    const auto& x = grid.x();
    const auto& j1 = grid.d_rho_inv();
    const auto& j2 = grid.d2_rho_inv();
    const double alpha = rec.filter.alpha, j = rec.filter.j;
    const auto& H = rec.H.values();
    std::vector<cplx> q(n), gn(n);
    for (std::size_t i = 0; i < n; ++i) {
        q[i] = H[i] / j1[i];
        gn[i] = g(x[i]) * N_in[i];
    }
    const auto dq = detail::dx_stencil(q, x);
    const auto dgn = detail::dx_stencil(gn, x);
    const auto KH = apply_K(rec.H, cfg).value;
    std::vector<cplx> r(n), rhs(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx S = alpha * dq[i] + alpha * H[i] * j2[i] / (j1[i] * j1[i]) + j * alpha * H[i];
        rhs[i] = dgn[i] + lambda_in * N_in[i];
        r[i] = S + cfg.k * KH[i] - H[i] - rhs[i];
    }
    const double base = x_norm(rhs, grid);
    const double res = x_norm(r, grid);
    return base > 0.0 ? res / base : res;
}

// sqrt(eps) for Tikhonov and quasi-reversibility; (2 m^{m+1} / eps)^{2/(2m+1)} for Landweber.
inline double optimal_alpha(FilterKind kind, double epsilon, double m) {
    if (!(epsilon > 0.0)) throw InvalidArgument("noise level must be positive");
    if (kind != FilterKind::landweber) return std::sqrt(epsilon);
    if (!(m > 0.0)) throw InvalidArgument("smoothness order m must be positive");
    const double limit = std::pow(2.0, (2.0 * m + 3.0) / 2.0) * std::sqrt(m);
    if (!(epsilon < limit))
        throw SideConditionError("Landweber rule needs eps < 2^{(2m+3)/2} sqrt(m) = " + std::to_string(limit));
    const double alpha = std::exp(2.0 / (2.0 * m + 1.0) * (std::log(2.0) + (m + 1.0) * std::log(m) - std::log(epsilon)));
    if (!(m < 2.0 * alpha)) throw SideConditionError("Landweber rule produced alpha with m >= 2 alpha");
    return alpha;
}

struct LemmaFirstRow {
    double alpha = 0.0;
    double A = 0.0;  // sup_x x (1 - z^alpha) / sqrt(alpha), z = x^2 / (1 + x^2)
    bool passed = false;
};

struct LemmaSecondRow {
    double m = 0.0;
    double alpha = 0.0;
    bool skipped = false;
    double sup = 0.0;            // sup_x x^-m z^alpha
    double x_at_sup = 0.0;
    double bound = 0.0;          // (m / 2 alpha)^m
    double ratio = 0.0;          // sup / bound
    bool passed = false;
    double squared_bound = 0.0;  // (m / 2 alpha)^{m/2}
    bool squared_passed = false;
    std::string note;
};

struct LemmaReport {
    std::vector<LemmaFirstRow> first;
    std::vector<LemmaSecondRow> second;
    bool first_passed = true;
    bool second_passed = true;
    bool passed() const { return first_passed && second_passed; }
};

inline std::vector<double> log_spaced(double lo, double hi, std::size_t n) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i)
        v[i] = std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * static_cast<double>(i) / static_cast<double>(n - 1));
    return v;
}

// Numerical sup checks of the Landweber filter estimates over the x samples.
inline LemmaReport lemma_bounds_check(std::span<const double> alphas, std::span<const double> ms,
                                      std::span<const double> xs) {
    LemmaReport rep;
    for (double a : alphas) {
        LemmaFirstRow row;
        row.alpha = a;
        for (double x : xs) {
            const double one_minus = -std::expm1(-a * std::log1p(1.0 / (x * x)));
            row.A = std::max(row.A, x * one_minus / std::sqrt(a));
        }
        row.passed = row.A <= 1.0;
        rep.first_passed = rep.first_passed && row.passed;
        rep.first.push_back(row);
    }
    for (double m : ms) {
        for (double a : alphas) {
            LemmaSecondRow row;
            row.m = m;
            row.alpha = a;
            if (!(m < 2.0 * a)) {
                row.skipped = true;
                row.note = "skipped: needs m < 2 alpha";
                rep.second.push_back(row);
                continue;
            }
            for (double x : xs) {
                const double v = std::exp(-m * std::log(x) - a * std::log1p(1.0 / (x * x)));
                if (v > row.sup) {
                    row.sup = v;
                    row.x_at_sup = x;
                }
            }
            row.bound = std::pow(m / (2.0 * a), m);
            row.squared_bound = std::pow(m / (2.0 * a), m / 2.0);
            row.ratio = row.sup / row.bound;
            row.passed = row.sup <= row.bound + 1e-12;
            row.squared_passed = row.sup <= row.squared_bound + 1e-12;
            rep.second_passed = rep.second_passed && row.passed;
            rep.second.push_back(row);
        }
    }
    return rep;
}

}  // namespace fragrate
