#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "fft.hpp"
#include "probability.hpp"
#include "transport_group.hpp"

namespace fragrate {

// F_{rho,s} f on the frequency grid conjugate to the z-grid, centered layout.
struct Spectrum {
    GridPtr grid;
    double s = 0.0;
    std::vector<double> xi;
    std::vector<cplx> values;
    bool truncation_warning = false;

    double dxi() const { return 1.0 / (static_cast<double>(grid->size()) * grid->dz()); }
};

// xi_j = j / (n dz), j = -n/2 .. n/2-1.
inline std::vector<double> frequencies(const ZGrid& zg) {
    const std::size_t n = zg.n;
    const double step = 1.0 / (static_cast<double>(n) * zg.dz());
    std::vector<double> xi(n);
    for (std::size_t c = 0; c < n; ++c) xi[c] = (static_cast<double>(c) - static_cast<double>(n / 2)) * step;
    return xi;
}

namespace detail {

inline bool edges_decay(std::span<const cplx> w) {
    double peak = 0.0;
    for (const auto& c : w) peak = std::max(peak, std::abs(c));
    if (peak == 0.0) return true;
    return std::abs(w.front()) <= 1e-8 * peak && std::abs(w.back()) <= 1e-8 * peak;
}

inline void require_finite(std::span<const cplx> v, const char* what) {
    for (std::size_t i = 0; i < v.size(); ++i)
        if (!std::isfinite(v[i].real()) || !std::isfinite(v[i].imag())) throw NonFiniteError(i, what);
}

// Real integrand sampled once at the Gauss-Legendre nodes of equal panels on
// [a, b]; integrate() then gives int_a^b f(w) e^{e w} dw for any complex e.
// The exponential at the nodes comes from per-panel phase steps, recomputed
// every 32 panels.
class OscillatoryPanels {
public:
    template <class F>
    OscillatoryPanels(F&& f, double a, double b, std::size_t panels)
        : a_(a), h_((b - a) / static_cast<double>(panels)), panels_(panels) {
        const auto& xs = Rule::abscissa();
        const double half = 0.5 * h_;
        values_.resize(panels * xs.size() * 2);
        for (std::size_t p = 0; p < panels; ++p) {
            const double mid = a + static_cast<double>(p) * h_ + half;
            for (std::size_t k = 0; k < xs.size(); ++k) {
                values_[(p * xs.size() + k) * 2] = f(mid - half * xs[k]);
                values_[(p * xs.size() + k) * 2 + 1] = f(mid + half * xs[k]);
            }
        }
    }

    cplx integrate(cplx e) const {
        const auto& xs = Rule::abscissa();
        const auto& ws = Rule::weights();
        const std::size_t m = xs.size();
        const double half = 0.5 * h_;
        std::vector<cplx> up(m), down(m);
        for (std::size_t k = 0; k < m; ++k) {
            up[k] = ws[k] * half * std::exp(e * (half * xs[k]));
            down[k] = ws[k] * half * std::exp(-e * (half * xs[k]));
        }
        const cplx step = std::exp(e * h_);
        cplx acc = 0.0, centre = 0.0;
        for (std::size_t p = 0; p < panels_; ++p) {
            const double* v = &values_[p * m * 2];
            centre = p % 32 == 0 ? std::exp(e * (a_ + static_cast<double>(p) * h_ + half)) : centre * step;
            cplx panel = 0.0;
            for (std::size_t k = 0; k < m; ++k) panel += v[2 * k] * down[k] + v[2 * k + 1] * up[k];
            acc += centre * panel;
        }
        return acc;
    }

private:
    using Rule = boost::math::quadrature::gauss<double, 20>;
    double a_, h_;
    std::size_t panels_;
    std::vector<double> values_;
};

}  // namespace detail

// values_j = dz * sum_i f(rho(z_i)) e^{(-2 pi i xi_j + pi s) z_i}
inline Spectrum forward(const SampledFunction& f, double s) {
    const Grid& g = f.grid();
    const std::size_t n = g.size();
    const double dz = g.dz();
    const double z0 = g.zgrid().z_min;
    std::vector<cplx> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = f[i] * std::exp(M_PI * s * g.z()[i]);
    detail::require_finite(w, "forward transform input");
    Spectrum out;
    out.grid = f.grid_ptr();
    out.s = s;
    out.xi = frequencies(g.zgrid());
    out.truncation_warning = !detail::edges_decay(w);
    const auto X = detail::dft(w, -1);
    out.values.resize(n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t k = (c + n / 2) % n;
        const double phase = -2.0 * M_PI * out.xi[c] * z0;
        out.values[c] = dz * X[k] * cplx(std::cos(phase), std::sin(phase));
    }
    return out;
}

inline SampledFunction inverse(const Spectrum& F) {
    const Grid& g = *F.grid;
    const std::size_t n = g.size();
    if (F.values.size() != n) throw InvalidArgument("spectrum size does not match its grid");
    detail::require_finite(F.values, "inverse transform input");
    const double z0 = g.zgrid().z_min;
    std::vector<cplx> G(n);
    for (std::size_t c = 0; c < n; ++c) {
        const std::size_t k = (c + n / 2) % n;
        const double phase = 2.0 * M_PI * F.xi[c] * z0;
        G[k] = F.values[c] * cplx(std::cos(phase), std::sin(phase));
    }
    auto Y = detail::dft(G, +1);
    const double dxi = F.dxi();
    for (std::size_t i = 0; i < n; ++i) Y[i] *= dxi * std::exp(-M_PI * F.s * g.z()[i]);
    return SampledFunction(F.grid, std::move(Y));
}

// sqrt(sum |F_j|^2 dxi)
inline double l2_norm(const Spectrum& F) { return haar_norm(F.values, F.dxi()); }

// F_{rho,s} P evaluated pointwise. Atoms in closed form; a density part by
// Gauss-Legendre panels in w = rho^-1(z), two oscillations per panel at most.
inline std::vector<cplx> probability_transform(const FragmentationProbability& p, double s,
                                               std::span<const double> xi, const Diffeomorphism& d) {
    double depth = 0.0;
    if (p.has_density()) {
        auto check = check_integrability(p, s, d);
        if (!check.passed) throw IntegrabilityError(integrability_message(s, check));
        depth = check.tail_depth;
    }
    double top = 1.0;
    for (double v : xi) top = std::max(top, std::abs(v));
    std::optional<detail::OscillatoryPanels> panels;
    if (p.has_density())
        panels.emplace([&](double w) { return p.density(d.rho(w)); }, -depth, 0.0,
                       detail::panels_for(depth, std::min(0.25, 2.0 / top)));
    std::vector<cplx> out(xi.size());
    for (std::size_t j = 0; j < xi.size(); ++j) {
        const cplx e(M_PI * s, -2.0 * M_PI * xi[j]);
        cplx acc = 0.0;
        for (const auto& a : p.atoms) acc += a.weight * std::exp(e * d.rho_inv(a.location)) * d.d_rho_inv(a.location);
        if (panels) acc += panels->integrate(e);
        out[j] = acc;
    }
    return out;
}

// F(dS/dx) = (2 xi i - s) pi F(S d_rho_inv) - F(S d2_rho_inv / d_rho_inv)
inline Spectrum derivative_spectrum(const SampledFunction& S, double s) {
    const Grid& g = S.grid();
    std::vector<double> ratio(g.size());
    for (std::size_t i = 0; i < ratio.size(); ++i) ratio[i] = g.d2_rho_inv()[i] / g.d_rho_inv()[i];
    Spectrum a = forward(S.times(g.d_rho_inv()), s);
    Spectrum b = forward(S.times(ratio), s);
    for (std::size_t c = 0; c < a.values.size(); ++c)
        a.values[c] = cplx(-s * M_PI, 2.0 * M_PI * a.xi[c]) * a.values[c] - b.values[c];
    a.truncation_warning = a.truncation_warning || b.truncation_warning;
    return a;
}

}  // namespace fragrate
