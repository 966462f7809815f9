#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <vector>

#include "errors.hpp"
#include "group_fourier.hpp"
#include "probability.hpp"
#include "transport_group.hpp"

namespace fragrate {

struct KernelConfig {
    FragmentationProbability p;
    double k = 2.0;
    Diffeomorphism d = exponential();
    double s = 0.0;

    void validate_k() const {
        if (!(k >= 1.0)) throw InvalidArgument("offspring count k must be >= 1");
    }
};

// Frequency interval U. On a discrete grid a frequency sample belongs to the
// band when its whole cell [xi - dxi/2, xi + dxi/2] lies inside [xi_lo, xi_hi].
struct FrequencyBand {
    double xi_lo = -1.0;
    double xi_hi = 1.0;

    FrequencyBand() = default;
    FrequencyBand(double lo, double hi) : xi_lo(lo), xi_hi(hi) {
        if (!(lo < hi)) throw InvalidArgument("band needs xi_lo < xi_hi");
    }

    bool contains_cell(double xi, double dxi) const { return xi - 0.5 * dxi >= xi_lo && xi + 0.5 * dxi <= xi_hi; }
};

// Band covering every frequency of the grid.
inline FrequencyBand full_band(const Grid& g) {
    const double dxi = 1.0 / (static_cast<double>(g.size()) * g.dz());
    const double top = 0.5 / g.dz();
    return {-top - 0.5 * dxi, top};
}

// Default: the frequency range minus its top 10%.
inline FrequencyBand default_band(const Grid& g) {
    const double nyquist = 0.5 / g.dz();
    return {-0.9 * nyquist, 0.9 * nyquist};
}

inline std::vector<bool> band_mask(const Spectrum& F, const FrequencyBand& band) {
    std::vector<bool> m(F.xi.size());
    const double dxi = F.dxi();
    for (std::size_t c = 0; c < m.size(); ++c) m[c] = band.contains_cell(F.xi[c], dxi);
    return m;
}

// P(x ⊙ y^-1) d_rho_inv(y) for the density part of P.
inline double kernel_density(double x, double y, const KernelConfig& cfg) {
    if (!cfg.p.has_density()) throw AtomicKernelError();
    if (!(x > 0.0) || !(y > 0.0)) throw DomainError("kernel_density needs positive arguments");
    const double u = transport(x, group_inverse(y, cfg.d), cfg.d);
    if (!(u > 0.0 && u < cfg.d.identity())) return 0.0;
    return cfg.p.density(u) * cfg.d.d_rho_inv(y);
}

// k F P - 1 at each xi
inline std::vector<cplx> kernel_symbol(const KernelConfig& cfg, std::span<const double> xi) {
    auto v = probability_transform(cfg.p, cfg.s, xi, cfg.d);
    for (auto& c : v) c = cfg.k * c - 1.0;
    return v;
}

enum class KernelRoute { fourier, direct };

struct KernelApplication {
    SampledFunction value;
    bool zero_extended = false;
};

namespace detail {

// Linear interpolation of samples in z with zero extension past either end.
inline cplx interp_z(const std::vector<cplx>& h, double pos, bool& outside) {
    const double n = static_cast<double>(h.size());
    if (pos < 0.0 || pos > n - 1.0) {
        outside = true;
        if (pos <= -1.0 || pos >= n) return 0.0;
    }
    const double fl = std::floor(pos);
    const auto i = static_cast<std::ptrdiff_t>(fl);
    const double t = pos - fl;
    auto at = [&](std::ptrdiff_t j) -> cplx {
        return (j < 0 || j >= static_cast<std::ptrdiff_t>(h.size())) ? cplx(0.0) : h[static_cast<std::size_t>(j)];
    };
    return (1.0 - t) * at(i) + t * at(i + 1);
}

inline bool boundary_significant(const std::vector<cplx>& h) {
    double peak = 0.0;
    for (const auto& c : h) peak = std::max(peak, std::abs(c));
    return peak > 0.0 && (std::abs(h.front()) > 1e-8 * peak || std::abs(h.back()) > 1e-8 * peak);
}

}  // namespace detail

// K(H)(x) = int K(x|y) H(y) dy.
// Fourier route: inverse(F P * F H). Direct route: atoms by the change of
// variables w_a d_rho_inv(z_a) H(x ⊙ z_a^-1), a density by a Riemann sum in z.
inline KernelApplication apply_K(const SampledFunction& H, const KernelConfig& cfg,
                                 KernelRoute route = KernelRoute::fourier) {
    const Grid& g = H.grid();
    const std::size_t n = g.size();
    if (route == KernelRoute::fourier) {
        Spectrum F = forward(H, cfg.s);
        const auto P = probability_transform(cfg.p, cfg.s, F.xi, cfg.d);
        for (std::size_t c = 0; c < n; ++c) F.values[c] *= P[c];
        return {inverse(F), detail::boundary_significant(H.values())};
    }
    const double dz = g.dz();
    const auto& h = H.values();
    std::vector<cplx> out(n, 0.0);
    bool outside = false;
    for (const auto& a : cfg.p.atoms) {
        const double shift = -cfg.d.rho_inv(a.location) / dz;  // x ⊙ z_a^-1 sits `shift` cells to the right
        const double factor = a.weight * cfg.d.d_rho_inv(a.location);
        bool here = false;
        for (std::size_t i = 0; i < n; ++i) out[i] += factor * detail::interp_z(h, static_cast<double>(i) + shift, here);
        outside = outside || here;
    }
    if (cfg.p.has_density()) {
        auto check = check_integrability(cfg.p, 0.0, cfg.d);
        const double depth = check.passed ? check.tail_depth : static_cast<double>(n) * dz;
        const auto taps = std::min<std::size_t>(n, static_cast<std::size_t>(std::ceil(depth / dz)) + 1);
        std::vector<double> c(taps);
        for (std::size_t m = 0; m < taps; ++m) {
            // densities live on the open interval below the identity: take the limit from below at w = 0
            const double z = m == 0 ? std::nextafter(cfg.d.identity(), 0.0) : cfg.d.rho(-static_cast<double>(m) * dz);
            c[m] = cfg.p.density(z) * dz * (m == 0 ? 0.5 : 1.0);
        }
        for (std::size_t i = 0; i < n; ++i) {
            cplx acc = 0.0;
            const std::size_t top = std::min(taps, n - i);
            for (std::size_t m = 0; m < top; ++m) acc += c[m] * h[i + m];
            out[i] += acc;
        }
        outside = true;
    }
    const bool flagged = outside && detail::boundary_significant(h);
    return {SampledFunction(H.grid_ptr(), std::move(out)), flagged};
}

struct HypothesisScan {
    double min_value = std::numeric_limits<double>::infinity();
    double argmin_xi = 0.0;
    double argmin_alpha = 0.0;
    bool passed = false;
};

constexpr double kHypothesisFloor = 1e-8;

// Four samples per FFT frequency bin across the band.
inline std::size_t default_samples(const FrequencyBand& band, const Grid& g) {
    const double dxi = 1.0 / (static_cast<double>(g.size()) * g.dz());
    return static_cast<std::size_t>(std::ceil(4.0 * (band.xi_hi - band.xi_lo) / dxi)) + 1;
}

namespace detail {

inline std::vector<double> band_samples(const FrequencyBand& band, std::size_t n) {
    n = std::max<std::size_t>(n, 2);
    std::vector<double> xi(n);
    for (std::size_t m = 0; m < n; ++m)
        xi[m] = band.xi_lo + (band.xi_hi - band.xi_lo) * static_cast<double>(m) / static_cast<double>(n - 1);
    return xi;
}

// Smallest |a + b t| for t in [0, t_max], and the minimizing t.
inline std::pair<double, double> min_on_segment(cplx a, cplx b, double t_max) {
    double t = 0.0;
    const double bb = std::norm(b);
    if (t_max > 0.0 && bb > 0.0) t = std::clamp(-(a.real() * b.real() + a.imag() * b.imag()) / bb, 0.0, t_max);
    return {std::abs(a + b * t), t};
}

// Golden-section polish of a sampled minimum between the neighbouring samples.
// Unlike Brent's method it keeps shrinking the bracket down to rounding level,
// which matters for V-shaped minima at exact zeros of the symbol.
template <class F>
void refine(F&& f, const std::vector<double>& xi, std::size_t best, HypothesisScan& scan) {
    double lo = xi[best > 0 ? best - 1 : 0];
    double hi = xi[std::min(best + 1, xi.size() - 1)];
    if (!(hi > lo)) return;
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = hi - r * (hi - lo), d = lo + r * (hi - lo);
    auto fc = f(c), fd = f(d);
    for (int it = 0; it < 200 && hi - lo > 4e-16 * std::max(1.0, std::abs(lo)); ++it) {
        if (fc.first < fd.first) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    for (auto [x, v] : {std::pair{c, fc}, std::pair{d, fd}})
        if (v.first < scan.min_value) {
            scan.min_value = v.first;
            scan.argmin_xi = x;
            scan.argmin_alpha = v.second;
        }
}

// min over xi in the band and alpha in [0, alpha_max] of |k F P(xi) - 1 + (2 pi i xi + j) alpha|.
// The inner minimum over alpha is exact (distance from a point to a segment).
inline HypothesisScan scan_symbol(const KernelConfig& cfg, const FrequencyBand& band, double j, double alpha_max,
                                  std::size_t n_samples) {
    const auto xi = band_samples(band, n_samples);
    const auto sym = kernel_symbol(cfg, xi);
    HypothesisScan scan;
    std::size_t best = 0;
    for (std::size_t m = 0; m < xi.size(); ++m) {
        const auto [v, a] = min_on_segment(sym[m], cplx(j, 2.0 * M_PI * xi[m]), alpha_max);
        if (v < scan.min_value) {
            scan.min_value = v;
            scan.argmin_xi = xi[m];
            scan.argmin_alpha = a;
            best = m;
        }
    }
    auto f = [&](double x) {
        const double one[1] = {x};
        return min_on_segment(kernel_symbol(cfg, one)[0], cplx(j, 2.0 * M_PI * x), alpha_max);
    };
    refine(f, xi, best, scan);
    scan.passed = scan.min_value > kHypothesisFloor;
    return scan;
}

}  // namespace detail

// min over the band of |k F P(xi) - 1|, sampled then refined.
inline HypothesisScan check_hypothesis_lower_bound(const KernelConfig& cfg, const FrequencyBand& band,
                                                   std::size_t n_samples) {
    return detail::scan_symbol(cfg, band, 0.0, 0.0, n_samples);
}

// Perturbed symbol minimized over the band and alpha in [0, alpha_max].
inline HypothesisScan check_hypothesis_qr(const KernelConfig& cfg, const FrequencyBand& band, double j,
                                          double alpha_max, std::size_t n_samples) {
    if (!(alpha_max >= 0.0)) throw InvalidArgument("alpha_max must be nonnegative");
    return detail::scan_symbol(cfg, band, j, alpha_max, n_samples);
}

// For a single atom |k F P| is constant in xi, so ||k F P| - 1| bounds the symbol from below.
inline double single_atom_bound(const KernelConfig& cfg) {
    if (cfg.p.atoms.size() != 1 || cfg.p.has_density()) return std::numeric_limits<double>::quiet_NaN();
    const auto& a = cfg.p.atoms.front();
    const double mod = cfg.k * a.weight * std::exp(M_PI * cfg.s * cfg.d.rho_inv(a.location)) * cfg.d.d_rho_inv(a.location);
    return std::abs(mod - 1.0);
}

inline SampledFunction pw_project(const SampledFunction& f, const FrequencyBand& band, double s) {
    Spectrum F = forward(f, s);
    const auto mask = band_mask(F, band);
    for (std::size_t c = 0; c < mask.size(); ++c)
        if (!mask[c]) F.values[c] = 0.0;
    return inverse(F);
}

// H with F H = F rhs / (k F P - 1) on the band and zero elsewhere.
inline SampledFunction spectral_divide(const SampledFunction& rhs, const KernelConfig& cfg, const FrequencyBand& band) {
    auto scan = check_hypothesis_lower_bound(cfg, band, default_samples(band, rhs.grid()));
    if (!scan.passed) throw HypothesisFailure(scan.argmin_xi, scan.min_value);
    Spectrum F = forward(rhs, cfg.s);
    const auto mask = band_mask(F, band);
    const auto sym = kernel_symbol(cfg, F.xi);
    for (std::size_t c = 0; c < mask.size(); ++c) F.values[c] = mask[c] ? F.values[c] / sym[c] : cplx(0.0);
    return inverse(F);
}

}  // namespace fragrate
