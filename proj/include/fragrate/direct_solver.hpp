#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "errors.hpp"
#include "kernels.hpp"
#include "transport_group.hpp"

namespace fragrate {

struct ModelCoefficients {
    RealMap g;
    RealMap B;
    RealMap n0;
    KernelConfig kernel;
};

enum class TransportScheme {
    upwind,  // first-order upwind fluxes, explicit Euler
    muscl    // van Leer limited reconstruction, two-stage SSP Runge-Kutta
};

inline double cfl_limit(TransportScheme s) { return s == TransportScheme::upwind ? 1.0 : 0.5; }

struct EvolveOptions {
    double t_max = 250.0;
    std::size_t n_steps = 10000;
    TransportScheme scheme = TransportScheme::muscl;
    double tolerance = 1e-6;
};

struct ConvergenceReport {
    bool converged = false;
    double profile_change = 0.0;  // relative L2 change over the final 10% of steps
    double lambda_spread = 0.0;   // max - min of the per-step estimates in that window
    double cfl = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;
    bool zero_extended = false;
    std::vector<double> tail_changes;  // per-step relative change over the final 20%
};

struct Eigenpair {
    SampledFunction N;
    double lambda = 0.0;
};

struct DirectResult {
    Eigenpair eigen;
    ConvergenceReport report;
};

// sqrt(sum |v_i|^2 dx_i) with left-rectangle widths.
inline double x_norm(std::span<const cplx> v, const Grid& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += std::norm(v[i]) * g.dx()[i];
    return std::sqrt(acc);
}

inline double x_norm(std::span<const double> v, const Grid& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * v[i] * g.dx()[i];
    return std::sqrt(acc);
}

inline double rectangle_mass(std::span<const double> v, const Grid& g) {
    double acc = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) acc += v[i] * g.dx()[i];
    return acc;
}

namespace detail {

// Finite-volume discretization of -d/dx(g n) - B n + k K(B n). Cell i spans
// [rho(z_i - dz/2), rho(z_i + dz/2)]; zero inflow at the left face, free outflow
// at the right one.
class GrowthFragmentationOperator {
public:
    GrowthFragmentationOperator(const ModelCoefficients& m, GridPtr grid, TransportScheme scheme)
        : m_(m), grid_(std::move(grid)), scheme_(scheme) {
        const Grid& g = *grid_;
        const std::size_t n = g.size();
        const double h = 0.5 * g.dz();
        const auto& rho = g.diffeo().rho;
        g_face_.resize(n);
        vol_.resize(n);
        B_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double lo = rho(g.z()[i] - h), hi = rho(g.z()[i] + h);
            vol_[i] = hi - lo;
            g_face_[i] = m_.g(hi);
            B_[i] = m_.B(g.x()[i]);
            const double gi = m_.g(g.x()[i]);
            if (!std::isfinite(g_face_[i]) || !std::isfinite(B_[i]) || !std::isfinite(gi))
                throw NonFiniteError(i, "model coefficients");
            if (gi < 0.0 || g_face_[i] < 0.0) throw InvalidArgument("growth rate must be nonnegative");
            if (B_[i] < 0.0) throw InvalidArgument("fragmentation rate must be nonnegative");
        }
    }

    double max_rate() const {
        double r = 0.0;
        for (std::size_t i = 0; i < vol_.size(); ++i) r = std::max(r, g_face_[i] / vol_[i]);
        return r;
    }

    // d/dx(g n) by the flux stencil
    std::vector<double> flux_divergence(const std::vector<double>& v) const {
        const std::size_t n = v.size();
        std::vector<double> face(n), out(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (scheme_ == TransportScheme::upwind) {
                face[i] = v[i];
            } else {
                const double dl = v[i] - (i > 0 ? v[i - 1] : 0.0);
                const double dr = (i + 1 < n ? v[i + 1] : 0.0) - v[i];
                const double p = dl * dr;
                face[i] = v[i] + (p > 0.0 ? p / (dl + dr) : 0.0);
            }
        }
        double left = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double right = g_face_[i] * face[i];
            out[i] = (right - left) / vol_[i];
            left = right;
        }
        return out;
    }

    // k K(B n) by the direct route (keeps the evolution positive)
    std::vector<double> gain(const std::vector<double>& v, bool& zero_extended) const {
        std::vector<double> bn(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) bn[i] = B_[i] * v[i];
        auto K = apply_K(SampledFunction::real(grid_, bn), m_.kernel, KernelRoute::direct);
        zero_extended = zero_extended || K.zero_extended;
        std::vector<double> out(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) out[i] = m_.kernel.k * K.value[i].real();
        return out;
    }

    std::vector<double> apply(const std::vector<double>& v, bool& zero_extended) const {
        auto div = flux_divergence(v);
        auto gn = gain(v, zero_extended);
        for (std::size_t i = 0; i < v.size(); ++i) div[i] = -div[i] - B_[i] * v[i] + gn[i];
        return div;
    }

    const std::vector<double>& B() const { return B_; }

private:
    const ModelCoefficients& m_;
    GridPtr grid_;
    TransportScheme scheme_;
    std::vector<double> g_face_, vol_, B_;
};

inline double relative_change(const std::vector<double>& a, const std::vector<double>& b, const Grid& g) {
    std::vector<double> d(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
    const double base = x_norm(a, g);
    return base > 0.0 ? x_norm(d, g) / base : 0.0;
}

}  // namespace detail

inline std::size_t suggested_steps(const ModelCoefficients& m, const GridPtr& grid, const EvolveOptions& opt) {
    detail::GrowthFragmentationOperator op(m, grid, opt.scheme);
    return static_cast<std::size_t>(std::ceil(opt.t_max * op.max_rate() / cfl_limit(opt.scheme)));
}

// Long-time integration with renormalization at every step.
inline DirectResult evolve_to_eigenpair(const ModelCoefficients& m, const GridPtr& grid, const EvolveOptions& opt) {
    if (!(opt.t_max > 0.0)) throw InvalidArgument("t_max must be positive");
    if (opt.n_steps < 10) throw InvalidArgument("n_steps must be at least 10");
    m.kernel.validate_k();
    const Grid& g = *grid;
    const std::size_t n = g.size();
    detail::GrowthFragmentationOperator op(m, grid, opt.scheme);
    const double dt = opt.t_max / static_cast<double>(opt.n_steps);
    ConvergenceReport rep;
    rep.dt = dt;
    rep.cfl = dt * op.max_rate();
    const double limit = cfl_limit(opt.scheme);
    if (rep.cfl > limit) throw CflViolation(rep.cfl, limit, suggested_steps(m, grid, opt));

    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) {
        v[i] = m.n0(g.x()[i]);
        if (!std::isfinite(v[i]) || v[i] < 0.0) throw InvalidArgument("initial density must be finite and nonnegative");
    }
    double mass = rectangle_mass(v, g);
    if (!(mass > 0.0)) throw InvalidArgument("initial density has zero mass on the grid");
    for (auto& c : v) c /= mass;

    const std::size_t tail10 = std::max<std::size_t>(1, opt.n_steps / 10);
    const std::size_t tail20 = std::max<std::size_t>(1, opt.n_steps / 5);
    std::vector<double> snapshot;
    double lambda_sum = 0.0, lambda_min = INFINITY, lambda_max = -INFINITY;
    bool zero_ext = false;
    std::vector<double> next(n);
    for (std::size_t step = 0; step < opt.n_steps; ++step) {
        if (step == opt.n_steps - tail10) snapshot = v;
        auto a = op.apply(v, zero_ext);
        for (std::size_t i = 0; i < n; ++i) next[i] = v[i] + dt * a[i];
        if (opt.scheme == TransportScheme::muscl) {
            auto b = op.apply(next, zero_ext);
            for (std::size_t i = 0; i < n; ++i) next[i] = 0.5 * (v[i] + next[i] + dt * b[i]);
        }
        mass = rectangle_mass(next, g);
        if (!(mass > 0.0) || !std::isfinite(mass)) throw Error("mass vanished during the evolution at step " + std::to_string(step));
        const double lam = std::log(mass) / dt;
        for (auto& c : next) c /= mass;
        if (step >= opt.n_steps - tail20) rep.tail_changes.push_back(detail::relative_change(next, v, g));
        if (step >= opt.n_steps - tail10) {
            lambda_sum += lam;
            lambda_min = std::min(lambda_min, lam);
            lambda_max = std::max(lambda_max, lam);
        }
        std::swap(v, next);
    }
    rep.steps = opt.n_steps;
    rep.profile_change = detail::relative_change(v, snapshot, g);
    rep.lambda_spread = lambda_max - lambda_min;
    rep.zero_extended = zero_ext;
    rep.converged = rep.profile_change < opt.tolerance;
    return {Eigenpair{SampledFunction::real(grid, v), lambda_sum / static_cast<double>(tail10)}, rep};
}

struct EigenResidual {
    double relative = 0.0;
    double absolute = 0.0;
    bool degenerate = false;
};

// || d/dx(gN) + (B + lambda) N - k K(BN) || / || (B + lambda) N || with the evolver's stencil.
inline EigenResidual eigen_residual(const Eigenpair& e, const ModelCoefficients& m,
                                    TransportScheme scheme = TransportScheme::muscl) {
    const Grid& g = e.N.grid();
    detail::GrowthFragmentationOperator op(m, e.N.grid_ptr(), scheme);
    const auto v = e.N.real_part();
    bool ext = false;
    const auto a = op.apply(v, ext);
    std::vector<double> r(v.size()), base(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        r[i] = e.lambda * v[i] - a[i];
        base[i] = (op.B()[i] + e.lambda) * v[i];
    }
    EigenResidual out;
    out.absolute = x_norm(r, g);
    const double den = x_norm(base, g);
    if (den == 0.0) {
        out.degenerate = true;
        out.relative = 0.0;
        return out;
    }
    out.relative = out.absolute / den;
    return out;
}

}  // namespace fragrate
