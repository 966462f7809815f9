#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"
#include "transport_group.hpp"

namespace fragrate {

struct Atom {
    double location;
    double weight;
};

// Transition law P on (0, rho(0)): a list of atoms and/or a density.
struct FragmentationProbability {
    std::string name;
    std::vector<Atom> atoms;
    RealMap density;  // empty when P is purely atomic

    bool has_density() const { return static_cast<bool>(density); }
};

namespace detail {

// Composite 20-point Gauss-Legendre rule on [a, b] split into `panels` pieces.
template <class F>
auto gauss_panels(F&& f, double a, double b, std::size_t panels) -> decltype(f(a)) {
    using Rule = boost::math::quadrature::gauss<double, 20>;
    const auto& xs = Rule::abscissa();
    const auto& ws = Rule::weights();
    decltype(f(a)) acc{};
    const double h = (b - a) / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + static_cast<double>(p) * h;
        const double mid = lo + 0.5 * h;
        const double half = 0.5 * h;
        for (std::size_t k = 0; k < xs.size(); ++k) {
            acc += ws[k] * half * (f(mid - half * xs[k]) + f(mid + half * xs[k]));
        }
    }
    return acc;
}

inline std::size_t panels_for(double length, double width) {
    return static_cast<std::size_t>(std::max(1.0, std::ceil(length / width)));
}

}  // namespace detail

// Value of the integrability integral and the depth in w = rho^-1(z) beyond
// which the density part contributes nothing at double precision.
struct IntegrabilityResult {
    bool passed = false;
    double value = 0.0;
    double tail_depth = 0.0;
    std::string message;
};

// Integral of e^{pi s rho^-1(z)} d_rho_inv(z) dP(z). For the density part the
// substitution w = rho^-1(z) gives int_{-inf}^0 p(rho(w)) e^{pi s w} dw, which is
// integrated on [-W, 0] with W doubled until the increment is negligible.
inline IntegrabilityResult check_integrability(const FragmentationProbability& p, double s,
                                               const Diffeomorphism& d) {
    constexpr double kLimit = 1e12;
    constexpr double kMaxDepth = 65536.0;
    IntegrabilityResult r;
    double atoms = 0.0;
    for (const auto& a : p.atoms) atoms += a.weight * std::exp(M_PI * s * d.rho_inv(a.location)) * d.d_rho_inv(a.location);
    if (!p.has_density()) {
        r.value = atoms;
        r.passed = std::isfinite(atoms) && atoms <= kLimit;
        if (!r.passed) r.message = "atomic integral exceeds limit";
        return r;
    }
    auto integrand = [&](double w) {
        const double pv = p.density(d.rho(w));
        return pv == 0.0 ? 0.0 : pv * std::exp(M_PI * s * w);
    };
    double depth = 8.0;
    double total = detail::gauss_panels(integrand, -depth, 0.0, detail::panels_for(depth, 0.25));
    while (true) {
        const double inc = detail::gauss_panels(integrand, -2.0 * depth, -depth, detail::panels_for(depth, 0.5));
        if (!std::isfinite(inc) || !std::isfinite(total)) {
            r.value = std::numeric_limits<double>::infinity();
            r.message = "integrand is not finite";
            return r;
        }
        const bool negligible = std::abs(inc) <= 1e-13 * std::abs(total);
        total += inc;
        if (negligible) break;
        if (d.rho(-2.0 * depth) == 0.0) {
            // rho underflows before the tail has died out: the tail cannot be resolved
            r.value = atoms + total;
            r.message = "integral does not converge (tail still growing where rho underflows)";
            return r;
        }
        if (atoms + total > kLimit) {
            r.value = atoms + total;
            r.message = "integral exceeds 1e12";
            return r;
        }
        depth *= 2.0;
        if (depth > kMaxDepth) {
            r.value = atoms + total;
            r.message = "integral does not converge (doubling refinement keeps growing)";
            return r;
        }
    }
    r.value = atoms + total;
    r.tail_depth = depth;
    r.passed = r.value <= kLimit;
    if (!r.passed) r.message = "integral exceeds 1e12";
    return r;
}

inline std::string integrability_message(double s, const IntegrabilityResult& r) {
    return "integrability condition int e^{pi s rho^-1(z)} d_rho_inv(z) dP(z) < inf fails at s = " +
           std::to_string(s) + ": " + r.message;
}

// Checks total mass and atom placement. Throws InvalidArgument.
inline void validate(const FragmentationProbability& p, const Diffeomorphism& d) {
    const double top = d.identity();
    double mass = 0.0;
    for (const auto& a : p.atoms) {
        if (!(a.location > 0.0 && a.location < top))
            throw InvalidArgument(p.name + ": atom at " + std::to_string(a.location) + " outside (0, rho(0))");
        if (!(a.weight > 0.0)) throw InvalidArgument(p.name + ": atom weights must be positive");
        mass += a.weight;
    }
    if (p.has_density()) {
        auto f = [&](double z) { return p.density(z); };
        mass += detail::gauss_panels(f, 0.0, top, 256);
    }
    if (std::abs(mass - 1.0) > 1e-10)
        throw InvalidArgument(p.name + ": total mass " + std::to_string(mass) + " differs from 1");
}

// delta at 1/2; with rho = exp this is division into two equal halves.
inline FragmentationProbability equal_mitosis() { return {"equal-mitosis", {{0.5, 1.0}}, {}}; }

inline FragmentationProbability dirac(double location) {
    return {"dirac:" + std::to_string(location), {{location, 1.0}}, {}};
}

// Uniform density on (0, rho(0)).
inline FragmentationProbability uniform_selfsimilar(const Diffeomorphism& d) {
    const double top = d.identity();
    return {"uniform-selfsimilar", {}, [top](double z) { return z > 0.0 && z < top ? 1.0 / top : 0.0; }};
}

// Density 2z / rho(0)^2 on (0, rho(0)).
inline FragmentationProbability linear_selfsimilar(const Diffeomorphism& d) {
    const double top = d.identity();
    return {"linear-selfsimilar", {}, [top](double z) { return z > 0.0 && z < top ? 2.0 * z / (top * top) : 0.0; }};
}

inline FragmentationProbability probability_by_name(std::string_view name, const Diffeomorphism& d) {
    FragmentationProbability p;
    if (name == "equal-mitosis") p = equal_mitosis();
    else if (name == "uniform-selfsimilar") p = uniform_selfsimilar(d);
    else if (name == "linear-selfsimilar") p = linear_selfsimilar(d);
    else if (name.substr(0, 6) == "dirac:") {
        std::string loc(name.substr(6));
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(loc, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != loc.size() || loc.empty()) throw InvalidArgument("bad dirac location '" + loc + "'");
        p = dirac(v);
    } else {
        throw InvalidArgument("unknown probability '" + std::string(name) + "'");
    }
    validate(p, d);
    return p;
}

}  // namespace fragrate
