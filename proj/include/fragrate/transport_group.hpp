#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace fragrate {

using RealMap = std::function<double(double)>;
using cplx = std::complex<double>;

// Structure map rho: R -> R+ together with rho^-1 and its first two derivatives.
struct Diffeomorphism {
    std::string name;
    RealMap rho;
    RealMap rho_inv;
    RealMap d_rho_inv;   // Haar density
    RealMap d2_rho_inv;

    double identity() const { return rho(0.0); }
};

inline Diffeomorphism exponential() {
    return {"exp",
            [](double z) { return std::exp(z); },
            [](double x) { return std::log(x); },
            [](double x) { return 1.0 / x; },
            [](double x) { return -1.0 / (x * x); }};
}

// rho(z) = ln(1 + e^z)
inline Diffeomorphism softplus() {
    return {"softplus",
            [](double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); },
            [](double y) { return y + std::log(-std::expm1(-y)); },
            [](double y) { return -1.0 / std::expm1(-y); },
            [](double y) {
                double e = std::expm1(-y);
                return -std::exp(-y) / (e * e);
            }};
}

inline Diffeomorphism diffeomorphism_by_name(std::string_view name) {
    if (name == "exp") return exponential();
    if (name == "softplus") return softplus();
    throw InvalidArgument("unknown diffeomorphism '" + std::string(name) + "'");
}

// Checks monotonicity, round trip and the analytic derivatives against
// central differences at the given z samples. Throws InvalidArgument.
inline void validate(const Diffeomorphism& d, std::span<const double> zs) {
    if (!d.rho || !d.rho_inv || !d.d_rho_inv || !d.d2_rho_inv)
        throw InvalidArgument("diffeomorphism '" + d.name + "' is missing a map");
    double prev_x = 0.0;
    for (std::size_t i = 0; i < zs.size(); ++i) {
        const double z = zs[i];
        const double x = d.rho(z);
        if (!(x > 0.0) || !std::isfinite(x))
            throw InvalidArgument(d.name + ": rho(" + std::to_string(z) + ") is not a positive number");
        if (i > 0 && !(x > prev_x)) throw InvalidArgument(d.name + ": rho is not increasing");
        prev_x = x;
        const double back = d.rho_inv(x);
        if (std::abs(back - z) > 1e-12 * std::max(1.0, std::abs(z)))
            throw InvalidArgument(d.name + ": rho_inv(rho(z)) != z at z = " + std::to_string(z));
        const double j1 = d.d_rho_inv(x);
        if (!(j1 > 0.0)) throw InvalidArgument(d.name + ": d_rho_inv must be positive");
        const double h = 1e-5 * x;
        const double fd1 = (d.rho_inv(x + h) - d.rho_inv(x - h)) / (2.0 * h);
        if (std::abs(fd1 - j1) > 1e-6 * std::abs(j1))
            throw InvalidArgument(d.name + ": d_rho_inv disagrees with finite differences at x = " +
                                  std::to_string(x));
        const double fd2 = (d.d_rho_inv(x + h) - d.d_rho_inv(x - h)) / (2.0 * h);
        const double j2 = d.d2_rho_inv(x);
        if (std::abs(fd2 - j2) > 1e-6 * (std::abs(j2) + j1 / x))
            throw InvalidArgument(d.name + ": d2_rho_inv disagrees with finite differences at x = " +
                                  std::to_string(x));
    }
}

inline double transport(double a, double b, const Diffeomorphism& d) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("transport needs positive arguments");
    return d.rho(d.rho_inv(a) + d.rho_inv(b));
}

inline double group_inverse(double a, const Diffeomorphism& d) {
    if (!(a > 0.0)) throw DomainError("group_inverse needs a positive argument");
    return d.rho(-d.rho_inv(a));
}

inline bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Uniform grid in z = rho^-1(x); z_max itself is not a sample.
struct ZGrid {
    double z_min = 0.0;
    double z_max = 1.0;
    std::size_t n = 8;

    double dz() const { return (z_max - z_min) / static_cast<double>(n); }
    double z(std::size_t i) const { return z_min + static_cast<double>(i) * dz(); }
};

// A z-grid with its image under rho and the Haar weights, shared by samples.
class Grid {
public:
    Grid(ZGrid zg, Diffeomorphism d) : zg_(zg), d_(std::move(d)) {
        if (!(zg_.z_min < zg_.z_max)) throw InvalidArgument("grid needs z_min < z_max");
        if (zg_.n < 8 || !is_power_of_two(zg_.n))
            throw InvalidArgument("grid.n must be a power of two >= 8, got " + std::to_string(zg_.n));
        const std::size_t n = zg_.n;
        z_.resize(n);
        x_.resize(n);
        j1_.resize(n);
        j2_.resize(n);
        dx_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            z_[i] = zg_.z(i);
            x_[i] = d_.rho(z_[i]);
            j1_[i] = d_.d_rho_inv(x_[i]);
            j2_[i] = d_.d2_rho_inv(x_[i]);
        }
        for (std::size_t i = 0; i < n; ++i)
            dx_[i] = (i + 1 < n ? x_[i + 1] : d_.rho(zg_.z_max)) - x_[i];
        std::vector<double> probe;
        for (std::size_t i = 0; i < n; i += std::max<std::size_t>(1, n / 64)) probe.push_back(z_[i]);
        if (probe.back() != z_[n - 1]) probe.push_back(z_[n - 1]);
        validate(d_, probe);
        for (std::size_t i = 1; i < n; ++i)
            if (!(x_[i] > x_[i - 1])) throw InvalidArgument("x-grid is not strictly increasing");
    }

    const ZGrid& zgrid() const { return zg_; }
    const Diffeomorphism& diffeo() const { return d_; }
    std::size_t size() const { return zg_.n; }
    double dz() const { return zg_.dz(); }
    const std::vector<double>& z() const { return z_; }
    const std::vector<double>& x() const { return x_; }
    const std::vector<double>& d_rho_inv() const { return j1_; }
    const std::vector<double>& d2_rho_inv() const { return j2_; }
    // Left-rectangle widths x_{i+1} - x_i (the last one uses rho(z_max)).
    const std::vector<double>& dx() const { return dx_; }

    bool same_as(const Grid& o) const {
        return this == &o || (zg_.z_min == o.zg_.z_min && zg_.z_max == o.zg_.z_max && zg_.n == o.zg_.n &&
                              d_.name == o.d_.name);
    }

private:
    ZGrid zg_;
    Diffeomorphism d_;
    std::vector<double> z_, x_, j1_, j2_, dx_;
};

using GridPtr = std::shared_ptr<const Grid>;

inline GridPtr build_grid(double z_min, double z_max, std::size_t n, const Diffeomorphism& d) {
    return std::make_shared<const Grid>(ZGrid{z_min, z_max, n}, d);
}

// Grid whose first sample is x_min and whose right end rho(z_max) is x_max.
inline GridPtr build_grid_x(double x_min, double x_max, std::size_t n, const Diffeomorphism& d) {
    if (!(x_min > 0.0) || !(x_max > x_min)) throw InvalidArgument("grid needs 0 < x_min < x_max");
    return build_grid(d.rho_inv(x_min), d.rho_inv(x_max), n, d);
}

// Samples of a (generally complex) function on a grid.
class SampledFunction {
public:
    SampledFunction(GridPtr grid, std::vector<cplx> values) : grid_(std::move(grid)), values_(std::move(values)) {
        if (!grid_) throw InvalidArgument("sampled function without grid");
        if (values_.size() != grid_->size())
            throw InvalidArgument("expected " + std::to_string(grid_->size()) + " samples, got " +
                                  std::to_string(values_.size()));
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!std::isfinite(values_[i].real()) || !std::isfinite(values_[i].imag()))
                throw NonFiniteError(i, "sampled function");
    }

    static SampledFunction real(GridPtr grid, std::span<const double> v) {
        return SampledFunction(std::move(grid), std::vector<cplx>(v.begin(), v.end()));
    }
    static SampledFunction zeros(GridPtr grid) {
        const std::size_t n = grid->size();
        return SampledFunction(std::move(grid), std::vector<cplx>(n));
    }

    const Grid& grid() const { return *grid_; }
    const GridPtr& grid_ptr() const { return grid_; }
    std::size_t size() const { return values_.size(); }
    const std::vector<cplx>& values() const { return values_; }
    cplx operator[](std::size_t i) const { return values_[i]; }

    std::vector<double> real_part() const {
        std::vector<double> r(values_.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = values_[i].real();
        return r;
    }

    // Pointwise product with a real array on the same grid.
    SampledFunction times(std::span<const double> w) const {
        std::vector<cplx> v(values_);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] *= w[i];
        return SampledFunction(grid_, std::move(v));
    }

private:
    GridPtr grid_;
    std::vector<cplx> values_;
};

inline void require_same_grid(const SampledFunction& a, const SampledFunction& b) {
    if (!a.grid().same_as(b.grid())) throw GridMismatch();
}

inline SampledFunction operator+(const SampledFunction& a, const SampledFunction& b) {
    require_same_grid(a, b);
    std::vector<cplx> v(a.values());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] += b[i];
    return SampledFunction(a.grid_ptr(), std::move(v));
}

inline SampledFunction operator-(const SampledFunction& a, const SampledFunction& b) {
    require_same_grid(a, b);
    std::vector<cplx> v(a.values());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] -= b[i];
    return SampledFunction(a.grid_ptr(), std::move(v));
}

inline SampledFunction operator*(cplx c, const SampledFunction& a) {
    std::vector<cplx> v(a.values());
    for (auto& x : v) x *= c;
    return SampledFunction(a.grid_ptr(), std::move(v));
}

inline SampledFunction sample(const RealMap& f, const GridPtr& grid) {
    const auto& x = grid->x();
    std::vector<cplx> v(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double y = f(x[i]);
        if (!std::isfinite(y)) throw NonFiniteError(i, "sample");
        v[i] = y;
    }
    return SampledFunction(grid, std::move(v));
}

// Norm in L^2 of the Haar measure: sqrt(sum |f_i|^2 dz).
inline double haar_norm(std::span<const cplx> v, double dz) {
    double acc = 0.0;
    for (const auto& c : v) acc += std::norm(c);
    return std::sqrt(acc * dz);
}

inline double haar_norm(const SampledFunction& f) { return haar_norm(f.values(), f.grid().dz()); }

}  // namespace fragrate
