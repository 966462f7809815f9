#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <string>

#include <unistd.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "fragrate/fragrate.hpp"

namespace testing_support {

using fragrate::cplx;

inline std::filesystem::path source_dir() { return FRAGRATE_SOURCE_DIR; }
inline std::filesystem::path shipped(const std::string& name) { return source_dir() / "configs" / name; }

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Fresh empty directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto p = std::filesystem::temp_directory_path() /
             ("fragrate_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

// Copy of a shipped config with extra "key = value" lines appended (later keys win).
inline std::filesystem::path config_with(const std::string& base, const std::string& extra, const std::string& tag) {
    auto dir = scratch_dir(tag);
    auto p = dir / "run.cfg";
    std::ofstream(p) << read_file(shipped(base)) << "\n" << extra << "\noutput.dir = " << (dir / "out").string() << "\n";
    return p;
}

// Gaussian bump in z = ln x.
inline fragrate::RealMap log_gauss(double c, double w, double a = 1.0) {
    return [c, w, a](double x) {
        const double z = std::log(x) - c;
        return a * std::exp(-z * z / (2.0 * w * w));
    };
}

// Adaptive Gauss-Kronrod integral of a complex integrand over [a, b].
template <class F>
cplx integrate(F f, double a, double b, double tol = 1e-13) {
    using boost::math::quadrature::gauss_kronrod;
    const double re = gauss_kronrod<double, 31>::integrate([&](double t) { return f(t).real(); }, a, b, 25, tol);
    const double im = gauss_kronrod<double, 31>::integrate([&](double t) { return f(t).imag(); }, a, b, 25, tol);
    return {re, im};
}

inline double rel_haar(const fragrate::SampledFunction& a, const fragrate::SampledFunction& b) {
    return fragrate::haar_norm(a - b) / fragrate::haar_norm(b);
}

// The shipped reference configuration, solved once per process.
struct ReferenceRun {
    fragrate::ResolvedConfig rc;
    fragrate::DirectResult direct;
};

inline const ReferenceRun& reference_run() {
    static std::once_flag once;
    static ReferenceRun* run = nullptr;
    std::call_once(once, [] {
        auto rc = fragrate::resolve(fragrate::load_config(shipped("equal_mitosis.cfg")));
        auto res = fragrate::evolve_to_eigenpair(rc.model, rc.grid, rc.evolve);
        run = new ReferenceRun{std::move(rc), std::move(res)};
    });
    return *run;
}

inline fragrate::SampledFunction true_H(const ReferenceRun& r) {
    const auto B = fragrate::sample(r.rc.model.B, r.rc.grid);
    std::vector<cplx> h(B.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = B[i] * r.direct.eigen.N[i];
    return {r.rc.grid, std::move(h)};
}

}  // namespace testing_support
