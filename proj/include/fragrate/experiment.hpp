#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "direct_solver.hpp"
#include "errors.hpp"
#include "inverse_solver.hpp"
#include "kernels.hpp"

namespace fragrate {

struct NoiseSpec {
    double epsilon = 0.0;
    std::uint64_t seed = 1;
};

struct NoisyData {
    SampledFunction N;
    double lambda = 0.0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline double unit_interval(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace detail

// N_eps = max(N + U, 0), lambda_eps = max(lambda + U', 0), U uniform on [-eps, eps].
// The stream depends only on the seed.
inline NoisyData add_noise(const Eigenpair& e, const NoiseSpec& spec) {
    if (!(spec.epsilon >= 0.0)) throw InvalidArgument("noise level must be nonnegative");
    if (spec.epsilon == 0.0) return {e.N, e.lambda};
    std::mt19937_64 rng(detail::splitmix64(spec.seed));
    std::vector<cplx> v(e.N.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double u = spec.epsilon * (2.0 * detail::unit_interval(rng) - 1.0);
        v[i] = std::max(e.N[i].real() + u, 0.0);
    }
    const double u = spec.epsilon * (2.0 * detail::unit_interval(rng) - 1.0);
    return {SampledFunction(e.N.grid_ptr(), std::move(v)), std::max(e.lambda + u, 0.0)};
}

// sqrt(sum over x_i in [x_lo, x_hi] of |f_i - g_i|^2 (x_{i+1} - x_i))
inline double l2_error(const SampledFunction& f, const SampledFunction& ref, double x_lo, double x_hi) {
    require_same_grid(f, ref);
    const Grid& g = f.grid();
    double acc = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = g.x()[i];
        if (x < x_lo || x > x_hi) continue;
        acc += std::norm(f[i] - ref[i]) * g.dx()[i];
    }
    return std::sqrt(acc);
}

// Least-squares slope of ln y against ln x.
inline double fit_loglog_slope(std::span<const double> xs, std::span<const double> ys) {
    const std::size_t n = xs.size();
    if (n < 2 || ys.size() != n) return std::numeric_limits<double>::quiet_NaN();
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::log(xs[i]), b = std::log(ys[i]);
        sx += a;
        sy += b;
        sxx += a * a;
        sxy += a * b;
    }
    const double den = static_cast<double>(n) * sxx - sx * sx;
    return den == 0.0 ? std::numeric_limits<double>::quiet_NaN() : (static_cast<double>(n) * sxy - sx * sy) / den;
}

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

struct SweepOptions {
    std::vector<double> eps_list;
    std::vector<FilterKind> filters{FilterKind::tikhonov, FilterKind::landweber};
    std::size_t seeds_per_eps = 5;
    std::uint64_t base_seed = 1;
    double m = 10.0;
    double j = 1.0;
    std::optional<FrequencyBand> band;  // default_band of the grid when unset
    double tau_rel = 1e-3;
    double x_lo = 0.0;
    double x_hi = 3.0;
    unsigned threads = 0;  // 0: hardware concurrency
};

struct SweepRow {
    double epsilon = 0.0;
    FilterKind filter = FilterKind::tikhonov;
    double alpha = 0.0;
    std::uint64_t seed = 0;
    double error_H = 0.0;
    double error_B = 0.0;
    bool failed = false;
    std::string message;
};

struct FilterSlopes {
    std::vector<double> eps;
    std::vector<double> median_error_H;
    std::vector<double> median_error_B;
    double slope_small = 0.0;  // fitted on the smallest decade of eps
    double slope_full = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::map<FilterKind, FilterSlopes> slopes;
    bool any_failed() const {
        return std::any_of(rows.begin(), rows.end(), [](const SweepRow& r) { return r.failed; });
    }
};

// Noise seed for a row: the same (eps, seed) pair gives the same data for every filter.
inline std::uint64_t row_noise_seed(double epsilon, std::uint64_t seed) {
    std::uint64_t bits = 0;
    std::memcpy(&bits, &epsilon, sizeof bits);
    return detail::splitmix64(seed) ^ detail::splitmix64(bits + 0x632be59bd9b4e019ULL);
}

inline SweepRow run_sweep_row(const Eigenpair& e, const ModelCoefficients& mc, const SweepOptions& opt,
                              const SampledFunction& H_true, const SampledFunction& B_true, double epsilon,
                              FilterKind kind, std::uint64_t seed) {
    SweepRow row;
    row.epsilon = epsilon;
    row.filter = kind;
    row.seed = seed;
    try {
        row.alpha = optimal_alpha(kind, epsilon, opt.m);
        const NoisyData data = add_noise(e, {epsilon, row_noise_seed(epsilon, seed)});
        FilterSpec spec{kind, row.alpha, opt.j, opt.m};
        Reconstruction rec = reconstruct_H(data.N, data.lambda, mc.g, spec, mc.kernel,
                                           opt.band.value_or(default_band(e.N.grid())), opt.tau_rel);
        row.error_H = l2_error(rec.H, H_true, opt.x_lo, opt.x_hi);
        row.error_B = l2_error(rec.B, B_true, opt.x_lo, opt.x_hi);
    } catch (const std::exception& ex) {
        row.failed = true;
        row.message = ex.what();
    }
    return row;
}

// Every (eps, filter, seed) row; rows run in parallel and are merged in order.
inline SweepResult sweep(const Eigenpair& e, const ModelCoefficients& mc, const SweepOptions& opt) {
    if (opt.eps_list.empty()) throw InvalidArgument("sweep needs at least one noise level");
    if (!std::is_sorted(opt.eps_list.begin(), opt.eps_list.end())) throw InvalidArgument("noise levels must be ascending");
    if (opt.filters.empty()) throw InvalidArgument("sweep needs at least one filter");
    if (opt.seeds_per_eps == 0) throw InvalidArgument("sweep needs at least one seed");
    const SampledFunction B_true = sample(mc.B, e.N.grid_ptr());
    std::vector<cplx> h(e.N.size());
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = B_true[i] * e.N[i];
    const SampledFunction H_true(e.N.grid_ptr(), std::move(h));

    struct Job {
        double eps;
        FilterKind kind;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (double eps : opt.eps_list)
        for (FilterKind k : opt.filters)
            for (std::size_t s = 0; s < opt.seeds_per_eps; ++s) jobs.push_back({eps, k, opt.base_seed + s});

    std::vector<SweepRow> rows(jobs.size());
    unsigned threads = opt.threads ? opt.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
            rows[i] = run_sweep_row(e, mc, opt, H_true, B_true, jobs[i].eps, jobs[i].kind, jobs[i].seed);
    };
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    SweepResult res;
    res.rows = std::move(rows);
    for (FilterKind k : opt.filters) {
        FilterSlopes fs;
        for (double eps : opt.eps_list) {
            std::vector<double> eh, eb;
            for (const auto& r : res.rows)
                if (r.filter == k && r.epsilon == eps && !r.failed) {
                    eh.push_back(r.error_H);
                    eb.push_back(r.error_B);
                }
            if (eh.empty()) continue;
            fs.eps.push_back(eps);
            fs.median_error_H.push_back(median(eh));
            fs.median_error_B.push_back(median(eb));
        }
        fs.slope_full = fit_loglog_slope(fs.eps, fs.median_error_H);
        std::vector<double> se, sh;
        for (std::size_t i = 0; i < fs.eps.size(); ++i)
            if (!fs.eps.empty() && fs.eps[i] <= 10.0 * fs.eps.front() * (1.0 + 1e-12)) {
                se.push_back(fs.eps[i]);
                sh.push_back(fs.median_error_H[i]);
            }
        fs.slope_small = fit_loglog_slope(se, sh);
        res.slopes[k] = std::move(fs);
    }
    return res;
}

}  // namespace fragrate
