#include <gtest/gtest.h>

#include "support.hpp"

using namespace fragrate;
using testing_support::log_gauss;
using testing_support::reference_run;

namespace {

KernelConfig mitosis(double s = 0.0) { return {equal_mitosis(), 2.0, exponential(), s}; }

double window_relative_error(const SampledFunction& f, const SampledFunction& ref, double lo, double hi) {
    return l2_error(f, ref, lo, hi) / l2_error(SampledFunction::zeros(ref.grid_ptr()), ref, lo, hi);
}

// Synthetic data whose spectra are negligible outside |xi| <= 3.
struct Synthetic {
    GridPtr grid = build_grid(-8.0, 8.0, 4096, exponential());
    RealMap g = [](double x) { return x; };
    SampledFunction N = sample(log_gauss(0.2, 0.5), grid);
    double lambda = 0.7;
    FrequencyBand band{-3.0, 3.0};
};

}  // namespace

TEST(FilterValues, Limits) {
    const double xi[] = {-3.0, -0.5, 0.0, 0.25, 2.0};
    auto cfg = mitosis();
    auto tik = filter_values({FilterKind::tikhonov, 1e-12}, cfg, xi);
    for (std::size_t c = 0; c < 5; ++c) EXPECT_LE(std::abs(tik.f[c] - tik.h[c]), 1e-11 * std::abs(tik.h[c]));
    auto lw = filter_values({FilterKind::landweber, 12.0}, cfg, xi);
    EXPECT_EQ(lw.f[2], lw.h[2]);
    EXPECT_LT(std::abs(lw.f[0]), std::abs(lw.h[0]));
    auto qr0 = filter_values({FilterKind::quasi_reversibility, 0.0, 1.0}, cfg, xi);
    for (std::size_t c = 0; c < 5; ++c) {
        EXPECT_EQ(qr0.f[c], qr0.h[c]);
        EXPECT_EQ(qr0.h[c], tik.h[c]);
    }
    auto qr = filter_values({FilterKind::quasi_reversibility, 0.05, 2.0}, cfg, xi);
    const auto sym = kernel_symbol(cfg, xi);
    for (std::size_t c = 0; c < 5; ++c)
        EXPECT_NEAR(std::abs(qr.h[c] - 1.0 / (sym[c] + cplx(2.0, 2.0 * M_PI * xi[c]) * 0.05)), 0.0, 1e-15);
    EXPECT_THROW(filter_values({FilterKind::tikhonov, -1.0}, cfg, xi), InvalidArgument);
}

TEST(FilterValues, VanishingDenominator) {
    const double xi[] = {1.0 / std::log(2.0)};
    EXPECT_THROW(filter_values({FilterKind::tikhonov, 0.1}, mitosis(2.0 / M_PI), xi), HypothesisFailure);
}

TEST(FilterKind, Names) {
    EXPECT_EQ(filter_kind_from("qr"), FilterKind::quasi_reversibility);
    EXPECT_EQ(filter_kind_from(to_string(FilterKind::landweber)), FilterKind::landweber);
    EXPECT_THROW(filter_kind_from("wiener"), InvalidArgument);
}

TEST(ReconstructH, NoiselessConsistency) {
    const auto& run = reference_run();
    const auto& e = run.direct.eigen;
    auto rec = reconstruct_H(e.N, e.lambda, run.rc.model.g, {FilterKind::tikhonov, 1e-4}, run.rc.kernel, run.rc.band);
    EXPECT_LE(window_relative_error(rec.H, testing_support::true_H(run), 0.3, 2.7), 0.05);
    EXPECT_EQ(rec.diagnostics.values.at("alpha"), 1e-4);
    EXPECT_GT(rec.diagnostics.values.at("min_denominator"), 0.0);
}

TEST(ReconstructH, ZeroDataGivesZero) {
    const auto& run = reference_run();
    auto rec = reconstruct_H(SampledFunction::zeros(run.rc.grid), 0.0, run.rc.model.g, {FilterKind::landweber, 12.0},
                             run.rc.kernel, run.rc.band);
    EXPECT_EQ(haar_norm(rec.H), 0.0);
    EXPECT_EQ(haar_norm(rec.B), 0.0);
}

TEST(ReconstructH, LinearInN) {
    Synthetic d;
    auto N2 = sample(log_gauss(-0.3, 0.4), d.grid);
    const FilterSpec spec{FilterKind::tikhonov, 0.01};
    auto a = reconstruct_H(d.N, d.lambda, d.g, spec, mitosis(), d.band).H;
    auto b = reconstruct_H(N2, d.lambda, d.g, spec, mitosis(), d.band).H;
    auto ab = reconstruct_H(d.N + cplx(3.0) * N2, d.lambda, d.g, spec, mitosis(), d.band).H;
    EXPECT_LE(testing_support::rel_haar(ab, a + cplx(3.0) * b), 1e-12);
}

TEST(ReconstructH, TikhonovBiasIsLinearInAlpha) {
    Synthetic d;
    auto H0 = reconstruct_H(d.N, d.lambda, d.g, {FilterKind::tikhonov, 0.0}, mitosis(), d.band).H;
    std::vector<double> as{1e-1, 1e-2, 1e-3, 1e-4}, errs;
    for (double a : as)
        errs.push_back(haar_norm(reconstruct_H(d.N, d.lambda, d.g, {FilterKind::tikhonov, a}, mitosis(), d.band).H - H0));
    EXPECT_NEAR(fit_loglog_slope(as, errs), 1.0, 0.15);
}

TEST(ReconstructH, LandweberBeatsTikhonovAtSmallNoise) {
    const auto& run = reference_run();
    const auto& e = run.direct.eigen;
    const auto H = testing_support::true_H(run);
    const double eps = 1e-3;
    std::vector<double> et, el;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto noisy = add_noise(e, {eps, seed});
        for (auto kind : {FilterKind::tikhonov, FilterKind::landweber}) {
            FilterSpec spec{kind, optimal_alpha(kind, eps, 10.0)};
            auto rec = reconstruct_H(noisy.N, noisy.lambda, run.rc.model.g, spec, run.rc.kernel, run.rc.band);
            (kind == FilterKind::tikhonov ? et : el).push_back(l2_error(rec.H, H, 0.0, 3.0));
        }
    }
    EXPECT_LT(median(el), median(et));
}

TEST(ReconstructH, NoisyRateIsUnstableAtTheRightEdge) {
    const auto& run = reference_run();
    auto noisy = add_noise(run.direct.eigen, {1e-2, 7});
    auto rec = reconstruct_H(noisy.N, noisy.lambda, run.rc.model.g,
                             {FilterKind::landweber, optimal_alpha(FilterKind::landweber, 1e-2, 10.0)}, run.rc.kernel,
                             run.rc.band);
    const auto B = sample(run.rc.model.B, run.rc.grid);
    double worst = 0.0, worst_x = 0.0;
    for (std::size_t i = 0; i < B.size(); ++i) {
        const double x = run.rc.grid->x()[i];
        if (x > 3.0) break;
        const double err = std::abs(rec.B[i] - B[i]);
        if (err > worst) {
            worst = err;
            worst_x = x;
        }
    }
    EXPECT_GE(worst_x, 2.7);
}

TEST(TruncatedDivide, ExactAndZero) {
    auto g = build_grid(-3.0, 3.0, 64, exponential());
    auto N = sample(log_gauss(0.0, 3.0), g);
    auto Btrue = sample([](double x) { return x * x; }, g);
    std::vector<cplx> h(64);
    for (std::size_t i = 0; i < 64; ++i) h[i] = Btrue[i] * N[i];
    auto B = truncated_divide(SampledFunction(g, h), N, 0.0);
    for (std::size_t i = 0; i < 64; ++i) EXPECT_NEAR(B[i].real(), Btrue[i].real(), 1e-14 * Btrue[i].real());
    auto Z = truncated_divide(SampledFunction(g, h), SampledFunction::zeros(g));
    EXPECT_EQ(haar_norm(Z), 0.0);
    EXPECT_THROW(truncated_divide(N, N, -1.0), InvalidArgument);
}

TEST(RegularizeG, Limits) {
    const auto d = exponential();
    const RealMap g = [](double x) { return x * std::exp(-(x + 1.0 / x)); };
    for (double x : {0.1, 1.0, 2.5}) EXPECT_NEAR(regularize_g(g, 1e-12, d)(x), g(x), 1e-11 * g(x));
    EXPECT_EQ(regularize_g([](double) { return 0.0; }, 0.5, d)(1.3), 0.0);
    EXPECT_THROW(regularize_g(g, 0.0, d), InvalidArgument);
}

TEST(RegularizeG, LinearGrowthBecomesBounded) {
    const auto d = exponential();
    const RealMap g = [](double x) { return x; };
    double prev = INFINITY;
    for (double a : {1e-3, 1e-2, 1e-1, 1.0}) {
        auto ga = regularize_g(g, a, d);
        double m = 0.0;
        for (double x : log_spaced(1.0, 1e6, 2001)) m = std::max(m, ga(x) / x);
        EXPECT_TRUE(std::isfinite(m));
        EXPECT_LT(m, prev);
        prev = m;
    }
}

TEST(ReconstructHUnbounded, CloseToPlainForBoundedGrowth) {
    const auto& run = reference_run();
    const auto& e = run.direct.eigen;
    const FilterSpec spec{FilterKind::tikhonov, 1e-2};
    auto plain = reconstruct_H(e.N, e.lambda, run.rc.model.g, spec, run.rc.kernel, run.rc.band);
    for (double ag : {1e-4, 1e-3, 1e-2}) {
        auto unb = reconstruct_H_unbounded(e.N, e.lambda, run.rc.model.g, spec, run.rc.kernel, run.rc.band, ag);
        EXPECT_LE(haar_norm(unb.H - plain.H), unb.diagnostics.values.at("unbounded_bound")) << "alpha_g = " << ag;
        EXPECT_TRUE(unb.diagnostics.warnings.empty());
    }
}

TEST(ReconstructHUnbounded, LargeRegularizationDropsTheFlux) {
    const auto& run = reference_run();
    const auto& e = run.direct.eigen;
    const FilterSpec spec{FilterKind::tikhonov, 1e-2};
    auto unb = reconstruct_H_unbounded(e.N, e.lambda, run.rc.model.g, spec, run.rc.kernel, run.rc.band, 1e12);
    auto no_flux = reconstruct_H(e.N, e.lambda, [](double) { return 0.0; }, spec, run.rc.kernel, run.rc.band);
    EXPECT_LE(testing_support::rel_haar(unb.H, no_flux.H), 1e-9);
}

TEST(ReconstructHUnbounded, SlowDecayWarns) {
    auto grid = build_grid(-4.0, 4.0, 512, exponential());
    auto N = sample([](double x) { return 1.0 / (1.0 + x * x); }, grid);
    auto rec = reconstruct_H_unbounded(N, 0.5, [](double x) { return x; }, {FilterKind::tikhonov, 0.1}, mitosis(),
                                       {-5.0, 5.0}, 0.1);
    EXPECT_FALSE(rec.diagnostics.warnings.empty());
    EXPECT_EQ(rec.H.size(), 512u);
}

TEST(QrResidual, SolvesThePerturbedEquation) {
    Synthetic d;
    auto rec = reconstruct_H(d.N, d.lambda, d.g, {FilterKind::quasi_reversibility, 0.1, 1.0}, mitosis(), d.band);
    EXPECT_LE(qr_residual(rec, d.N, d.lambda, d.g, mitosis()), 1e-3);
    auto rec2 = reconstruct_H(d.N, d.lambda, d.g, {FilterKind::quasi_reversibility, 0.05, 2.5}, mitosis(), d.band);
    EXPECT_LE(qr_residual(rec2, d.N, d.lambda, d.g, mitosis()), 1e-3);
}

TEST(QrResidual, VanishingAlphaIsThePlainEquation) {
    Synthetic d;
    auto rec = reconstruct_H(d.N, d.lambda, d.g, {FilterKind::quasi_reversibility, 1e-9, 1.0}, mitosis(), d.band);
    EXPECT_LE(qr_residual(rec, d.N, d.lambda, d.g, mitosis()), 1e-3);
}

TEST(QrResidual, ZeroDataAndWrongFilter) {
    Synthetic d;
    auto zero = SampledFunction::zeros(d.grid);
    auto rec = reconstruct_H(zero, 0.0, d.g, {FilterKind::quasi_reversibility, 0.1, 1.0}, mitosis(), d.band);
    EXPECT_EQ(qr_residual(rec, zero, 0.0, d.g, mitosis()), 0.0);
    auto tik = reconstruct_H(d.N, d.lambda, d.g, {FilterKind::tikhonov, 0.1}, mitosis(), d.band);
    EXPECT_THROW(qr_residual(tik, d.N, d.lambda, d.g, mitosis()), WrongFilterError);
}

TEST(OptimalAlpha, Rules) {
    EXPECT_DOUBLE_EQ(optimal_alpha(FilterKind::tikhonov, 1e-2, 10.0), 0.1);
    EXPECT_DOUBLE_EQ(optimal_alpha(FilterKind::quasi_reversibility, 0.25, 10.0), 0.5);
    // (2 10^11 / 10^-3)^{2/21} and (2 10^11 / 10^-4)^{2/21}, 30-digit evaluation
    EXPECT_NEAR(optimal_alpha(FilterKind::landweber, 1e-3, 10.0), 23.014569560288620, 1e-12);
    EXPECT_NEAR(optimal_alpha(FilterKind::landweber, 1e-4, 10.0), 28.657674922903017, 1e-12);
    EXPECT_GT(2.0 * optimal_alpha(FilterKind::landweber, 1e-3, 10.0), 10.0);
    // side condition eps < 2^{23/2} sqrt(10) = 9158.93...
    EXPECT_NO_THROW(optimal_alpha(FilterKind::landweber, 9158.0, 10.0));
    EXPECT_THROW(optimal_alpha(FilterKind::landweber, 9159.0, 10.0), SideConditionError);
    EXPECT_THROW(optimal_alpha(FilterKind::tikhonov, 0.0, 10.0), InvalidArgument);
}

TEST(LemmaBounds, TightCase) {
    const double one[] = {1.0};
    auto rep = lemma_bounds_check(one, one, log_spaced(1e-3, 1e6, 20001));
    ASSERT_EQ(rep.second.size(), 1u);
    const auto& r = rep.second[0];
    EXPECT_NEAR(r.sup, 0.5, 1e-6);
    EXPECT_NEAR(r.x_at_sup, 1.0, 1e-3);
    EXPECT_DOUBLE_EQ(r.bound, 0.5);
    EXPECT_TRUE(r.passed);
}

TEST(LemmaBounds, ZeroOrderBoundIsOne) {
    const double as[] = {1.0, 4.0, 16.0, 64.0}, ms[] = {0.0};
    auto rep = lemma_bounds_check(as, ms, log_spaced(1e-3, 1e6, 20001));
    for (const auto& r : rep.second) {
        EXPECT_DOUBLE_EQ(r.bound, 1.0);
        EXPECT_LE(r.sup, 1.0);
        EXPECT_TRUE(r.passed);
    }
}

TEST(LemmaBounds, FirstEstimateStaysBounded) {
    const double as[] = {1.0, 4.0, 16.0, 64.0}, ms[] = {0.0};
    auto rep = lemma_bounds_check(as, ms, log_spaced(1e-3, 1e6, 20001));
    EXPECT_TRUE(rep.first_passed);
    for (const auto& r : rep.first) EXPECT_LE(r.A, 1.0);
    EXPECT_NEAR(rep.first.back().A, rep.first[2].A, 0.05);
}

TEST(LemmaBounds, SecondEstimateAgainstCalculus) {
    // sup_x x^-m z^alpha = (m/2a)^{m/2} (1 - m/2a)^{a - m/2}, attained at x^2 = (2a - m)/m
    const double as[] = {4.0, 16.0}, ms[] = {1.0, 2.0, 5.0};
    auto rep = lemma_bounds_check(as, ms, log_spaced(1e-3, 1e6, 200001));
    for (const auto& r : rep.second) {
        if (r.skipped) continue;
        const double q = r.m / (2.0 * r.alpha);
        const double exact = std::pow(q, r.m / 2.0) * std::pow(1.0 - q, r.alpha - r.m / 2.0);
        EXPECT_NEAR(r.sup, exact, 1e-6 * exact) << "m = " << r.m << ", alpha = " << r.alpha;
        EXPECT_TRUE(r.squared_passed);
        EXPECT_EQ(r.passed, exact <= r.bound) << "m = " << r.m << ", alpha = " << r.alpha;
    }
    // the estimate with exponent m is exceeded, e.g. 0.222 > 0.125 at m = 1, alpha = 4
    const auto& first = rep.second.front();
    ASSERT_EQ(first.m, 1.0);
    ASSERT_EQ(first.alpha, 4.0);
    EXPECT_NEAR(first.sup, std::sqrt(0.125) * std::pow(0.875, 3.5), 1e-6);
    EXPECT_FALSE(first.passed);
}

TEST(LemmaBounds, SkipsOutsideTheRange) {
    const double as[] = {1.0}, ms[] = {5.0};
    auto rep = lemma_bounds_check(as, ms, log_spaced(1e-3, 1e6, 101));
    ASSERT_EQ(rep.second.size(), 1u);
    EXPECT_TRUE(rep.second[0].skipped);
}
