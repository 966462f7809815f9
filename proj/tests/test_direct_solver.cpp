#include <gtest/gtest.h>

#include "support.hpp"

using namespace fragrate;

namespace {

RunConfig reference_config() { return load_config(testing_support::shipped("equal_mitosis.cfg")); }

DirectResult solve(const RunConfig& c) {
    auto rc = resolve(c);
    return evolve_to_eigenpair(rc.model, rc.grid, rc.evolve);
}

}  // namespace

TEST(Evolve, ReferenceConfigurationConverges) {
    const auto& run = testing_support::reference_run();
    const auto& res = run.direct;
    EXPECT_TRUE(res.report.converged) << "profile change " << res.report.profile_change;
    EXPECT_GT(res.eigen.lambda, 0.0);
    const auto N = res.eigen.N.real_part();
    for (double v : N) EXPECT_GE(v, 0.0);
    EXPECT_NEAR(rectangle_mass(N, *run.rc.grid), 1.0, 1e-10);
    EXPECT_LE(res.report.cfl, cfl_limit(TransportScheme::muscl));
    EXPECT_EQ(res.report.tail_changes.size(), run.rc.evolve.n_steps / 5);
    // the stable profile is unimodal with its peak inside the error window
    std::size_t peak = 0;
    for (std::size_t i = 0; i < N.size(); ++i)
        if (N[i] > N[peak]) peak = i;
    const double xp = run.rc.grid->x()[peak];
    EXPECT_GT(xp, 0.3);
    EXPECT_LT(xp, 3.0);
    EXPECT_LT(N.back(), 1e-8 * N[peak]);
    EXPECT_LT(N.front(), 1e-8 * N[peak]);
}

TEST(Evolve, UpwindIsPositiveAndClose) {
    auto c = reference_config();
    c.scheme = "upwind";
    auto up = solve(c);
    for (double v : up.eigen.N.real_part()) EXPECT_GE(v, 0.0);
    EXPECT_NEAR(up.eigen.lambda, testing_support::reference_run().direct.eigen.lambda, 5e-3);
}

TEST(Evolve, StepDoublingChangesLambdaByOrderDt) {
    auto c = reference_config();
    const double l1 = testing_support::reference_run().direct.eigen.lambda;
    c.n_steps = 20000;
    const double l2 = solve(c).eigen.lambda;
    const double dt = c.t_max / 10000.0;
    EXPECT_LE(std::abs(l1 - l2), 5.0 * std::abs(l1) * dt);
}

TEST(Evolve, NoFragmentationDoesNotConverge) {
    auto c = reference_config();
    c.B = "zero";
    c.n0 = "gaussian:1:0.3";
    // g has died out long before the right end, so no mass leaves the window
    c.x_max = 200.0;
    c.n = 1024;
    c.t_max = 100.0;
    c.n_steps = 4000;
    auto res = solve(c);
    EXPECT_FALSE(res.report.converged);
    EXPECT_LT(std::abs(res.eigen.lambda), 1e-3);
    EXPECT_LE(res.eigen.lambda, 1e-12);
}

TEST(Evolve, GridRefinementUpwindIsFirstOrder) {
    auto c = reference_config();
    c.scheme = "upwind";
    std::vector<double> lam;
    for (std::size_t n : {128u, 256u, 512u, 1024u}) {
        c.n = n;
        c.n_steps = std::max<std::size_t>(10000, 20 * n);
        lam.push_back(solve(c).eigen.lambda);
    }
    const double r1 = (lam[2] - lam[1]) / (lam[1] - lam[0]);
    const double r2 = (lam[3] - lam[2]) / (lam[2] - lam[1]);
    EXPECT_GE(r1, 0.3);
    EXPECT_LE(r1, 0.8);
    EXPECT_GE(r2, 0.3);
    EXPECT_LE(r2, 0.8);
}

TEST(Evolve, GridRefinementMusclIsFaster) {
    auto c = reference_config();
    std::vector<double> lam;
    // n = 128 is still pre-asymptotic for the limiter
    for (std::size_t n : {256u, 512u, 1024u, 2048u}) {
        c.n = n;
        c.n_steps = std::max<std::size_t>(10000, 20 * n);
        lam.push_back(solve(c).eigen.lambda);
    }
    const double r1 = std::abs((lam[2] - lam[1]) / (lam[1] - lam[0]));
    const double r2 = std::abs((lam[3] - lam[2]) / (lam[2] - lam[1]));
    EXPECT_LE(r1, 0.5);
    EXPECT_LE(r2, 0.5);
}

TEST(Evolve, CflViolationSuggestsSteps) {
    auto rc = resolve(reference_config());
    EvolveOptions opt = rc.evolve;
    opt.n_steps = 100;
    try {
        evolve_to_eigenpair(rc.model, rc.grid, opt);
        FAIL() << "expected a CFL violation";
    } catch (const CflViolation& e) {
        EXPECT_GT(e.cfl(), cfl_limit(opt.scheme));
        EXPECT_EQ(e.suggested_steps(), suggested_steps(rc.model, rc.grid, opt));
        opt.n_steps = e.suggested_steps();
    }
    opt.t_max = 10.0;
    opt.n_steps = suggested_steps(rc.model, rc.grid, opt);
    EXPECT_NO_THROW(evolve_to_eigenpair(rc.model, rc.grid, opt));
}

TEST(Evolve, InvalidOptions) {
    auto rc = resolve(reference_config());
    EvolveOptions opt = rc.evolve;
    opt.t_max = 0.0;
    EXPECT_THROW(evolve_to_eigenpair(rc.model, rc.grid, opt), InvalidArgument);
    auto m = rc.model;
    m.kernel.k = 0.5;
    EXPECT_THROW(evolve_to_eigenpair(m, rc.grid, rc.evolve), InvalidArgument);
    m = rc.model;
    m.n0 = [](double) { return 0.0; };
    EXPECT_THROW(evolve_to_eigenpair(m, rc.grid, rc.evolve), InvalidArgument);
}

TEST(EigenResidual, ConvergedRunIsSmall) {
    const auto& run = testing_support::reference_run();
    auto r = eigen_residual(run.direct.eigen, run.rc.model);
    EXPECT_FALSE(r.degenerate);
    EXPECT_LE(r.relative, 5e-2);
}

TEST(EigenResidual, ZeroProfileIsDegenerate) {
    const auto& run = testing_support::reference_run();
    Eigenpair z{SampledFunction::zeros(run.rc.grid), 0.3};
    auto r = eigen_residual(z, run.rc.model);
    EXPECT_TRUE(r.degenerate);
    EXPECT_EQ(r.relative, 0.0);
    EXPECT_EQ(r.absolute, 0.0);
}

TEST(EigenResidual, WrongLambdaIncreasesResidual) {
    const auto& run = testing_support::reference_run();
    Eigenpair e = run.direct.eigen;
    const double base = eigen_residual(e, run.rc.model).absolute;
    e.lambda += 0.1;
    EXPECT_GT(eigen_residual(e, run.rc.model).absolute, base);
}
