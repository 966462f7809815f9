#include <gtest/gtest.h>

#include "support.hpp"

using namespace fragrate;

TEST(Transport, ExponentialIsTheProduct) {
    EXPECT_DOUBLE_EQ(transport(2.0, 3.0, exponential()), 6.0);
}

TEST(Transport, IdentityElement) {
    for (const auto& d : {exponential(), softplus()})
        for (double a : {1e-3, 0.4, 1.0, 7.5})
            EXPECT_NEAR(transport(a, d.identity(), d), a, 1e-12 * a) << d.name;
}

TEST(Transport, SoftplusFrozenValue) {
    // rho(rho^-1(1) + rho^-1(1)) with rho^-1(y) = ln(e^y - 1), evaluated in 30-digit arithmetic
    EXPECT_NEAR(transport(1.0, 1.0, softplus()), 1.3743463778953758, 1e-14);
}

TEST(Transport, Commutative) {
    const auto d = softplus();
    EXPECT_NEAR(transport(0.3, 2.2, d), transport(2.2, 0.3, d), 1e-14);
}

TEST(Transport, RejectsNonPositive) {
    EXPECT_THROW(transport(0.0, 1.0, exponential()), DomainError);
    EXPECT_THROW(group_inverse(-1.0, exponential()), DomainError);
}

TEST(GroupInverse, Values) {
    EXPECT_DOUBLE_EQ(group_inverse(2.0, exponential()), 0.5);
    const auto sp = softplus();
    EXPECT_NEAR(group_inverse(sp.identity(), sp), sp.identity(), 1e-15);
    EXPECT_NEAR(group_inverse(1.3, sp), 0.3181849826564052, 1e-14);
    EXPECT_NEAR(group_inverse(group_inverse(1.3, sp), sp), 1.3, 1e-10);
    EXPECT_NEAR(transport(1.3, group_inverse(1.3, sp), sp), sp.identity(), 1e-12);
}

TEST(Diffeomorphism, BuiltinsValidate) {
    std::vector<double> zs;
    for (double z = -10.0; z <= 10.0; z += 0.5) zs.push_back(z);
    EXPECT_NO_THROW(validate(exponential(), zs));
    EXPECT_NO_THROW(validate(softplus(), zs));
}

TEST(Diffeomorphism, WrongDerivativeIsRejected) {
    auto d = exponential();
    d.d_rho_inv = [](double x) { return 2.0 / x; };
    const double zs[] = {0.0, 1.0};
    EXPECT_THROW(validate(d, zs), InvalidArgument);
    EXPECT_THROW(diffeomorphism_by_name("cosh"), InvalidArgument);
}

TEST(Grid, SmallExponentialGrid) {
    auto g = build_grid(0.0, 1.0, 8, exponential());
    ASSERT_EQ(g->size(), 8u);
    for (std::size_t i = 0; i < 8; ++i) EXPECT_NEAR(g->x()[i], std::exp(i / 8.0), 1e-15);
    EXPECT_NEAR(g->dx()[7], std::exp(1.0) - std::exp(7.0 / 8.0), 1e-15);
}

TEST(Grid, GeometricWindow) {
    auto g = build_grid(std::log(0.006), std::log(3.0), 512, exponential());
    EXPECT_NEAR(g->x().front(), 0.006, 1e-15);
    EXPECT_LT(g->x().back(), 3.0);
    EXPECT_NEAR(g->x().back() + g->dx().back(), 3.0, 1e-12);
    const double q = g->x()[1] / g->x()[0];
    for (std::size_t i = 1; i < 512; ++i) EXPECT_NEAR(g->x()[i] / g->x()[i - 1], q, 1e-12);
    auto gx = build_grid_x(0.006, 3.0, 512, exponential());
    EXPECT_TRUE(g->same_as(*gx));
}

TEST(Grid, InvalidArguments) {
    EXPECT_THROW(build_grid(1.0, 1.0, 8, exponential()), InvalidArgument);
    EXPECT_THROW(build_grid(0.0, 1.0, 500, exponential()), InvalidArgument);
    EXPECT_THROW(build_grid(0.0, 1.0, 4, exponential()), InvalidArgument);
    EXPECT_THROW(build_grid_x(0.0, 1.0, 8, exponential()), InvalidArgument);
}

TEST(Sample, Constant) {
    auto g = build_grid(-2.0, 2.0, 64, exponential());
    auto f = sample([](double) { return 1.0; }, g);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_EQ(f[i], cplx(1.0));
}

TEST(Sample, Identity) {
    auto g = build_grid(-2.0, 2.0, 64, exponential());
    auto f = sample([](double x) { return x; }, g);
    for (std::size_t i = 0; i < f.size(); ++i) EXPECT_NEAR(f[i].real(), std::exp(g->z()[i]), 1e-15 * f[i].real());
}

TEST(Sample, GrowthRateOfTheModel) {
    auto g = build_grid(std::log(0.006), std::log(3.0), 512, exponential());
    auto f = sample([](double x) { return x * std::exp(-(x + 1.0 / x)); }, g);
    double peak = 0.0;
    std::size_t at = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_GT(f[i].real(), 0.0);
        if (f[i].real() > peak) peak = f[i].real(), at = i;
    }
    EXPECT_LT(f[0].real(), 1e-60 * peak);
    // maximum at the golden ratio, value phi e^{-sqrt 5}
    const double phi = 0.5 * (1.0 + std::sqrt(5.0));
    EXPECT_NEAR(g->z()[at], std::log(phi), g->dz());
    EXPECT_NEAR(peak, phi * std::exp(-std::sqrt(5.0)), 1e-4);
}

TEST(Sample, NonFiniteIsRejected) {
    auto g = build_grid(-1.0, 1.0, 8, exponential());
    EXPECT_THROW(sample([](double x) { return x > 1.5 ? NAN : 0.0; }, g), NonFiniteError);
}

TEST(SampledFunction, ArithmeticNeedsOneGrid) {
    auto a = sample([](double x) { return x; }, build_grid(-1.0, 1.0, 8, exponential()));
    auto b = sample([](double x) { return x; }, build_grid(-1.0, 2.0, 8, exponential()));
    EXPECT_THROW(a + b, GridMismatch);
    auto c = a + a - cplx(2.0) * a;
    for (std::size_t i = 0; i < c.size(); ++i) EXPECT_EQ(c[i], cplx(0.0));
}

TEST(HaarNorm, MatchesRiemannSum) {
    auto g = build_grid(-12.0, 12.0, 1024, exponential());
    auto f = sample(testing_support::log_gauss(0.0, 1.0 / std::sqrt(2.0)), g);
    // int e^{-2 z^2} dz = sqrt(pi / 2)
    EXPECT_NEAR(haar_norm(f), std::pow(M_PI / 2.0, 0.25), 1e-12);
}
