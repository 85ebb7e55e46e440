#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "biharm/closed_forms.hpp"
#include "biharm/closures.hpp"
#include "biharm/errors.hpp"
#include "biharm/radial.hpp"
#include "biharm/testfn.hpp"

using namespace biharm;

namespace {

double max_abs_interior(const RadialField& f, double r_lo = 0) {
    double mx = 0;
    for (int i = 1; i < f.grid.M(); ++i)
        if (f.grid.r(i) >= r_lo) mx = std::max(mx, std::fabs(f[i]));
    return mx;
}

// Max error of the interior discrete Laplacian against `exact` on [1.5, 9].
double lap_error(int N, int M, const std::function<double(double)>& u,
                 const std::function<double(double)>& exact) {
    const RadialGrid g(N, 9, M);
    const RadialField lap = radial_laplacian(g, RadialField::sample(g, u));
    double e = 0;
    for (int i = 1; i < g.M(); ++i)
        if (g.r(i) >= 1.5) e = std::max(e, std::fabs(lap[i] - exact(g.r(i))));
    return e;
}

} // namespace

TEST(RadialGrid, Invariants) {
    const RadialGrid g(3, 11, 40);
    EXPECT_DOUBLE_EQ(g.h(), 0.25);
    EXPECT_EQ(g.r(0), 1.0);
    EXPECT_DOUBLE_EQ(g.r(g.M()), 11.0);
    const auto n = g.nodes();
    ASSERT_EQ(n.size(), 41u);
    for (std::size_t i = 1; i < n.size(); ++i) EXPECT_GT(n[i], n[i - 1]);
    EXPECT_THROW(RadialGrid(3, 11, 7), DomainError);
    EXPECT_THROW(RadialGrid(3, 1, 40), DomainError);
    EXPECT_THROW(RadialGrid(1, 11, 40), DomainError);
    EXPECT_THROW(RadialField(g, std::vector<double>(5, 0.0)), DomainError);
}

TEST(RadialLaplacian, QuadraticAndConstantsExact) {
    for (int N = 2; N <= 10; ++N) {
        const RadialGrid g(N, 7, 60);
        const RadialField c = radial_laplacian(g, RadialField::sample(g, [](double) { return 3.5; }));
        const RadialField q = radial_laplacian(g, RadialField::sample(g, [](double r) { return r * r; }));
        for (int i = 1; i < g.M(); ++i) {
            EXPECT_NEAR(c[i], 0.0, 1e-12);
            EXPECT_NEAR(q[i], 2.0 * N, 1e-10);
        }
        EXPECT_TRUE(std::isnan(q[0]));
    }
}

TEST(RadialLaplacian, MismatchedGrid) {
    const RadialGrid a(3, 7, 60), b(3, 7, 61);
    EXPECT_THROW(radial_laplacian(a, RadialField::sample(b, [](double r) { return r; })), DomainError);
}

TEST(RadialLaplacian, SecondOrderOnClosedForms) {
    const HarmonicH H(5);
    const auto h = [&](double r) { return H.jet(r)[0]; };
    const auto zero = [](double) { return 0.0; };
    const double e1 = lap_error(5, 80, h, zero), e2 = lap_error(5, 160, h, zero);
    EXPECT_GE(e1 / e2, 3.5);
    EXPECT_LE(e1 / e2, 4.5);

    const BiharmonicB B(4);
    const auto b = [&](double r) { return B.jet(r)[0]; };
    const auto bl = [&](double r) { return B.laplacian(r); };
    const double b1 = lap_error(4, 80, b, bl), b2 = lap_error(4, 160, b, bl);
    EXPECT_GE(b1 / b2, 3.5);
    EXPECT_LE(b1 / b2, 4.5);

    const auto pw = [](double r) { return std::pow(r, -1.5); };
    const auto pl = [](double r) { return -3.75 * std::pow(r, -3.5); };
    const double p1 = lap_error(6, 80, pw, pl), p2 = lap_error(6, 160, pw, pl);
    EXPECT_GE(p1 / p2, 3.5);
    EXPECT_LE(p1 / p2, 4.5);
}

TEST(RadialBilaplacian, ClosureRequired) {
    const RadialGrid g(3, 7, 60);
    const RadialField u = RadialField::sample(g, [](double r) { return r; });
    EXPECT_THROW(radial_bilaplacian(g, u, nullptr), DomainError);
    Closure empty;
    EXPECT_THROW(radial_bilaplacian(g, u, &empty), DomainError);
}

TEST(RadialBilaplacian, ConstantAnnihilated) {
    const RadialGrid g(3, 7, 60);
    const Closure c = assemble_closure(BoundaryCondition::KuttlerSigillito, g, 3);
    // Far-field clamps are inhomogeneous for a constant; supply them as data.
    BoundaryData d;
    d.outer = {2.0, 0.0};
    d.inner = {0.0, 0.0};
    const RadialField b = radial_bilaplacian(g, RadialField::sample(g, [](double) { return 2.0; }), &c, d);
    // Closure rows carry ghost weights times h^-4; roundoff scales with that.
    const double tol = 1e-12 * 2 / std::pow(g.h(), 4);
    for (int i = 0; i <= g.M(); ++i) EXPECT_NEAR(b[i], 0.0, tol) << i;
}

TEST(RadialBilaplacian, SecondOrderOnB) {
    // The wall row dominates and is pre-asymptotic on coarse grids (ratio
    // 2.9 at M = 80, 3.7 at M = 640).
    std::vector<double> err;
    for (int M : {640, 1280, 2560}) {
        const RadialGrid g(5, 5, M);
        const BiharmonicB B(5);
        const Closure c = assemble_closure(BoundaryCondition::Dirichlet, g, 5);
        BoundaryData d;
        d.outer = {B.jet(5)[0], B.laplacian(5)};
        const RadialField bl = radial_bilaplacian(g, RadialField::sample(g, [&](double r) { return B.jet(r)[0]; }), &c, d);
        err.push_back(max_abs_interior(bl));
    }
    EXPECT_GE(err[0] / err[1], 3.5);
    EXPECT_LE(err[0] / err[1], 4.5);
    EXPECT_GE(err[1] / err[2], 3.5);
    EXPECT_LE(err[1] / err[2], 4.5);
}

TEST(RadialBilaplacian, PowerConverges) {
    std::vector<double> err;
    for (int M : {1280, 2560}) {
        const RadialGrid g(6, 9, M);
        const Closure c = assemble_closure(BoundaryCondition::Navier, g, 6);
        BoundaryData d;
        d.inner = {1.0, -3.75};
        d.outer = {std::pow(9, -1.5), -3.75 * std::pow(9, -3.5)};
        const RadialField bl = radial_bilaplacian(
            g, RadialField::sample(g, [](double r) { return std::pow(r, -1.5); }), &c, d);
        double e = 0;
        for (int i = 0; i <= g.M(); ++i) e = std::max(e, std::fabs(bl[i] - 6.5625 * std::pow(g.r(i), -5.5)));
        err.push_back(e);
    }
    EXPECT_GE(err[0] / err[1], 3.5);
    EXPECT_LE(err[0] / err[1], 4.5);
}

TEST(Quadrature, Examples) {
    EXPECT_NEAR(annulus_quadrature(3, [](double) { return 1.0; }, 1, 2), 4 * std::numbers::pi * 7 / 3, 1e-9);
    const double R = 50;
    EXPECT_NEAR(annulus_quadrature(4, [](double r) { return std::pow(r, -4); }, 1, R) / (sphere_area(4) * std::log(R)),
                1.0, 1e-8);
    EXPECT_NEAR(sphere_area(3), 4 * std::numbers::pi, 1e-13);
    EXPECT_NEAR(sphere_area(4), 2 * std::numbers::pi * std::numbers::pi, 1e-13);
}

TEST(Quadrature, SmoothBumpStableUnderDoubling) {
    CutoffSpec xi;
    xi.kind = CutoffKind::Xi;
    const auto g = [&](double r) { return eval_cutoff(xi, r / 4, 0); };
    QuadratureOptions a;
    QuadratureOptions b = a;
    b.initial_panels = 2 * a.initial_panels;
    const double ia = annulus_quadrature(3, g, 1, 8, a);
    const double ib = annulus_quadrature(3, g, 1, 8, b);
    EXPECT_NEAR(ia / ib, 1.0, 1e-8);
}

TEST(Quadrature, Monomials) {
    for (int N = 2; N <= 8; ++N) {
        for (int k = -N; k <= 4; ++k) {
            const double a = 1.5, b = 7;
            const double s = k + N;  // antiderivative of r^{k+N-1}
            const double exact = sphere_area(N) * (s == 0 ? std::log(b / a) : (std::pow(b, s) - std::pow(a, s)) / s);
            const double got = annulus_quadrature(N, [k](double r) { return std::pow(r, k); }, a, b);
            EXPECT_NEAR(got / exact, 1.0, 1e-8) << "N=" << N << " k=" << k;
        }
    }
}

TEST(Quadrature, NonFiniteNamesAbscissa) {
    try {
        annulus_quadrature(3, [](double r) { return r > 1.5 ? NAN : 1.0; }, 1, 2);
        FAIL();
    } catch (const IntegrationError& e) {
        EXPECT_NE(std::string(e.what()).find("r ="), std::string::npos) << e.what();
    }
}

TEST(FitPowerLaw, Examples) {
    const FitResult a = fit_power_law({{1, 1}, {2, 8}, {4, 64}});
    EXPECT_NEAR(a.slope, 3, 1e-12);
    EXPECT_NEAR(a.r_squared, 1, 1e-12);
    const double c = 7.3;
    const FitResult b = fit_power_law({{10, 1e-5 * c}, {100, 1e-10 * c}, {1000, 1e-15 * c}});
    EXPECT_NEAR(b.slope, -5, 1e-10);
    EXPECT_THROW(fit_power_law({{1, 1}, {2, 0}, {4, 3}}), DomainError);
    EXPECT_THROW(fit_power_law({{-1, 1}, {2, 3}, {4, 3}}), DomainError);
}

TEST(FitPowerLaw, ExactOnNoiselessInput) {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> us(-6, 6), uc(0.01, 100);
    for (int k = 0; k < 200; ++k) {
        const double s = us(rng), c = uc(rng);
        std::vector<std::pair<double, double>> pts;
        for (double x : {2.0, 10.0, 50.0, 300.0, 1000.0}) pts.emplace_back(x, c * std::pow(x, s));
        const FitResult f = fit_power_law(pts);
        EXPECT_NEAR(f.slope, s, 1e-10);
        EXPECT_GE(f.r_squared, 0.0);
        EXPECT_LE(f.r_squared, 1.0 + 1e-15);
    }
}

TEST(FitPowerLaw, LadderPrecondition) {
    EXPECT_TRUE(fit_ladder_ok({1, 3, 10, 30}));
    EXPECT_FALSE(fit_ladder_ok({1, 3, 9}));
    EXPECT_FALSE(fit_ladder_ok({1, 2, 3, 4}));
}
