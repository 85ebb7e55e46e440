#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "biharm/closed_forms.hpp"
#include "biharm/closures.hpp"
#include "biharm/errors.hpp"
#include "biharm/jet.hpp"
#include "biharm/testfn.hpp"

using namespace biharm;

namespace {

const BoundaryCondition kAll[] = {BoundaryCondition::Navier,           BoundaryCondition::Dirichlet,
                                  BoundaryCondition::DirichletNavier,  BoundaryCondition::KuttlerSigillito,
                                  BoundaryCondition::NeumannNavier,    BoundaryCondition::Neumann};

double constraint_value(Constraint c, const Jet& j, int N, double r) {
    switch (c) {
    case Constraint::Value: return j[0];
    case Constraint::Deriv: return j[1];
    case Constraint::Lap: return radial_laplacian(j, N, r);
    case Constraint::LapDeriv: return radial_laplacian_dr(j, N, r);
    }
    return 0;
}

double max_residual(const ClosureResidual& r) {
    return std::max({std::fabs(r.inner[0]), std::fabs(r.inner[1]), std::fabs(r.outer[0]),
                     std::fabs(r.outer[1])});
}

// Residual of the closure for `bc` on the field given by `jet`, with the
// constraint values of the field supplied as boundary data.
double residual_for(BoundaryCondition bc, int N, int M, const std::function<Jet(double)>& jet) {
    const double R = 6;
    const RadialGrid g(N, R, M);
    const Closure c = assemble_closure(bc, g, N);
    BoundaryData d;
    const auto ic = constraints_of(bc);
    for (int k = 0; k < 2; ++k) d.inner[k] = constraint_value(ic[k], jet(1), N, 1);
    d.outer = {jet(R)[0], radial_laplacian(jet(R), N, R)};
    const RadialField u = RadialField::sample(g, [&](double r) { return jet(r)[0]; });
    return max_residual(closure_residual(u, c, bc, d));
}

void expect_second_order(double coarse, double fine, const std::string& what) {
    if (fine < 1e-9) return;  // exact up to roundoff
    EXPECT_GE(coarse / fine, 3.5) << what << " " << coarse << " " << fine;
}

} // namespace

TEST(Closure, ConstraintPairs) {
    using C = Constraint;
    EXPECT_EQ(constraints_of(BoundaryCondition::Navier), (std::array<C, 2>{C::Value, C::Lap}));
    EXPECT_EQ(constraints_of(BoundaryCondition::Dirichlet), (std::array<C, 2>{C::Value, C::Deriv}));
    EXPECT_EQ(constraints_of(BoundaryCondition::DirichletNavier), (std::array<C, 2>{C::Value, C::LapDeriv}));
    EXPECT_EQ(constraints_of(BoundaryCondition::KuttlerSigillito), (std::array<C, 2>{C::Deriv, C::LapDeriv}));
    EXPECT_EQ(constraints_of(BoundaryCondition::NeumannNavier), (std::array<C, 2>{C::Lap, C::LapDeriv}));
    EXPECT_EQ(constraints_of(BoundaryCondition::Neumann), (std::array<C, 2>{C::Deriv, C::Lap}));
}

TEST(Closure, DirichletOnShiftedSquare) {
    const auto jet = [](double r) { return Jet{{(r - 1) * (r - 1), 2 * (r - 1), 2, 0, 0}}; };
    const double a = residual_for(BoundaryCondition::Dirichlet, 3, 40, jet);
    const double b = residual_for(BoundaryCondition::Dirichlet, 3, 80, jet);
    EXPECT_LT(a, 0.2);
    expect_second_order(a, b, "dirichlet (r-1)^2");
}

TEST(Closure, NavierOnH) {
    for (int N : {2, 3, 5}) {
        const HarmonicH H(N);
        const auto jet = [&](double r) { return H.jet(r); };
        // N = 2 is still pre-asymptotic at M = 40 (ratio 2.7).
        expect_second_order(residual_for(BoundaryCondition::Navier, N, 160, jet),
                            residual_for(BoundaryCondition::Navier, N, 320, jet), "navier H");
    }
}

TEST(Closure, DirichletOnB) {
    for (int N : {2, 3, 4, 6}) {
        const BiharmonicB B(N);
        const auto jet = [&](double r) { return B.jet(r); };
        expect_second_order(residual_for(BoundaryCondition::Dirichlet, N, 40, jet),
                            residual_for(BoundaryCondition::Dirichlet, N, 80, jet), "dirichlet B");
    }
}

TEST(Closure, EveryTagOnSmoothField) {
    const auto jet = [](double r) {
        const Jet x = Jet::variable(r);
        return exp(Jet::constant(0) - 0.5 * x) * (x * x + Jet::constant(1));
    };
    for (BoundaryCondition bc : kAll) {
        for (int N : {2, 4, 7}) {
            const double a = residual_for(bc, N, 40, jet);
            const double b = residual_for(bc, N, 80, jet);
            const double c = residual_for(bc, N, 160, jet);
            expect_second_order(a, b, to_string(bc));
            expect_second_order(b, c, to_string(bc));
        }
    }
}

TEST(Closure, Solvability) {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> u(-4, -1);
    for (BoundaryCondition bc : kAll) {
        for (int N = 2; N <= 10; ++N) {
            double lo = 1e300;
            for (int k = 0; k < 40; ++k) lo = std::min(lo, std::fabs(closure_determinant(bc, N, std::pow(10.0, u(rng)))));
            EXPECT_GT(lo, 1e-6) << to_string(bc) << " N=" << N;
        }
    }
}

TEST(Closure, DimensionMismatch) {
    const RadialGrid g(3, 6, 40);
    EXPECT_THROW(assemble_closure(BoundaryCondition::Navier, g, 4), DomainError);
}

TEST(FarField, Examples) {
    const RadialGrid g(3, 20, 190);
    CutoffSpec xi;
    xi.kind = CutoffKind::Xi;
    const RadialField bump = RadialField::sample(g, [&](double r) { return eval_cutoff(xi, r / 5, 0); });
    const FarFieldReport a = far_field_decay_check(bump, 0.25);
    EXPECT_EQ(a.ratio, 0.0);
    EXPECT_FALSE(a.flagged);
    const FarFieldReport b = far_field_decay_check(RadialField::sample(g, [](double) { return 1.0; }), 0.25);
    EXPECT_EQ(b.ratio, 1.0);
    EXPECT_TRUE(b.flagged);
    EXPECT_THROW(far_field_decay_check(bump, 0.5), DomainError);
}
