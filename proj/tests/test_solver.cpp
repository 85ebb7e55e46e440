#include <gtest/gtest.h>

#include <cmath>

#include "biharm/errors.hpp"
#include "biharm/solver.hpp"
#include "biharm/testfn.hpp"
#include "biharm/verify.hpp"

using namespace biharm;

namespace {

ProblemSpec bump_blowup(int N, double p) {
    ProblemSpec s;
    s.N = N;
    s.p = p;
    s.forcing.kind = "gaussian";
    s.initial.kind = "zero";
    s.epsilon = 0;
    s.T_max = 200;
    return s;
}

ProblemSpec linear_decay(BoundaryCondition bc) {
    ProblemSpec s;
    s.N = 3;
    s.bc = bc;
    s.R_max = 20;
    s.M = 200;
    s.nonlinearity = false;
    s.initial.kind = "gaussian";
    s.initial.center = 3;
    s.T_max = 5;
    return s;
}

TestFunctionSpec weak_test_function(int N) {
    TestFunctionSpec tf = TestFunctionSpec::make(Family::Phi2, Argument::Standard, N, 2, 5, 1);
    tf.log_T = std::log(0.4);
    return tf;
}

} // namespace

TEST(Validate, RejectsBadExponent) {
    ProblemSpec s;
    s.p = 0.5;
    try {
        s.validate();
        FAIL();
    } catch (const DomainError& e) {
        EXPECT_STREQ(e.what(), "p must exceed 1");
    }
}

TEST(Stepper, ZeroIsFixedPoint) {
    const RadialGrid g(4, 20, 190);
    const Closure c = assemble_closure(BoundaryCondition::Dirichlet, g, 4);
    Stepper st(g, c, 3, true, std::vector<double>(191, 0.0));
    std::vector<double> u(191, 0.0);
    double t = 0;
    for (double dt : {1e-4, 1e-2, 1.0, 100.0}) {
        u = st.step(u, t, dt);
        t += dt;
    }
    for (double v : u) EXPECT_EQ(v, 0.0);
}

TEST(Simulate, ZeroDataIsStationaryAtZero) {
    for (BoundaryCondition bc : {BoundaryCondition::Navier, BoundaryCondition::NeumannNavier}) {
        ProblemSpec s;
        s.bc = bc;
        s.initial.kind = "zero";
        s.forcing.kind = "zero";
        const SimOutcome o = simulate(s).outcome;
        EXPECT_EQ(o.kind, OutcomeKind::Stationary) << to_string(bc);
        EXPECT_EQ(o.final_sup, 0.0);
    }
}

TEST(Simulate, LinearEnergyNonIncreasing) {
    for (BoundaryCondition bc : {BoundaryCondition::Navier, BoundaryCondition::Dirichlet}) {
        const SimOutcome o = simulate(linear_decay(bc)).outcome;
        ASSERT_GT(o.energy.size(), 10u);
        for (std::size_t i = 1; i < o.energy.size(); ++i)
            EXPECT_LE(o.energy[i].second, o.energy[i - 1].second * (1 + 1e-12)) << to_string(bc) << " step " << i;
        EXPECT_LT(o.energy.back().second, o.energy.front().second);
    }
}

TEST(Simulate, DecayRunBecomesStationaryAtZero) {
    ProblemSpec s = linear_decay(BoundaryCondition::Dirichlet);
    s.T_max = 1e6;
    s.dt_max = 1000;
    const SimOutcome o = simulate(s).outcome;
    EXPECT_EQ(o.kind, OutcomeKind::Stationary);
    EXPECT_LT(o.final_sup, 1e-3);
}

TEST(Simulate, BumpForcingBlowsUpInThreeDimensions) {
    const SimOutcome o = simulate(bump_blowup(3, 2)).outcome;
    ASSERT_EQ(o.kind, OutcomeKind::BlowUp) << o.failure;
    EXPECT_LE(o.T_lo, o.T_est);
    EXPECT_LE(o.T_est, o.T_hi);
    EXPECT_GT(o.T_est, 0.0);
    EXPECT_FALSE(o.threshold_crossings.empty());
}

TEST(Simulate, BlowupKindStableUnderRefinement) {
    ProblemSpec a = bump_blowup(3, 2);
    ProblemSpec b = a;
    b.M *= 2;
    b.dt_min /= 4;
    ProblemSpec c = a;
    c.R_max = 2 * a.R_max - 1;
    c.M = 2 * a.M;
    const SimOutcome oa = simulate(a).outcome, ob = simulate(b).outcome, oc = simulate(c).outcome;
    EXPECT_EQ(oa.kind, OutcomeKind::BlowUp);
    EXPECT_EQ(ob.kind, oa.kind);
    EXPECT_EQ(oc.kind, oa.kind);
    EXPECT_NEAR(ob.T_est / oa.T_est, 1.0, 0.05);
    EXPECT_NEAR(oc.T_est / oa.T_est, 1.0, 0.01);
}

TEST(Simulate, SupersolutionStaysUnderEnvelope) {
    ProblemSpec s;
    s.N = 6;
    s.p = 4;
    s.R_max = 80;
    s.M = 790;
    s.forcing.kind = "supersolution";
    s.initial.kind = "supersolution";
    s.forcing.m = s.initial.m = 1.5;
    s.forcing.epsilon = s.initial.epsilon = 0.01;
    s.track_envelope = true;
    const SimOutcome o = simulate(s).outcome;
    EXPECT_TRUE(o.kind == OutcomeKind::Survived || o.kind == OutcomeKind::Stationary) << to_string(o.kind);
    EXPECT_TRUE(o.envelope_held);
    const double h = s.grid().h();
    EXPECT_LE(o.envelope_max_ratio, 1 + 10 * h * h);
}

TEST(Simulate, StopRequestEndsRun) {
    SimulationHooks hooks;
    hooks.should_stop = [] { return true; };
    const SimOutcome o = simulate(bump_blowup(3, 2), hooks).outcome;
    EXPECT_EQ(o.kind, OutcomeKind::NumericalFailure);
    EXPECT_EQ(o.failure, "interrupted");
}

TEST(Manufactured, SecondOrderUnderRefinement) {
    for (BoundaryCondition bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Navier}) {
        std::vector<double> err;
        for (int M : {88, 176, 352}) {
            const double h = 11.0 / M;
            err.push_back(manufactured_run(3, bc, 12, M, 2 * h * h, 0.5).max_error);
        }
        for (int k = 0; k < 2; ++k) {
            EXPECT_GE(err[k] / err[k + 1], 3.5) << to_string(bc);
            EXPECT_LE(err[k] / err[k + 1], 4.5) << to_string(bc);
        }
    }
}

TEST(WeakResidual, ZeroHistoryGivesZero) {
    const RadialGrid g(3, 12, 88);
    History h{g, 2, true, [](double, double) { return 0.0; }, std::vector<double>(89, 0.0), {0, 0.2, 0.4}, {}};
    h.states.assign(3, std::vector<double>(89, 0.0));
    EXPECT_EQ(weak_residual(h, weak_test_function(3)), 0.0);
}

TEST(WeakResidual, DecreasesAndSeparatesFromControl) {
    std::vector<double> res;
    double control = 0;
    for (int M : {88, 176, 352}) {
        const double h = 11.0 / M;
        const ManufacturedRun run = manufactured_run(3, BoundaryCondition::Dirichlet, 12, M, 2 * h * h, 0.5);
        res.push_back(weak_residual(run.history, weak_test_function(3)));
        control = weak_residual(scrambled_history(run.history, 7), weak_test_function(3));
    }
    EXPECT_LT(res[1], res[0]);
    EXPECT_LT(res[2], res[1]);
    EXPECT_GE(control, 10 * res[2]);
}

TEST(WeakResidual, SupportChecks) {
    const ManufacturedRun run = manufactured_run(3, BoundaryCondition::Dirichlet, 9, 80, 0.02, 0.5);
    EXPECT_THROW(weak_residual(run.history, weak_test_function(3)), DomainError);
}

TEST(SignFunctional, Examples) {
    const RadialGrid g(3, 40, 390);
    const auto f = [](double r) { return std::exp(-r); };
    const auto mf = [](double r) { return -std::exp(-r); };
    EXPECT_EQ(sign_functional(f, weight_for(BoundaryCondition::Navier, 3), g).sign, 1);
    EXPECT_EQ(sign_functional(mf, weight_for(BoundaryCondition::Navier, 3), g).sign, -1);
    const SignResult one = sign_functional(f, weight_for(BoundaryCondition::KuttlerSigillito, 3), g);
    EXPECT_EQ(one.sign, 1);
    EXPECT_GT(one.value, 0.0);
}

TEST(Lifespan, LargerDataDoesNotLiveLonger) {
    ProblemSpec s;
    s.N = 3;
    s.p = 1.5;
    s.R_max = 80;
    s.M = 790;
    s.initial.kind = "gaussian";
    s.forcing.kind = "zero";
    s.T_max = 1e5;
    const auto pts = measure_lifespan(s, {0.1, 0.2, 0.4});
    ASSERT_EQ(pts.size(), 3u);
    for (const auto& pt : pts) EXPECT_TRUE(pt.bracketed);
    EXPECT_LE(pts[1].T_est, pts[0].T_est);
    EXPECT_LE(pts[2].T_est, pts[1].T_est);
}
