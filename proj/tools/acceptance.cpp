// Acceptance suite. One line per criterion: "criterion k: PASS|FAIL <detail>".
// Exit status is 0 when every selected criterion passes, 1 otherwise.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "biharm/closures.hpp"
#include "biharm/errors.hpp"
#include "biharm/experiments.hpp"
#include "biharm/testfn.hpp"
#include "biharm/verify.hpp"

using namespace biharm;

namespace {

// Tolerances and budgets.
constexpr double kRatioLo = 3.5, kRatioHi = 4.5;      // second order under h -> h/2
constexpr double kLifespanSlopeTol = 0.3;
constexpr double kLifespanDecades = 1.5;
constexpr double kCutoffSlopeTol = 0.1;
constexpr double kEnvelopeSlack = 10;                 // u <= v (1 + 10 h^2)
constexpr double kControlFactor = 10;
constexpr double kEnergySlack = 1e-12;
constexpr double kBudget[10] = {0, 10, 10, 300, 60, 120, 600, 300, 900, 60};  // seconds

struct Verdict {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [" << what << "]";
        }
    }
};

std::string failed_rows(const std::vector<VerifyRow>& rows) {
    std::string s;
    int n = 0;
    for (const auto& r : rows)
        if (!r.pass) {
            if (n++ < 6) s += " " + r.check + "(" + r.params + ")";
        }
    if (n > 6) s += " +" + std::to_string(n - 6) + " more";
    return s;
}

void rows_pass(Verdict& v, const std::vector<VerifyRow>& rows, const std::string& label) {
    int bad = 0;
    for (const auto& r : rows) bad += !r.pass;
    v.detail << ' ' << label << ' ' << rows.size() - bad << '/' << rows.size();
    v.check(bad == 0, label + " failing:" + failed_rows(rows));
}

void closed_forms(Verdict& v) { rows_pass(v, verify_closed_forms(200, 1234), "rows"); }

void supersolution(Verdict& v) { rows_pass(v, verify_supersolution_random(100, 1234), "rows"); }

void lemmas(Verdict& v) {
    const std::pair<int, double> sets[] = {{2, 2}, {3, 2}, {4, 2}, {6, 2}, {6, 3}, {8, 2}, {5, 5}};
    std::vector<VerifyRow> all;
    for (auto [N, p] : sets) {
        auto rows = verify_lemmas(N, p);
        all.insert(all.end(), rows.begin(), rows.end());
    }
    for (double d : {standard_ladder().back() - standard_ladder().front(),
                     logarithmic_ladder().back() - logarithmic_ladder().front()})
        v.check(d >= 1.2 - 1e-9, "ladder spans " + std::to_string(d) + " decades");
    rows_pass(v, all, "rows");
}

void lifespan_cutoffs(Verdict& v) {
    for (auto [N, p] : {std::pair{3, 2.0}, std::pair{4, 1.5}, std::pair{6, 1.5}}) {
        const auto rep = verify_lifespan_cutoff_bounds(N, p, {10, 100, 1000}, 4000, 1234);
        v.detail << " N=" << N << " p=" << p << " slopes " << rep.slope_t << ',' << rep.slope_bilap;
        v.check(std::abs(rep.slope_t) <= kCutoffSlopeTol && std::abs(rep.slope_bilap) <= kCutoffSlopeTol,
                "slope beyond 0.1");
        v.check(rep.star_violations == 0, "psi* above psi");
    }
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

void solver(Verdict& v) {
    for (BoundaryCondition bc : {BoundaryCondition::Dirichlet, BoundaryCondition::Navier}) {
        std::vector<double> err;
        for (int M : {88, 176, 352}) {
            const double h = 11.0 / M;
            err.push_back(manufactured_run(3, bc, 12, M, 2 * h * h, 0.5).max_error);
        }
        for (int k = 0; k < 2; ++k) {
            const double q = err[k] / err[k + 1];
            v.detail << ' ' << to_string(bc) << " ratio " << q;
            v.check(q >= kRatioLo && q <= kRatioHi, "manufactured ratio");
        }
    }

    const RadialGrid g(4, 20, 190);
    const Closure c = assemble_closure(BoundaryCondition::Dirichlet, g, 4);
    Stepper st(g, c, 3, true, std::vector<double>(191, 0.0));
    std::vector<double> u(191, 0.0);
    double t = 0;
    for (double dt : {1e-4, 1e-2, 1.0, 100.0}) {
        u = st.step(u, t, dt);
        t += dt;
    }
    bool zero = true;
    for (double x : u) zero = zero && x == 0.0;
    v.check(zero, "zero not fixed");

    for (BoundaryCondition bc : {BoundaryCondition::Navier, BoundaryCondition::Dirichlet}) {
        const SimOutcome o = simulate(linear_decay(bc)).outcome;
        bool mono = o.energy.size() > 1;
        for (std::size_t i = 1; i < o.energy.size(); ++i)
            mono = mono && o.energy[i].second <= o.energy[i - 1].second * (1 + kEnergySlack);
        v.check(mono, to_string(bc) + " energy increased");
    }
}

ProblemSpec bump(int N, double p) {
    ProblemSpec s;
    s.N = N;
    s.p = p;
    s.forcing.kind = "gaussian";
    s.initial.kind = "zero";
    s.epsilon = 0;
    s.T_max = 200;
    return s;
}

ProblemSpec envelope_spec() {
    ProblemSpec s;
    s.N = 6;
    s.p = 4;
    s.R_max = 80;
    s.M = 790;
    s.forcing.kind = s.initial.kind = "supersolution";
    s.forcing.m = s.initial.m = 1.5;
    s.forcing.epsilon = s.initial.epsilon = 0.01;
    s.track_envelope = true;
    return s;
}

// The problem as given, (h, dt_min) -> (h/2, dt_min/4), and the radial extent doubled.
std::vector<ProblemSpec> refinements(const ProblemSpec& s) {
    ProblemSpec fine = s;
    fine.M *= 2;
    fine.dt_min /= 4;
    ProblemSpec wide = s;
    wide.R_max = 2 * s.R_max - 1;
    wide.M = 2 * s.M;
    return {s, fine, wide};
}

void phase(Verdict& v) {
    struct Case {
        ProblemSpec spec;
        Classification want;
    };
    std::vector<Case> cases;
    for (double p : {1.5, 2.0, 3.0, 5.0}) cases.push_back({bump(3, p), Classification::BlowUp});
    cases.push_back({bump(6, 2), Classification::BlowUp});
    cases.push_back({envelope_spec(), Classification::BoundedUnderEnvelope});

    for (const auto& c : cases) {
        for (const ProblemSpec& s : refinements(c.spec)) {
            const SimOutcome o = simulate(s).outcome;
            const Classification k = classify(o);
            const std::string tag = "N=" + std::to_string(s.N) + " p=" + std::to_string(s.p) +
                                    " M=" + std::to_string(s.M) + " R=" + std::to_string(s.R_max);
            v.check(k == c.want, tag + " " + to_string(k));
            if (s.track_envelope) {
                const double h = s.grid().h();
                v.detail << " envelope " << o.envelope_max_ratio << " (h=" << h << ")";
                v.check(o.envelope_max_ratio <= 1 + kEnvelopeSlack * h * h, tag + " above envelope");
            }
        }
    }
}

void second_critical(Verdict& v) {
    SweepOptions opt;
    opt.spot_fraction = 0;
    const SweepResult r = second_critical_sweep(6, 4, {4, 5.5}, opt);
    v.detail << " omega 4 " << to_string(r.points.at(0).classification) << ", omega 5.5 "
             << to_string(r.points.at(1).classification);
    v.check(r.points[0].classification == Classification::BlowUp, "omega 4 not blowup");
    v.check(r.points[1].classification == Classification::BoundedUnderEnvelope, "omega 5.5 not bounded");
}

void lifespan(Verdict& v) {
    SweepOptions opt;
    opt.jobs = 4;
    const std::vector<double> ladder{0.1, 0.0562, 0.0316, 0.0178, 0.01, 0.00562, 0.00316, 0.00178, 0.001};
    const LifespanStudy s = lifespan_study(3, 1.5, ladder, opt);
    double lo = 1e300, hi = 0;
    for (const auto& r : s.rows)
        if (r.bracketed) {
            lo = std::min(lo, r.epsilon);
            hi = std::max(hi, r.epsilon);
        }
    v.check(s.fitted, "no fit: " + s.note);
    if (s.fitted) {
        v.detail << " slope " << s.fit.slope << " (predicted " << s.predicted_slope << ")";
        v.check(std::abs(s.fit.slope - s.predicted_slope) <= kLifespanSlopeTol, "slope");
        v.check(std::log10(hi / lo) >= kLifespanDecades - 1e-9, "fitted range under 1.5 decades");
        v.check(s.below_ikeda, "above Ikeda bound");
    }

    const LifespanStudy c = lifespan_study(4, 2, {1, 0.7, 0.5, 0.35}, opt);
    int bracketed = 0;
    for (const auto& r : c.rows) bracketed += r.bracketed;
    v.detail << "; critical bracketed " << bracketed << " convex " << c.convex;
    v.check(bracketed == 4, "critical lifespans not bracketed");
    v.check(c.convex, "critical not convex");
}

void weak_identity(Verdict& v) {
    TestFunctionSpec tf = TestFunctionSpec::make(Family::Phi2, Argument::Standard, 3, 2, 5, 1);
    tf.log_T = std::log(0.4);
    std::vector<double> res;
    double control = 0;
    for (int M : {88, 176, 352}) {
        const double h = 11.0 / M;
        const ManufacturedRun run = manufactured_run(3, BoundaryCondition::Dirichlet, 12, M, 2 * h * h, 0.5);
        res.push_back(weak_residual(run.history, tf));
        control = weak_residual(scrambled_history(run.history, 7), tf);
    }
    v.detail << " residuals " << res[0] << ' ' << res[1] << ' ' << res[2] << " control " << control;
    v.check(res[1] < res[0] && res[2] < res[1], "not decreasing");
    v.check(control >= kControlFactor * res[2], "control too close");
}

const std::function<void(Verdict&)> kCriteria[10] = {
    nullptr, closed_forms, supersolution, lemmas, lifespan_cutoffs, solver, phase, second_critical,
    lifespan, weak_identity};

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Acceptance criteria 1-9"};
    std::vector<int> which;
    app.add_option("--criterion,-c", which, "criteria to run (default all)")->check(CLI::Range(1, 9));
    CLI11_PARSE(app, argc, argv);
    if (which.empty())
        for (int k = 1; k <= 9; ++k) which.push_back(k);

    bool all = true;
    for (int k : which) {
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            kCriteria[k](v);
        } catch (const std::exception& e) {
            v.check(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        v.check(secs < kBudget[k], "over budget " + std::to_string(kBudget[k]) + " s");
        all = all && v.pass;
        std::cout << "criterion " << k << ": " << (v.pass ? "PASS" : "FAIL") << " (" << secs << " s)"
                  << v.detail.str() << std::endl;
    }
    return all ? 0 : 1;
}
