#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "biharm/banded.hpp"
#include "biharm/closed_forms.hpp"
#include "biharm/closures.hpp"
#include "biharm/radial.hpp"

namespace biharm {

struct TestFunctionSpec;

// Parametrized radial profile used for forcing and initial data.
//   zero                       0
//   gaussian                   amplitude exp(-((r - center)/width)^2)
//   exp                        amplitude exp(-r)
//   power                      amplitude r^{-omega}
//   supersolution              forcing: eps M r^{-m-4} - eps^p r^{-mp}; data: eps r^{-m}
// As initial data the supersolution profile is multiplied by smooth cutoffs
// rising from 0 at r = 1 to 1 at r = 1 + taper_inner and falling from 1 at
// R_max - taper (R_max - 1) to 0 at R_max, so the data meet every boundary
// condition. Without them the jumps at both ends overshoot v.
struct RadialRule {
    std::string kind = "zero";
    double amplitude = 1;
    double center = 2;
    double width = 1;
    double omega = 4;
    double m = 1.5;
    double epsilon = 0.01;
    double taper = 0.5;
    double taper_inner = 1;
};

std::function<double(double)> make_forcing(const RadialRule& rule, double p, int N);
std::function<double(double)> make_initial(const RadialRule& rule, double p, int N, double R_max);

struct ProblemSpec {
    int N = 3;
    double p = 2;
    BoundaryCondition bc = BoundaryCondition::Navier;
    double R_max = 40;
    int M = 400;
    RadialRule forcing;
    RadialRule initial;
    double epsilon = 1;        // scale applied to the initial profile
    bool nonlinearity = true;
    double T_max = 100;
    double U_blow = 1e8;
    double dt0 = 1e-3;
    double dt_min = 1e-12;
    double dt_max = 10;
    double growth_halve = 0.2;
    double growth_double = 0.01;
    double stationary_tol = 1e-8;
    double stationary_delta = 1;
    bool track_envelope = false;  // requires supersolution forcing
    double snapshot_every = 0;    // 0 disables snapshots
    bool record_history = false;
    int closure_order = 6;

    Exponents exponents() const { return compute_exponents(p, N); }
    RadialGrid grid() const { return RadialGrid(N, R_max, M); }
    void validate() const;
};

// Extra inputs: a time-dependent source added to the forcing and
// inhomogeneous boundary data (verification runs), plus a stop request.
struct SimulationHooks {
    std::function<double(double, double)> source;
    std::function<BoundaryData(double)> boundary_data;
    // Polled once per step; a true result ends the run with failure "interrupted".
    std::function<bool()> should_stop;
};

// Implicit-explicit stepper: (I + dt A) u^{n+1} = u^n + dt (|u^n|^p + f)
// with A the closure-folded discrete bilaplacian on the unknown nodes.
class Stepper {
public:
    Stepper(const RadialGrid& grid, const Closure& closure, double p, bool nonlinearity,
            std::vector<double> forcing, SimulationHooks hooks = {});

    std::vector<double> step(const std::vector<double>& u, double t, double dt);

    const RadialGrid& grid() const { return grid_; }
    int first_unknown() const { return i0_; }
    int last_unknown() const { return i1_; }
    int bandwidth_lower() const { return kl_; }
    int bandwidth_upper() const { return ku_; }
    double last_rcond() const { return last_rcond_; }
    BoundaryData data_at(double t) const;

private:
    struct Entry {
        int row, col;
        double v;
    };
    RadialGrid grid_;
    Closure closure_;
    double p_;
    bool nonlinearity_;
    std::vector<double> f_;
    SimulationHooks hooks_;
    int i0_, i1_, kl_ = 0, ku_ = 0;
    std::vector<Entry> entries_;              // A restricted to unknowns
    // Affine part of A u from boundary data: const_[row] = sum_c w_c * g_c.
    std::vector<std::array<double, 4>> affine_;  // inner0, inner1, outer0, outer1
    std::map<double, std::shared_ptr<BandedMatrix>> cache_;
    double last_rcond_ = 0;

    std::shared_ptr<BandedMatrix> factor_for(double dt);
};

enum class OutcomeKind { BlowUp, Survived, Stationary, NumericalFailure };

std::string to_string(OutcomeKind k);

struct Snapshot {
    double t;
    std::vector<double> u;
};

struct SimOutcome {
    OutcomeKind kind = OutcomeKind::Survived;
    double T_est = 0, T_lo = 0, T_hi = 0;   // BlowUp
    double T_end = 0;                       // time reached
    double final_sup = 0;
    double steady_residual = 0;             // Stationary
    bool dt_collapse = false;
    int sign_at_detection = 0;              // sign of u where sup|u| is attained
    long steps = 0, rejected = 0;
    double dt_max_used = 0, dt_min_used = 0;
    std::vector<std::pair<double, double>> energy;  // (t, int u^2 r^{N-1} dr)
    FarFieldReport far_field;
    bool envelope_tracked = false;
    bool envelope_held = true;
    double envelope_max_ratio = 0;          // max over steps of max_i u_i / v(r_i)
    std::string failure;
    std::vector<Snapshot> snapshots;
    std::vector<double> threshold_crossings; // times when sup|u| first exceeded 10^k
};

// Accepted solution states, for space-time diagnostics.
struct History {
    RadialGrid grid;
    double p = 2;
    bool nonlinearity = true;
    std::function<double(double, double)> forcing;  // f(t, r) including sources
    std::vector<double> u0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
};

struct SimResult {
    SimOutcome outcome;
    std::optional<History> history;
};

SimResult simulate(const ProblemSpec& spec, const SimulationHooks& hooks = {});

// Residual of the weak identity against a test function; the test function
// support must fit inside the simulated box.
double weak_residual(const History& history, const TestFunctionSpec& tf);

struct SignResult {
    double value = 0;
    double tail_bound = 0;
    int sign = 0;  // +1, -1, or 0 when undetermined
};

SignResult sign_functional(const std::function<double(double)>& g, const WeightA& A,
                           const RadialGrid& grid);

struct LifespanPoint {
    double epsilon;
    double T_est;
    double T_lo, T_hi;
    bool bracketed;
};

std::vector<LifespanPoint> measure_lifespan(const ProblemSpec& spec_template,
                                            const std::vector<double>& epsilons);

double discrete_energy(const RadialGrid& grid, const std::vector<double>& u);

} // namespace biharm
