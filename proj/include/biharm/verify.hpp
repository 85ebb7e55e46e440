#pragma once

#include <string>
#include <vector>

#include "biharm/closed_forms.hpp"
#include "biharm/solver.hpp"

namespace biharm {

struct VerifyRow {
    std::string suite;
    std::string check;
    std::string params;
    double value = 0;
    double expected = 0;
    bool pass = false;
    std::string note;
};

// Finite-difference convergence of the closed forms (ratio of the max error
// under h -> h/2 in [3.5, 4.5]) on `samples` log-uniform radii in [1.1, 1e4],
// exactness of the analytic zero fields, and boundary vanishing at r = 1.
std::vector<VerifyRow> verify_closed_forms(int samples = 200, unsigned seed = 1234);

// M, positivity of f on [1, 1e3], boundary signs under both normal conventions.
std::vector<VerifyRow> verify_supersolution(int N, double p, double m, double eps);

// `count` random admissible (N, p, m, eps) with eps <= 0.1 and eps^{p-1} < M,
// plus rejection of m on and beyond both window ends.
std::vector<VerifyRow> verify_supersolution_random(int count = 100, unsigned seed = 1234);

// Lemma catalog at (N, p) as rows, one per check.
std::vector<VerifyRow> verify_lemmas(int N, double p);

// Flatness of the lifespan cutoff ratios over R in {10, 100, 1000}.
std::vector<VerifyRow> verify_lifespan_cutoffs(int N, double p, int samples = 4000,
                                               unsigned seed = 1234);

// Linear run (nonlinearity off) from u*(0) with source and boundary data
// chosen so that u*(t, r) = e^{-t} B(r) is the exact solution. Fixed step dt
// up to T; the history keeps every step.
struct ManufacturedRun {
    double max_error = 0;   // max over nodes at t = T
    History history;
};
ManufacturedRun manufactured_run(int N, BoundaryCondition bc, double R_max, int M, double dt,
                                 double T);

// Same history with the states replaced by seeded noise of the same size.
History scrambled_history(const History& h, unsigned seed);

bool all_pass(const std::vector<VerifyRow>& rows);
std::string verify_csv(const std::vector<VerifyRow>& rows);

} // namespace biharm
