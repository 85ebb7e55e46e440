#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "biharm/closed_forms.hpp"
#include "biharm/jet.hpp"
#include "biharm/radial.hpp"

namespace biharm {

// Smooth cutoffs. Each kind is 1 on its plateau, 0 beyond its support and
// strictly decreasing on the window [a, b] in between:
//   zeta  plateau [0, 1/2], window [1/2, 1]
//   xi    plateau [0, 1],   window [1, 2]
//   F     plateau [-1, 0],  window [0, 1]
// Profile on the window: S(x) = q(x) / (q(x) + q(1 - x)), q(x) = exp(-1/x),
// x = (b - s)/(b - a). `shift` moves the plateau junction a by
// shift * (b - a) toward b.
enum class CutoffKind { Zeta, Xi, F };

struct CutoffSpec {
    CutoffKind kind = CutoffKind::Xi;
    int ell = 1;          // power used when attached to a test function
    double shift = 0;     // in [0, 0.5)

    double window_lo() const;
    double window_hi() const;
};

std::string to_string(CutoffKind k);

// Derivative of order 0..4 of the profile S (not raised to ell). Exactly 1
// or 0 with vanishing derivatives on the flats.
double eval_cutoff(const CutoffSpec& c, double s, int order);

enum class CutoffRegion { Plateau, Active, Outside };

// ln S and its s-derivatives, valid in the Active region only.
struct CutoffLog {
    CutoffRegion region;
    Jet log_s;
};

CutoffLog eval_cutoff_log(const CutoffSpec& c, double s);

// Max |S^{(k)}|, k = 0..4, by dense sampling of the window.
std::array<double, 5> cutoff_derivative_bounds(const CutoffSpec& c, int samples = 20001);

enum class Family { Phi1, Phi2, Phi3 };       // weights H, B, 1
enum class Argument { Standard, Logarithmic }; // xi(r/R) or F(ln(r/sqrt R)/ln sqrt R)

std::string to_string(Family f);
std::string to_string(Argument a);
Family family_for(BoundaryCondition bc);

// phi(t, r) = zeta^ell(t/T) W(r) chi^ell(r). R and T are carried as natural
// logarithms so the logarithmic families can be evaluated at R far beyond
// double range.
struct TestFunctionSpec {
    Family family = Family::Phi1;
    Argument argument = Argument::Standard;
    int N = 3;
    double p = 2;
    int ell = 0;
    double log_R = 0;
    double log_T = 0;
    double profile_shift = 0;

    // ell defaults to ceil(4p/(p-1)) + 1; T = R^j.
    static TestFunctionSpec make(Family f, Argument a, int N, double p, double R, double j,
                                 int ell = 0);
    static TestFunctionSpec make_log(Family f, Argument a, int N, double p, double log_R,
                                     double j, int ell = 0);

    double R() const;
    double T() const;
    double p_conj() const { return p / (p - 1); }
    double spatial_support() const;   // 2R or R
    double plateau_end() const;       // R or sqrt R
    WeightA weight() const;
    CutoffSpec spatial_cutoff() const;
    CutoffSpec time_cutoff() const;
    void validate() const;
};

struct TestFnValues {
    double value = 0;
    double dt = 0;
    double bilaplacian = 0;
};

// Pointwise value, time derivative and radial bilaplacian. The bilaplacian
// uses the product rule
//   lap^2(W c) = W lap^2 c + c lap^2 W + 2 lap W lap c + 4 W' (lap c)'
//              + 4 c' (lap W)' + 4 (W'' c'' + (N-1) W' c' / r^2)
// with closed-form lap W, (lap W)' and lap^2 W = 0.
TestFnValues eval_testfn(const TestFunctionSpec& tf, double t, double r);

// Same quantity from the radial bilaplacian of the jet product; used as an
// independent check of the expansion.
double testfn_bilaplacian_direct(const TestFunctionSpec& tf, double t, double r);

// Bilaplacian of a product of two radial jets by the expansion above.
double product_bilaplacian(const Jet& f, const Jet& g, int N, double r);

enum class LemmaIntegral { TimeFactor, BilapFactor, ForcingFactor, Mass };

std::string to_string(LemmaIntegral w);

// Natural log of
//   TimeFactor    int_Q phi^{-1/(p-1)} |phi_t|^{p'}
//   BilapFactor   int_Q phi^{-1/(p-1)} |lap^2 phi|^{p'}
//   Mass          int psi dx (spatial part only)
// computed in log space; zero integrands where phi and its derivatives
// vanish contribute nothing. ForcingFactor needs lemma_forcing_check.
double lemma_log_integral(const TestFunctionSpec& tf, LemmaIntegral which);

// exp of the above; overflows to inf for the huge-R logarithmic families.
double lemma_integral(const TestFunctionSpec& tf, LemmaIntegral which);

// int_0^T eta^{-1/(p-1)} |eta'|^{p'} dt by direct quadrature in t.
double time_factor_integral(const TestFunctionSpec& tf);

// Space-time integral of f phi by nested quadrature against its separated
// form T int zeta^ell ds * int f W chi^ell dx.
struct ForcingReduction {
    double direct = 0;
    double separated = 0;
    double rel_err = 0;
    double spatial = 0;   // int f W chi^ell dx
};

ForcingReduction lemma_forcing_check(const TestFunctionSpec& tf,
                                     const std::function<double(double)>& f);

struct LemmaCheck {
    std::string id;
    Family family = Family::Phi1;
    Argument argument = Argument::Standard;
    LemmaIntegral which = LemmaIntegral::TimeFactor;
    int N = 3;
    double p = 2;
    int ell = 0;
    double j = 5;
    double shift = 0;
    double predicted_exponent = 0;   // R-power
    double log_power = 0;            // power of the log factor
    bool log_of_sqrt = false;        // log factor is ln sqrt R instead of ln R
    double tolerance = 0.2;
    std::vector<double> log10_R;     // ladder
    std::vector<double> log_measured;  // ln(integral / T-power)
    FitResult fit;
    double fitted = 0;
    double ratio_spread = 0;         // max/min of measured / prediction
    double max_rel_err = 0;          // forcing reduction only
    bool verdict = false;
    bool bound_holds = false;        // fitted <= predicted + tolerance
    std::string note;
};

// Catalog entries applicable at (N, p): standard-argument pairs for every
// family, forcing reduction, phi1 mass, and the logarithmic pairs when
// p = N/(N-4).
std::vector<LemmaCheck> lemma_catalog(int N, double p);

// Evaluates the ladder, fits the R-exponent after dividing out the log
// factor, and sets the verdict.
LemmaCheck verify_lemma(LemmaCheck check);
LemmaCheck verify_lemma(LemmaCheck check, const std::vector<double>& log10_R);

std::vector<double> standard_ladder();
std::vector<double> logarithmic_ladder();

// CSV rows: lemma_id,N,p,ell,j,R,measured,predicted_exponent,fitted,verdict,bound_holds
std::string lemma_csv_header();
std::vector<std::string> lemma_csv_rows(const LemmaCheck& c);

// "10^x" style formatting for values carried as log10.
std::string format_log10(double log10_value);

// psi_R = phi(s)^{4p'}, s = ((r - 1)^4 + t)/R, with phi the zeta profile;
// psi_R* = phi*(s)^{4p'} where phi* = phi on s >= 1/2 and 0 below.
struct LifespanCutoff {
    double R = 10;
    double p = 2;
    int N = 3;
    double shift = 0;

    double p_conj() const { return p / (p - 1); }
    double psi(double t, double r) const;
    double psi_star(double t, double r) const;
    double psi_t(double t, double r) const;
    double psi_bilaplacian(double t, double r) const;
    // |psi_t| / (R^{-1} psi*^{1/p}) and |lap^2 psi| / (R^{-1} psi*^{1/p});
    // NaN where psi* = 0.
    double ratio_t(double t, double r) const;
    double ratio_bilap(double t, double r) const;
};

struct LifespanCutoffRow {
    double R = 0;
    double sup_t = 0;
    double sup_bilap = 0;
    int samples = 0;
};

struct LifespanCutoffReport {
    std::vector<LifespanCutoffRow> rows;
    double slope_t = 0;
    double slope_bilap = 0;
    long star_checks = 0;
    long star_violations = 0;
    bool pass = false;
};

LifespanCutoffReport verify_lifespan_cutoff_bounds(int N, double p,
                                                   const std::vector<double>& R_ladder,
                                                   int samples, unsigned seed = 1234);

// Upper bound on T from the Ikeda-Sobajima iteration lemma.
double ikeda_bound(double theta, double C0, double R1, double delta, double p);

} // namespace biharm
