#pragma once

#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "biharm/jet.hpp"

namespace biharm {

// Real number that may be +infinity; ordering treats +inf as absorbing.
class ExtendedReal {
public:
    constexpr ExtendedReal() = default;
    constexpr explicit ExtendedReal(double v) : v_(v) {}
    static constexpr ExtendedReal infinity() {
        return ExtendedReal(std::numeric_limits<double>::infinity());
    }
    constexpr bool is_infinite() const { return v_ == std::numeric_limits<double>::infinity(); }
    constexpr double value() const { return v_; }

    friend constexpr bool operator<(double a, ExtendedReal b) { return a < b.v_; }
    friend constexpr bool operator<=(double a, ExtendedReal b) { return a <= b.v_; }
    friend constexpr bool operator>(double a, ExtendedReal b) { return a > b.v_; }
    friend constexpr bool operator>(ExtendedReal a, double b) { return a.v_ > b; }
    friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) { return a.v_ == b.v_; }

private:
    double v_ = 0;
};

struct Exponents {
    double p = 2;
    int N = 3;
    double p_conj = 2;        // p/(p-1)
    ExtendedReal p_crit;      // N/(N-4) for N >= 5, else +inf
    double p_fuj = 1;         // 1 + 4/N
    double omega_crit = 0;    // 4p/(p-1)
    double theta = 0;         // 1/(p-1) - N/4
};

Exponents compute_exponents(double p, int N);

// Values and analytic radial derivatives of a radial closed form.
struct HValues {
    double value, d1, d2, laplacian;
};

struct BValues {
    double value, d1, laplacian, d_laplacian, bilaplacian;
};

// H(r) = ln r (N = 2), 1 - r^{2-N} (N >= 3). Harmonic, vanishes at r = 1.
struct HarmonicH {
    int N;
    explicit HarmonicH(int N);
    HValues eval(double r) const;
    Jet jet(double r) const;
};

// Biharmonic comparison profile with B(1) = B'(1) = 0.
struct BiharmonicB {
    int N;
    explicit BiharmonicB(int N);
    BValues eval(double r) const;
    Jet jet(double r) const;
    // Closed-form radial Laplacian and its r-derivative.
    double laplacian(double r) const;
    double d_laplacian(double r) const;
};

HValues eval_H(const HarmonicH& h, double r);
BValues eval_B(const BiharmonicB& b, double r);

// Supersolution v = eps r^{-m} on the admissible window 4/(p-1) < m < N-4.
struct Supersolution {
    double p, m, epsilon;
    int N;
    double M;  // m(m+2)(m-N+2)(m-N+4)

    double v(double r) const;
    double laplacian(double r) const;     // eps m (m-N+2) r^{-m-2}
    double d_laplacian(double r) const;   // d/dr of the above
    double bilaplacian(double r) const;   // eps M r^{-m-4}
    double forcing(double r) const;       // eps M r^{-m-4} - eps^p r^{-mp}
};

Supersolution make_supersolution(double p, int N, double m, double epsilon);

// Supersolution boundary inequalities evaluated under both normal
// conventions. holds_plus/holds_minus refer to nu = +e_r and nu = -e_r.
struct BoundarySignEntry {
    std::string quantity;   // "v", "dv/dnu", "-lap v", "d(lap v)/dnu"
    double value_plus;      // value with nu = +e_r
    double value_minus;     // value with nu = -e_r
    bool holds_plus;        // claimed "> 0" holds under nu = +e_r
    bool holds_minus;
};

std::vector<BoundarySignEntry> check_supersolution_boundary_signs(const Supersolution& s);

// Boundary-condition tag at r = 1. The canonical string names are the
// lowercase hyphenated forms (navier, dirichlet, ...).
enum class BoundaryCondition {
    Navier,           // u = lap u = 0
    Dirichlet,        // u = u_n = 0
    DirichletNavier,  // u = (lap u)_n = 0
    KuttlerSigillito, // u_n = (lap u)_n = 0
    NeumannNavier,    // lap u = (lap u)_n = 0
    Neumann,          // u_n = lap u = 0
};

std::string to_string(BoundaryCondition bc);
BoundaryCondition parse_boundary_condition(const std::string& s);
int problem_number(BoundaryCondition bc);

enum class WeightKind { Harmonic, Biharmonic, One };

struct WeightA {
    WeightKind kind;
    int N;
    double operator()(double r) const;
    Jet jet(double r) const;
};

WeightA weight_for(BoundaryCondition bc, int N);

enum class ForcingClass { Plus, Minus };

// Membership of a sampled forcing in the decay classes I_omega^+ / I_omega^-.
// The tail is the probes in the last decade of the probe range.
struct ForcingClassReport {
    bool member = false;
    double C = 0;          // fitted constant (min or max of f r^omega on the tail)
    double tail_slope = 0; // log-log slope of f r^omega on the tail
};

ForcingClassReport forcing_class_report(const std::function<double(double)>& f, double omega,
                                        ForcingClass mode, const std::vector<double>& r_probe);
bool forcing_in_class(const std::function<double(double)>& f, double omega, ForcingClass mode,
                      const std::vector<double>& r_probe);

} // namespace biharm
