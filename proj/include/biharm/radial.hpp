#pragma once

#include <array>
#include <functional>
#include <vector>

namespace biharm {

// Uniform grid r_i = 1 + i h, i = 0..M, on [1, R_max].
class RadialGrid {
public:
    RadialGrid(int N, double R_max, int M);

    int N() const { return N_; }
    int M() const { return M_; }
    double R_max() const { return R_max_; }
    double h() const { return h_; }
    int size() const { return M_ + 1; }
    // Valid for ghost indices too (i < 0 or i > M).
    double r(int i) const { return 1.0 + i * h_; }
    std::vector<double> nodes() const;
    RadialGrid refined() const { return RadialGrid(N_, R_max_, 2 * M_); }

    bool operator==(const RadialGrid& o) const {
        return N_ == o.N_ && M_ == o.M_ && R_max_ == o.R_max_;
    }

private:
    int N_;
    double R_max_;
    int M_;
    double h_;
};

struct RadialField {
    RadialGrid grid;
    std::vector<double> values;

    RadialField(const RadialGrid& g, std::vector<double> v);
    static RadialField sample(const RadialGrid& g, const std::function<double(double)>& f);
    double operator[](int i) const { return values[static_cast<std::size_t>(i)]; }
};

// Ghost node value as an affine combination of node values and boundary
// constraint data: u_ghost = sum_k coeff_k u_{node_k} + sum_c data_coeff[c] g_c.
struct GhostRelation {
    std::vector<std::pair<int, double>> terms;
    std::array<double, 2> data_coeff{0, 0};
};

// Ghost relations at both ends of a grid. inner[k] gives u_{-1-k},
// outer[k] gives u_{M+1+k}. A fixed node carries a prescribed value
// (itself a constraint) and is not an unknown of the evolution.
struct Closure {
    bool assembled = false;
    std::array<GhostRelation, 2> inner;
    std::array<GhostRelation, 2> outer;
    bool inner_fixed = false;  // u_0 prescribed
    bool outer_fixed = true;   // u_M prescribed
    // Index into constraint data giving the prescribed node value.
    int inner_fixed_data = 0;
    int outer_fixed_data = 0;
    double inner_det = 0;      // scaled determinant of the local constraint system
    double outer_det = 0;
};

// Boundary constraint data at the inner (r = 1) and outer (r = R_max) ends.
struct BoundaryData {
    std::array<double, 2> inner{0, 0};
    std::array<double, 2> outer{0, 0};
};

// Field extended by two ghost nodes per side; index shift of 2.
std::vector<double> extend_with_ghosts(const RadialField& u, const Closure& c,
                                       const BoundaryData& data = {});

// Central 2nd-order u'' + (N-1)/r u' at interior nodes; endpoints set to NaN
// because they need closure information.
RadialField radial_laplacian(const RadialGrid& grid, const RadialField& field);

// Composition of the discrete Laplacian with itself on the closure-extended
// field, evaluated at every node 0..M. A null or unassembled closure throws.
RadialField radial_bilaplacian(const RadialGrid& grid, const RadialField& field,
                               const Closure* closure, const BoundaryData& data = {});

// Coefficients of the central Laplacian stencil at node index i (may be a
// ghost index): (a, b, c) multiply u_{i-1}, u_i, u_{i+1}.
std::array<double, 3> laplacian_stencil(const RadialGrid& grid, int i);

// 2 pi^{N/2} / Gamma(N/2).
double sphere_area(int N);

struct QuadratureOptions {
    double rel_tol = 1e-8;
    double abs_floor = 1e-14;
    int initial_panels = 16;
    int max_doublings = 22;
};

// omega_{N-1} * int_{r_lo}^{r_hi} g(r) r^{N-1} dr by composite Simpson with
// interval doubling.
double annulus_quadrature(int N, const std::function<double(double)>& g, double r_lo,
                          double r_hi, const QuadratureOptions& opt = {});

// Plain composite Simpson with doubling on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b,
               const QuadratureOptions& opt = {});

// ln int_a^b exp(lf(x)) dx for integrands whose magnitude overflows doubles.
// lf may return -inf where the integrand vanishes. Returns -inf for a zero
// integral.
double log_simpson(const std::function<double(double)>& lf, double a, double b,
                   const QuadratureOptions& opt = {});

struct FitResult {
    double slope = 0;
    double intercept = 0;
    double r_squared = 0;
    double residual_max = 0;
    std::size_t points_used = 0;
};

// Least-squares line through (ln x, ln y). Callers are expected to supply
// >= 4 points spanning at least one decade (see fit_ladder_ok); only
// nonpositive data is rejected here.
FitResult fit_power_law(const std::vector<std::pair<double, double>>& points);

// True when x has at least min_points entries spanning min_decades decades.
bool fit_ladder_ok(const std::vector<double>& x, std::size_t min_points = 4,
                   double min_decades = 1.0);

// Same regression on already-logged coordinates, without the size and span
// preconditions. Used where values are carried in log form.
FitResult fit_line(const std::vector<double>& x, const std::vector<double>& y);

} // namespace biharm
