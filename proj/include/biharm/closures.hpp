#pragma once

#include <array>
#include <string>

#include "biharm/closed_forms.hpp"
#include "biharm/radial.hpp"

namespace biharm {

enum class Constraint { Value, Deriv, Lap, LapDeriv };

std::array<Constraint, 2> constraints_of(BoundaryCondition bc);
std::string to_string(Constraint c);

// Ghost values come from the polynomial of degree order-1 that satisfies the
// two boundary constraints exactly and interpolates order-2 nodal values next
// to the boundary. order = 6 makes the ghosts exact on quintics, so the
// composed bilaplacian keeps its interior truncation order up to the wall.
struct ClosureOptions {
    int order = 6;
};

// Inner pair from the boundary condition; far field u = lap u = 0 at R_max.
Closure assemble_closure(BoundaryCondition bc, const RadialGrid& grid, int N,
                         const ClosureOptions& opt = {});

// Discrete residuals of the two constraints at each end evaluated on the
// closure-extended field: value u_0, central (u_1 - u_{-1})/2h for u_r, the
// Laplacian stencil at the boundary node for lap u, and the central
// difference of nodal Laplacians for (lap u)_r.
struct ClosureResidual {
    std::array<double, 2> inner{0, 0};
    std::array<double, 2> outer{0, 0};
};

ClosureResidual closure_residual(const RadialField& u, const Closure& c, BoundaryCondition bc,
                                 const BoundaryData& data = {});

// Scaled determinant of the local constraint system for a given h.
double closure_determinant(BoundaryCondition bc, int N, double h, const ClosureOptions& opt = {});

struct FarFieldReport {
    double tail_max = 0;
    double global_max = 0;
    double ratio = 0;
    bool flagged = false;  // ratio > 1e-4
};

FarFieldReport far_field_decay_check(const RadialField& field, double tail_fraction);

} // namespace biharm
