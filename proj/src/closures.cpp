#include "biharm/closures.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "biharm/errors.hpp"

namespace biharm {

std::array<Constraint, 2> constraints_of(BoundaryCondition bc) {
    switch (bc) {
    case BoundaryCondition::Navier: return {Constraint::Value, Constraint::Lap};
    case BoundaryCondition::Dirichlet: return {Constraint::Value, Constraint::Deriv};
    case BoundaryCondition::DirichletNavier: return {Constraint::Value, Constraint::LapDeriv};
    case BoundaryCondition::KuttlerSigillito: return {Constraint::Deriv, Constraint::LapDeriv};
    case BoundaryCondition::NeumannNavier: return {Constraint::Lap, Constraint::LapDeriv};
    case BoundaryCondition::Neumann: return {Constraint::Deriv, Constraint::Lap};
    }
    return {Constraint::Value, Constraint::Lap};
}

std::string to_string(Constraint c) {
    switch (c) {
    case Constraint::Value: return "u";
    case Constraint::Deriv: return "du/dr";
    case Constraint::Lap: return "lap u";
    case Constraint::LapDeriv: return "d(lap u)/dr";
    }
    return "?";
}

namespace {

int constraint_order(Constraint c) {
    switch (c) {
    case Constraint::Value: return 0;
    case Constraint::Deriv: return 1;
    case Constraint::Lap: return 2;
    case Constraint::LapDeriv: return 3;
    }
    return 0;
}

// Row of the constraint functional acting on monomial coefficients a_k of
// P(x), x = s (r - r_b)/h, multiplied by h^order.
Eigen::RowVectorXd constraint_row(Constraint c, int K, int N, double h, double r_b, double s) {
    Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(K);
    const double a = N - 1.0;
    switch (c) {
    case Constraint::Value: row(0) = 1; break;
    case Constraint::Deriv: row(1) = s; break;
    case Constraint::Lap:
        row(2) = 2;
        row(1) = h * a * s / r_b;
        break;
    case Constraint::LapDeriv:
        row(3) = 6 * s;
        row(2) = 2 * h * a / r_b;
        row(1) = -s * h * h * a / (r_b * r_b);
        break;
    }
    return row;
}

struct LocalSystem {
    Eigen::MatrixXd V;
    std::vector<int> data_nodes;  // local offsets from the boundary node
    bool fixed = false;
    int fixed_data = 0;
};

LocalSystem local_system(const std::array<Constraint, 2>& cons, int K, int N, double h,
                         double r_b, double s) {
    LocalSystem L;
    L.V = Eigen::MatrixXd::Zero(K, K);
    L.V.row(0) = constraint_row(cons[0], K, N, h, r_b, s);
    L.V.row(1) = constraint_row(cons[1], K, N, h, r_b, s);
    for (int c = 0; c < 2; ++c)
        if (cons[static_cast<std::size_t>(c)] == Constraint::Value) {
            L.fixed = true;
            L.fixed_data = c;
        }
    const int first = L.fixed ? 1 : 0;
    for (int j = 0; j < K - 2; ++j) {
        const int x = first + j;
        L.data_nodes.push_back(x);
        for (int k = 0; k < K; ++k) L.V(2 + j, k) = std::pow(static_cast<double>(x), k);
    }
    return L;
}

// Ghost relations at local positions x = -1, -2 in terms of local node
// offsets and the two constraint values.
std::array<GhostRelation, 2> ghosts_from(const LocalSystem& L, const std::array<Constraint, 2>& cons,
                                         int K, double h, int base, int dir) {
    const Eigen::MatrixXd Vinv = L.V.inverse();
    std::array<GhostRelation, 2> g;
    for (int q = 0; q < 2; ++q) {
        const double x = -(q + 1);
        Eigen::RowVectorXd mono(K);
        for (int k = 0; k < K; ++k) mono(k) = std::pow(x, k);
        const Eigen::RowVectorXd w = mono * Vinv;
        for (int c = 0; c < 2; ++c)
            g[static_cast<std::size_t>(q)].data_coeff[static_cast<std::size_t>(c)] =
                w(c) * std::pow(h, constraint_order(cons[static_cast<std::size_t>(c)]));
        for (std::size_t j = 0; j < L.data_nodes.size(); ++j)
            g[static_cast<std::size_t>(q)].terms.emplace_back(base + dir * L.data_nodes[j],
                                                              w(static_cast<Eigen::Index>(2 + j)));
    }
    return g;
}

constexpr std::array<Constraint, 2> far_field{Constraint::Value, Constraint::Lap};

} // namespace

double closure_determinant(BoundaryCondition bc, int N, double h, const ClosureOptions& opt) {
    const auto L = local_system(constraints_of(bc), opt.order, N, h, 1.0, 1.0);
    return L.V.determinant();
}

Closure assemble_closure(BoundaryCondition bc, const RadialGrid& grid, int N, const ClosureOptions& opt) {
    if (N != grid.N()) throw DomainError("closure dimension does not match grid dimension");
    const int K = opt.order;
    if (K < 4 || K > 8) throw DomainError("closure order must lie in [4, 8]");
    if (grid.M() < 2 * K) throw DomainError("grid too coarse for the closure order");
    const double h = grid.h();
    Closure c;
    const auto inner_cons = constraints_of(bc);
    const auto Li = local_system(inner_cons, K, N, h, 1.0, 1.0);
    const auto Lo = local_system(far_field, K, N, h, grid.R_max(), -1.0);
    c.inner_det = Li.V.determinant();
    c.outer_det = Lo.V.determinant();
    if (std::abs(c.inner_det) < 1e-12 || std::abs(c.outer_det) < 1e-12)
        throw SolverError("closure constraint system is singular for " + to_string(bc),
                          std::min(std::abs(c.inner_det), std::abs(c.outer_det)));
    c.inner = ghosts_from(Li, inner_cons, K, h, 0, +1);
    c.outer = ghosts_from(Lo, far_field, K, h, grid.M(), -1);
    c.inner_fixed = Li.fixed;
    c.inner_fixed_data = Li.fixed_data;
    c.outer_fixed = Lo.fixed;
    c.outer_fixed_data = Lo.fixed_data;
    c.assembled = true;
    return c;
}

ClosureResidual closure_residual(const RadialField& u, const Closure& c, BoundaryCondition bc,
                                 const BoundaryData& data) {
    const RadialGrid& g = u.grid;
    const int M = g.M();
    const double h = g.h();
    const auto e = extend_with_ghosts(u, c, data);
    auto at = [&](int i) { return e[static_cast<std::size_t>(i + 2)]; };
    auto lap = [&](int i) {
        const auto s = laplacian_stencil(g, i);
        return s[0] * at(i - 1) + s[1] * at(i) + s[2] * at(i + 1);
    };
    auto eval = [&](Constraint k, int b, int dir) {
        switch (k) {
        case Constraint::Value: return at(b);
        case Constraint::Deriv: return dir * (at(b + 1) - at(b - 1)) / (2 * h);
        case Constraint::Lap: return lap(b);
        case Constraint::LapDeriv: return dir * (lap(b + 1) - lap(b - 1)) / (2 * h);
        }
        return 0.0;
    };
    ClosureResidual r;
    const auto ic = constraints_of(bc);
    for (std::size_t k = 0; k < 2; ++k) {
        r.inner[k] = eval(ic[k], 0, 1) - data.inner[k];
        r.outer[k] = eval(far_field[k], M, 1) - data.outer[k];
    }
    return r;
}

FarFieldReport far_field_decay_check(const RadialField& field, double tail_fraction) {
    if (!(tail_fraction > 0 && tail_fraction < 0.5)) throw DomainError("tail_fraction must lie in (0, 0.5)");
    const RadialGrid& g = field.grid;
    const double r_tail = g.R_max() - tail_fraction * (g.R_max() - 1);
    FarFieldReport rep;
    for (int i = 0; i <= g.M(); ++i) {
        const double a = std::abs(field[i]);
        rep.global_max = std::max(rep.global_max, a);
        if (g.r(i) >= r_tail) rep.tail_max = std::max(rep.tail_max, a);
    }
    rep.ratio = rep.global_max > 0 ? rep.tail_max / rep.global_max : 0.0;
    rep.flagged = rep.ratio > 1e-4;
    return rep;
}

} // namespace biharm
