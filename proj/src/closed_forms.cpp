#include "biharm/closed_forms.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "biharm/errors.hpp"

namespace biharm {

namespace {

void require_r(double r) {
    if (!(r >= 1.0)) {
        std::ostringstream os;
        os << "radius " << r << " lies inside the unit ball (r < 1)";
        throw DomainError(os.str());
    }
}

// Jet of c * r^k.
Jet power_jet(double c, double k, double r) {
    Jet j;
    double coef = c;
    for (int n = 0; n < 5; ++n) {
        j[n] = coef * std::pow(r, k - n);
        coef *= (k - n);
    }
    return j;
}

// Jet of c * ln r.
Jet log_jet(double c, double r) {
    const double i = 1 / r;
    return Jet{{c * std::log(r), c * i, -c * i * i, 2 * c * i * i * i, -6 * c * i * i * i * i}};
}

} // namespace

Exponents compute_exponents(double p, int N) {
    if (!(p > 1)) throw DomainError("p must exceed 1");
    if (N < 2) throw DomainError("N must be at least 2");
    Exponents e;
    e.p = p;
    e.N = N;
    e.p_conj = p / (p - 1);
    e.p_crit = N >= 5 ? ExtendedReal(static_cast<double>(N) / (N - 4)) : ExtendedReal::infinity();
    e.p_fuj = 1 + 4.0 / N;
    e.omega_crit = 4 * p / (p - 1);
    e.theta = 1 / (p - 1) - N / 4.0;
    return e;
}

HarmonicH::HarmonicH(int N_) : N(N_) {
    if (N < 2) throw DomainError("N must be at least 2");
}

Jet HarmonicH::jet(double r) const {
    if (N == 2) return log_jet(1, r);
    Jet j = power_jet(-1, 2 - N, r);
    j[0] += 1;
    return j;
}

HValues HarmonicH::eval(double r) const {
    require_r(r);
    if (r == 1.0) {
        const Jet j = jet(r);
        return {0.0, j[1], j[2], 0.0};
    }
    const Jet j = jet(r);
    return {j[0], j[1], j[2], 0.0};
}

BiharmonicB::BiharmonicB(int N_) : N(N_) {
    if (N < 2) throw DomainError("N must be at least 2");
}

Jet BiharmonicB::jet(double r) const {
    switch (N) {
    case 2: {
        // r^2 ln r - r^2 + ln r + 1
        const Jet lr = log_jet(1, r);
        const Jet r2 = power_jet(1, 2, r);
        Jet j = r2 * lr - r2 + lr;
        j[0] += 1;
        return j;
    }
    case 3: {
        Jet j = power_jet(1, -1, r) + power_jet(1, 1, r);
        j[0] -= 2;
        return j;
    }
    case 4: {
        Jet j = log_jet(2, r) + power_jet(1, -2, r);
        j[0] -= 1;
        return j;
    }
    default: {
        const double c = (N - 2.0) / (N - 4.0);
        Jet j = power_jet(1, 2 - N, r) - power_jet(c, 4 - N, r);
        j[0] += c - 1;
        return j;
    }
    }
}

double BiharmonicB::laplacian(double r) const {
    switch (N) {
    case 2: return 4 * std::log(r);
    case 4: return 4 / (r * r);
    default: return 2.0 * (N - 2) * std::pow(r, 2 - N);
    }
}

double BiharmonicB::d_laplacian(double r) const {
    switch (N) {
    case 2: return 4 / r;
    case 4: return -8 / (r * r * r);
    default: return 2.0 * (N - 2) * (2 - N) * std::pow(r, 1 - N);
    }
}

BValues BiharmonicB::eval(double r) const {
    require_r(r);
    if (r == 1.0) return {0.0, 0.0, laplacian(r), d_laplacian(r), 0.0};
    const Jet j = jet(r);
    return {j[0], j[1], laplacian(r), d_laplacian(r), 0.0};
}

HValues eval_H(const HarmonicH& h, double r) { return h.eval(r); }
BValues eval_B(const BiharmonicB& b, double r) { return b.eval(r); }

double Supersolution::v(double r) const { return epsilon * std::pow(r, -m); }
double Supersolution::laplacian(double r) const {
    return epsilon * m * (m - N + 2) * std::pow(r, -m - 2);
}
double Supersolution::d_laplacian(double r) const {
    return -epsilon * m * (m - N + 2) * (m + 2) * std::pow(r, -m - 3);
}
double Supersolution::bilaplacian(double r) const { return epsilon * M * std::pow(r, -m - 4); }
double Supersolution::forcing(double r) const {
    return bilaplacian(r) - std::pow(epsilon, p) * std::pow(r, -m * p);
}

Supersolution make_supersolution(double p, int N, double m, double epsilon) {
    if (N < 5) throw DomainError("supersolution requires N >= 5");
    if (!(p > static_cast<double>(N) / (N - 4))) throw DomainError("supersolution requires p > N/(N-4)");
    if (!(epsilon > 0)) throw DomainError("supersolution requires eps > 0");
    if (!(m > 4 / (p - 1))) throw DomainError("m <= 4/(p-1)");
    if (!(m < N - 4)) throw DomainError("m ≥ N−4");
    Supersolution s{p, m, epsilon, N, m * (m + 2) * (m - N + 2) * (m - N + 4)};
    return s;
}

std::vector<BoundarySignEntry> check_supersolution_boundary_signs(const Supersolution& s) {
    const double v1 = s.v(1);
    const double dv = -s.epsilon * s.m;  // d/dr at r = 1
    const double lap = s.laplacian(1);
    const double dlap = s.d_laplacian(1);
    std::vector<BoundarySignEntry> out;
    out.push_back({"v", v1, v1, v1 > 0, v1 > 0});
    out.push_back({"dv/dnu", dv, -dv, dv > 0, -dv > 0});
    out.push_back({"-lap v", -lap, -lap, -lap > 0, -lap > 0});
    out.push_back({"d(lap v)/dnu", dlap, -dlap, dlap > 0, -dlap > 0});
    return out;
}

std::string to_string(BoundaryCondition bc) {
    switch (bc) {
    case BoundaryCondition::Navier: return "navier";
    case BoundaryCondition::Dirichlet: return "dirichlet";
    case BoundaryCondition::DirichletNavier: return "dirichlet-navier";
    case BoundaryCondition::KuttlerSigillito: return "kuttler-sigillito";
    case BoundaryCondition::NeumannNavier: return "neumann-navier";
    case BoundaryCondition::Neumann: return "neumann";
    }
    return "?";
}

BoundaryCondition parse_boundary_condition(const std::string& s) {
    for (auto bc : {BoundaryCondition::Navier, BoundaryCondition::Dirichlet,
                    BoundaryCondition::DirichletNavier, BoundaryCondition::KuttlerSigillito,
                    BoundaryCondition::NeumannNavier, BoundaryCondition::Neumann})
        if (to_string(bc) == s) return bc;
    throw DomainError("unknown boundary condition '" + s + "'");
}

int problem_number(BoundaryCondition bc) { return static_cast<int>(bc) + 1; }

double WeightA::operator()(double r) const { return jet(r)[0]; }

Jet WeightA::jet(double r) const {
    switch (kind) {
    case WeightKind::Harmonic: return HarmonicH(N).jet(r);
    case WeightKind::Biharmonic: return BiharmonicB(N).jet(r);
    case WeightKind::One: return Jet::constant(1);
    }
    return Jet::constant(1);
}

WeightA weight_for(BoundaryCondition bc, int N) {
    switch (bc) {
    case BoundaryCondition::Navier:
    case BoundaryCondition::Neumann: return {WeightKind::Harmonic, N};
    case BoundaryCondition::Dirichlet: return {WeightKind::Biharmonic, N};
    default: return {WeightKind::One, N};
    }
}

ForcingClassReport forcing_class_report(const std::function<double(double)>& f, double omega,
                                        ForcingClass mode, const std::vector<double>& r_probe) {
    if (r_probe.empty()) throw DomainError("empty probe set");
    std::vector<double> rs(r_probe);
    std::sort(rs.begin(), rs.end());
    if (rs.front() < 1) throw DomainError("probe radius below 1");
    if (rs.back() / rs.front() < 100 * (1 - 1e-12))
        throw DomainError("probes must span at least two decades of r");

    ForcingClassReport rep;
    std::vector<double> fv(rs.size());
    for (std::size_t i = 0; i < rs.size(); ++i) fv[i] = f(rs[i]);

    const bool sign_ok = std::all_of(fv.begin(), fv.end(), [&](double x) {
        return mode == ForcingClass::Plus ? x >= 0 : x > 0;
    });

    // Tail: probes within the last decade, at least two of them.
    std::size_t first = rs.size();
    while (first > 0 && rs[first - 1] >= rs.back() / 10) --first;
    if (rs.size() - first < 2) first = rs.size() - 2;

    std::vector<double> lx, ly;
    double cmin = std::numeric_limits<double>::infinity(), cmax = 0;
    for (std::size_t i = first; i < rs.size(); ++i) {
        const double q = fv[i] * std::pow(rs[i], omega);
        cmin = std::min(cmin, q);
        cmax = std::max(cmax, q);
        if (q > 0) {
            lx.push_back(std::log(rs[i]));
            ly.push_back(std::log(q));
        }
    }
    if (lx.size() == rs.size() - first) {
        const double n = static_cast<double>(lx.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sx += lx[i];
            sy += ly[i];
            sxx += lx[i] * lx[i];
            sxy += lx[i] * ly[i];
        }
        rep.tail_slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    } else {
        rep.tail_slope = std::numeric_limits<double>::quiet_NaN();
    }

    // A fitted C exists iff f r^omega neither decays (plus) nor grows (minus)
    // along the tail, up to a slope tolerance.
    constexpr double slope_tol = 0.1;
    if (mode == ForcingClass::Plus) {
        rep.C = cmin;
        rep.member = sign_ok && cmin > 0 && rep.tail_slope >= -slope_tol;
    } else {
        rep.C = cmax;
        rep.member = sign_ok && std::isfinite(cmax) && rep.tail_slope <= slope_tol;
    }
    return rep;
}

bool forcing_in_class(const std::function<double(double)>& f, double omega, ForcingClass mode,
                      const std::vector<double>& r_probe) {
    return forcing_class_report(f, omega, mode, r_probe).member;
}

} // namespace biharm
