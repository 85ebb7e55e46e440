#include "biharm/testfn.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "biharm/errors.hpp"

namespace biharm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_add(double a, double b) {
    if (a == kNegInf) return b;
    if (b == kNegInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

std::array<double, 5> jet_array(const Jet& j) { return j.d; }

// W(y) = e^{a y} Q(y) with y = ln r, so the log of W never overflows.
struct LogWeight {
    double a = 0;
    Jet Q;
};

LogWeight log_weight(WeightKind kind, int N, double y) {
    const Jet Y = Jet::variable(y);
    const Jet one = Jet::constant(1);
    LogWeight w;
    switch (kind) {
    case WeightKind::One: w.Q = one; break;
    case WeightKind::Harmonic:
        if (N == 2) w.Q = Y;
        else w.Q = one - exp((2.0 - N) * Y);
        break;
    case WeightKind::Biharmonic:
        if (N == 2) {
            w.a = 2;
            w.Q = (Y - one) + (Y + one) * exp(-2.0 * Y);
        } else if (N == 3) {
            w.a = 1;
            w.Q = one + exp(-2.0 * Y) - 2.0 * exp(-1.0 * Y);
        } else if (N == 4) {
            w.Q = 2.0 * Y + exp(-2.0 * Y) - one;
        } else {
            const double c = (N - 2.0) / (N - 4.0);
            w.Q = exp((2.0 - N) * Y) - one + c * (one - exp((4.0 - N) * Y));
        }
        break;
    }
    return w;
}

// Bilaplacian of h(y), y = ln r, divided by r^{-4}.
double bilap_in_log_variable(const Jet& h, int N) {
    const double k0 = h[2] + (N - 2) * h[1];
    const double k1 = h[3] + (N - 2) * h[2];
    const double k2 = h[4] + (N - 2) * h[3];
    return k2 + (N - 6) * k1 - 2.0 * (N - 4) * k0;
}

// Spatial cutoff argument as a jet in y = ln r.
Jet argument_jet_log(const TestFunctionSpec& tf, double y) {
    if (tf.argument == Argument::Standard) return exp(Jet::variable(y - tf.log_R));
    const double L = 0.5 * tf.log_R;
    return Jet{{y / L - 1, 1 / L, 0, 0, 0}};
}

// Same argument as a jet in r (double range only).
Jet argument_jet_r(const TestFunctionSpec& tf, double r) {
    if (tf.argument == Argument::Standard) {
        const double R = tf.R();
        return Jet{{r / R, 1 / R, 0, 0, 0}};
    }
    const double L = 0.5 * tf.log_R;
    return (1 / L) * log(Jet::variable(r)) - Jet::constant(1);
}

struct SpatialPoint {
    CutoffRegion region = CutoffRegion::Outside;
    double G0 = kNegInf;  // ell ln chi
    Jet chat;             // chi^ell / e^{G0} as a jet
};

SpatialPoint spatial_cutoff_at(const CutoffSpec& c, const Jet& arg, int ell) {
    SpatialPoint sp;
    const CutoffLog cl = eval_cutoff_log(c, arg[0]);
    sp.region = cl.region;
    if (cl.region == CutoffRegion::Plateau) {
        sp.G0 = 0;
        sp.chat = Jet::constant(1);
    } else if (cl.region == CutoffRegion::Active) {
        Jet G = static_cast<double>(ell) * compose(jet_array(cl.log_s), arg);
        sp.G0 = G[0];
        G[0] = 0;
        sp.chat = exp(G);
    }
    return sp;
}

// ln int over the window of zeta^ell |d/ds ell ln zeta|^{power} ds
// (power = 0 gives the plain window mass).
double log_time_window(const CutoffSpec& z, int ell, double power) {
    const double lo = z.window_lo(), hi = z.window_hi();
    auto lf = [&](double s) {
        const CutoffLog cl = eval_cutoff_log(z, s);
        if (cl.region == CutoffRegion::Plateau) return power == 0 ? 0.0 : kNegInf;
        if (cl.region == CutoffRegion::Outside) return kNegInf;
        const double g = ell * cl.log_s[0];
        if (power == 0) return g;
        return g + power * std::log(std::abs(ell * cl.log_s[1]));
    };
    return log_simpson(lf, lo, hi);
}

double log_time_mass(const CutoffSpec& z, int ell) {
    return log_add(std::log(z.window_lo()), log_time_window(z, ell, 0));
}

struct YRange {
    double plateau_end, support_end;
};

YRange y_range(const TestFunctionSpec& tf) {
    const CutoffSpec c = tf.spatial_cutoff();
    if (tf.argument == Argument::Standard)
        return {tf.log_R + std::log(c.window_lo()), tf.log_R + std::log(c.window_hi())};
    const double L = 0.5 * tf.log_R;
    return {L * (1 + c.window_lo()), L * (1 + c.window_hi())};
}

double log_spatial_mass(const TestFunctionSpec& tf) {
    const WeightKind wk = tf.weight().kind;
    const CutoffSpec c = tf.spatial_cutoff();
    const int N = tf.N;
    auto lf = [&](double y) {
        const LogWeight w = log_weight(wk, N, y);
        if (!(w.Q[0] > 0)) return kNegInf;
        const SpatialPoint sp = spatial_cutoff_at(c, argument_jet_log(tf, y), tf.ell);
        if (sp.region == CutoffRegion::Outside) return kNegInf;
        return w.a * y + std::log(w.Q[0]) + sp.G0 + N * y;
    };
    const YRange yr = y_range(tf);
    const double plateau = log_simpson(lf, 0.0, yr.plateau_end);
    const double active = log_simpson(lf, yr.plateau_end, yr.support_end);
    return std::log(sphere_area(N)) + log_add(plateau, active);
}

// ln int psi^{-1/(p-1)} |lap^2 psi|^{p'} dx over the active annulus; the
// plateau and exterior contribute nothing.
double log_spatial_bilap(const TestFunctionSpec& tf) {
    const WeightKind wk = tf.weight().kind;
    const CutoffSpec c = tf.spatial_cutoff();
    const int N = tf.N;
    const double pc = tf.p_conj();
    const double q = 1 / (tf.p - 1);
    auto lf = [&](double y) {
        const SpatialPoint sp = spatial_cutoff_at(c, argument_jet_log(tf, y), tf.ell);
        if (sp.region != CutoffRegion::Active) return kNegInf;
        const LogWeight w = log_weight(wk, N, y);
        const double ea[5] = {1, w.a, w.a * w.a, w.a * w.a * w.a, w.a * w.a * w.a * w.a};
        const Jet E{{ea[0], ea[1], ea[2], ea[3], ea[4]}};
        const Jet h = (E * w.Q) * sp.chat;
        const double P = bilap_in_log_variable(h, N);
        if (P == 0) return kNegInf;
        return sp.G0 + w.a * y - q * std::log(w.Q[0]) + pc * (std::log(std::abs(P)) - 4 * y) + N * y;
    };
    const YRange yr = y_range(tf);
    return std::log(sphere_area(N)) + log_simpson(lf, yr.plateau_end, yr.support_end);
}

// omega int g r^{N-1} dr split into dyadic pieces so decaying integrands on
// long intervals are resolved.
double dyadic_annulus(int N, const std::function<double(double)>& g, double lo, double hi) {
    double s = 0;
    double a = lo;
    while (a < hi) {
        const double b = std::min(hi, 2 * a);
        s += annulus_quadrature(N, g, a, b);
        a = b;
    }
    return s;
}

double ln_log_factor(const LemmaCheck& c, double log_R) {
    return std::log(c.log_of_sqrt ? 0.5 * log_R : log_R);
}

} // namespace

double CutoffSpec::window_lo() const {
    double a = 0, b = 1;
    switch (kind) {
    case CutoffKind::Zeta: a = 0.5; b = 1; break;
    case CutoffKind::Xi: a = 1; b = 2; break;
    case CutoffKind::F: a = 0; b = 1; break;
    }
    return a + shift * (b - a);
}

double CutoffSpec::window_hi() const {
    switch (kind) {
    case CutoffKind::Zeta: return 1;
    case CutoffKind::Xi: return 2;
    case CutoffKind::F: return 1;
    }
    return 1;
}

std::string to_string(CutoffKind k) {
    switch (k) {
    case CutoffKind::Zeta: return "zeta";
    case CutoffKind::Xi: return "xi";
    case CutoffKind::F: return "F";
    }
    return "?";
}

CutoffLog eval_cutoff_log(const CutoffSpec& c, double s) {
    const double a = c.window_lo(), b = c.window_hi();
    if (s <= a) return {CutoffRegion::Plateau, Jet::constant(0)};
    if (s >= b) return {CutoffRegion::Outside, Jet::constant(kNegInf)};
    const double w = b - a;
    const Jet X{{(b - s) / w, -1 / w, 0, 0, 0}};
    const Jet u = inv(X) - inv(Jet::constant(1) - X);
    return {CutoffRegion::Active, -1.0 * softplus(u)};
}

double eval_cutoff(const CutoffSpec& c, double s, int order) {
    if (order < 0 || order > 4) throw DomainError("cutoff derivative order must lie in [0, 4]");
    const CutoffLog cl = eval_cutoff_log(c, s);
    if (cl.region == CutoffRegion::Plateau) return order == 0 ? 1.0 : 0.0;
    if (cl.region == CutoffRegion::Outside) return 0.0;
    return exp(cl.log_s)[order];
}

std::array<double, 5> cutoff_derivative_bounds(const CutoffSpec& c, int samples) {
    std::array<double, 5> m{};
    const double a = c.window_lo(), b = c.window_hi();
    for (int i = 1; i < samples; ++i) {
        const double s = a + (b - a) * i / samples;
        for (int k = 0; k < 5; ++k) m[static_cast<std::size_t>(k)] =
            std::max(m[static_cast<std::size_t>(k)], std::abs(eval_cutoff(c, s, k)));
    }
    return m;
}

std::string to_string(Family f) {
    switch (f) {
    case Family::Phi1: return "phi1";
    case Family::Phi2: return "phi2";
    case Family::Phi3: return "phi3";
    }
    return "?";
}

std::string to_string(Argument a) { return a == Argument::Standard ? "standard" : "log"; }

Family family_for(BoundaryCondition bc) {
    switch (bc) {
    case BoundaryCondition::Navier:
    case BoundaryCondition::Neumann: return Family::Phi1;
    case BoundaryCondition::Dirichlet: return Family::Phi2;
    default: return Family::Phi3;
    }
}

static int default_ell(double p) { return static_cast<int>(std::ceil(4 * p / (p - 1) - 1e-12)) + 1; }

TestFunctionSpec TestFunctionSpec::make(Family f, Argument a, int N, double p, double R, double j,
                                        int ell) {
    if (!(R > 0)) throw DomainError("R must be positive");
    return make_log(f, a, N, p, std::log(R), j, ell);
}

TestFunctionSpec TestFunctionSpec::make_log(Family f, Argument a, int N, double p, double log_R,
                                            double j, int ell) {
    TestFunctionSpec tf;
    tf.family = f;
    tf.argument = a;
    tf.N = N;
    tf.p = p;
    tf.ell = ell > 0 ? ell : (p > 1 ? default_ell(p) : 1);
    tf.log_R = log_R;
    tf.log_T = j * log_R;
    tf.validate();
    return tf;
}

double TestFunctionSpec::R() const { return std::exp(log_R); }
double TestFunctionSpec::T() const { return std::exp(log_T); }

double TestFunctionSpec::spatial_support() const {
    return argument == Argument::Standard ? 2 * R() : R();
}

double TestFunctionSpec::plateau_end() const {
    return argument == Argument::Standard ? R() : std::exp(0.5 * log_R);
}

WeightA TestFunctionSpec::weight() const {
    switch (family) {
    case Family::Phi1: return WeightA{WeightKind::Harmonic, N};
    case Family::Phi2: return WeightA{WeightKind::Biharmonic, N};
    case Family::Phi3: return WeightA{WeightKind::One, N};
    }
    return WeightA{WeightKind::One, N};
}

CutoffSpec TestFunctionSpec::spatial_cutoff() const {
    return CutoffSpec{argument == Argument::Standard ? CutoffKind::Xi : CutoffKind::F, ell, profile_shift};
}

CutoffSpec TestFunctionSpec::time_cutoff() const { return CutoffSpec{CutoffKind::Zeta, ell, profile_shift}; }

void TestFunctionSpec::validate() const {
    if (N < 2) throw DomainError("N must be at least 2");
    if (!(p > 1)) throw DomainError("p must exceed 1");
    if (ell < 1) throw DomainError("ell must be at least 1");
    if (!(log_R > std::log(4.0))) throw DomainError("R must exceed 4");
    if (!std::isfinite(log_T)) throw DomainError("T must be positive and finite");
    if (!(profile_shift >= 0 && profile_shift < 0.5)) throw DomainError("profile shift must lie in [0, 0.5)");
}

namespace {

struct WeightDerivs {
    Jet jet;
    double lap = 0, dlap = 0;
};

WeightDerivs weight_derivs(const WeightA& w, double r) {
    WeightDerivs d;
    d.jet = w.jet(r);
    if (w.kind == WeightKind::Biharmonic) {
        const BiharmonicB b(w.N);
        d.lap = b.laplacian(r);
        d.dlap = b.d_laplacian(r);
    }
    return d;
}

double expansion(const Jet& f, double lapf, double dlapf, double bilapf, const Jet& g, int N,
                 double r) {
    const double lapg = radial_laplacian(g, N, r);
    const double dlapg = radial_laplacian_dr(g, N, r);
    const double bilapg = radial_bilaplacian(g, N, r);
    return f[0] * bilapg + g[0] * bilapf + 2 * lapf * lapg + 4 * f[1] * dlapg + 4 * g[1] * dlapf +
           4 * (f[2] * g[2] + (N - 1) * f[1] * g[1] / (r * r));
}

struct EtaValues {
    double eta = 0, deta = 0;
};

EtaValues eta_at(const TestFunctionSpec& tf, double t) {
    const double T = tf.T();
    const CutoffLog cl = eval_cutoff_log(tf.time_cutoff(), t / T);
    if (t < 0) return {};
    if (cl.region == CutoffRegion::Plateau) return {1, 0};
    if (cl.region == CutoffRegion::Outside) return {};
    const double e = std::exp(tf.ell * cl.log_s[0]);
    return {e, e * tf.ell * cl.log_s[1] / T};
}

Jet spatial_cutoff_jet_r(const TestFunctionSpec& tf, double r) {
    const SpatialPoint sp = spatial_cutoff_at(tf.spatial_cutoff(), argument_jet_r(tf, r), tf.ell);
    if (sp.region == CutoffRegion::Outside) return Jet::constant(0);
    return std::exp(sp.G0) * sp.chat;
}

} // namespace

double product_bilaplacian(const Jet& f, const Jet& g, int N, double r) {
    return expansion(f, radial_laplacian(f, N, r), radial_laplacian_dr(f, N, r),
                     radial_bilaplacian(f, N, r), g, N, r);
}

TestFnValues eval_testfn(const TestFunctionSpec& tf, double t, double r) {
    if (r < 1) throw DomainError("r must be at least 1");
    const EtaValues e = eta_at(tf, t);
    const Jet c = spatial_cutoff_jet_r(tf, r);
    const WeightDerivs w = weight_derivs(tf.weight(), r);
    TestFnValues v;
    v.value = e.eta * w.jet[0] * c[0];
    v.dt = e.deta * w.jet[0] * c[0];
    v.bilaplacian = e.eta * expansion(w.jet, w.lap, w.dlap, 0.0, c, tf.N, r);
    return v;
}

double testfn_bilaplacian_direct(const TestFunctionSpec& tf, double t, double r) {
    const EtaValues e = eta_at(tf, t);
    const Jet c = spatial_cutoff_jet_r(tf, r);
    return e.eta * radial_bilaplacian(tf.weight().jet(r) * c, tf.N, r);
}

std::string to_string(LemmaIntegral w) {
    switch (w) {
    case LemmaIntegral::TimeFactor: return "time";
    case LemmaIntegral::BilapFactor: return "bilap";
    case LemmaIntegral::ForcingFactor: return "forcing";
    case LemmaIntegral::Mass: return "mass";
    }
    return "?";
}

double lemma_log_integral(const TestFunctionSpec& tf, LemmaIntegral which) {
    tf.validate();
    const double pc = tf.p_conj();
    const CutoffSpec z = tf.time_cutoff();
    switch (which) {
    case LemmaIntegral::Mass: return log_spatial_mass(tf);
    case LemmaIntegral::TimeFactor:
        if (!(tf.ell > pc)) throw DomainError("time factor needs ell > p'");
        return (1 - pc) * tf.log_T + log_time_window(z, tf.ell, pc) + log_spatial_mass(tf);
    case LemmaIntegral::BilapFactor:
        if (!(tf.ell > 4 * pc)) throw DomainError("bilaplacian factor needs ell > 4p'");
        return tf.log_T + log_time_mass(z, tf.ell) + log_spatial_bilap(tf);
    case LemmaIntegral::ForcingFactor:
        throw DomainError("forcing factor needs a forcing; use lemma_forcing_check");
    }
    return kNegInf;
}

double lemma_integral(const TestFunctionSpec& tf, LemmaIntegral which) {
    return std::exp(lemma_log_integral(tf, which));
}

double time_factor_integral(const TestFunctionSpec& tf) {
    tf.validate();
    const double T = tf.T();
    const double pc = tf.p_conj();
    const CutoffSpec z = tf.time_cutoff();
    auto g = [&](double t) {
        const CutoffLog cl = eval_cutoff_log(z, t / T);
        if (cl.region != CutoffRegion::Active) return 0.0;
        const double G = tf.ell * cl.log_s[0];
        const double dG = tf.ell * cl.log_s[1] / T;
        return std::exp(G) * std::pow(std::abs(dG), pc);
    };
    QuadratureOptions opt;
    opt.rel_tol = 1e-12;
    opt.abs_floor = 0;
    return simpson(g, z.window_lo() * T, T, opt);
}

ForcingReduction lemma_forcing_check(const TestFunctionSpec& tf, const std::function<double(double)>& f) {
    tf.validate();
    const double T = tf.T();
    const WeightA W = tf.weight();
    const double hi = tf.spatial_support();
    auto space = [&](double r) { return f(r) * W(r) * spatial_cutoff_jet_r(tf, r)[0]; };
    ForcingReduction fr;
    fr.spatial = dyadic_annulus(tf.N, space, 1.0, hi);
    const CutoffSpec z = tf.time_cutoff();
    auto outer = [&](double t) {
        const double e = eta_at(tf, t).eta;
        if (e == 0) return 0.0;
        return e * dyadic_annulus(tf.N, space, 1.0, hi);
    };
    QuadratureOptions opt;
    opt.rel_tol = 1e-10;
    fr.direct = simpson(outer, 0, z.window_lo() * T, opt) + simpson(outer, z.window_lo() * T, T, opt);
    fr.separated = T * std::exp(log_time_mass(z, tf.ell)) * fr.spatial;
    fr.rel_err = std::abs(fr.direct - fr.separated) / std::abs(fr.separated);
    return fr;
}

std::vector<double> standard_ladder() { return {3, 3.5, 4, 4.5, 5}; }
std::vector<double> logarithmic_ladder() { return {4000, 4000.3, 4000.6, 4000.9, 4001.2}; }

std::vector<LemmaCheck> lemma_catalog(int N, double p) {
    const Exponents ex = compute_exponents(p, N);
    const double pc = ex.p_conj;
    std::vector<LemmaCheck> out;
    auto add = [&](const std::string& id, Family f, Argument a, LemmaIntegral w, double pred,
                   double logp, bool sqrt_log = false) {
        LemmaCheck c;
        c.id = id;
        c.family = f;
        c.argument = a;
        c.which = w;
        c.N = N;
        c.p = p;
        c.predicted_exponent = pred;
        c.log_power = logp;
        c.log_of_sqrt = sqrt_log;
        c.log10_R = a == Argument::Standard ? standard_ladder() : logarithmic_ladder();
        out.push_back(c);
        return &out.back();
    };
    const auto S = Argument::Standard;
    const auto L = Argument::Logarithmic;
    const auto TF = LemmaIntegral::TimeFactor;
    const auto BF = LemmaIntegral::BilapFactor;

    if (N == 2) {
        add("phi1-time", Family::Phi1, S, TF, 2, 1);
        add("phi1-bilap", Family::Phi1, S, BF, -2 * (p + 1) / (p - 1), p / (p - 1));
        add("phi2-time", Family::Phi2, S, TF, 4, 1);
        add("phi2-bilap", Family::Phi2, S, BF, -2 / (p - 1), p / (p - 1));
    } else {
        add("phi1-time", Family::Phi1, S, TF, N, 0);
        add("phi1-bilap", Family::Phi1, S, BF, N - 4 * pc, 0);
        if (N == 4) {
            add("phi2-time", Family::Phi2, S, TF, 4, 1);
            add("phi2-bilap", Family::Phi2, S, BF, -4 / (p - 1), p / (p - 1));
        } else {
            add("phi2-time", Family::Phi2, S, TF, N, 0);
            add("phi2-bilap", Family::Phi2, S, BF, N - 4 * pc, 0);
        }
    }
    add("phi3-time", Family::Phi3, S, TF, N, 0);
    add("phi3-bilap", Family::Phi3, S, BF, N - 4 * pc, 0);
    add("forcing-reduction", Family::Phi1, S, LemmaIntegral::ForcingFactor, 0, 0);
    {
        LemmaCheck* m = add("phi1-mass", Family::Phi1, S, LemmaIntegral::Mass, N, N == 2 ? 1 : 0);
        m->tolerance = 0.1;
    }
    if (N == 3 && p == 2) {
        LemmaCheck* s = add("phi3-bilap-shifted", Family::Phi3, S, BF, N - 4 * pc, 0);
        s->shift = 0.1;
    }
    if (N >= 5 && std::abs(p - ex.p_crit.value()) < 1e-12) {
        add("phi1-log-time", Family::Phi1, L, TF, N, 0);
        add("phi1-log-bilap", Family::Phi1, L, BF, 0, -N / 4.0);
        add("phi2-log-time", Family::Phi2, L, TF, N, 0);
        add("phi2-log-bilap", Family::Phi2, L, BF, 2, -N / 4.0);
        add("phi3-log-time", Family::Phi3, L, TF, N, 0);
        add("phi3-log-bilap", Family::Phi3, L, BF, 0, 1 - N / 4.0, true);
    }
    return out;
}

LemmaCheck verify_lemma(LemmaCheck c, const std::vector<double>& log10_R) {
    c.log10_R = log10_R;
    return verify_lemma(std::move(c));
}

LemmaCheck verify_lemma(LemmaCheck c) {
    if (c.log10_R.size() < 3) throw DomainError("lemma ladder needs at least 3 values of R");
    const auto [mn, mx] = std::minmax_element(c.log10_R.begin(), c.log10_R.end());
    if (*mx - *mn < 1.2 - 1e-12) throw DomainError("lemma ladder must span at least 1.2 decades of R");
    const double pc = c.p / (c.p - 1);
    if (c.argument == Argument::Logarithmic) {
        if (c.N < 5) throw DomainError("logarithmic lemmas need N >= 5");
        if (std::abs(c.p - c.N / (c.N - 4.0)) > 1e-12)
            throw DomainError("logarithmic lemmas need p = N/(N-4)");
    }
    if (c.ell == 0) c.ell = default_ell(c.p);
    if (c.which == LemmaIntegral::TimeFactor && !(c.ell > pc)) {
        const int raised = static_cast<int>(std::floor(pc)) + 1;
        c.note = "ell raised from " + std::to_string(c.ell) + " to " + std::to_string(raised);
        c.ell = raised;
    }
    if (c.which == LemmaIntegral::BilapFactor && !(c.ell > 4 * pc))
        throw DomainError("bilaplacian lemmas need ell > 4p'");

    const double ln10 = std::log(10.0);
    std::vector<std::future<std::pair<double, double>>> jobs;
    for (double l10 : c.log10_R) {
        jobs.push_back(std::async(std::launch::async, [c, l10, ln10]() {
            TestFunctionSpec tf = TestFunctionSpec::make_log(c.family, c.argument, c.N, c.p, l10 * ln10, c.j, c.ell);
            tf.profile_shift = c.shift;
            const double pcc = tf.p_conj();
            if (c.which == LemmaIntegral::ForcingFactor) {
                const ForcingReduction fr = lemma_forcing_check(tf, [](double r) { return std::exp(-r); });
                return std::make_pair(std::log(fr.direct) - tf.log_T, fr.rel_err);
            }
            const double tpow = c.which == LemmaIntegral::TimeFactor ? 1 - pcc
                              : c.which == LemmaIntegral::BilapFactor ? 1.0 : 0.0;
            return std::make_pair(lemma_log_integral(tf, c.which) - tpow * tf.log_T, 0.0);
        }));
    }
    c.log_measured.clear();
    c.max_rel_err = 0;
    for (auto& j : jobs) {
        const auto [lm, err] = j.get();
        c.log_measured.push_back(lm);
        c.max_rel_err = std::max(c.max_rel_err, err);
    }
    std::vector<double> x, y, dev;
    for (std::size_t i = 0; i < c.log10_R.size(); ++i) {
        const double lnR = c.log10_R[i] * ln10;
        x.push_back(lnR);
        const double yi = c.log_measured[i] - c.log_power * ln_log_factor(c, lnR);
        y.push_back(yi);
        dev.push_back(yi - c.predicted_exponent * lnR);
    }
    c.fit = fit_line(x, y);
    c.fitted = c.fit.slope;
    const auto [dmn, dmx] = std::minmax_element(dev.begin(), dev.end());
    c.ratio_spread = std::exp(*dmx - *dmn);
    const bool finite = std::all_of(c.log_measured.begin(), c.log_measured.end(),
                                    [](double v) { return std::isfinite(v); });
    c.verdict = finite && std::abs(c.fitted - c.predicted_exponent) <= c.tolerance && c.ratio_spread <= 3;
    if (c.which == LemmaIntegral::ForcingFactor) c.verdict = c.verdict && c.max_rel_err <= 1e-8;
    c.bound_holds = finite && c.fitted <= c.predicted_exponent + c.tolerance;
    return c;
}

std::string format_log10(double v) {
    std::ostringstream os;
    if (!std::isfinite(v)) {
        os << (v > 0 ? "inf" : "0");
    } else if (std::abs(v) < 300) {
        os << std::setprecision(10) << std::pow(10.0, v);
    } else {
        const double e = std::floor(v);
        os << std::setprecision(10) << std::pow(10.0, v - e) << "e" << static_cast<long long>(e);
    }
    return os.str();
}

std::string lemma_csv_header() {
    return "lemma_id,N,p,ell,j,R,measured,predicted_exponent,fitted,verdict,bound_holds";
}

std::vector<std::string> lemma_csv_rows(const LemmaCheck& c) {
    std::vector<std::string> rows;
    const double ln10 = std::log(10.0);
    for (std::size_t i = 0; i < c.log10_R.size(); ++i) {
        std::ostringstream os;
        os << c.id << ',' << c.N << ',' << c.p << ',' << c.ell << ',' << c.j << ','
           << format_log10(c.log10_R[i]) << ',' << format_log10(c.log_measured[i] / ln10) << ','
           << std::setprecision(10) << c.predicted_exponent << ',' << c.fitted << ','
           << (c.verdict ? "PASS" : "FAIL") << ',' << (c.bound_holds ? "true" : "false");
        rows.push_back(os.str());
    }
    return rows;
}

namespace {

struct LifespanPoint2 {
    CutoffRegion region;
    double G0 = kNegInf;   // 4p' ln phi
    double Gs = 0;         // d/ds of 4p' ln phi
    Jet chat;              // psi / e^{G0} as a jet in r
};

LifespanPoint2 lifespan_eval(const LifespanCutoff& lc, double t, double r) {
    const double R = lc.R;
    const double x = r - 1;
    const Jet s{{(x * x * x * x + t) / R, 4 * x * x * x / R, 12 * x * x / R, 24 * x / R, 24 / R}};
    const CutoffSpec z{CutoffKind::Zeta, 1, lc.shift};
    const CutoffLog cl = eval_cutoff_log(z, s[0]);
    LifespanPoint2 lp;
    lp.region = cl.region;
    const double k = 4 * lc.p_conj();
    if (cl.region == CutoffRegion::Plateau) {
        lp.G0 = 0;
        lp.chat = Jet::constant(1);
    } else if (cl.region == CutoffRegion::Active) {
        Jet G = k * compose(jet_array(cl.log_s), s);
        lp.G0 = G[0];
        lp.Gs = k * cl.log_s[1];
        G[0] = 0;
        lp.chat = exp(G);
    }
    return lp;
}

} // namespace

double LifespanCutoff::psi(double t, double r) const {
    const auto lp = lifespan_eval(*this, t, r);
    return lp.region == CutoffRegion::Outside ? 0.0 : std::exp(lp.G0);
}

double LifespanCutoff::psi_star(double t, double r) const {
    const auto lp = lifespan_eval(*this, t, r);
    return lp.region == CutoffRegion::Active ? std::exp(lp.G0) : 0.0;
}

double LifespanCutoff::psi_t(double t, double r) const {
    const auto lp = lifespan_eval(*this, t, r);
    return lp.region == CutoffRegion::Active ? std::exp(lp.G0) * lp.Gs / R : 0.0;
}

double LifespanCutoff::psi_bilaplacian(double t, double r) const {
    const auto lp = lifespan_eval(*this, t, r);
    if (lp.region == CutoffRegion::Outside) return 0.0;
    return std::exp(lp.G0) * radial_bilaplacian(lp.chat, N, r);
}

double LifespanCutoff::ratio_t(double t, double r) const {
    const auto lp = lifespan_eval(*this, t, r);
    if (lp.region != CutoffRegion::Active) return std::numeric_limits<double>::quiet_NaN();
    return std::abs(lp.Gs) * std::exp(lp.G0 / p_conj());
}

double LifespanCutoff::ratio_bilap(double t, double r) const {
    const auto lp = lifespan_eval(*this, t, r);
    if (lp.region != CutoffRegion::Active) return std::numeric_limits<double>::quiet_NaN();
    return R * std::abs(radial_bilaplacian(lp.chat, N, r)) * std::exp(lp.G0 / p_conj());
}

LifespanCutoffReport verify_lifespan_cutoff_bounds(int N, double p, const std::vector<double>& R_ladder,
                                                   int samples, unsigned seed) {
    if (!(p > 1)) throw DomainError("p must exceed 1");
    if (R_ladder.size() < 2) throw DomainError("lifespan cutoff ladder needs at least two values");
    LifespanCutoffReport rep;
    std::mt19937 gen(seed);
    std::uniform_real_distribution<double> uu(0.5, 1.0), ua(0.0, 1.0);
    std::vector<double> lx, lt, lb;
    for (double R : R_ladder) {
        const LifespanCutoff lc{R, p, N, 0};
        LifespanCutoffRow row;
        row.R = R;
        for (int k = 0; k < samples; ++k) {
            const double u = uu(gen), a = ua(gen);
            const double r = 1 + std::pow(a * u * R, 0.25);
            const double t = (1 - a) * u * R;
            const double rt = lc.ratio_t(t, r), rb = lc.ratio_bilap(t, r);
            if (std::isnan(rt)) continue;
            row.sup_t = std::max(row.sup_t, rt);
            row.sup_bilap = std::max(row.sup_bilap, rb);
            ++row.samples;
        }
        std::uniform_real_distribution<double> ur(1.0, 1 + 1.2 * std::pow(R, 0.25)), ut(0.0, 1.2 * R);
        for (int k = 0; k < 10000; ++k) {
            const double r = ur(gen), t = ut(gen);
            ++rep.star_checks;
            if (lc.psi_star(t, r) > lc.psi(t, r)) ++rep.star_violations;
        }
        rep.rows.push_back(row);
        lx.push_back(std::log(R));
        lt.push_back(std::log(row.sup_t));
        lb.push_back(std::log(row.sup_bilap));
    }
    rep.slope_t = fit_line(lx, lt).slope;
    rep.slope_bilap = fit_line(lx, lb).slope;
    rep.pass = std::abs(rep.slope_t) <= 0.1 && std::abs(rep.slope_bilap) <= 0.1 && rep.star_violations == 0;
    return rep;
}

double ikeda_bound(double theta, double C0, double R1, double delta, double p) {
    if (!(delta > 0)) throw DomainError("delta must be positive");
    if (!(C0 > 0)) throw DomainError("C0 must be positive");
    if (!(R1 > 0)) throw DomainError("R1 must be positive");
    if (!(p > 1)) throw DomainError("p must exceed 1");
    if (!(theta >= 0)) throw DomainError("theta must be non-negative");
    if (theta == 0)
        return std::exp(std::log(R1) + std::log(2.0) / (p - 1) * std::pow(C0, p) * std::pow(delta, -(p - 1)));
    const double e = (p - 1) * theta;
    return std::pow(std::pow(R1, e) + std::log(2.0) * std::pow(C0, p) * theta * std::pow(delta, -(p - 1)), 1 / e);
}

} // namespace biharm
