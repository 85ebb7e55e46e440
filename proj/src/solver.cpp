#include "biharm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "biharm/errors.hpp"
#include "biharm/testfn.hpp"

namespace biharm {

namespace {

double sup_norm(const std::vector<double>& u) {
    double s = 0;
    for (double x : u) s = std::max(s, std::abs(x));
    return s;
}

bool all_finite(const std::vector<double>& u) {
    return std::all_of(u.begin(), u.end(), [](double x) { return std::isfinite(x); });
}

} // namespace

std::function<double(double)> make_forcing(const RadialRule& rule, double p, int N) {
    const double A = rule.amplitude;
    if (rule.kind == "zero") return [](double) { return 0.0; };
    if (rule.kind == "gaussian") {
        const double c = rule.center, w = rule.width;
        if (!(w > 0)) throw DomainError("gaussian width must be positive");
        return [=](double r) { return A * std::exp(-((r - c) / w) * ((r - c) / w)); };
    }
    if (rule.kind == "exp") return [=](double r) { return A * std::exp(-r); };
    if (rule.kind == "power") {
        const double om = rule.omega;
        return [=](double r) { return A * std::pow(r, -om); };
    }
    if (rule.kind == "supersolution") {
        const Supersolution s = make_supersolution(p, N, rule.m, rule.epsilon);
        return [=](double r) { return s.forcing(r); };
    }
    throw DomainError("unknown radial rule kind '" + rule.kind + "'");
}

std::function<double(double)> make_initial(const RadialRule& rule, double p, int N, double R_max) {
    if (rule.kind == "supersolution") {
        const Supersolution s = make_supersolution(p, N, rule.m, rule.epsilon);
        if (!(rule.taper >= 0 && rule.taper < 1)) throw DomainError("taper must lie in [0, 1)");
        if (!(rule.taper_inner >= 0)) throw DomainError("taper_inner must be non-negative");
        const double r_a = R_max - rule.taper * (R_max - 1);
        const double w = rule.taper_inner;
        if (rule.taper > 0 && w > 0 && !(1 + w < r_a)) throw DomainError("tapers overlap");
        const CutoffSpec cut{CutoffKind::F, 1, 0};
        return [=](double r) {
            double v = s.v(r);
            if (rule.taper > 0) v *= eval_cutoff(cut, (r - r_a) / (R_max - r_a), 0);
            if (w > 0) v *= eval_cutoff(cut, (1 + w - r) / w, 0);
            return v;
        };
    }
    return make_forcing(rule, p, N);
}

void ProblemSpec::validate() const {
    if (!(p > 1)) throw DomainError("p must exceed 1");
    if (N < 2) throw DomainError("N must be at least 2");
    if (!(R_max > 1)) throw DomainError("R_max must exceed 1");
    if (M < 16) throw DomainError("M must be at least 16");
    if (!(T_max > 0)) throw DomainError("T_max must be positive");
    if (!(dt_min > 0)) throw DomainError("dt_min must be positive");
    if (!(dt0 >= dt_min)) throw DomainError("dt0 must be at least dt_min");
    if (!(dt_max >= dt0)) throw DomainError("dt_max must be at least dt0");
    if (!(epsilon >= 0)) throw DomainError("epsilon must be non-negative");
    if (track_envelope && forcing.kind != "supersolution")
        throw DomainError("envelope tracking needs supersolution forcing");
    const auto u0 = make_initial(initial, p, N, R_max);
    const RadialGrid g = grid();
    double s = 0;
    for (double r : g.nodes()) s = std::max(s, std::abs(epsilon * u0(r)));
    if (!(U_blow > s)) throw DomainError("U_blow must exceed sup|u0|");
    (void)make_forcing(forcing, p, N);
}

Stepper::Stepper(const RadialGrid& grid, const Closure& closure, double p, bool nonlinearity,
                 std::vector<double> forcing, SimulationHooks hooks)
    : grid_(grid), closure_(closure), p_(p), nonlinearity_(nonlinearity), f_(std::move(forcing)),
      hooks_(std::move(hooks)) {
    if (!closure_.assembled) throw DomainError("stepper needs an assembled closure");
    const int M = grid_.M();
    i0_ = closure_.inner_fixed ? 1 : 0;
    i1_ = closure_.outer_fixed ? M - 1 : M;
    const int n = i1_ - i0_ + 1;
    affine_.assign(static_cast<std::size_t>(n), {0, 0, 0, 0});
    std::map<std::pair<int, int>, double> acc;

    std::function<void(int, int, double)> resolve = [&](int row, int k, double c) {
        if (k < 0) {
            const GhostRelation& g = closure_.inner[static_cast<std::size_t>(-k - 1)];
            affine_[static_cast<std::size_t>(row)][0] += c * g.data_coeff[0];
            affine_[static_cast<std::size_t>(row)][1] += c * g.data_coeff[1];
            for (const auto& [j, w] : g.terms) resolve(row, j, c * w);
        } else if (k > M) {
            const GhostRelation& g = closure_.outer[static_cast<std::size_t>(k - M - 1)];
            affine_[static_cast<std::size_t>(row)][2] += c * g.data_coeff[0];
            affine_[static_cast<std::size_t>(row)][3] += c * g.data_coeff[1];
            for (const auto& [j, w] : g.terms) resolve(row, j, c * w);
        } else if (k == 0 && closure_.inner_fixed) {
            affine_[static_cast<std::size_t>(row)][static_cast<std::size_t>(closure_.inner_fixed_data)] += c;
        } else if (k == M && closure_.outer_fixed) {
            affine_[static_cast<std::size_t>(row)][static_cast<std::size_t>(2 + closure_.outer_fixed_data)] += c;
        } else {
            acc[{row, k - i0_}] += c;
        }
    };

    for (int i = i0_; i <= i1_; ++i) {
        const auto si = laplacian_stencil(grid_, i);
        const auto sm = laplacian_stencil(grid_, i - 1);
        const auto sp = laplacian_stencil(grid_, i + 1);
        const double a = si[0], b = si[1], c = si[2];
        const double coef[5] = {a * sm[0], a * sm[1] + b * si[0], a * sm[2] + b * si[1] + c * sp[0],
                                b * si[2] + c * sp[1], c * sp[2]};
        for (int q = 0; q < 5; ++q) resolve(i - i0_, i - 2 + q, coef[q]);
    }
    for (const auto& [rc, v] : acc) {
        entries_.push_back({rc.first, rc.second, v});
        kl_ = std::max(kl_, rc.first - rc.second);
        ku_ = std::max(ku_, rc.second - rc.first);
    }
}

BoundaryData Stepper::data_at(double t) const {
    return hooks_.boundary_data ? hooks_.boundary_data(t) : BoundaryData{};
}

std::shared_ptr<BandedMatrix> Stepper::factor_for(double dt) {
    auto it = cache_.find(dt);
    if (it != cache_.end()) return it->second;
    const int n = i1_ - i0_ + 1;
    auto A = std::make_shared<BandedMatrix>(n, kl_, ku_);
    for (int i = 0; i < n; ++i) A->add(i, i, 1.0);
    for (const auto& e : entries_) A->add(e.row, e.col, dt * e.v);
    A->factor();
    last_rcond_ = A->rcond();
    if (cache_.size() > 64) cache_.clear();
    cache_[dt] = A;
    return A;
}

std::vector<double> Stepper::step(const std::vector<double>& u, double t, double dt) {
    if (!(dt > 0)) throw DomainError("step needs dt > 0");
    const int n = i1_ - i0_ + 1;
    const BoundaryData g = data_at(t + dt);
    std::vector<double> rhs(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
        const int i = k + i0_;
        const double ui = u[static_cast<std::size_t>(i)];
        double src = f_[static_cast<std::size_t>(i)];
        if (nonlinearity_) src += std::pow(std::abs(ui), p_);
        if (hooks_.source) src += hooks_.source(t, grid_.r(i));
        const auto& w = affine_[static_cast<std::size_t>(k)];
        const double aff = w[0] * g.inner[0] + w[1] * g.inner[1] + w[2] * g.outer[0] + w[3] * g.outer[1];
        rhs[static_cast<std::size_t>(k)] = ui + dt * (src - aff);
    }
    factor_for(dt)->solve_in_place(rhs);
    std::vector<double> out(u.size());
    for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k + i0_)] = rhs[static_cast<std::size_t>(k)];
    if (closure_.inner_fixed) out[0] = g.inner[static_cast<std::size_t>(closure_.inner_fixed_data)];
    if (closure_.outer_fixed) out.back() = g.outer[static_cast<std::size_t>(closure_.outer_fixed_data)];
    return out;
}

std::string to_string(OutcomeKind k) {
    switch (k) {
    case OutcomeKind::BlowUp: return "blowup";
    case OutcomeKind::Survived: return "survived";
    case OutcomeKind::Stationary: return "stationary";
    case OutcomeKind::NumericalFailure: return "numerical-failure";
    }
    return "?";
}

double discrete_energy(const RadialGrid& grid, const std::vector<double>& u) {
    const int N = grid.N();
    double s = 0;
    for (int i = 0; i <= grid.M(); ++i) {
        const double w = (i == 0 || i == grid.M()) ? 0.5 : 1.0;
        s += w * u[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(i)] * std::pow(grid.r(i), N - 1);
    }
    return s * grid.h();
}

SimResult simulate(const ProblemSpec& spec, const SimulationHooks& hooks) {
    spec.validate();
    const RadialGrid grid = spec.grid();
    const int N = spec.N;
    const auto fr = make_forcing(spec.forcing, spec.p, N);
    const auto u0f = make_initial(spec.initial, spec.p, N, spec.R_max);
    std::vector<double> f, u;
    for (double r : grid.nodes()) {
        f.push_back(fr(r));
        u.push_back(spec.epsilon * u0f(r));
    }

    SimResult res;
    SimOutcome& out = res.outcome;
    const Closure closure = assemble_closure(spec.bc, grid, N, ClosureOptions{spec.closure_order});
    std::optional<Stepper> stepper;
    try {
        stepper.emplace(grid, closure, spec.p, spec.nonlinearity, f, hooks);
    } catch (const SolverError& e) {
        out.kind = OutcomeKind::NumericalFailure;
        out.failure = e.what();
        return res;
    }
    // Prescribed boundary values apply from the start.
    {
        const BoundaryData g0 = stepper->data_at(0);
        if (closure.inner_fixed) u.front() = g0.inner[static_cast<std::size_t>(closure.inner_fixed_data)];
        if (closure.outer_fixed) u.back() = g0.outer[static_cast<std::size_t>(closure.outer_fixed_data)];
    }

    std::function<double(double)> envelope;
    const double env_factor = 1 + 10 * grid.h() * grid.h();
    if (spec.track_envelope) {
        const Supersolution s = make_supersolution(spec.p, N, spec.forcing.m, spec.forcing.epsilon);
        envelope = [s](double r) { return s.v(r); };
        out.envelope_tracked = true;
    }
    auto check_envelope = [&](const std::vector<double>& w) {
        if (!envelope) return;
        for (int i = 0; i <= grid.M(); ++i) {
            const double v = envelope(grid.r(i));
            const double ui = w[static_cast<std::size_t>(i)];
            out.envelope_max_ratio = std::max(out.envelope_max_ratio, ui / v);
            if (ui > v * env_factor) out.envelope_held = false;
        }
    };

    if (spec.record_history) {
        History h{grid, spec.p, spec.nonlinearity, {}, u, {0.0}, {u}};
        const auto src = hooks.source;
        h.forcing = [fr, src](double t, double r) { return fr(r) + (src ? src(t, r) : 0.0); };
        res.history = std::move(h);
    }

    double t = 0;
    double dt = spec.dt0;
    double sup = sup_norm(u);
    out.dt_min_used = std::numeric_limits<double>::infinity();
    out.energy.emplace_back(0.0, discrete_energy(grid, u));
    check_envelope(u);
    double t_check = 0;
    std::vector<double> u_check = u;
    double next_snapshot = 0;
    auto maybe_snapshot = [&](bool force) {
        if (spec.snapshot_every <= 0) return;
        if (force || t >= next_snapshot - 1e-12) {
            out.snapshots.push_back({t, u});
            next_snapshot = t + spec.snapshot_every;
        }
    };
    maybe_snapshot(true);
    int next_decade = sup > 0 ? static_cast<int>(std::floor(std::log10(sup))) + 1 : -300;

    auto finish = [&](OutcomeKind kind) {
        out.kind = kind;
        out.T_end = t;
        out.final_sup = sup;
        out.far_field = far_field_decay_check(RadialField(grid, u), 0.1);
        if (out.dt_min_used == std::numeric_limits<double>::infinity()) out.dt_min_used = 0;
        maybe_snapshot(true);
    };
    auto sign_of_sup = [&](const std::vector<double>& w) {
        std::size_t k = 0;
        for (std::size_t i = 1; i < w.size(); ++i)
            if (std::abs(w[i]) > std::abs(w[k])) k = i;
        return w[k] >= 0 ? 1 : -1;
    };

    while (t < spec.T_max * (1 - 1e-14)) {
        if (hooks.should_stop && hooks.should_stop()) {
            out.failure = "interrupted";
            finish(OutcomeKind::NumericalFailure);
            return res;
        }
        const double dt_try = std::min({dt, spec.dt_max, spec.T_max - t});
        std::vector<double> un;
        try {
            un = stepper->step(u, t, dt_try);
        } catch (const SolverError& e) {
            out.failure = e.what();
            finish(OutcomeKind::NumericalFailure);
            return res;
        }
        if (!all_finite(un)) {
            if (dt_try / 2 >= spec.dt_min) {
                dt = dt_try / 2;
                ++out.rejected;
                continue;
            }
            out.failure = "non-finite values at t = " + std::to_string(t);
            finish(OutcomeKind::NumericalFailure);
            return res;
        }
        const double sup_new = sup_norm(un);
        const double growth = sup > 1e-300 ? sup_new / sup - 1 : 0.0;
        if (growth > spec.growth_halve) {
            if (dt_try / 2 < spec.dt_min) {
                // Step size collapsed while the solution keeps growing.
                out.dt_collapse = true;
                out.T_lo = t;
                out.T_hi = t + dt_try;
                out.T_est = out.T_hi;
                out.sign_at_detection = sign_of_sup(un);
                u = std::move(un);
                t += dt_try;
                sup = sup_new;
                ++out.steps;
                finish(OutcomeKind::BlowUp);
                return res;
            }
            dt = dt_try / 2;
            ++out.rejected;
            continue;
        }
        // accept
        const double t_prev = t, sup_prev = sup;
        t += dt_try;
        u = std::move(un);
        sup = sup_new;
        ++out.steps;
        out.dt_max_used = std::max(out.dt_max_used, dt_try);
        out.dt_min_used = std::min(out.dt_min_used, dt_try);
        out.energy.emplace_back(t, discrete_energy(grid, u));
        check_envelope(u);
        if (res.history) {
            res.history->times.push_back(t);
            res.history->states.push_back(u);
        }
        maybe_snapshot(false);
        while (sup > 0 && std::log10(sup) >= next_decade && next_decade < 300) {
            out.threshold_crossings.push_back(t);
            ++next_decade;
        }

        if (sup > spec.U_blow) {
            out.T_lo = t_prev;
            out.T_hi = t;
            // log-linear interpolation of the threshold crossing
            double te = t;
            if (sup_prev > 0 && sup > sup_prev) {
                const double a = (std::log(spec.U_blow) - std::log(sup_prev)) / (std::log(sup) - std::log(sup_prev));
                te = t_prev + std::clamp(a, 0.0, 1.0) * (t - t_prev);
            }
            out.T_est = std::max(te, std::nextafter(t_prev, t));
            out.sign_at_detection = sign_of_sup(u);
            finish(OutcomeKind::BlowUp);
            return res;
        }

        if (t - t_check >= spec.stationary_delta) {
            double d = 0;
            for (std::size_t i = 0; i < u.size(); ++i) d = std::max(d, std::abs(u[i] - u_check[i]));
            const double q = d / (t - t_check);
            if (q < spec.stationary_tol) {
                out.steady_residual = q;
                finish(OutcomeKind::Stationary);
                return res;
            }
            t_check = t;
            u_check = u;
        }
        if (std::abs(growth) < spec.growth_double) dt = std::min(2 * dt_try, spec.dt_max);
        else dt = dt_try;
    }
    finish(OutcomeKind::Survived);
    return res;
}

SignResult sign_functional(const std::function<double(double)>& g, const WeightA& A,
                           const RadialGrid& grid) {
    const int N = grid.N();
    const double R = grid.R_max();
    auto integrand = [&](double r) { return g(r) * A(r); };
    QuadratureOptions opt;
    opt.initial_panels = std::max(64, grid.M());
    SignResult s;
    s.value = annulus_quadrature(N, integrand, 1.0, R, opt);

    // Tail beyond R_max from the power-law trend of the last decade.
    const double r_lo = std::max(1.0, R / 10);
    std::vector<double> lx, ly;
    bool all_zero = true;
    bool all_pos = true, all_neg = true;
    for (int k = 0; k <= 16; ++k) {
        const double r = r_lo * std::pow(R / r_lo, k / 16.0);
        const double raw = integrand(r);
        all_pos = all_pos && raw >= 0;
        all_neg = all_neg && raw <= 0;
        const double v = std::abs(raw) * std::pow(r, N - 1);
        if (v > 0) {
            all_zero = false;
            lx.push_back(std::log(r));
            ly.push_back(std::log(v));
        }
    }
    if (all_zero) {
        s.tail_bound = 0;
    } else if (lx.size() < 3) {
        s.tail_bound = std::numeric_limits<double>::infinity();
    } else {
        const FitResult fit = fit_line(lx, ly);
        const double k = fit.slope;
        if (k < -1) {
            const double last = std::exp(ly.back());
            s.tail_bound = sphere_area(N) * last * R / (-(k + 1));
        } else {
            s.tail_bound = std::numeric_limits<double>::infinity();
        }
    }
    // A tail of one sign can only reinforce a value of the same sign.
    if (s.value > 0 && all_pos) s.sign = 1;
    else if (s.value < 0 && all_neg) s.sign = -1;
    else if (s.value > s.tail_bound) s.sign = 1;
    else if (s.value < -s.tail_bound) s.sign = -1;
    else s.sign = 0;
    return s;
}

std::vector<LifespanPoint> measure_lifespan(const ProblemSpec& tmpl, const std::vector<double>& epsilons) {
    if (tmpl.forcing.kind != "zero") throw DomainError("lifespan runs need f = 0");
    const Exponents ex = tmpl.exponents();
    if (!(tmpl.p <= ex.p_fuj + 1e-12)) throw DomainError("lifespan runs need p <= p_fuj");
    const auto u0 = make_initial(tmpl.initial, tmpl.p, tmpl.N, tmpl.R_max);
    const SignResult sg = sign_functional(u0, weight_for(tmpl.bc, tmpl.N), tmpl.grid());
    bool nonzero = false;
    for (double r : tmpl.grid().nodes()) nonzero = nonzero || u0(r) != 0;
    if (!nonzero) throw DomainError("lifespan runs need u0 not identically 0");
    if (sg.value < -sg.tail_bound) throw DomainError("lifespan runs need int u0 A >= 0");

    std::vector<LifespanPoint> pts;
    for (double eps : epsilons) {
        ProblemSpec s = tmpl;
        s.epsilon = eps;
        const SimOutcome o = simulate(s).outcome;
        LifespanPoint lp{eps, o.T_est, o.T_lo, o.T_hi, o.kind == OutcomeKind::BlowUp};
        if (!lp.bracketed) lp.T_est = o.T_end;
        pts.push_back(lp);
    }
    return pts;
}

double weak_residual(const History& h, const TestFunctionSpec& tf) {
    const RadialGrid& g = h.grid;
    if (h.times.size() < 2) throw DomainError("history needs at least two time levels");
    if (tf.N != g.N()) throw DomainError("test function dimension differs from the grid");
    const double r_support = tf.spatial_support();
    if (r_support > g.R_max() * (1 + 1e-12))
        throw DomainError("test function spatial support exceeds R_max");
    if (tf.T() > h.times.back() * (1 + 1e-12))
        throw DomainError("test function temporal support exceeds the simulated horizon");

    const int N = g.N();
    const int M = g.M();
    const double w_sphere = sphere_area(N);
    std::vector<double> wr(static_cast<std::size_t>(M + 1));
    for (int i = 0; i <= M; ++i)
        wr[static_cast<std::size_t>(i)] = w_sphere * std::pow(g.r(i), N - 1) * g.h() * ((i == 0 || i == M) ? 0.5 : 1.0);

    // Spatial integrals at each stored time level, then trapezoid in time.
    auto level = [&](std::size_t n) {
        const double t = h.times[n];
        const auto& u = h.states[n];
        double s = 0;
        for (int i = 0; i <= M; ++i) {
            const double r = g.r(i);
            const TestFnValues tv = eval_testfn(tf, t, r);
            const double ui = u[static_cast<std::size_t>(i)];
            double v = h.forcing(t, r) * tv.value + ui * tv.dt - ui * tv.bilaplacian;
            if (h.nonlinearity) v += std::pow(std::abs(ui), h.p) * tv.value;
            s += wr[static_cast<std::size_t>(i)] * v;
        }
        return s;
    };
    double total = 0;
    double prev = level(0);
    for (std::size_t n = 1; n < h.times.size(); ++n) {
        if (h.times[n - 1] >= tf.T()) break;
        const double cur = level(n);
        total += 0.5 * (h.times[n] - h.times[n - 1]) * (prev + cur);
        prev = cur;
    }
    double init = 0;
    for (int i = 0; i <= M; ++i)
        init += wr[static_cast<std::size_t>(i)] * h.u0[static_cast<std::size_t>(i)] *
                eval_testfn(tf, 0.0, g.r(i)).value;
    return std::abs(total + init);
}

} // namespace biharm
