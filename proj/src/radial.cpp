#include "biharm/radial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "biharm/errors.hpp"

namespace biharm {

RadialGrid::RadialGrid(int N, double R_max, int M) : N_(N), R_max_(R_max), M_(M) {
    if (N < 2) throw DomainError("grid dimension N must be at least 2");
    if (!(R_max > 1)) throw DomainError("R_max must exceed 1");
    if (M < 8) throw DomainError("grid needs M >= 8 intervals");
    h_ = (R_max - 1) / M;
}

std::vector<double> RadialGrid::nodes() const {
    std::vector<double> r(static_cast<std::size_t>(size()));
    for (int i = 0; i <= M_; ++i) r[static_cast<std::size_t>(i)] = this->r(i);
    r.back() = R_max_;
    return r;
}

RadialField::RadialField(const RadialGrid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
    if (static_cast<int>(values.size()) != grid.size())
        throw DomainError("field length does not match grid node count");
}

RadialField RadialField::sample(const RadialGrid& g, const std::function<double(double)>& f) {
    std::vector<double> v;
    v.reserve(static_cast<std::size_t>(g.size()));
    for (double r : g.nodes()) v.push_back(f(r));
    return RadialField(g, std::move(v));
}

std::array<double, 3> laplacian_stencil(const RadialGrid& grid, int i) {
    const double h = grid.h();
    const double r = grid.r(i);
    const double a = (grid.N() - 1) / (2 * h * r);
    return {1 / (h * h) - a, -2 / (h * h), 1 / (h * h) + a};
}

RadialField radial_laplacian(const RadialGrid& grid, const RadialField& field) {
    if (!(field.grid == grid)) throw DomainError("field lives on a different grid");
    std::vector<double> out(field.values.size(), std::numeric_limits<double>::quiet_NaN());
    for (int i = 1; i < grid.M(); ++i) {
        const auto s = laplacian_stencil(grid, i);
        out[static_cast<std::size_t>(i)] = s[0] * field[i - 1] + s[1] * field[i] + s[2] * field[i + 1];
    }
    return RadialField(grid, std::move(out));
}

std::vector<double> extend_with_ghosts(const RadialField& u, const Closure& c,
                                       const BoundaryData& data) {
    if (!c.assembled) throw DomainError("closure missing: ghost relations not assembled");
    const int M = u.grid.M();
    std::vector<double> e(static_cast<std::size_t>(M + 5));
    for (int i = 0; i <= M; ++i) e[static_cast<std::size_t>(i + 2)] = u[i];
    if (c.inner_fixed) e[2] = data.inner[static_cast<std::size_t>(c.inner_fixed_data)];
    if (c.outer_fixed) e[static_cast<std::size_t>(M + 2)] = data.outer[static_cast<std::size_t>(c.outer_fixed_data)];
    auto eval = [&](const GhostRelation& g, const std::array<double, 2>& d) {
        double s = g.data_coeff[0] * d[0] + g.data_coeff[1] * d[1];
        for (const auto& [idx, w] : g.terms) s += w * e[static_cast<std::size_t>(idx + 2)];
        return s;
    };
    e[1] = eval(c.inner[0], data.inner);
    e[0] = eval(c.inner[1], data.inner);
    e[static_cast<std::size_t>(M + 3)] = eval(c.outer[0], data.outer);
    e[static_cast<std::size_t>(M + 4)] = eval(c.outer[1], data.outer);
    return e;
}

RadialField radial_bilaplacian(const RadialGrid& grid, const RadialField& field,
                               const Closure* closure, const BoundaryData& data) {
    if (closure == nullptr || !closure->assembled)
        throw DomainError("radial_bilaplacian needs an assembled closure");
    if (!(field.grid == grid)) throw DomainError("field lives on a different grid");
    const int M = grid.M();
    const auto e = extend_with_ghosts(field, *closure, data);
    // v at indices -1..M+1 (shifted by 1)
    std::vector<double> v(static_cast<std::size_t>(M + 3));
    for (int i = -1; i <= M + 1; ++i) {
        const auto s = laplacian_stencil(grid, i);
        const auto k = static_cast<std::size_t>(i + 2);
        v[static_cast<std::size_t>(i + 1)] = s[0] * e[k - 1] + s[1] * e[k] + s[2] * e[k + 1];
    }
    std::vector<double> w(static_cast<std::size_t>(M + 1));
    for (int i = 0; i <= M; ++i) {
        const auto s = laplacian_stencil(grid, i);
        const auto k = static_cast<std::size_t>(i + 1);
        w[static_cast<std::size_t>(i)] = s[0] * v[k - 1] + s[1] * v[k] + s[2] * v[k + 1];
    }
    return RadialField(grid, std::move(w));
}

double sphere_area(int N) {
    return 2 * std::pow(std::numbers::pi, N / 2.0) / std::tgamma(N / 2.0);
}

namespace {

double checked(const std::function<double(double)>& f, double x) {
    const double y = f(x);
    if (!std::isfinite(y)) {
        std::ostringstream os;
        os.precision(17);
        os << "non-finite integrand value " << y << " at r = " << x;
        throw IntegrationError(os.str());
    }
    return y;
}

} // namespace

double simpson(const std::function<double(double)>& f, double a, double b,
               const QuadratureOptions& opt) {
    if (!(b > a)) throw DomainError("integration interval is empty");
    int n = std::max(2, opt.initial_panels + opt.initial_panels % 2);
    const double ends = checked(f, a) + checked(f, b);
    double interior_even = 0;  // sum over nodes shared with the coarser level
    double odd = 0;
    {
        const double H = (b - a) / n;
        for (int i = 1; i < n; ++i) {
            const double y = checked(f, a + i * H);
            (i % 2 ? odd : interior_even) += y;
        }
    }
    double prev = (b - a) / n / 3 * (ends + 4 * odd + 2 * interior_even);
    for (int level = 0; level < opt.max_doublings; ++level) {
        interior_even += odd;
        odd = 0;
        n *= 2;
        const double H = (b - a) / n;
        for (int i = 1; i < n; i += 2) odd += checked(f, a + i * H);
        const double cur = H / 3 * (ends + 4 * odd + 2 * interior_even);
        if (std::abs(cur - prev) <= std::max(opt.rel_tol * std::abs(cur), opt.abs_floor)) return cur;
        prev = cur;
    }
    std::ostringstream os;
    os << "Simpson doubling did not reach rel_tol " << opt.rel_tol << " on [" << a << ", " << b << "]";
    throw IntegrationError(os.str());
}

double annulus_quadrature(int N, const std::function<double(double)>& g, double r_lo,
                          double r_hi, const QuadratureOptions& opt) {
    if (!(r_lo >= 1)) throw DomainError("annulus lower radius must be >= 1");
    if (!(r_hi > r_lo)) throw DomainError("annulus needs r_hi > r_lo");
    const double w = sphere_area(N);
    return w * simpson([&](double r) { return checked(g, r) * std::pow(r, N - 1); }, r_lo, r_hi, opt);
}

namespace {

// Running sum of weighted exponentials sum_i w_i exp(l_i), kept scaled.
struct LogAccumulator {
    double m = -std::numeric_limits<double>::infinity();
    double s = 0;

    void add(double l, double w) {
        if (l == -std::numeric_limits<double>::infinity()) return;
        if (std::isnan(l) || l == std::numeric_limits<double>::infinity()) {
            std::ostringstream os;
            os << "non-finite log-integrand value " << l;
            throw IntegrationError(os.str());
        }
        if (l > m) {
            s = s * std::exp(m - l) + w;
            m = l;
        } else {
            s += w * std::exp(l - m);
        }
    }
    void merge(const LogAccumulator& o, double w) {
        if (o.s == 0) return;
        add(o.m + std::log(o.s), w);
    }
    double log_value(double extra_log) const {
        if (s <= 0) return -std::numeric_limits<double>::infinity();
        return m + std::log(s) + extra_log;
    }
};

double checked_log(const std::function<double(double)>& lf, double x) {
    const double y = lf(x);
    if (std::isnan(y) || y == std::numeric_limits<double>::infinity()) {
        std::ostringstream os;
        os.precision(17);
        os << "non-finite log-integrand value " << y << " at x = " << x;
        throw IntegrationError(os.str());
    }
    return y;
}

} // namespace

double log_simpson(const std::function<double(double)>& lf, double a, double b,
                   const QuadratureOptions& opt) {
    if (!(b > a)) throw DomainError("integration interval is empty");
    int n = std::max(2, opt.initial_panels + opt.initial_panels % 2);
    LogAccumulator ends, even, odd;
    ends.add(checked_log(lf, a), 1);
    ends.add(checked_log(lf, b), 1);
    {
        const double H = (b - a) / n;
        for (int i = 1; i < n; ++i) (i % 2 ? odd : even).add(checked_log(lf, a + i * H), 1);
    }
    auto combine = [&](double H) {
        LogAccumulator t;
        t.merge(ends, 1);
        t.merge(odd, 4);
        t.merge(even, 2);
        return t.log_value(std::log(H / 3));
    };
    double prev = combine((b - a) / n);
    for (int level = 0; level < opt.max_doublings; ++level) {
        even.merge(odd, 1);
        odd = LogAccumulator{};
        n *= 2;
        const double H = (b - a) / n;
        for (int i = 1; i < n; i += 2) odd.add(checked_log(lf, a + i * H), 1);
        const double cur = combine(H);
        if (cur == -std::numeric_limits<double>::infinity() &&
            prev == -std::numeric_limits<double>::infinity())
            return cur;
        if (std::abs(cur - prev) <= opt.rel_tol) return cur;
        prev = cur;
    }
    std::ostringstream os;
    os << "log-space Simpson doubling did not converge on [" << a << ", " << b << "]";
    throw IntegrationError(os.str());
}

FitResult fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("fit needs at least two points");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0) throw DomainError("fit abscissae are all equal");
    FitResult f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double res = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += res * res;
        f.residual_max = std::max(f.residual_max, std::abs(res));
    }
    f.r_squared = syy > 0 ? std::clamp(1 - ss_res / syy, 0.0, 1.0) : 1.0;
    f.points_used = x.size();
    return f;
}

FitResult fit_power_law(const std::vector<std::pair<double, double>>& points) {
    std::vector<double> lx, ly;
    for (const auto& [x, y] : points) {
        if (!(x > 0) || !(y > 0)) throw DomainError("power-law fit needs positive x and y");
        lx.push_back(std::log(x));
        ly.push_back(std::log(y));
    }
    return fit_line(lx, ly);
}

bool fit_ladder_ok(const std::vector<double>& x, std::size_t min_points, double min_decades) {
    if (x.size() < min_points) return false;
    const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
    return *lo > 0 && std::log10(*hi / *lo) >= min_decades - 1e-12;
}

} // namespace biharm
