#pragma once

// Truncated Taylor jets carrying a function value and its first four
// derivatives with respect to one variable. Products use Leibniz, composition
// uses Faa di Bruno up to fourth order.

#include <array>
#include <cmath>

namespace biharm {

struct Jet {
    std::array<double, 5> d{};  // d[k] = k-th derivative

    static Jet constant(double c) { return Jet{{c, 0, 0, 0, 0}}; }
    static Jet variable(double x) { return Jet{{x, 1, 0, 0, 0}}; }

    double operator[](int k) const { return d[static_cast<std::size_t>(k)]; }
    double& operator[](int k) { return d[static_cast<std::size_t>(k)]; }
};

inline Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k < 5; ++k) r[k] = a[k] + b[k];
    return r;
}

inline Jet operator-(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k < 5; ++k) r[k] = a[k] - b[k];
    return r;
}

inline Jet operator*(double s, const Jet& a) {
    Jet r;
    for (int k = 0; k < 5; ++k) r[k] = s * a[k];
    return r;
}

inline Jet operator*(const Jet& f, const Jet& g) {
    Jet h;
    h[0] = f[0] * g[0];
    h[1] = f[1] * g[0] + f[0] * g[1];
    h[2] = f[2] * g[0] + 2 * f[1] * g[1] + f[0] * g[2];
    h[3] = f[3] * g[0] + 3 * f[2] * g[1] + 3 * f[1] * g[2] + f[0] * g[3];
    h[4] = f[4] * g[0] + 4 * f[3] * g[1] + 6 * f[2] * g[2] + 4 * f[1] * g[3] +
           f[0] * g[4];
    return h;
}

// Composition F(g) where fo[k] is the k-th derivative of F at g[0].
inline Jet compose(const std::array<double, 5>& fo, const Jet& g) {
    const double g1 = g[1], g2 = g[2], g3 = g[3], g4 = g[4];
    Jet h;
    h[0] = fo[0];
    h[1] = fo[1] * g1;
    h[2] = fo[1] * g2 + fo[2] * g1 * g1;
    h[3] = fo[1] * g3 + 3 * fo[2] * g1 * g2 + fo[3] * g1 * g1 * g1;
    h[4] = fo[1] * g4 + fo[2] * (4 * g1 * g3 + 3 * g2 * g2) +
           6 * fo[3] * g1 * g1 * g2 + fo[4] * g1 * g1 * g1 * g1;
    return h;
}

inline Jet exp(const Jet& g) {
    const double e = std::exp(g[0]);
    return compose({e, e, e, e, e}, g);
}

inline Jet log(const Jet& g) {
    const double x = g[0];
    return compose({std::log(x), 1 / x, -1 / (x * x), 2 / (x * x * x),
                    -6 / (x * x * x * x)},
                   g);
}

inline Jet inv(const Jet& g) {
    const double x = g[0];
    const double i = 1 / x;
    return compose({i, -i * i, 2 * i * i * i, -6 * i * i * i * i,
                    24 * i * i * i * i * i},
                   g);
}

// ln(1 + e^u), stable for large |u|.
inline Jet softplus(const Jet& g) {
    const double u = g[0];
    const double sp = u > 0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
    const double s = u > 0 ? 1 / (1 + std::exp(-u)) : std::exp(u) / (1 + std::exp(u));
    const double q = s * (1 - s);
    return compose({sp, s, q, q * (1 - 2 * s), q * (1 - 6 * s + 6 * s * s)}, g);
}

inline Jet pow(const Jet& g, double a) {
    const double x = g[0];
    std::array<double, 5> fo{};
    double c = 1;
    for (int k = 0; k < 5; ++k) {
        fo[static_cast<std::size_t>(k)] = c * std::pow(x, a - k);
        c *= (a - k);
    }
    return compose(fo, g);
}

// Radial Laplacian f'' + (N-1)/r f' from a jet in r.
inline double radial_laplacian(const Jet& f, int N, double r) {
    return f[2] + (N - 1) / r * f[1];
}

// d/dr of the radial Laplacian.
inline double radial_laplacian_dr(const Jet& f, int N, double r) {
    return f[3] + (N - 1) / r * f[2] - (N - 1) / (r * r) * f[1];
}

// Radial bilaplacian from the raw derivatives of f.
inline double radial_bilaplacian(const Jet& f, int N, double r) {
    const double a = N - 1;
    const double b = (N - 1.0) * (N - 3.0);
    return f[4] + 2 * a / r * f[3] + b / (r * r) * f[2] - b / (r * r * r) * f[1];
}

} // namespace biharm
