#pragma once

#include <functional>

// Sixth-order central differences in long double. Test oracles only.
namespace fd {

using Fn = std::function<long double(long double)>;

inline long double d1(const Fn& f, long double x, long double h) {
    return (-f(x - 3 * h) / 60 + 3 * f(x - 2 * h) / 20 - 3 * f(x - h) / 4 + 3 * f(x + h) / 4 -
            3 * f(x + 2 * h) / 20 + f(x + 3 * h) / 60) /
           h;
}

inline long double d2(const Fn& f, long double x, long double h) {
    return (f(x - 3 * h) / 90 - 3 * f(x - 2 * h) / 20 + 3 * f(x - h) / 2 - 49 * f(x) / 18 +
            3 * f(x + h) / 2 - 3 * f(x + 2 * h) / 20 + f(x + 3 * h) / 90) /
           (h * h);
}

// Radial Laplacian f'' + (N-1)/r f'.
inline long double laplacian(const Fn& f, int N, long double r, long double h) {
    return d2(f, r, h) + (N - 1) / r * d1(f, r, h);
}

} // namespace fd
