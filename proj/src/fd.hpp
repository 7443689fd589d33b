#pragma once

// Grid finite-difference stencils shared by projections and geometry.

#include <algorithm>
#include <array>
#include <cmath>
#include <type_traits>
#include <vector>

#include "cgc/dalembert.hpp"
#include "cgc/matrix2.hpp"

namespace cgc::fd {

template <class T>
T scaled(const T& x, double s) {
    if constexpr (std::is_same_v<T, double>) {
        return x * s;
    } else {
        return s * x;
    }
}

/// First derivative along u (alongU) or v: central inside, second-order one-sided at the ends.
template <class T>
T first(const std::vector<T>& x, const GridSpec& g, int i, int j, bool alongU) {
    const int n = alongU ? g.nU : g.nV;
    const int k = alongU ? i : j;
    const double h = alongU ? g.hu() : g.hv();
    auto at = [&](int m) -> const T& { return alongU ? x[g.index(m, j)] : x[g.index(i, m)]; };
    if (n == 2) return scaled(at(1) - at(0), 1.0 / h);
    if (k == 0) return scaled(scaled(at(1), 4.0) - scaled(at(0), 3.0) - at(2), 0.5 / h);
    if (k == n - 1) return scaled(scaled(at(n - 1), 3.0) - scaled(at(n - 2), 4.0) + at(n - 3), 0.5 / h);
    return scaled(at(k + 1) - at(k - 1), 0.5 / h);
}

/// Second derivative along one axis: central inside, second-order one-sided at the ends (needs n >= 4).
template <class T>
T second(const std::vector<T>& x, const GridSpec& g, int i, int j, bool alongU) {
    const int n = alongU ? g.nU : g.nV;
    const int k = alongU ? i : j;
    const double h = alongU ? g.hu() : g.hv();
    auto at = [&](int m) -> const T& { return alongU ? x[g.index(m, j)] : x[g.index(i, m)]; };
    const double s = 1.0 / (h * h);
    if (n < 3) return scaled(at(0) - at(0), 0.0);
    if (n == 3 || (k > 0 && k < n - 1)) {
        const int c = std::clamp(k, 1, n - 2);
        return scaled(at(c + 1) - scaled(at(c), 2.0) + at(c - 1), s);
    }
    if (k == 0) return scaled(scaled(at(0), 2.0) - scaled(at(1), 5.0) + scaled(at(2), 4.0) - at(3), s);
    return scaled(scaled(at(n - 1), 2.0) - scaled(at(n - 2), 5.0) + scaled(at(n - 3), 4.0) - at(n - 4), s);
}

/// Whole-grid first derivative field.
template <class T>
std::vector<T> field(const std::vector<T>& x, const GridSpec& g, bool alongU) {
    std::vector<T> out(x.size());
    for (int i = 0; i < g.nU; ++i)
        for (int j = 0; j < g.nV; ++j) out[g.index(i, j)] = first(x, g, i, j, alongU);
    return out;
}

/// Determinant of the 4x4 matrix with columns a, b, c, d.
inline double det4(const Vec4& a, const Vec4& b, const Vec4& c, const Vec4& d) {
    auto m3 = [](double a1, double a2, double a3, double b1, double b2, double b3, double c1, double c2, double c3) {
        return a1 * (b2 * c3 - b3 * c2) - a2 * (b1 * c3 - b3 * c1) + a3 * (b1 * c2 - b2 * c1);
    };
    return a[0] * m3(b[1], b[2], b[3], c[1], c[2], c[3], d[1], d[2], d[3]) -
           b[0] * m3(a[1], a[2], a[3], c[1], c[2], c[3], d[1], d[2], d[3]) +
           c[0] * m3(a[1], a[2], a[3], b[1], b[2], b[3], d[1], d[2], d[3]) -
           d[0] * m3(a[1], a[2], a[3], b[1], b[2], b[3], c[1], c[2], c[3]);
}

/// Vector n with <n, x> = det(a, b, c, x): orthogonal to a, b, c.
inline Vec4 cross4(const Vec4& a, const Vec4& b, const Vec4& c) {
    Vec4 n{};
    for (int k = 0; k < 4; ++k) {
        Vec4 e{};
        e[static_cast<std::size_t>(k)] = 1.0;
        n[static_cast<std::size_t>(k)] = det4(a, b, c, e);
    }
    return n;
}

}  // namespace cgc::fd
