#pragma once

#include <array>
#include <cmath>
#include <complex>

namespace cgc {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;
using Vec4 = std::array<double, 4>;

/// 2x2 complex matrix [[a, b], [c, d]].
struct Matrix2 {
    cplx a{}, b{}, c{}, d{};

    constexpr Matrix2() = default;
    constexpr Matrix2(cplx a_, cplx b_, cplx c_, cplx d_) : a(a_), b(b_), c(c_), d(d_) {}

    static constexpr Matrix2 identity() { return {1.0, 0.0, 0.0, 1.0}; }
    static constexpr Matrix2 zero() { return {}; }

    cplx& operator()(int r, int col) { return r == 0 ? (col == 0 ? a : b) : (col == 0 ? c : d); }
    cplx operator()(int r, int col) const { return r == 0 ? (col == 0 ? a : b) : (col == 0 ? c : d); }

    Matrix2& operator+=(const Matrix2& o) {
        a += o.a; b += o.b; c += o.c; d += o.d;
        return *this;
    }
    Matrix2& operator-=(const Matrix2& o) {
        a -= o.a; b -= o.b; c -= o.c; d -= o.d;
        return *this;
    }
    Matrix2& operator*=(cplx s) {
        a *= s; b *= s; c *= s; d *= s;
        return *this;
    }
    Matrix2& operator*=(double s) {
        a *= s; b *= s; c *= s; d *= s;
        return *this;
    }

    cplx det() const { return a * d - b * c; }
    cplx trace() const { return a + d; }
    /// Adjugate; equals the inverse when det = 1.
    Matrix2 adj() const { return {d, -b, -c, a}; }
    Matrix2 dagger() const { return {std::conj(a), std::conj(c), std::conj(b), std::conj(d)}; }
    Matrix2 inverse() const {
        Matrix2 m = adj();
        m *= 1.0 / det();
        return m;
    }
    Matrix2 diagonal_part() const { return {a, 0.0, 0.0, d}; }
    Matrix2 off_diagonal_part() const { return {0.0, b, c, 0.0}; }

    double norm2() const { return std::norm(a) + std::norm(b) + std::norm(c) + std::norm(d); }
    /// Frobenius norm.
    double norm() const { return std::sqrt(norm2()); }
    double max_abs() const {
        return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
    }
};

inline Matrix2 operator+(Matrix2 x, const Matrix2& y) { return x += y; }
inline Matrix2 operator-(Matrix2 x, const Matrix2& y) { return x -= y; }
inline Matrix2 operator-(const Matrix2& x) { return {-x.a, -x.b, -x.c, -x.d}; }
inline Matrix2 operator*(Matrix2 x, cplx s) { return x *= s; }
inline Matrix2 operator*(cplx s, Matrix2 x) { return x *= s; }
inline Matrix2 operator*(Matrix2 x, double s) { return x *= s; }
inline Matrix2 operator*(double s, Matrix2 x) { return x *= s; }

inline Matrix2 operator*(const Matrix2& x, const Matrix2& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d,
            x.c * y.a + x.d * y.c, x.c * y.b + x.d * y.d};
}

/// acc += x * y without temporaries; hot path of loop multiplication.
inline void fused_mul_add(Matrix2& acc, const Matrix2& x, const Matrix2& y) {
    acc.a += x.a * y.a + x.b * y.c;
    acc.b += x.a * y.b + x.b * y.d;
    acc.c += x.c * y.a + x.d * y.c;
    acc.d += x.c * y.b + x.d * y.d;
}

inline Matrix2 commutator(const Matrix2& x, const Matrix2& y) { return x * y - y * x; }

/// Named basis of R^4 = C^2 identified with SU(2) and su(2).
namespace basis {
inline constexpr Matrix2 e0{1.0, 0.0, 0.0, 1.0};
inline constexpr Matrix2 e1{0.0, 1.0, -1.0, 0.0};
inline constexpr Matrix2 e2{0.0, cplx(0.0, 1.0), cplx(0.0, 1.0), 0.0};
inline constexpr Matrix2 e3{cplx(0.0, 1.0), 0.0, 0.0, cplx(0.0, -1.0)};
}  // namespace basis

/// Inner product on su(2): <X, Y> = -tr(XY)/2 (real part).
inline double su2_inner(const Matrix2& x, const Matrix2& y) { return -0.5 * (x * y).trace().real(); }

/// Coordinates of X = x1 e1 + x2 e2 + x3 e3 (trace-free anti-Hermitian part only).
inline Vec3 su2_coords(const Matrix2& x) {
    // X = [[ i x3, x1 + i x2], [-x1 + i x2, -i x3]]
    return {0.5 * (x.b.real() - x.c.real()), 0.5 * (x.b.imag() + x.c.imag()),
            0.5 * (x.a.imag() - x.d.imag())};
}

inline Matrix2 su2_from_coords(const Vec3& x) {
    return {cplx(0.0, x[2]), cplx(x[0], x[1]), cplx(-x[0], x[1]), cplx(0.0, -x[2])};
}

/// Ad_g X = g X g^{-1}, with g^{-1} = adj(g) for det g = 1.
inline Matrix2 adjoint(const Matrix2& g, const Matrix2& x) { return g * x * g.adj(); }

/// True if m m^* = I and det m = 1 within tol.
inline bool is_su2(const Matrix2& m, double tol) {
    return (m * m.dagger() - Matrix2::identity()).max_abs() <= tol && std::abs(m.det() - 1.0) <= tol;
}

/// exp(X) for X in su(2): cos|X| I + sin|X|/|X| X.
inline Matrix2 su2_exp(const Matrix2& x) {
    const double r = std::sqrt(std::max(0.0, su2_inner(x, x)));
    const double s = r < 1e-8 ? 1.0 - r * r / 6.0 : std::sin(r) / r;
    return Matrix2::identity() * std::cos(r) + x * s;
}

inline double dot(const Vec3& x, const Vec3& y) { return x[0] * y[0] + x[1] * y[1] + x[2] * y[2]; }
inline double dot(const Vec4& x, const Vec4& y) {
    return x[0] * y[0] + x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
}
inline Vec3 cross(const Vec3& x, const Vec3& y) {
    return {x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2], x[0] * y[1] - x[1] * y[0]};
}
template <std::size_t N>
inline double norm(const std::array<double, N>& x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return std::sqrt(s);
}
template <std::size_t N>
inline std::array<double, N> operator+(std::array<double, N> x, const std::array<double, N>& y) {
    for (std::size_t k = 0; k < N; ++k) x[k] += y[k];
    return x;
}
template <std::size_t N>
inline std::array<double, N> operator-(std::array<double, N> x, const std::array<double, N>& y) {
    for (std::size_t k = 0; k < N; ++k) x[k] -= y[k];
    return x;
}
template <std::size_t N>
inline std::array<double, N> operator*(double s, std::array<double, N> x) {
    for (double& v : x) v *= s;
    return x;
}

}  // namespace cgc
