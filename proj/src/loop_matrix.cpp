#include "cgc/loop_matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cgc {

void TruncationPolicy::validate() const {
    if (maxDegree < 1) throw Error("TruncationPolicy: maxDegree must be >= 1, got " + std::to_string(maxDegree));
    if (!(tailTolerance >= 0.0)) throw Error("TruncationPolicy: tailTolerance must be nonnegative");
}

LoopMatrix::LoopMatrix(int lowDegree, std::vector<Matrix2> coefficients)
    : low_(lowDegree), coeffs_(std::move(coefficients)) {}

Matrix2& LoopMatrix::coeff_ref(int k) {
    if (coeffs_.empty()) {
        low_ = k;
        coeffs_.resize(1);
        return coeffs_[0];
    }
    if (k < low_) {
        coeffs_.insert(coeffs_.begin(), static_cast<std::size_t>(low_ - k), Matrix2{});
        low_ = k;
    } else if (k > high_degree()) {
        coeffs_.resize(static_cast<std::size_t>(k - low_ + 1));
    }
    return coeffs_[static_cast<std::size_t>(k - low_)];
}

LoopMatrix& LoopMatrix::trim() {
    const Matrix2 z{};
    auto is_zero = [&](const Matrix2& m) { return m.a == z.a && m.b == z.b && m.c == z.c && m.d == z.d; };
    std::size_t first = 0;
    while (first < coeffs_.size() && is_zero(coeffs_[first])) ++first;
    if (first == coeffs_.size()) {
        coeffs_.clear();
        low_ = 0;
        return *this;
    }
    std::size_t last = coeffs_.size();
    while (last > first && is_zero(coeffs_[last - 1])) --last;
    coeffs_ = std::vector<Matrix2>(coeffs_.begin() + static_cast<std::ptrdiff_t>(first),
                                   coeffs_.begin() + static_cast<std::ptrdiff_t>(last));
    low_ += static_cast<int>(first);
    return *this;
}

LoopMatrix& LoopMatrix::operator+=(const LoopMatrix& o) {
    for (int k = o.low_degree(); k <= o.high_degree(); ++k) coeff_ref(k) += o.coeff(k);
    under_resolved_ = under_resolved_ || o.under_resolved_;
    return *this;
}

LoopMatrix& LoopMatrix::operator-=(const LoopMatrix& o) {
    for (int k = o.low_degree(); k <= o.high_degree(); ++k) coeff_ref(k) -= o.coeff(k);
    under_resolved_ = under_resolved_ || o.under_resolved_;
    return *this;
}

LoopMatrix& LoopMatrix::operator*=(cplx s) {
    for (auto& c : coeffs_) c *= s;
    return *this;
}

LoopMatrix operator+(LoopMatrix a, const LoopMatrix& b) { return a += b; }
LoopMatrix operator-(LoopMatrix a, const LoopMatrix& b) { return a -= b; }
LoopMatrix operator*(cplx s, LoopMatrix a) { return a *= s; }

namespace {

Matrix2 product_coeff(const LoopMatrix& a, const LoopMatrix& b, int k) {
    Matrix2 acc{};
    const int lo = std::max(a.low_degree(), k - b.high_degree());
    const int hi = std::min(a.high_degree(), k - b.low_degree());
    const auto ca = a.coefficients();
    const auto cb = b.coefficients();
    for (int i = lo; i <= hi; ++i) {
        fused_mul_add(acc, ca[static_cast<std::size_t>(i - a.low_degree())],
                      cb[static_cast<std::size_t>(k - i - b.low_degree())]);
    }
    return acc;
}

/// Scalar Laurent series; used for determinants.
struct ScalarSeries {
    int low = 0;
    std::vector<cplx> c;

    int high() const { return low + static_cast<int>(c.size()) - 1; }
    cplx at(int k) const {
        const int idx = k - low;
        return (idx < 0 || idx >= static_cast<int>(c.size())) ? cplx{} : c[static_cast<std::size_t>(idx)];
    }
};

ScalarSeries scalar_mul(const ScalarSeries& x, const ScalarSeries& y, int lo, int hi) {
    ScalarSeries out;
    lo = std::max(lo, x.low + y.low);
    hi = std::min(hi, x.high() + y.high());
    if (hi < lo) return out;
    out.low = lo;
    out.c.assign(static_cast<std::size_t>(hi - lo + 1), cplx{});
    for (int k = lo; k <= hi; ++k) {
        cplx acc{};
        const int ilo = std::max(x.low, k - y.high());
        const int ihi = std::min(x.high(), k - y.low);
        for (int i = ilo; i <= ihi; ++i) acc += x.c[static_cast<std::size_t>(i - x.low)] * y.c[static_cast<std::size_t>(k - i - y.low)];
        out.c[static_cast<std::size_t>(k - lo)] = acc;
    }
    return out;
}

ScalarSeries determinant(const LoopMatrix& a, int window) {
    ScalarSeries d;
    if (a.empty()) return d;
    const int lo = std::max(2 * a.low_degree(), -window);
    const int hi = std::min(2 * a.high_degree(), window);
    d.low = lo;
    d.c.assign(static_cast<std::size_t>(std::max(0, hi - lo + 1)), cplx{});
    const auto ca = a.coefficients();
    for (int k = lo; k <= hi; ++k) {
        cplx acc{};
        const int ilo = std::max(a.low_degree(), k - a.high_degree());
        const int ihi = std::min(a.high_degree(), k - a.low_degree());
        for (int i = ilo; i <= ihi; ++i) {
            const Matrix2& x = ca[static_cast<std::size_t>(i - a.low_degree())];
            const Matrix2& y = ca[static_cast<std::size_t>(k - i - a.low_degree())];
            acc += x.a * y.d - x.b * y.c;
        }
        d.c[static_cast<std::size_t>(k - lo)] = acc;
    }
    return d;
}

/// Two-sided Newton inverse of a scalar series dominated by one monomial.
/// Returns false when the series is not close enough to a monomial to converge.
bool scalar_inverse(const ScalarSeries& d, int window, ScalarSeries& out) {
    if (d.c.empty()) return false;
    std::size_t m = 0;
    for (std::size_t k = 1; k < d.c.size(); ++k)
        if (std::abs(d.c[k]) > std::abs(d.c[m])) m = k;
    const cplx dom = d.c[m];
    if (std::abs(dom) == 0.0) return false;
    double rest = 0.0;
    for (std::size_t k = 0; k < d.c.size(); ++k)
        if (k != m) rest += std::abs(d.c[k]);
    if (rest > 0.5 * std::abs(dom)) return false;

    const int domDeg = d.low + static_cast<int>(m);
    ScalarSeries x;
    x.low = -domDeg;
    x.c = {1.0 / dom};
    const int lo = -window - domDeg;
    const int hi = window - domDeg;
    for (int iter = 0; iter < 60; ++iter) {
        ScalarSeries dx = scalar_mul(d, x, -2 * window, 2 * window);
        // r = 2 - d x
        ScalarSeries r;
        r.low = std::min(dx.low, 0);
        const int rhi = std::max(dx.high(), 0);
        r.c.assign(static_cast<std::size_t>(rhi - r.low + 1), cplx{});
        for (int k = dx.low; k <= dx.high(); ++k) r.c[static_cast<std::size_t>(k - r.low)] -= dx.at(k);
        r.c[static_cast<std::size_t>(-r.low)] += 2.0;
        ScalarSeries next = scalar_mul(x, r, lo, hi);
        double change = 0.0;
        for (int k = std::min(next.low, x.low); k <= std::max(next.high(), x.high()); ++k)
            change = std::max(change, std::abs(next.at(k) - x.at(k)));
        x = std::move(next);
        if (change <= 1e-17 / std::abs(dom)) break;
    }
    out = std::move(x);
    return true;
}

/// Power-series inverse of p (powers 0..) by Newton iteration, nTerms terms.
std::vector<Matrix2> series_inverse(std::span<const Matrix2> p, std::size_t nTerms) {
    const Matrix2& p0 = p[0];
    const double scale = p0.max_abs();
    if (scale == 0.0 || std::abs(p0.det()) <= 1e-14 * scale * scale) {
        throw SingularLoop("inverse: constant term of the normalized factor is singular");
    }
    auto series_mul = [](const std::vector<Matrix2>& x, std::span<const Matrix2> y, std::size_t n) {
        std::vector<Matrix2> out(n);
        for (std::size_t k = 0; k < n; ++k) {
            Matrix2 acc{};
            const std::size_t imax = std::min(k, x.size() - 1);
            for (std::size_t i = 0; i <= imax; ++i)
                if (k - i < y.size()) fused_mul_add(acc, x[i], y[k - i]);
            out[k] = acc;
        }
        return out;
    };
    std::vector<Matrix2> x{p0.inverse()};
    std::size_t n = 1;
    int polish = 2;
    while (true) {
        n = std::min(2 * n, nTerms);
        std::vector<Matrix2> px = series_mul(std::vector<Matrix2>(p.begin(), p.end()), x, n);
        for (auto& c : px) c = -c;
        px[0] += Matrix2::identity() * 2.0;
        x = series_mul(x, px, n);
        if (n == nTerms && --polish < 0) break;
    }
    return x;
}

}  // namespace

LoopMatrix mul(const LoopMatrix& a, const LoopMatrix& b, const TruncationPolicy& policy) {
    if (a.empty() || b.empty()) return {};
    const int n = policy.maxDegree;
    const int lo = std::max(a.low_degree() + b.low_degree(), -n);
    const int hi = std::min(a.high_degree() + b.high_degree(), n);
    LoopMatrix out;
    bool flagged = a.under_resolved() || b.under_resolved();
    if (hi >= lo) {
        std::vector<Matrix2> c(static_cast<std::size_t>(hi - lo + 1));
        for (int k = lo; k <= hi; ++k) c[static_cast<std::size_t>(k - lo)] = product_coeff(a, b, k);
        out = LoopMatrix(lo, std::move(c));
    }
    // Twisting zeroes one parity, so look at the two nearest dropped powers on each side.
    for (int k : {n + 1, n + 2})
        if (a.high_degree() + b.high_degree() >= k && product_coeff(a, b, k).norm() > policy.tailTolerance) flagged = true;
    for (int k : {-n - 1, -n - 2})
        if (a.low_degree() + b.low_degree() <= k && product_coeff(a, b, k).norm() > policy.tailTolerance) flagged = true;
    out.set_under_resolved(flagged);
    return out;
}

LoopMatrix mul(const Matrix2& m, const LoopMatrix& a) {
    std::vector<Matrix2> c(a.coefficients().begin(), a.coefficients().end());
    for (auto& x : c) x = m * x;
    LoopMatrix out(a.low_degree(), std::move(c));
    out.set_under_resolved(a.under_resolved());
    return out;
}

LoopMatrix mul(const LoopMatrix& a, const Matrix2& m) {
    std::vector<Matrix2> c(a.coefficients().begin(), a.coefficients().end());
    for (auto& x : c) x = x * m;
    LoopMatrix out(a.low_degree(), std::move(c));
    out.set_under_resolved(a.under_resolved());
    return out;
}

LoopMatrix inverse(const LoopMatrix& a, const TruncationPolicy& policy) {
    LoopMatrix src = a;
    src.trim();
    if (src.empty()) throw SingularLoop("inverse: zero loop");
    const int n = policy.maxDegree;

    if (src.low_degree() == src.high_degree()) {
        const Matrix2& m = src.coefficients()[0];
        const double scale = m.max_abs();
        if (std::abs(m.det()) <= 1e-14 * scale * scale) throw SingularLoop("inverse: singular monomial coefficient");
        return truncate(LoopMatrix::monomial(-src.low_degree(), m.inverse()), policy);
    }

    ScalarSeries det = determinant(src, 2 * n);
    ScalarSeries detInv;
    if (scalar_inverse(det, n, detInv)) {
        // inverse = adj(a) * det^{-1}
        LoopMatrix adj;
        {
            std::vector<Matrix2> c(src.coefficients().size());
            for (std::size_t k = 0; k < c.size(); ++k) c[k] = src.coefficients()[k].adj();
            adj = LoopMatrix(src.low_degree(), std::move(c));
        }
        std::vector<Matrix2> dc(detInv.c.size());
        for (std::size_t k = 0; k < dc.size(); ++k) dc[k] = Matrix2::identity() * detInv.c[k];
        LoopMatrix out = mul(adj, LoopMatrix(detInv.low, std::move(dc)), policy);
        out.set_under_resolved(out.under_resolved() || a.under_resolved());
        return out;
    }

    // Factor out lambda^low; invert the power series on the retained degrees.
    const int low = src.low_degree();
    const int terms = n + low + 1;
    if (terms <= 0) throw SingularLoop("inverse: lowest power outside the retained window");
    std::vector<Matrix2> x = series_inverse(src.coefficients(), static_cast<std::size_t>(terms));
    LoopMatrix out(-low, std::move(x));
    out = truncate(out, policy);
    out.set_under_resolved(out.under_resolved() || a.under_resolved());
    return out;
}

Matrix2 evaluate(const LoopMatrix& a, cplx lambda0) {
    if (lambda0 == cplx(0.0, 0.0)) throw ZeroLambda("evaluate: lambda0 must be nonzero");
    Matrix2 pos{};
    Matrix2 neg{};
    const auto c = a.coefficients();
    const int low = a.low_degree();
    // Horner on nonnegative powers in lambda0, negative powers in 1/lambda0.
    const int high = a.high_degree();
    for (int k = high; k >= std::max(low, 0); --k) {
        pos = pos * lambda0;
        pos += c[static_cast<std::size_t>(k - low)];
    }
    if (low > 0) pos = pos * std::pow(lambda0, low);
    const cplx inv = 1.0 / lambda0;
    for (int k = low; k <= std::min(high, -1); ++k) {
        neg += c[static_cast<std::size_t>(k - low)];
        neg = neg * inv;
    }
    if (high < -1) neg = neg * std::pow(inv, -1 - high);
    return pos + neg;
}

LoopMatrix d_lambda(const LoopMatrix& a) {
    if (a.empty()) return {};
    std::vector<Matrix2> c(a.coefficients().size());
    for (int k = a.low_degree(); k <= a.high_degree(); ++k)
        c[static_cast<std::size_t>(k - a.low_degree())] = a.coeff(k) * static_cast<double>(k);
    LoopMatrix out(a.low_degree() - 1, std::move(c));
    out.set_under_resolved(a.under_resolved());
    return out;
}

LoopMatrix reindex_scale(const LoopMatrix& a, double s) {
    if (s == 0.0) throw Error("reindex_scale: s must be nonzero");
    std::vector<Matrix2> c(a.coefficients().begin(), a.coefficients().end());
    for (int k = a.low_degree(); k <= a.high_degree(); ++k) c[static_cast<std::size_t>(k - a.low_degree())] *= std::pow(s, k);
    LoopMatrix out(a.low_degree(), std::move(c));
    out.set_under_resolved(a.under_resolved());
    return out;
}

LoopMatrix restrict_degrees(const LoopMatrix& a, int lo, int hi) {
    lo = std::max(lo, a.low_degree());
    hi = std::min(hi, a.high_degree());
    if (hi < lo) {
        LoopMatrix z;
        z.set_under_resolved(a.under_resolved());
        return z;
    }
    std::vector<Matrix2> c(a.coefficients().begin() + (lo - a.low_degree()),
                           a.coefficients().begin() + (hi - a.low_degree() + 1));
    LoopMatrix out(lo, std::move(c));
    out.set_under_resolved(a.under_resolved());
    return out;
}

LoopMatrix truncate(const LoopMatrix& a, const TruncationPolicy& policy) {
    const int n = policy.maxDegree;
    bool flagged = a.under_resolved();
    for (int k = a.low_degree(); k <= a.high_degree(); ++k)
        if ((k > n || k < -n) && a.coeff(k).norm() > policy.tailTolerance) flagged = true;
    LoopMatrix out = restrict_degrees(a, -n, n);
    out.set_under_resolved(flagged);
    return out;
}

bool is_twisted(const LoopMatrix& a) {
    for (int k = a.low_degree(); k <= a.high_degree(); ++k) {
        const Matrix2 m = a.coeff(k);
        const bool even = (k % 2 == 0);
        if (even && (m.b != cplx{} || m.c != cplx{})) return false;
        if (!even && (m.a != cplx{} || m.d != cplx{})) return false;
    }
    return true;
}

double max_coeff_diff(const LoopMatrix& a, const LoopMatrix& b) {
    double r = 0.0;
    const int lo = std::min(a.low_degree(), b.low_degree());
    const int hi = std::max(a.high_degree(), b.high_degree());
    for (int k = lo; k <= hi; ++k) r = std::max(r, (a.coeff(k) - b.coeff(k)).norm());
    return r;
}

double max_coeff_norm(const LoopMatrix& a) {
    double r = 0.0;
    for (const auto& c : a.coefficients()) r = std::max(r, c.norm());
    return r;
}

double boundary_norm(const LoopMatrix& a) {
    if (a.empty()) return 0.0;
    double r = 0.0;
    for (int k : {a.low_degree(), a.low_degree() + 1, a.high_degree() - 1, a.high_degree()})
        r = std::max(r, a.coeff(k).norm());
    return r;
}

LoopMatrix loop_exp(const LoopMatrix& x, const TruncationPolicy& policy) {
    // Scaling and squaring keeps the Taylor terms small.
    double size = 0.0;
    for (const auto& c : x.coefficients()) size += c.norm();
    int squarings = 0;
    while (size > 0.5) {
        size *= 0.5;
        ++squarings;
    }
    LoopMatrix scaled = std::pow(0.5, squarings) * x;
    LoopMatrix result = LoopMatrix::identity();
    LoopMatrix term = LoopMatrix::identity();
    for (int k = 1; k <= 40; ++k) {
        term = (1.0 / k) * mul(term, scaled, policy);
        result += term;
        if (max_coeff_norm(term) < 1e-18) break;
    }
    for (int s = 0; s < squarings; ++s) result = mul(result, result, policy);
    return result;
}

}  // namespace cgc
