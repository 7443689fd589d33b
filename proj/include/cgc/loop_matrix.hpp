#pragma once

#include <span>
#include <vector>

#include "cgc/errors.hpp"
#include "cgc/matrix2.hpp"

namespace cgc {

/// Degree window and tail tolerance for truncated Laurent series.
struct TruncationPolicy {
    int maxDegree = 24;          ///< series kept on powers -maxDegree..maxDegree
    double tailTolerance = 1e-10;

    void validate() const;
};

/// Truncated Laurent series in lambda with 2x2 complex coefficients.
///
/// Coefficient k of the list multiplies lambda^(lowDegree + k). Twisted loops
/// (the ones the d'Alembert construction produces) have diagonal coefficients on
/// even powers and anti-diagonal coefficients on odd powers.
class LoopMatrix {
public:
    LoopMatrix() = default;
    LoopMatrix(int lowDegree, std::vector<Matrix2> coefficients);

    static LoopMatrix identity() { return constant(Matrix2::identity()); }
    static LoopMatrix constant(const Matrix2& m) { return {0, {m}}; }
    static LoopMatrix monomial(int degree, const Matrix2& m) { return {degree, {m}}; }

    bool empty() const { return coeffs_.empty(); }
    int low_degree() const { return low_; }
    /// Highest stored power; low_degree() - 1 for the empty (zero) loop.
    int high_degree() const { return low_ + static_cast<int>(coeffs_.size()) - 1; }
    std::span<const Matrix2> coefficients() const { return coeffs_; }

    /// Coefficient of lambda^k (zero outside the stored range).
    Matrix2 coeff(int k) const {
        const int idx = k - low_;
        return (idx < 0 || idx >= static_cast<int>(coeffs_.size())) ? Matrix2{} : coeffs_[idx];
    }
    /// Mutable coefficient of lambda^k; widens the stored range as needed.
    Matrix2& coeff_ref(int k);

    /// Set when a truncation dropped coefficients above the policy tolerance.
    bool under_resolved() const { return under_resolved_; }
    void set_under_resolved(bool flag) { under_resolved_ = flag; }

    /// Drop leading/trailing coefficients that are exactly zero.
    LoopMatrix& trim();

    LoopMatrix& operator+=(const LoopMatrix& o);
    LoopMatrix& operator-=(const LoopMatrix& o);
    LoopMatrix& operator*=(cplx s);

private:
    int low_ = 0;
    std::vector<Matrix2> coeffs_;
    bool under_resolved_ = false;
};

LoopMatrix operator+(LoopMatrix a, const LoopMatrix& b);
LoopMatrix operator-(LoopMatrix a, const LoopMatrix& b);
LoopMatrix operator*(cplx s, LoopMatrix a);

/// Cauchy product, keeping powers within the policy window.
LoopMatrix mul(const LoopMatrix& a, const LoopMatrix& b, const TruncationPolicy& policy);
/// Multiply every coefficient on the left/right by a constant matrix.
LoopMatrix mul(const Matrix2& m, const LoopMatrix& a);
LoopMatrix mul(const LoopMatrix& a, const Matrix2& m);

/// Inverse loop on the retained degrees.
///
/// Group elements (determinant a near-monomial scalar series) are inverted through
/// the adjugate and a Newton-inverted determinant. Other loops: the lowest
/// monomial is factored out and the remaining power series is inverted by Newton
/// iteration X -> X(2I - aX) seeded with the inverse of its constant term.
/// Throws SingularLoop when that constant term is singular.
LoopMatrix inverse(const LoopMatrix& a, const TruncationPolicy& policy);

/// Sum of coefficients * lambda0^k. Throws ZeroLambda for lambda0 == 0.
Matrix2 evaluate(const LoopMatrix& a, cplx lambda0);

/// Formal derivative in lambda.
LoopMatrix d_lambda(const LoopMatrix& a);

/// evaluate(result, lambda) == evaluate(a, s * lambda).
LoopMatrix reindex_scale(const LoopMatrix& a, double s);

/// Restrict to the policy window, flagging dropped mass above the tolerance.
LoopMatrix truncate(const LoopMatrix& a, const TruncationPolicy& policy);

/// Keep only powers in [lo, hi].
LoopMatrix restrict_degrees(const LoopMatrix& a, int lo, int hi);

/// Exact sigma-twisting pattern check (even powers diagonal, odd anti-diagonal).
bool is_twisted(const LoopMatrix& a);

/// Largest Frobenius norm among coefficients of a - b.
double max_coeff_diff(const LoopMatrix& a, const LoopMatrix& b);

/// Largest coefficient Frobenius norm.
double max_coeff_norm(const LoopMatrix& a);

/// Largest coefficient norm at the two outermost stored powers on either end.
double boundary_norm(const LoopMatrix& a);

/// exp(X) by Taylor series in loop arithmetic; test and oracle helper.
LoopMatrix loop_exp(const LoopMatrix& x, const TruncationPolicy& policy);

}  // namespace cgc
