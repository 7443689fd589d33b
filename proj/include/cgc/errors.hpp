#pragma once

#include <stdexcept>
#include <string>

namespace cgc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define CGC_DEFINE_ERROR(Name)                  \
    class Name : public Error {                 \
    public:                                     \
        using Error::Error;                     \
    };

// loop_algebra
CGC_DEFINE_ERROR(SingularLoop)
CGC_DEFINE_ERROR(ZeroLambda)

// potentials
CGC_DEFINE_ERROR(UnknownBuiltin)
CGC_DEFINE_ERROR(SchemaError)
CGC_DEFINE_ERROR(TwistingViolation)
CGC_DEFINE_ERROR(DegreeViolation)
CGC_DEFINE_ERROR(RegularityViolation)

// dalembert
CGC_DEFINE_ERROR(TailOverflow)
CGC_DEFINE_ERROR(NotInvertible)
CGC_DEFINE_ERROR(InvalidGrid)

/// Birkhoff factorization failed: the loop is (numerically) outside the big cell.
class OffBigCell : public Error {
public:
    explicit OffBigCell(const std::string& what, int i = -1, int j = -1)
        : Error(what), i_(i), j_(j) {}
    int i() const { return i_; }
    int j() const { return j_; }

private:
    int i_;
    int j_;
};

// projections
CGC_DEFINE_ERROR(DegenerateMu)
CGC_DEFINE_ERROR(NotUnitary)
CGC_DEFINE_ERROR(NotUnitNorm)
CGC_DEFINE_ERROR(AtSouthPole)

#undef CGC_DEFINE_ERROR

}  // namespace cgc
