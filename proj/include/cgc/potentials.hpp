#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cgc/loop_matrix.hpp"

namespace cgc {

enum class Axis { U, V };

/// One term matrix * x^coordDegree * lambda^power of an axis potential.
struct PotentialTerm {
    int power = 0;
    Matrix2 matrix;
    int coordDegree = 0;
};

/// Loop-algebra valued 1-form along one coordinate axis, polynomial in the coordinate.
class AxisPotential {
public:
    AxisPotential() = default;
    AxisPotential(Axis axis, std::vector<PotentialTerm> terms);

    Axis axis() const { return axis_; }
    const std::vector<PotentialTerm>& terms() const { return terms_; }

    /// Potential coefficient at coordinate x as a loop in lambda.
    LoopMatrix at(double x) const;
    /// Coefficient of lambda^power at coordinate x.
    Matrix2 coefficient(int power, double x) const;

    bool is_zero() const { return terms_.empty(); }
    int min_power() const;
    int max_power() const;

private:
    Axis axis_ = Axis::U;
    std::vector<PotentialTerm> terms_;
};

struct Interval {
    double lo = 0.0;
    double hi = 0.0;
};

/// The d'Alembert input data (eta_plus along u, eta_minus along v).
struct PotentialPair {
    AxisPotential etaPlus{Axis::U, {}};
    AxisPotential etaMinus{Axis::V, {}};
    std::optional<Interval> uDomain;
    std::optional<Interval> vDomain;
};

/// Built-in catalog: "revolution" and "amsler".
PotentialPair builtin(std::string_view name);
std::vector<std::string> builtin_names();

/// Structural validation: degree bounds, twisting, trace-free, su(2) reality.
/// Throws DegreeViolation / TwistingViolation / SchemaError with a field path.
void validate(const PotentialPair& pair);

struct ParsedPotential {
    PotentialPair pair;
    std::vector<std::string> warnings;  ///< isolated regularity failures
};

/// Parse the JSON potential document. Throws SchemaError on malformed input,
/// TwistingViolation / DegreeViolation on invalid coefficients, and
/// RegularityViolation when a leading coefficient has an identically zero (1,2) entry.
ParsedPotential parse_config(std::string_view document);

/// Serialize to the JSON document format accepted by parse_config.
std::string to_config(const PotentialPair& pair);

struct RegularityFailure {
    Axis axis;
    double coordinate;
    double magnitude;  ///< |[(eta)_{+-1}]_12| at the coordinate
};

/// Sample points where |[(eta_plus)_1]_12| or |[(eta_minus)_-1]_12| is below 1e-12.
std::vector<RegularityFailure> check_regular(const PotentialPair& pair, const std::vector<double>& uSamples,
                                             const std::vector<double>& vSamples);

}  // namespace cgc
