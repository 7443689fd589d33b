#include "cgc/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <json.hpp>

namespace cgc {

using nlohmann::json;

AxisPotential::AxisPotential(Axis axis, std::vector<PotentialTerm> terms) : axis_(axis), terms_(std::move(terms)) {}

LoopMatrix AxisPotential::at(double x) const {
    LoopMatrix out;
    for (const auto& t : terms_) out.coeff_ref(t.power) += t.matrix * std::pow(x, t.coordDegree);
    return out;
}

Matrix2 AxisPotential::coefficient(int power, double x) const {
    Matrix2 m{};
    for (const auto& t : terms_)
        if (t.power == power) m += t.matrix * std::pow(x, t.coordDegree);
    return m;
}

int AxisPotential::min_power() const {
    int p = 0;
    bool first = true;
    for (const auto& t : terms_) {
        p = first ? t.power : std::min(p, t.power);
        first = false;
    }
    return p;
}

int AxisPotential::max_power() const {
    int p = 0;
    bool first = true;
    for (const auto& t : terms_) {
        p = first ? t.power : std::max(p, t.power);
        first = false;
    }
    return p;
}

PotentialPair builtin(std::string_view name) {
    const cplx i(0.0, 1.0);
    PotentialPair p;
    if (name == "revolution") {
        // A = [[0, -1/lambda + i lambda], [1/lambda + i lambda, 0]]
        std::vector<PotentialTerm> a{{-1, Matrix2(0.0, -1.0, 1.0, 0.0), 0}, {1, Matrix2(0.0, i, i, 0.0), 0}};
        p.etaPlus = AxisPotential(Axis::U, a);
        p.etaMinus = AxisPotential(Axis::V, a);
    } else if (name == "amsler") {
        p.etaPlus = AxisPotential(Axis::U, {{1, Matrix2(0.0, i, i, 0.0), 0}});
        p.etaMinus = AxisPotential(Axis::V, {{-1, Matrix2(0.0, -1.0, 1.0, 0.0), 0}});
    } else {
        throw UnknownBuiltin("potential: unknown builtin '" + std::string(name) + "' (expected revolution or amsler)");
    }
    return p;
}

std::vector<std::string> builtin_names() { return {"revolution", "amsler"}; }

namespace {

const char* axis_key(Axis a) { return a == Axis::U ? "eta_plus" : "eta_minus"; }

void validate_axis(const AxisPotential& p) {
    const char* key = axis_key(p.axis());
    for (std::size_t n = 0; n < p.terms().size(); ++n) {
        const auto& t = p.terms()[n];
        const std::string path = std::string(key) + "[" + std::to_string(n) + "]";
        if (p.axis() == Axis::U && t.power > 1)
            throw DegreeViolation(path + ".power: eta_plus admits powers <= 1, got " + std::to_string(t.power));
        if (p.axis() == Axis::V && t.power < -1)
            throw DegreeViolation(path + ".power: eta_minus admits powers >= -1, got " + std::to_string(t.power));
        if (t.coordDegree < 0) throw SchemaError(path + ".coord_degree: must be nonnegative");
        const Matrix2& m = t.matrix;
        const double scale = std::max(1.0, m.max_abs());
        const double tol = 1e-12 * scale;
        const bool even = (t.power % 2 == 0);
        if (even && (std::abs(m.b) > tol || std::abs(m.c) > tol))
            throw TwistingViolation(path + ".matrix: even power requires a diagonal matrix");
        if (!even && (std::abs(m.a) > tol || std::abs(m.d) > tol))
            throw TwistingViolation(path + ".matrix: odd power requires an anti-diagonal matrix");
        if (std::abs(m.trace()) > tol) throw SchemaError(path + ".matrix: not trace-free");
        if ((m + m.dagger()).max_abs() > tol)
            throw SchemaError(path + ".matrix: not in su(2) (reality condition on real lambda)");
    }
}

/// True when the (1,2) entry of the leading coefficient vanishes identically in x.
bool leading_entry_vanishes(const AxisPotential& p) {
    const int lead = p.axis() == Axis::U ? 1 : -1;
    std::map<int, cplx> byDegree;
    for (const auto& t : p.terms())
        if (t.power == lead) byDegree[t.coordDegree] += t.matrix.b;
    return std::all_of(byDegree.begin(), byDegree.end(), [](const auto& kv) { return std::abs(kv.second) <= 1e-14; });
}

Matrix2 parse_matrix(const json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 4) throw SchemaError(path + ": expected 4 [re, im] pairs (row-major)");
    cplx e[4];
    for (std::size_t k = 0; k < 4; ++k) {
        const json& pair = j[k];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
            throw SchemaError(path + "[" + std::to_string(k) + "]: expected [re, im]");
        e[k] = cplx(pair[0].get<double>(), pair[1].get<double>());
    }
    return {e[0], e[1], e[2], e[3]};
}

AxisPotential parse_axis(const json& doc, Axis axis) {
    const char* key = axis_key(axis);
    if (!doc.contains(key)) throw SchemaError(std::string(key) + ": missing");
    const json& arr = doc.at(key);
    if (!arr.is_array()) throw SchemaError(std::string(key) + ": expected an array of terms");
    std::vector<PotentialTerm> terms;
    for (std::size_t n = 0; n < arr.size(); ++n) {
        const std::string path = std::string(key) + "[" + std::to_string(n) + "]";
        const json& t = arr[n];
        if (!t.is_object()) throw SchemaError(path + ": expected an object");
        for (const char* field : {"power", "matrix"})
            if (!t.contains(field)) throw SchemaError(path + "." + field + ": missing");
        if (!t.at("power").is_number_integer()) throw SchemaError(path + ".power: expected an integer");
        PotentialTerm term;
        term.power = t.at("power").get<int>();
        term.matrix = parse_matrix(t.at("matrix"), path + ".matrix");
        if (t.contains("coord_degree")) {
            if (!t.at("coord_degree").is_number_integer()) throw SchemaError(path + ".coord_degree: expected an integer");
            term.coordDegree = t.at("coord_degree").get<int>();
        }
        terms.push_back(term);
    }
    return AxisPotential(axis, std::move(terms));
}

std::optional<Interval> parse_interval(const json& domain, const char* key) {
    if (!domain.contains(key)) return std::nullopt;
    const json& j = domain.at(key);
    const std::string path = std::string("domain.") + key;
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw SchemaError(path + ": expected [lo, hi]");
    Interval iv{j[0].get<double>(), j[1].get<double>()};
    if (!(iv.hi > iv.lo)) throw SchemaError(path + ": expected lo < hi");
    return iv;
}

std::vector<double> sample_interval(const Interval& iv, int n) {
    std::vector<double> s(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) s[static_cast<std::size_t>(k)] = iv.lo + (iv.hi - iv.lo) * k / (n - 1);
    return s;
}

}  // namespace

void validate(const PotentialPair& pair) {
    if (pair.etaPlus.axis() != Axis::U || pair.etaMinus.axis() != Axis::V)
        throw SchemaError("potential pair: eta_plus must live on u and eta_minus on v");
    validate_axis(pair.etaPlus);
    validate_axis(pair.etaMinus);
}

ParsedPotential parse_config(std::string_view document) {
    json doc;
    try {
        doc = json::parse(document);
    } catch (const json::parse_error& e) {
        throw SchemaError(std::string("document: invalid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw SchemaError("document: expected a JSON object");

    ParsedPotential out;
    out.pair.etaPlus = parse_axis(doc, Axis::U);
    out.pair.etaMinus = parse_axis(doc, Axis::V);
    if (doc.contains("domain")) {
        const json& d = doc.at("domain");
        if (!d.is_object()) throw SchemaError("domain: expected an object");
        out.pair.uDomain = parse_interval(d, "u");
        out.pair.vDomain = parse_interval(d, "v");
    }
    validate(out.pair);

    if (leading_entry_vanishes(out.pair.etaPlus))
        throw RegularityViolation("eta_plus: (1,2) entry of the lambda^1 coefficient vanishes identically");
    if (leading_entry_vanishes(out.pair.etaMinus))
        throw RegularityViolation("eta_minus: (1,2) entry of the lambda^-1 coefficient vanishes identically");

    const Interval du = out.pair.uDomain.value_or(Interval{-1.0, 1.0});
    const Interval dv = out.pair.vDomain.value_or(Interval{-1.0, 1.0});
    for (const auto& f : check_regular(out.pair, sample_interval(du, 201), sample_interval(dv, 201))) {
        std::ostringstream msg;
        msg << (f.axis == Axis::U ? "eta_plus" : "eta_minus") << ": not regular at "
            << (f.axis == Axis::U ? "u = " : "v = ") << f.coordinate;
        out.warnings.push_back(msg.str());
    }
    return out;
}

std::string to_config(const PotentialPair& pair) {
    auto axis_json = [](const AxisPotential& p) {
        json arr = json::array();
        for (const auto& t : p.terms()) {
            json m = json::array();
            for (cplx e : {t.matrix.a, t.matrix.b, t.matrix.c, t.matrix.d}) m.push_back({e.real(), e.imag()});
            arr.push_back({{"power", t.power}, {"matrix", m}, {"coord_degree", t.coordDegree}});
        }
        return arr;
    };
    json doc;
    doc["eta_plus"] = axis_json(pair.etaPlus);
    doc["eta_minus"] = axis_json(pair.etaMinus);
    if (pair.uDomain || pair.vDomain) {
        json d = json::object();
        if (pair.uDomain) d["u"] = {pair.uDomain->lo, pair.uDomain->hi};
        if (pair.vDomain) d["v"] = {pair.vDomain->lo, pair.vDomain->hi};
        doc["domain"] = d;
    }
    return doc.dump(2);
}

std::vector<RegularityFailure> check_regular(const PotentialPair& pair, const std::vector<double>& uSamples,
                                             const std::vector<double>& vSamples) {
    std::vector<RegularityFailure> out;
    for (double u : uSamples) {
        const double m = std::abs(pair.etaPlus.coefficient(1, u).b);
        if (m < 1e-12) out.push_back({Axis::U, u, m});
    }
    for (double v : vSamples) {
        const double m = std::abs(pair.etaMinus.coefficient(-1, v).b);
        if (m < 1e-12) out.push_back({Axis::V, v, m});
    }
    return out;
}

}  // namespace cgc
