#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "cgc/loop_matrix.hpp"
#include "cgc/potentials.hpp"

namespace cgc {

/// Rectangular coordinate grid. Index (i, j) addresses u_i, v_j; storage is row-major i * nV + j.
struct GridSpec {
    Interval uRange{0.0, 1.0};
    Interval vRange{0.0, 1.0};
    int nU = 2;
    int nV = 2;
    /// Base point index; defaults to the grid point nearest (0, 0).
    std::optional<std::pair<int, int>> basePoint;

    void validate() const;  ///< throws InvalidGrid
    double hu() const { return (uRange.hi - uRange.lo) / (nU - 1); }
    double hv() const { return (vRange.hi - vRange.lo) / (nV - 1); }
    double u(int i) const { return uRange.lo + hu() * i; }
    double v(int j) const { return vRange.lo + hv() * j; }
    std::vector<double> u_samples() const;
    std::vector<double> v_samples() const;
    std::pair<int, int> base_index() const;
    std::size_t size() const { return static_cast<std::size_t>(nU) * static_cast<std::size_t>(nV); }
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * nV + static_cast<std::size_t>(j); }
};

/// Data that lets a frame be evaluated away from |lambda| = 1 without summing a
/// truncated tail at a large power of lambda or 1/lambda. For |lambda| >= 0.75,
/// F^ = N F+(u) H-(u, v) with F+ re-integrated at lambda and H- summed from its
/// negative powers; for smaller |lambda|, F^ = N F-(v) H+(u, v)^-1 likewise.
struct FrameFactors {
    AxisPotential etaPlus;
    AxisPotential etaMinus;
    std::vector<double> uSamples;
    std::vector<double> vSamples;
    std::vector<LoopMatrix> hMinus;  ///< per grid point
    std::vector<LoopMatrix> hPlus;   ///< per grid point
};

struct ExtendedFrame {
    GridSpec grid;
    TruncationPolicy policy;
    std::vector<LoopMatrix> values;        ///< row-major, see GridSpec::index
    std::vector<unsigned char> valid;      ///< 0 where the Birkhoff split failed
    std::vector<double> residual;          ///< Birkhoff residual per point
    std::vector<std::pair<int, int>> offBigCell;
    std::shared_ptr<const FrameFactors> factors;  ///< optional; absent for loaded or synthetic frames
    double scale = 1.0;                    ///< associated-family parameter applied to factors
    bool normalized = false;               ///< values divided on the left by their base-point value

    const LoopMatrix& at(int i, int j) const { return values[grid.index(i, j)]; }
    double max_residual() const;
};

struct FrameOptions {
    int birkhoffOrder = 0;          ///< M of the split; 0 selects policy.maxDegree
    bool throwOnOffBigCell = false; ///< default: record, mask and continue
    bool normalize = true;          ///< left-normalize so that F^(base) = I
    double offBigCellThreshold = 1e-6;
};

/// F(x) for F^-1 dF = eta, F(0) = I, by classical RK4 on coefficient lists.
/// Samples must be sorted; 0 is used as the initial point whether or not it is listed.
/// The step is the smallest sample spacing; longer gaps are subdivided.
/// Throws TailOverflow when a step truncates coefficients above the tolerance.
std::vector<LoopMatrix> integrate_axis(const AxisPotential& p, const std::vector<double>& samples,
                                       const TruncationPolicy& policy);

/// The same RK4 scheme at one fixed value of lambda (no truncation). Steps are further
/// refined so that step * |eta| stays below 0.02.
std::vector<Matrix2> integrate_axis_at(const AxisPotential& p, const std::vector<double>& samples, cplx lambda);

struct BirkhoffFactors {
    LoopMatrix hMinus;  ///< I + strictly negative powers
    LoopMatrix hPlus;   ///< nonnegative powers
    double residual = 0.0;
};

/// Phi = H- H+ with H- normalized to I at lambda = infinity.
/// Solves for G- = H-^-1 = I + sum_{k=1..M} c_k lambda^-k from the vanishing of the
/// negative coefficients of G- Phi (least squares), then H+ = [G- Phi]_{>=0}, H- = G-^-1.
/// Throws OffBigCell when the system is rank deficient or the residual exceeds threshold.
BirkhoffFactors birkhoff_split(const LoopMatrix& phi, int M, const TruncationPolicy& policy,
                               double threshold = 1e-6);

/// F^ = F+ H- on the grid, H- the negative factor of F+^-1 F-.
ExtendedFrame extended_frame(const PotentialPair& pair, const GridSpec& grid, const TruncationPolicy& policy,
                             const FrameOptions& options = {});

/// Frame values F^(u_i, v_j)|_lambda for every grid point. Uses FrameFactors when present.
std::vector<Matrix2> evaluate_frame(const ExtendedFrame& f, double lambda);

/// Maurer-Cartan coefficients per grid point, per unit coordinate length.
struct MCData {
    GridSpec grid;
    std::vector<Matrix2> alpha0u, alpha0v;  ///< diagonal lambda^0 parts of the du / dv components
    std::vector<Matrix2> b1, bm1;           ///< lambda^1 part of du, lambda^-1 part of dv
    std::vector<double> offPattern;         ///< sum of squared norms of coefficients outside the pattern
    std::vector<unsigned char> valid;

    double max_off_pattern(bool interiorOnly = true) const;
};

/// F^-1 dF by central differences (second-order one-sided at the boundary).
MCData maurer_cartan(const ExtendedFrame& f);

/// True where B_1 and B_-1 span the off-diagonal plane: |B_1 x B_-1| > 1e-10.
std::vector<unsigned char> regular_at(const MCData& mc);

/// Associated family member: lambda -> s lambda, re-normalized at the base point.
ExtendedFrame associated_frame(const ExtendedFrame& f, double s);

}  // namespace cgc
