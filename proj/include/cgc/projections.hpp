#pragma once

#include <vector>

#include "cgc/dalembert.hpp"

namespace cgc {

enum class Target { S3, E3 };

/// mu with its derived rho = (mu + 1) / (mu - 1) and K = 1 - rho^2.
struct ProjectionParams {
    double mu = 4.0;

    explicit ProjectionParams(double mu_);  ///< throws DegenerateMu for mu in {0, 1}
    double rho() const { return (mu + 1.0) / (mu - 1.0); }
    double K() const { return 1.0 - rho() * rho(); }
};

/// Sampled surface. Positions and normals live in R^4 = span(e0, e1, e2, e3);
/// E3 targets use the hyperplane x0 = 0. S3-type targets lie on the sphere of the
/// given radius and center (unit sphere at the origin for plain projections).
struct SurfaceGrid {
    GridSpec grid;
    Target target = Target::S3;
    std::vector<Vec4> position;
    std::vector<Vec4> normal;
    std::vector<Matrix2> frameF;
    std::vector<unsigned char> valid;
    double radius = 1.0;
    Vec4 center{};
};

/// R^4 coordinates (x0, x1, x2, x3) of m = x0 e0 + x1 e1 + x2 e2 + x3 e3. Throws NotUnitary.
Vec4 su2_to_r4(const Matrix2& m, double tol = 1e-8);
/// Inverse of su2_to_r4. Throws NotUnitNorm.
Matrix2 r4_to_su2(const Vec4& x, double tol = 1e-8);
/// Coordinates of the quaternion part of an arbitrary 2x2 matrix (no checks).
Vec4 quaternion_part(const Matrix2& m);

/// f = F^|_mu F^|_1^-1, n = f Ad_F e3. Validity combines frame validity and regular_at
/// (pass a precomputed regularity mask to skip the Maurer-Cartan pass).
SurfaceGrid project_mu(const ExtendedFrame& f, const ProjectionParams& params,
                       const std::vector<unsigned char>* regular = nullptr);

/// f = F^|_lb F^|_la^-1, n = f Ad_{F^|_la} e3. Throws DegenerateMu when la == lb.
SurfaceGrid project_two_point(const ExtendedFrame& f, double la, double lb,
                              const std::vector<unsigned char>* regular = nullptr);

/// Sym formula 2 dF^/dlambda F^^-1 at lambda = 1, in the hyperplane x0 = 0; normal Ad_F e3.
SurfaceGrid sym(const ExtendedFrame& f, const std::vector<unsigned char>* regular = nullptr);

/// (2 / (1 - mu)) (f_mu - e0): a sphere of radius 2 / |1 - mu| centered at -2 / (1 - mu) e0.
SurfaceGrid scaled_projection(const ExtendedFrame& f, double mu, const std::vector<unsigned char>* regular = nullptr);

/// The mu -> 0 limit in coordinates (u~, v~) = (u, v / mu):
/// g0 = C0(u~) exp(v~ V1(u~)) K0(u~)^-1, with C0 the lambda^0 coefficient and K0 the
/// lambda = 1 value of F^(u~, 0), and V1 = B_-1(u~, 0) = C0^-1 (eta_minus)_-1(0) C0.
/// The grid's u range must contain 0 or the frame is left unnormalized (F^(0, 0) = I).
SurfaceGrid flat_limit(const PotentialPair& pair, const GridSpec& grid, const TruncationPolicy& policy);

struct GaussMaps {
    std::vector<Vec3> normalGauss;                  ///< nu = f^-1 n = Ad_F e3
    std::vector<std::pair<Vec3, Vec3>> lagrangian;  ///< (Ad_G e3, Ad_F e3)
    std::vector<std::pair<Vec4, Vec4>> legendrian;  ///< (f, n)
};

GaussMaps gauss_maps(const SurfaceGrid& s, const ExtendedFrame& f, double mu);

/// f^r = cos r f + sin r n, n^r = -sin r f + cos r n. Points where the immersion
/// condition cos 2r - sin 2r H + sin^2 r K vanishes (|.| <= tol) are masked.
SurfaceGrid parallel_surface(const SurfaceGrid& s, double r, double tol = 1e-3);

/// (x1, x2, x3) / (1 + x0), projecting from the south pole (-1, 0, 0, 0). Throws AtSouthPole.
Vec3 stereographic(const Vec4& x);

/// Control surface with a varying parameter: f = F^|_{mu(u)} F^|_1^-1 where mu runs
/// linearly from muA at the first u row to muB at the last. Its curvature is not
/// constant; normals are estimated numerically (orthogonal to f, f_u, f_v).
SurfaceGrid ramp_projection(const ExtendedFrame& f, double muA, double muB);

}  // namespace cgc
