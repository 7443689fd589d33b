#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "cgc/dalembert.hpp"
#include "cgc/projections.hpp"

namespace cgc {

/// First and second fundamental forms by finite differences.
/// I = E du^2 + 2F du dv + G dv^2, II = e du^2 + 2f du dv + g dv^2.
struct FundamentalForms {
    GridSpec grid;
    Target target = Target::S3;
    double radius = 1.0;
    std::vector<double> E, F, G, e, f, g;
    /// Oriented area density det(f - c, f_u, f_v, n) (S3) or det(f_u, f_v, n) (E3); equals AB sin(phi).
    std::vector<double> orientedArea;
    std::vector<unsigned char> valid;

    std::size_t size() const { return E.size(); }
    double detI(std::size_t k) const { return E[k] * G[k] - F[k] * F[k]; }
    double detII(std::size_t k) const { return e[k] * g[k] - f[k] * f[k]; }
};

/// Central differences inside, second-order one-sided on the boundary.
FundamentalForms fundamental_forms(const SurfaceGrid& s);

/// Central differences of accuracy order 2, 4, 6 or 8 everywhere; points closer to the
/// border than the stencil radius (order / 2) are marked invalid. Throws Error on other orders.
FundamentalForms fundamental_forms(const SurfaceGrid& s, int order);

/// K = det II / det I (+ 1/r^2 for sphere targets). NaN where det I <= 0 or invalid.
std::vector<double> curvature(const FundamentalForms& forms);

/// Mean curvature tr(I^-1 II) / 2 with respect to the surface normal. NaN where undefined.
std::vector<double> mean_curvature(const FundamentalForms& forms);

/// Normal Gauss map nu = f^-1 n in su(2) = R^3 (S3 targets), or n itself (E3).
std::vector<Vec3> normal_gauss(const SurfaceGrid& s);

struct Harmonicity {
    std::vector<double> residual;  ///< |nu_uv - <nu_uv, nu> nu|
    std::vector<double> k;         ///< <nu_uv, nu>
    /// Discretization floor: Richardson estimate |D_2h nu - D_h nu| / 3 of the error of the
    /// mixed-difference stencil, plus a rounding allowance 16 eps / (hu hv). NaN within two
    /// points of the boundary.
    std::vector<double> floor;
};

Harmonicity harmonicity_residual(const std::vector<Vec3>& nu, const GridSpec& grid);

struct GaussCodazzi {
    std::vector<double> gauss;     ///< |phi_uv + K A B sin(phi)|
    std::vector<double> codazziU;  ///< |d(A rho)/dv|
    std::vector<double> codazziV;  ///< |d(B rho)/du|
    std::vector<double> phi;       ///< signed angle between f_u and f_v
};

/// Reduced Gauss and Codazzi equations for constant rho. K is the constant curvature
/// the surface is supposed to have (1 - rho^2 on the unit sphere).
GaussCodazzi gauss_codazzi_residuals(const FundamentalForms& forms, double rho, double K);

struct SingularSet {
    std::vector<unsigned char> flags;
    /// Connected flagged curves in index space (i, j), averaged across their width.
    std::vector<std::vector<std::pair<double, double>>> polylines;
};

/// Flags det I <= 1e-6 max det I, and both ends of every grid edge across which the
/// oriented area changes sign (the zero set of det I passes between the two samples).
SingularSet singular_set(const FundamentalForms& forms);

/// Closed-form forms from Maurer-Cartan data: A = (mu-1)|B_1|, B = (1/mu-1)|B_-1|,
/// F = AB cos(phi), e = g = 0, f = rho AB sin(phi), sin(phi) from the e3 component of B_1 x B_-1.
FundamentalForms predicted_forms(const MCData& mc, double mu);

struct DiagnosticsRow {
    int i = 0, j = 0;
    double u = 0, v = 0;
    double E = 0, F = 0, G = 0, e = 0, f = 0, g = 0;
    double K = 0;
    double harmonic = 0, harmonicK = 0;
    double gauss = 0, codazziU = 0, codazziV = 0;
    double offAsymptotic = 0;
    bool singular = false, valid = false;
};

struct DiagnosticsReport {
    GridSpec grid;
    std::vector<DiagnosticsRow> rows;
};

/// Curvature of the image of a coordinate line (the row j = index when alongU, else the column
/// i = index) inside the target: geodesic curvature in the sphere for S3, space-curve curvature
/// for E3. Zero for great circles and straight lines. NaN at invalid samples.
std::vector<double> coordinate_line_curvature(const SurfaceGrid& s, bool alongU, int index);

/// Full per-point diagnostics for a surface with constant rho and curvature K.
DiagnosticsReport diagnose(const SurfaceGrid& s, double rho, double K);

/// CSV with header i,j,u,v,E,F,G,e,f,g,K_est,res_harmonic,res_gauss,res_codazzi_u,res_codazzi_v,singular,valid.
void write_csv(const DiagnosticsReport& report, std::ostream& out);

/// Statistics helpers over interior valid (optionally non-singular) points.
std::vector<unsigned char> interior_mask(const GridSpec& grid, const std::vector<unsigned char>& valid, int margin = 1);
double median(std::vector<double> values);
std::vector<double> masked(const std::vector<double>& field, const std::vector<unsigned char>& mask);

}  // namespace cgc
