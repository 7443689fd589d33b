#include "cgc/projections.hpp"

#include <cmath>
#include <sstream>

#include "cgc/geometry.hpp"
#include "cgc/parallel.hpp"
#include "fd.hpp"

namespace cgc {

ProjectionParams::ProjectionParams(double mu_) : mu(mu_) {
    if (mu == 1.0) throw DegenerateMu("mu=1 degenerates to a constant map; use the Sym formula");
    if (mu == 0.0) throw DegenerateMu("mu=0 is a pole of the frame; use the flat limit");
}

Vec4 quaternion_part(const Matrix2& m) {
    return {0.5 * (m.a + m.d).real(), 0.5 * (m.b - m.c).real(), 0.5 * (m.b + m.c).imag(), 0.5 * (m.a - m.d).imag()};
}

Vec4 su2_to_r4(const Matrix2& m, double tol) {
    if (!is_su2(m, tol)) throw NotUnitary("su2_to_r4: matrix is not in SU(2)");
    return quaternion_part(m);
}

Matrix2 r4_to_su2(const Vec4& x, double tol) {
    if (std::abs(norm(x) - 1.0) > tol) throw NotUnitNorm("r4_to_su2: vector is not unit length");
    return {cplx(x[0], x[3]), cplx(x[1], x[2]), cplx(-x[1], x[2]), cplx(x[0], -x[3])};
}

namespace {

Vec4 unit(const Vec4& x) { return (1.0 / norm(x)) * x; }

/// Unit position of G F^-1 and unit normal G e3 F^-1, re-orthogonalized against the position.
void place(const Matrix2& G, const Matrix2& F, Vec4& pos, Vec4& nrm) {
    const Matrix2 Finv = F.inverse();
    pos = unit(quaternion_part(G * Finv));
    const Vec4 n = quaternion_part(G * basis::e3 * Finv);
    nrm = unit(n - dot(n, pos) * pos);
}

std::vector<unsigned char> combined_mask(const ExtendedFrame& f, const std::vector<unsigned char>* regular) {
    std::vector<unsigned char> reg = regular ? *regular : regular_at(maurer_cartan(f));
    if (reg.size() != f.valid.size()) throw Error("projection: regularity mask does not match the grid");
    for (std::size_t k = 0; k < reg.size(); ++k) reg[k] = static_cast<unsigned char>(reg[k] && f.valid[k]);
    return reg;
}

SurfaceGrid empty_surface(const GridSpec& grid, Target t) {
    SurfaceGrid s;
    s.grid = grid;
    s.target = t;
    s.position.resize(grid.size());
    s.normal.resize(grid.size());
    s.frameF.resize(grid.size());
    s.valid.assign(grid.size(), 1);
    return s;
}

}  // namespace

SurfaceGrid project_two_point(const ExtendedFrame& f, double la, double lb, const std::vector<unsigned char>* regular) {
    if (la == lb) throw DegenerateMu("project_two_point: lambda_a == lambda_b gives a constant map");
    if (la == 0.0 || lb == 0.0) throw DegenerateMu("project_two_point: lambda = 0 is a pole of the frame");
    const auto Fa = evaluate_frame(f, la);
    const auto Fb = evaluate_frame(f, lb);
    SurfaceGrid s = empty_surface(f.grid, Target::S3);
    s.valid = combined_mask(f, regular);
    parallel_for(s.position.size(), [&](std::size_t k) {
        place(Fb[k], Fa[k], s.position[k], s.normal[k]);
        s.frameF[k] = Fa[k];
    });
    return s;
}

SurfaceGrid project_mu(const ExtendedFrame& f, const ProjectionParams& params, const std::vector<unsigned char>* regular) {
    return project_two_point(f, 1.0, params.mu, regular);
}

SurfaceGrid sym(const ExtendedFrame& f, const std::vector<unsigned char>* regular) {
    const auto F = evaluate_frame(f, 1.0);
    SurfaceGrid s = empty_surface(f.grid, Target::E3);
    s.valid = combined_mask(f, regular);
    s.radius = 0.0;
    parallel_for(s.position.size(), [&](std::size_t k) {
        // values are reindexed by associated_frame, so the formal derivative already carries the scale
        const Matrix2 dF = evaluate(d_lambda(f.values[k]), 1.0);
        const Matrix2 Finv = F[k].inverse();
        const Vec3 x = su2_coords(2.0 * (dF * Finv));
        const Vec3 n = su2_coords(F[k] * basis::e3 * Finv);
        s.position[k] = {0.0, x[0], x[1], x[2]};
        s.normal[k] = unit(Vec4{0.0, n[0], n[1], n[2]});
        s.frameF[k] = F[k];
    });
    return s;
}

SurfaceGrid scaled_projection(const ExtendedFrame& f, double mu, const std::vector<unsigned char>* regular) {
    SurfaceGrid s = project_mu(f, ProjectionParams(mu), regular);
    const double c = 2.0 / (1.0 - mu);
    for (auto& x : s.position) x = c * (x - Vec4{1.0, 0.0, 0.0, 0.0});
    s.radius = std::abs(c);
    s.center = {-c, 0.0, 0.0, 0.0};
    return s;
}

SurfaceGrid flat_limit(const PotentialPair& pair, const GridSpec& grid, const TruncationPolicy& policy) {
    grid.validate();
    policy.validate();
    validate(pair);
    const auto us = grid.u_samples();
    const auto fPlus = integrate_axis(pair.etaPlus, us, policy);
    const Matrix2 etaM = pair.etaMinus.coefficient(-1, 0.0);

    SurfaceGrid s = empty_surface(grid, Target::S3);
    parallel_for(static_cast<std::size_t>(grid.nU), [&](std::size_t i) {
        // F^(u, 0) = F+(u) H-(u, 0), the split of F+(u)^-1; it has only nonnegative powers.
        Matrix2 C0, K0;
        bool ok = true;
        try {
            const BirkhoffFactors bf = birkhoff_split(inverse(fPlus[i], policy), policy.maxDegree, policy);
            const LoopMatrix axis = mul(fPlus[i], bf.hMinus, policy);
            C0 = axis.coeff(0);
            K0 = evaluate(axis, 1.0);
        } catch (const OffBigCell&) {
            ok = false;
        } catch (const NotInvertible&) {
            ok = false;
        }
        const Matrix2 V1 = C0.inverse() * etaM * C0;
        for (int j = 0; j < grid.nV; ++j) {
            const std::size_t k = grid.index(static_cast<int>(i), j);
            if (!ok) {
                s.valid[k] = 0;
                continue;
            }
            const Matrix2 H = C0 * su2_exp(grid.v(j) * V1);
            place(H, K0, s.position[k], s.normal[k]);
            s.frameF[k] = K0;
        }
    });
    return s;
}

GaussMaps gauss_maps(const SurfaceGrid& s, const ExtendedFrame& f, double mu) {
    if (s.target != Target::S3) throw Error("gauss_maps: needs a surface in the 3-sphere");
    const ProjectionParams params(mu);
    const auto G = evaluate_frame(f, params.mu);
    GaussMaps out;
    const std::size_t n = s.position.size();
    out.normalGauss.resize(n);
    out.lagrangian.resize(n);
    out.legendrian.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Matrix2& F = s.frameF[k];
        const Vec3 nuF = su2_coords(F * basis::e3 * F.inverse());
        const Vec3 nuG = su2_coords(G[k] * basis::e3 * G[k].inverse());
        out.normalGauss[k] = (1.0 / norm(nuF)) * nuF;
        out.lagrangian[k] = {(1.0 / norm(nuG)) * nuG, out.normalGauss[k]};
        out.legendrian[k] = {s.position[k], s.normal[k]};
    }
    return out;
}

SurfaceGrid parallel_surface(const SurfaceGrid& s, double r, double tol) {
    if (s.target != Target::S3 || s.radius != 1.0 || norm(s.center) != 0.0)
        throw Error("parallel_surface: needs a surface in the unit 3-sphere");
    SurfaceGrid out = s;
    const double c = std::cos(r), sn = std::sin(r);
    for (std::size_t k = 0; k < s.position.size(); ++k) {
        out.position[k] = c * s.position[k] + sn * s.normal[k];
        out.normal[k] = c * s.normal[k] - sn * s.position[k];
    }
    if (sn == 0.0) return out;  // cos 2r = 1: always an immersion where f is

    const FundamentalForms forms = fundamental_forms(s);
    const auto K = curvature(forms);
    const auto H = mean_curvature(forms);
    for (std::size_t k = 0; k < s.position.size(); ++k) {
        const double cond = std::cos(2.0 * r) - std::sin(2.0 * r) * H[k] + sn * sn * K[k];
        if (!(std::abs(cond) > tol)) out.valid[k] = 0;
    }
    return out;
}

Vec3 stereographic(const Vec4& x) {
    const double d = 1.0 + x[0];
    if (std::abs(d) <= 1e-12) throw AtSouthPole("stereographic: point is the south pole (-1, 0, 0, 0)");
    return {x[1] / d, x[2] / d, x[3] / d};
}

SurfaceGrid ramp_projection(const ExtendedFrame& f, double muA, double muB) {
    const GridSpec& g = f.grid;
    const auto F = evaluate_frame(f, 1.0);
    SurfaceGrid s = empty_surface(g, Target::S3);
    s.valid = f.valid;
    std::vector<Vec4> reference(g.size());
    for (int i = 0; i < g.nU; ++i) {
        const double mu = g.nU > 1 ? muA + (muB - muA) * i / (g.nU - 1) : muA;
        const ProjectionParams params(mu);
        const auto G = evaluate_frame(f, params.mu);
        for (int j = 0; j < g.nV; ++j) {
            const std::size_t k = g.index(i, j);
            place(G[k], F[k], s.position[k], reference[k]);
            s.frameF[k] = F[k];
        }
    }
    const auto fu = fd::field(s.position, g, true);
    const auto fv = fd::field(s.position, g, false);
    for (std::size_t k = 0; k < g.size(); ++k) {
        Vec4 n = fd::cross4(s.position[k], fu[k], fv[k]);
        const double len = norm(n);
        if (!(len > 0.0)) {
            s.valid[k] = 0;
            s.normal[k] = reference[k];
            continue;
        }
        n = (1.0 / len) * n;
        s.normal[k] = dot(n, reference[k]) < 0.0 ? -1.0 * n : n;
    }
    return s;
}

}  // namespace cgc
