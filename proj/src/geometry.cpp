#include "cgc/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <ostream>

#include "cgc/parallel.hpp"
#include "fd.hpp"

namespace cgc {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool neighborhood_valid(const std::vector<unsigned char>& valid, const GridSpec& g, int i, int j) {
    for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
            const int a = std::clamp(i + di, 0, g.nU - 1), b = std::clamp(j + dj, 0, g.nV - 1);
            if (!valid[g.index(a, b)]) return false;
        }
    return true;
}

/// Unit radial direction of a sphere-type surface; e0 for E3 so that det4 reduces to det3.
Vec4 radial(const SurfaceGrid& s, std::size_t k) {
    if (s.target == Target::E3) return {1.0, 0.0, 0.0, 0.0};
    return (1.0 / s.radius) * (s.position[k] - s.center);
}

Matrix2 quaternion(const Vec4& x) {
    return {cplx(x[0], x[3]), cplx(x[1], x[2]), cplx(-x[1], x[2]), cplx(x[0], -x[3])};
}

double wrap(double a) { return std::remainder(a, 2.0 * M_PI); }

/// d(psi)/du or d(psi)/dv for an angle field, differencing modulo 2 pi.
double angle_derivative(const std::vector<double>& psi, const GridSpec& g, int i, int j, bool alongU) {
    const int n = alongU ? g.nU : g.nV;
    const int k = alongU ? i : j;
    const double h = alongU ? g.hu() : g.hv();
    auto at = [&](int m) { return alongU ? psi[g.index(m, j)] : psi[g.index(i, m)]; };
    if (n == 2) return wrap(at(1) - at(0)) / h;
    if (k == 0) return (4.0 * wrap(at(1) - at(0)) - wrap(at(2) - at(0))) / (2.0 * h);
    if (k == n - 1) return (4.0 * wrap(at(n - 1) - at(n - 2)) - wrap(at(n - 1) - at(n - 3))) / (2.0 * h);
    return wrap(at(k + 1) - at(k - 1)) / (2.0 * h);
}

}  // namespace

FundamentalForms fundamental_forms(const SurfaceGrid& s) {
    const GridSpec& g = s.grid;
    const std::size_t n = g.size();
    FundamentalForms out;
    out.grid = g;
    out.target = s.target;
    out.radius = s.radius;
    for (auto* v : {&out.E, &out.F, &out.G, &out.e, &out.f, &out.g, &out.orientedArea}) v->assign(n, 0.0);
    out.valid.assign(n, 0);

    const auto fu = fd::field(s.position, g, true);
    parallel_for(static_cast<std::size_t>(g.nU), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        for (int j = 0; j < g.nV; ++j) {
            const std::size_t k = g.index(i, j);
            const Vec4 xu = fu[k];
            const Vec4 xv = fd::first(s.position, g, i, j, false);
            const Vec4 xuu = fd::second(s.position, g, i, j, true);
            const Vec4 xvv = fd::second(s.position, g, i, j, false);
            const Vec4 xuv = fd::first(fu, g, i, j, false);
            const Vec4& nrm = s.normal[k];
            out.E[k] = dot(xu, xu);
            out.F[k] = dot(xu, xv);
            out.G[k] = dot(xv, xv);
            out.e[k] = dot(xuu, nrm);
            out.f[k] = dot(xuv, nrm);
            out.g[k] = dot(xvv, nrm);
            out.orientedArea[k] = fd::det4(radial(s, k), xu, xv, nrm);
            out.valid[k] = neighborhood_valid(s.valid, g, i, j) ? 1 : 0;
        }
    });
    return out;
}

namespace {

struct Stencil {
    std::vector<double> d1;  ///< first derivative: weight of x[k+m] - x[k-m], m = 1..r
    std::vector<double> d2;  ///< second derivative: centre weight, then weight of x[k+m] + x[k-m]
};

Stencil central_stencil(int order) {
    switch (order) {
        case 2: return {{0.5}, {-2.0, 1.0}};
        case 4: return {{2.0 / 3.0, -1.0 / 12.0}, {-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0}};
        case 6: return {{3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0}, {-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0, 1.0 / 90.0}};
        case 8:
            return {{4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0},
                    {-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0}};
        default: throw Error("fundamental_forms: order must be 2, 4, 6 or 8");
    }
}

}  // namespace

FundamentalForms fundamental_forms(const SurfaceGrid& s, int order) {
    const Stencil st = central_stencil(order);
    const int r = order / 2;
    const GridSpec& g = s.grid;
    const std::size_t n = g.size();
    FundamentalForms out;
    out.grid = g;
    out.target = s.target;
    out.radius = s.radius;
    for (auto* v : {&out.E, &out.F, &out.G, &out.e, &out.f, &out.g, &out.orientedArea}) v->assign(n, 0.0);
    out.valid.assign(n, 0);
    const double hu = g.hu(), hv = g.hv();
    parallel_for(static_cast<std::size_t>(g.nU), [&](std::size_t ii) {
        const int i = static_cast<int>(ii);
        if (i < r || i >= g.nU - r) return;
        for (int j = r; j < g.nV - r; ++j) {
            bool ok = true;
            for (int di = -r; di <= r && ok; ++di)
                for (int dj = -r; dj <= r && ok; ++dj) ok = s.valid[g.index(i + di, j + dj)] != 0;
            if (!ok) continue;
            auto P = [&](int di, int dj) -> const Vec4& { return s.position[g.index(i + di, j + dj)]; };
            Vec4 xu{}, xv{}, xuu = st.d2[0] * P(0, 0), xvv = st.d2[0] * P(0, 0), xuv{};
            for (int m = 1; m <= r; ++m) {
                const double w1 = st.d1[static_cast<std::size_t>(m - 1)], w2 = st.d2[static_cast<std::size_t>(m)];
                xu = xu + w1 * (P(m, 0) - P(-m, 0));
                xv = xv + w1 * (P(0, m) - P(0, -m));
                xuu = xuu + w2 * (P(m, 0) + P(-m, 0));
                xvv = xvv + w2 * (P(0, m) + P(0, -m));
                for (int q = 1; q <= r; ++q)
                    xuv = xuv + (w1 * st.d1[static_cast<std::size_t>(q - 1)]) * (P(m, q) - P(m, -q) - P(-m, q) + P(-m, -q));
            }
            xu = (1.0 / hu) * xu;
            xv = (1.0 / hv) * xv;
            xuu = (1.0 / (hu * hu)) * xuu;
            xvv = (1.0 / (hv * hv)) * xvv;
            xuv = (1.0 / (hu * hv)) * xuv;
            const std::size_t k = g.index(i, j);
            const Vec4& nrm = s.normal[k];
            out.E[k] = dot(xu, xu);
            out.F[k] = dot(xu, xv);
            out.G[k] = dot(xv, xv);
            out.e[k] = dot(xuu, nrm);
            out.f[k] = dot(xuv, nrm);
            out.g[k] = dot(xvv, nrm);
            out.orientedArea[k] = fd::det4(radial(s, k), xu, xv, nrm);
            out.valid[k] = 1;
        }
    });
    return out;
}

std::vector<double> curvature(const FundamentalForms& forms) {
    std::vector<double> K(forms.size(), kNaN);
    const double ambient = forms.target == Target::S3 ? 1.0 / (forms.radius * forms.radius) : 0.0;
    for (std::size_t k = 0; k < K.size(); ++k) {
        const double d = forms.detI(k);
        if (forms.valid[k] && d > 0.0) K[k] = ambient + forms.detII(k) / d;
    }
    return K;
}

std::vector<double> mean_curvature(const FundamentalForms& forms) {
    std::vector<double> H(forms.size(), kNaN);
    for (std::size_t k = 0; k < H.size(); ++k) {
        const double d = forms.detI(k);
        if (forms.valid[k] && d > 0.0)
            H[k] = (forms.e[k] * forms.G[k] - 2.0 * forms.f[k] * forms.F[k] + forms.g[k] * forms.E[k]) / (2.0 * d);
    }
    return H;
}

std::vector<Vec3> normal_gauss(const SurfaceGrid& s) {
    std::vector<Vec3> nu(s.position.size());
    for (std::size_t k = 0; k < nu.size(); ++k) {
        if (s.target == Target::E3) {
            nu[k] = {s.normal[k][1], s.normal[k][2], s.normal[k][3]};
        } else {
            nu[k] = su2_coords(quaternion(radial(s, k)).dagger() * quaternion(s.normal[k]));
        }
    }
    return nu;
}

Harmonicity harmonicity_residual(const std::vector<Vec3>& nu, const GridSpec& grid) {
    const auto nuU = fd::field(nu, grid, true);
    const auto nuUV = fd::field(nuU, grid, false);
    Harmonicity h;
    h.residual.resize(nu.size());
    h.k.resize(nu.size());
    for (std::size_t k = 0; k < nu.size(); ++k) {
        const double kk = dot(nuUV[k], nu[k]);
        h.k[k] = kk;
        h.residual[k] = norm(nuUV[k] - kk * nu[k]);
    }
    h.floor.assign(nu.size(), kNaN);
    const double scale = 1.0 / (16.0 * grid.hu() * grid.hv());
    // rounding in the mixed stencil: a few ulps of |nu| = 1 divided by hu hv
    const double roundoff = 16.0 * std::numeric_limits<double>::epsilon() / (grid.hu() * grid.hv());
    for (int i = 2; i < grid.nU - 2; ++i)
        for (int j = 2; j < grid.nV - 2; ++j) {
            auto at = [&](int di, int dj) { return nu[grid.index(i + di, j + dj)]; };
            const Vec3 wide = scale * (at(2, 2) - at(2, -2) - at(-2, 2) + at(-2, -2));
            h.floor[grid.index(i, j)] = norm(wide - nuUV[grid.index(i, j)]) / 3.0 + roundoff;
        }
    return h;
}

GaussCodazzi gauss_codazzi_residuals(const FundamentalForms& forms, double rho, double K) {
    const GridSpec& g = forms.grid;
    const std::size_t n = forms.size();
    GaussCodazzi out;
    out.phi.resize(n);
    std::vector<double> a(n), b(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.phi[k] = std::atan2(forms.orientedArea[k], forms.F[k]);
        a[k] = rho * std::sqrt(std::max(0.0, forms.E[k]));
        b[k] = rho * std::sqrt(std::max(0.0, forms.G[k]));
    }
    std::vector<double> phiU(n);
    for (int i = 0; i < g.nU; ++i)
        for (int j = 0; j < g.nV; ++j) phiU[g.index(i, j)] = angle_derivative(out.phi, g, i, j, true);
    out.gauss.resize(n);
    out.codazziU.resize(n);
    out.codazziV.resize(n);
    for (int i = 0; i < g.nU; ++i)
        for (int j = 0; j < g.nV; ++j) {
            const std::size_t k = g.index(i, j);
            const double phiUV = fd::first(phiU, g, i, j, false);
            // A B sin(phi) is the oriented area density
            out.gauss[k] = std::abs(phiUV + K * forms.orientedArea[k]);
            out.codazziU[k] = std::abs(fd::first(a, g, i, j, false));
            out.codazziV[k] = std::abs(fd::first(b, g, i, j, true));
        }
    return out;
}

SingularSet singular_set(const FundamentalForms& forms) {
    const GridSpec& g = forms.grid;
    const std::size_t n = forms.size();
    SingularSet out;
    out.flags.assign(n, 0);
    double maxDet = 0.0;
    for (std::size_t k = 0; k < n; ++k)
        if (forms.valid[k]) maxDet = std::max(maxDet, forms.detI(k));
    for (std::size_t k = 0; k < n; ++k)
        if (forms.valid[k] && forms.detI(k) <= 1e-6 * maxDet) out.flags[k] = 1;
    auto check_edge = [&](std::size_t p, std::size_t q) {
        if (forms.valid[p] && forms.valid[q] && forms.orientedArea[p] * forms.orientedArea[q] < 0.0)
            out.flags[p] = out.flags[q] = 1;
    };
    for (int i = 0; i < g.nU; ++i)
        for (int j = 0; j < g.nV; ++j) {
            if (i + 1 < g.nU) check_edge(g.index(i, j), g.index(i + 1, j));
            if (j + 1 < g.nV) check_edge(g.index(i, j), g.index(i, j + 1));
        }

    std::vector<unsigned char> seen(n, 0);
    for (std::size_t start = 0; start < n; ++start) {
        if (!out.flags[start] || seen[start]) continue;
        std::vector<std::pair<int, int>> comp;
        std::deque<std::size_t> queue{start};
        seen[start] = 1;
        while (!queue.empty()) {
            const std::size_t k = queue.front();
            queue.pop_front();
            const int i = static_cast<int>(k / static_cast<std::size_t>(g.nV)), j = static_cast<int>(k % static_cast<std::size_t>(g.nV));
            comp.emplace_back(i, j);
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int a = i + di, b = j + dj;
                    if (a < 0 || b < 0 || a >= g.nU || b >= g.nV) continue;
                    const std::size_t q = g.index(a, b);
                    if (out.flags[q] && !seen[q]) {
                        seen[q] = 1;
                        queue.push_back(q);
                    }
                }
        }
        int iLo = g.nU, iHi = -1, jLo = g.nV, jHi = -1;
        for (auto [i, j] : comp) {
            iLo = std::min(iLo, i), iHi = std::max(iHi, i);
            jLo = std::min(jLo, j), jHi = std::max(jHi, j);
        }
        const bool alongI = (iHi - iLo) >= (jHi - jLo);
        std::map<int, std::pair<double, int>> bins;  // major coordinate -> (sum of minor, count)
        for (auto [i, j] : comp) {
            auto& bin = bins[alongI ? i : j];
            bin.first += alongI ? j : i;
            bin.second += 1;
        }
        std::vector<std::pair<double, double>> line;
        for (const auto& [major, bin] : bins) {
            const double minor = bin.first / bin.second;
            line.emplace_back(alongI ? double(major) : minor, alongI ? minor : double(major));
        }
        out.polylines.push_back(std::move(line));
    }
    return out;
}

FundamentalForms predicted_forms(const MCData& mc, double mu) {
    const ProjectionParams params(mu);
    const double rho = params.rho();
    const std::size_t n = mc.b1.size();
    FundamentalForms out;
    out.grid = mc.grid;
    for (auto* v : {&out.E, &out.F, &out.G, &out.e, &out.f, &out.g, &out.orientedArea}) v->assign(n, 0.0);
    out.valid = mc.valid;
    for (std::size_t k = 0; k < n; ++k) {
        const Vec3 p = su2_coords(mc.b1[k]), q = su2_coords(mc.bm1[k]);
        const double np = norm(p), nq = norm(q);
        const double A = (mu - 1.0) * np;
        const double B = (1.0 / mu - 1.0) * nq;
        const double denom = np * nq;
        const double c = denom > 0.0 ? dot(p, q) / denom : 0.0;
        const double s = denom > 0.0 ? cross(p, q)[2] / denom : 0.0;
        out.E[k] = A * A;
        out.G[k] = B * B;
        out.F[k] = A * B * c;
        out.f[k] = rho * A * B * s;
        out.orientedArea[k] = A * B * s;
    }
    return out;
}

std::vector<double> coordinate_line_curvature(const SurfaceGrid& s, bool alongU, int index) {
    const GridSpec& g = s.grid;
    const int n = alongU ? g.nU : g.nV;
    if (index < 0 || index >= (alongU ? g.nV : g.nU)) throw Error("coordinate_line_curvature: index out of range");
    std::vector<double> out(static_cast<std::size_t>(n), kNaN);
    for (int m = 0; m < n; ++m) {
        const int i = alongU ? m : index, j = alongU ? index : m;
        const std::size_t k = g.index(i, j);
        if (!s.valid[k]) continue;
        const Vec4 d1 = fd::first(s.position, g, i, j, alongU);
        Vec4 d2 = fd::second(s.position, g, i, j, alongU);
        const double speed2 = dot(d1, d1);
        if (!(speed2 > 0.0)) continue;
        d2 = d2 - (dot(d2, d1) / speed2) * d1;
        if (s.target == Target::S3) {
            const Vec4 r = radial(s, k);
            d2 = d2 - dot(d2, r) * r;
        }
        out[static_cast<std::size_t>(m)] = norm(d2) / speed2;
    }
    return out;
}

DiagnosticsReport diagnose(const SurfaceGrid& s, double rho, double K) {
    const FundamentalForms forms = fundamental_forms(s);
    const auto Kest = curvature(forms);
    const auto harm = harmonicity_residual(normal_gauss(s), s.grid);
    const auto gc = gauss_codazzi_residuals(forms, rho, K);
    const auto sing = singular_set(forms);
    DiagnosticsReport r;
    r.grid = s.grid;
    r.rows.resize(forms.size());
    for (int i = 0; i < s.grid.nU; ++i)
        for (int j = 0; j < s.grid.nV; ++j) {
            const std::size_t k = s.grid.index(i, j);
            DiagnosticsRow& row = r.rows[k];
            row.i = i;
            row.j = j;
            row.u = s.grid.u(i);
            row.v = s.grid.v(j);
            row.E = forms.E[k], row.F = forms.F[k], row.G = forms.G[k];
            row.e = forms.e[k], row.f = forms.f[k], row.g = forms.g[k];
            row.K = Kest[k];
            row.harmonic = harm.residual[k];
            row.harmonicK = harm.k[k];
            row.gauss = gc.gauss[k];
            row.codazziU = gc.codazziU[k];
            row.codazziV = gc.codazziV[k];
            row.offAsymptotic = std::max(std::abs(forms.e[k]), std::abs(forms.g[k]));
            row.singular = sing.flags[k] != 0;
            row.valid = forms.valid[k] != 0;
        }
    return r;
}

namespace {

void put(std::ostream& out, double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    out.write(buf, res.ptr - buf);
}

void put(std::ostream& out, int x) {
    char buf[16];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    out.write(buf, res.ptr - buf);
}

}  // namespace

void write_csv(const DiagnosticsReport& report, std::ostream& out) {
    out << "i,j,u,v,E,F,G,e,f,g,K_est,res_harmonic,res_gauss,res_codazzi_u,res_codazzi_v,singular,valid\n";
    for (const auto& r : report.rows) {
        put(out, r.i);
        out << ',';
        put(out, r.j);
        for (double x : {r.u, r.v, r.E, r.F, r.G, r.e, r.f, r.g, r.K, r.harmonic, r.gauss, r.codazziU, r.codazziV}) {
            out << ',';
            put(out, x);
        }
        out << ',' << (r.singular ? 1 : 0) << ',' << (r.valid ? 1 : 0) << '\n';
    }
}

std::vector<unsigned char> interior_mask(const GridSpec& grid, const std::vector<unsigned char>& valid, int margin) {
    std::vector<unsigned char> m(grid.size(), 0);
    for (int i = margin; i < grid.nU - margin; ++i)
        for (int j = margin; j < grid.nV - margin; ++j) {
            const std::size_t k = grid.index(i, j);
            m[k] = valid.empty() || valid[k] ? 1 : 0;
        }
    return m;
}

double median(std::vector<double> values) {
    values.erase(std::remove_if(values.begin(), values.end(), [](double x) { return !std::isfinite(x); }), values.end());
    if (values.empty()) return kNaN;
    const std::size_t mid = values.size() / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    const double hi = values[mid];
    if (values.size() % 2 == 1) return hi;
    const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
}

std::vector<double> masked(const std::vector<double>& field, const std::vector<unsigned char>& mask) {
    std::vector<double> out;
    for (std::size_t k = 0; k < field.size(); ++k)
        if (mask[k] && std::isfinite(field[k])) out.push_back(field[k]);
    return out;
}

}  // namespace cgc
