#include "cgc/dalembert.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include <Eigen/Dense>

#include "cgc/parallel.hpp"

namespace cgc {

void GridSpec::validate() const {
    if (nU < 2 || nV < 2) {
        std::ostringstream msg;
        msg << "grid: need at least 2 points per axis, got " << nU << "x" << nV;
        throw InvalidGrid(msg.str());
    }
    if (!(uRange.hi > uRange.lo) || !(vRange.hi > vRange.lo)) throw InvalidGrid("grid: degenerate coordinate range");
    if (basePoint) {
        const auto [i, j] = *basePoint;
        if (i < 0 || i >= nU || j < 0 || j >= nV) throw InvalidGrid("grid: base point outside the grid");
    }
}

std::vector<double> GridSpec::u_samples() const {
    std::vector<double> s(static_cast<std::size_t>(nU));
    for (int i = 0; i < nU; ++i) s[static_cast<std::size_t>(i)] = u(i);
    return s;
}

std::vector<double> GridSpec::v_samples() const {
    std::vector<double> s(static_cast<std::size_t>(nV));
    for (int j = 0; j < nV; ++j) s[static_cast<std::size_t>(j)] = v(j);
    return s;
}

std::pair<int, int> GridSpec::base_index() const {
    if (basePoint) return *basePoint;
    auto nearest = [](double lo, double h, int n) {
        const int k = static_cast<int>(std::lround(-lo / h));
        return std::clamp(k, 0, n - 1);
    };
    return {nearest(uRange.lo, hu(), nU), nearest(vRange.lo, hv(), nV)};
}

double ExtendedFrame::max_residual() const {
    double r = 0.0;
    for (std::size_t k = 0; k < residual.size(); ++k)
        if (valid[k]) r = std::max(r, residual[k]);
    return r;
}

namespace {

/// Step plan shared by the coefficient and fixed-lambda integrators: walk outward
/// from 0 through the sorted samples, with each gap split into steps no longer than
/// the smallest sample spacing.
struct Leg {
    double from, to;
    int steps;
    std::size_t target;  ///< sample index reached at the end of the leg
    bool fromOrigin;     ///< leg starts at 0 rather than at the previous sample
};

std::vector<Leg> step_plan(const std::vector<double>& samples, double maxStep = 0.0) {
    for (std::size_t k = 1; k < samples.size(); ++k)
        if (samples[k] < samples[k - 1]) throw InvalidGrid("integrate_axis: samples must be sorted");
    double hmax = 0.0;
    for (std::size_t k = 1; k < samples.size(); ++k) {
        const double gap = samples[k] - samples[k - 1];
        if (gap > 0.0 && (hmax == 0.0 || gap < hmax)) hmax = gap;
    }
    if (maxStep > 0.0 && (hmax == 0.0 || maxStep < hmax)) hmax = maxStep;
    auto steps_for = [&](double gap) {
        if (gap == 0.0) return 0;
        if (hmax == 0.0) return std::max(1, static_cast<int>(std::ceil(std::abs(gap) / 0.01)));
        return std::max(1, static_cast<int>(std::ceil(std::abs(gap) / hmax - 1e-9)));
    };

    std::vector<Leg> legs;
    const auto first_pos = std::lower_bound(samples.begin(), samples.end(), 0.0) - samples.begin();
    for (std::size_t k = static_cast<std::size_t>(first_pos); k < samples.size(); ++k) {
        const bool origin = k == static_cast<std::size_t>(first_pos);
        const double from = origin ? 0.0 : samples[k - 1];
        legs.push_back({from, samples[k], steps_for(samples[k] - from), k, origin});
    }
    for (std::size_t k = static_cast<std::size_t>(first_pos); k-- > 0;) {
        const bool origin = k + 1 == static_cast<std::size_t>(first_pos);
        const double from = origin ? 0.0 : samples[k + 1];
        legs.push_back({from, samples[k], steps_for(samples[k] - from), k, origin});
    }
    return legs;
}

template <class State, class Deriv>
std::vector<State> run_plan(const std::vector<double>& samples, const State& start, const Deriv& rk4_step,
                            double maxStep = 0.0) {
    std::vector<State> out(samples.size(), start);
    for (const Leg& leg : step_plan(samples, maxStep)) {
        State y = leg.fromOrigin ? start : out[leg.target + (leg.to > leg.from ? -1 : 1)];
        const double h = leg.steps ? (leg.to - leg.from) / leg.steps : 0.0;
        for (int s = 0; s < leg.steps; ++s) y = rk4_step(y, leg.from + s * h, h);
        out[leg.target] = std::move(y);
    }
    return out;
}

LoopMatrix axpy(const LoopMatrix& y, double a, const LoopMatrix& k) { return y + cplx(a) * k; }

}  // namespace

std::vector<LoopMatrix> integrate_axis(const AxisPotential& p, const std::vector<double>& samples,
                                       const TruncationPolicy& policy) {
    policy.validate();
    if (p.is_zero()) return std::vector<LoopMatrix>(samples.size(), LoopMatrix::identity());
    auto step = [&](const LoopMatrix& y, double x, double h) {
        const LoopMatrix e0 = p.at(x), eh = p.at(x + 0.5 * h), e1 = p.at(x + h);
        const LoopMatrix k1 = mul(y, e0, policy);
        const LoopMatrix k2 = mul(axpy(y, 0.5 * h, k1), eh, policy);
        const LoopMatrix k3 = mul(axpy(y, 0.5 * h, k2), eh, policy);
        const LoopMatrix k4 = mul(axpy(y, h, k3), e1, policy);
        LoopMatrix next = y + cplx(h / 6.0) * (k1 + cplx(2.0) * k2 + cplx(2.0) * k3 + k4);
        if (next.under_resolved()) {
            std::ostringstream msg;
            msg << "integrate_axis: truncation tail above " << policy.tailTolerance << " at coordinate " << x + h
                << "; increase maxDegree";
            throw TailOverflow(msg.str());
        }
        return next;
    };
    return run_plan(samples, LoopMatrix::identity(), step);
}

std::vector<Matrix2> integrate_axis_at(const AxisPotential& p, const std::vector<double>& samples, cplx lambda) {
    if (p.is_zero()) return std::vector<Matrix2>(samples.size(), Matrix2::identity());
    auto eta = [&](double x) { return evaluate(p.at(x), lambda); };
    auto step = [&](const Matrix2& y, double x, double h) {
        const Matrix2 e0 = eta(x), eh = eta(x + 0.5 * h), e1 = eta(x + h);
        const Matrix2 k1 = y * e0;
        const Matrix2 k2 = (y + (0.5 * h) * k1) * eh;
        const Matrix2 k3 = (y + (0.5 * h) * k2) * eh;
        const Matrix2 k4 = (y + h * k3) * e1;
        return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    };
    double stiffness = 0.0;
    for (double x : samples) stiffness = std::max(stiffness, eta(x).norm());
    if (!samples.empty()) stiffness = std::max(stiffness, eta(0.0).norm());
    return run_plan(samples, Matrix2::identity(), step, stiffness > 0.0 ? 0.02 / stiffness : 0.0);
}

BirkhoffFactors birkhoff_split(const LoopMatrix& phi, int M, const TruncationPolicy& policy, double threshold) {
    policy.validate();
    if (phi.empty()) throw NotInvertible("birkhoff_split: zero loop");
    const Matrix2 at1 = evaluate(phi, 1.0);
    if (std::abs(at1.det()) <= 1e-14 * std::max(1.0, at1.norm2())) throw NotInvertible("birkhoff_split: loop is singular");

    const int N = policy.maxDegree;
    const int D = std::max(0, -phi.low_degree());
    if (D == 0) return {LoopMatrix::identity(), restrict_degrees(phi, 0, N), 0.0};
    if (M <= 0) M = N;

    // Row r of G- Phi at power -j: Phi_{-j}[r,:] + sum_k c_k[r,:] Phi_{k-j} = 0 for j = 1..M+D.
    LoopMatrix g = LoopMatrix::identity();
    const bool twisted = is_twisted(phi);
    const int rows = M + D;
    for (int r = 0; r < 2; ++r) {
        const int unknownsPerPower = twisted ? 1 : 2;
        const int eqPerPower = twisted ? 1 : 2;
        Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(rows * eqPerPower, M * unknownsPerPower);
        Eigen::VectorXcd rhs(rows * eqPerPower);
        for (int j = 1; j <= rows; ++j) {
            for (int qi = 0; qi < eqPerPower; ++qi) {
                // twisted: the only live column of row r at power -j
                const int q = twisted ? ((j % 2 == 0) ? r : 1 - r) : qi;
                const int row = (j - 1) * eqPerPower + qi;
                rhs(row) = -phi.coeff(-j)(r, q);
                for (int k = 1; k <= M; ++k) {
                    const Matrix2 pk = phi.coeff(k - j);
                    if (twisted) {
                        const int pcol = (k % 2 == 0) ? r : 1 - r;
                        A(row, k - 1) = pk(pcol, q);
                    } else {
                        A(row, 2 * (k - 1)) = pk(0, q);
                        A(row, 2 * (k - 1) + 1) = pk(1, q);
                    }
                }
            }
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
        qr.setThreshold(1e-13);
        if (qr.rank() < A.cols())
            throw OffBigCell("birkhoff_split: Toeplitz system is rank deficient (loop outside the big cell)");
        const Eigen::VectorXcd x = qr.solve(rhs);
        for (int k = 1; k <= M; ++k) {
            Matrix2& c = g.coeff_ref(-k);
            if (twisted) {
                c(r, (k % 2 == 0) ? r : 1 - r) = x(k - 1);
            } else {
                c(r, 0) = x(2 * (k - 1));
                c(r, 1) = x(2 * (k - 1) + 1);
            }
        }
    }

    const TruncationPolicy wide{std::max(N, M + D), policy.tailTolerance};
    BirkhoffFactors out;
    out.hPlus = restrict_degrees(mul(g, phi, wide), 0, N);
    out.hMinus = restrict_degrees(inverse(g, policy), -N, 0);
    out.residual = max_coeff_diff(mul(out.hMinus, out.hPlus, policy), restrict_degrees(phi, -N, N));
    if (!(out.residual <= threshold)) {
        std::ostringstream msg;
        msg << "birkhoff_split: residual " << out.residual << " above " << threshold << " (loop outside the big cell)";
        throw OffBigCell(msg.str());
    }
    return out;
}

ExtendedFrame extended_frame(const PotentialPair& pair, const GridSpec& grid, const TruncationPolicy& policy,
                             const FrameOptions& options) {
    grid.validate();
    policy.validate();
    validate(pair);

    const auto us = grid.u_samples();
    const auto vs = grid.v_samples();
    const auto fPlus = integrate_axis(pair.etaPlus, us, policy);
    const auto fMinus = integrate_axis(pair.etaMinus, vs, policy);
    std::vector<LoopMatrix> fPlusInv(fPlus.size());
    parallel_for(fPlus.size(), [&](std::size_t i) { fPlusInv[i] = inverse(fPlus[i], policy); });

    ExtendedFrame f;
    f.grid = grid;
    f.policy = policy;
    f.values.assign(grid.size(), LoopMatrix::identity());
    f.valid.assign(grid.size(), 1);
    f.residual.assign(grid.size(), 0.0);
    auto factors = std::make_shared<FrameFactors>();
    factors->etaPlus = pair.etaPlus;
    factors->etaMinus = pair.etaMinus;
    factors->uSamples = us;
    factors->vSamples = vs;
    factors->hMinus.assign(grid.size(), LoopMatrix::identity());
    factors->hPlus.assign(grid.size(), LoopMatrix::identity());

    std::mutex guard;
    const int M = options.birkhoffOrder > 0 ? options.birkhoffOrder : policy.maxDegree;
    parallel_for(grid.size(), [&](std::size_t idx) {
        const int i = static_cast<int>(idx / static_cast<std::size_t>(grid.nV));
        const int j = static_cast<int>(idx % static_cast<std::size_t>(grid.nV));
        const LoopMatrix phi = mul(fPlusInv[static_cast<std::size_t>(i)], fMinus[static_cast<std::size_t>(j)], policy);
        try {
            BirkhoffFactors bf = birkhoff_split(phi, M, policy, options.offBigCellThreshold);
            f.values[idx] = mul(fPlus[static_cast<std::size_t>(i)], bf.hMinus, policy);
            f.residual[idx] = bf.residual;
            factors->hMinus[idx] = std::move(bf.hMinus);
            factors->hPlus[idx] = std::move(bf.hPlus);
        } catch (const Error& e) {
            if (!dynamic_cast<const OffBigCell*>(&e) && !dynamic_cast<const NotInvertible*>(&e)) throw;
            if (options.throwOnOffBigCell) {
                std::ostringstream msg;
                msg << e.what() << " at grid point (" << i << ", " << j << "), u = " << grid.u(i) << ", v = " << grid.v(j);
                throw OffBigCell(msg.str(), i, j);
            }
            std::lock_guard<std::mutex> lock(guard);
            f.valid[idx] = 0;
            f.residual[idx] = std::numeric_limits<double>::infinity();
            f.offBigCell.emplace_back(i, j);
        }
    });
    std::sort(f.offBigCell.begin(), f.offBigCell.end());

    if (options.normalize) {
        const auto [ib, jb] = grid.base_index();
        const std::size_t b = grid.index(ib, jb);
        if (!f.valid[b]) throw OffBigCell("extended_frame: base point is outside the big cell", ib, jb);
        if (max_coeff_diff(f.values[b], LoopMatrix::identity()) > 1e-14) {
            const LoopMatrix nb = inverse(f.values[b], policy);
            parallel_for(grid.size(), [&](std::size_t idx) { f.values[idx] = mul(nb, f.values[idx], policy); });
            f.values[b] = LoopMatrix::identity();
        }
        f.normalized = true;
    }
    f.factors = std::move(factors);
    return f;
}

constexpr double kRouteSwitch = 0.75;

std::vector<Matrix2> evaluate_frame(const ExtendedFrame& f, double lambda) {
    if (lambda == 0.0) throw ZeroLambda("evaluate_frame: lambda must be nonzero");
    std::vector<Matrix2> out(f.values.size());
    if (!f.factors) {
        parallel_for(out.size(), [&](std::size_t k) { out[k] = evaluate(f.values[k], lambda); });
        return out;
    }
    const FrameFactors& fac = *f.factors;
    const double lam = lambda * f.scale;
    const auto nV = static_cast<std::size_t>(f.grid.nV);
    // H- coefficients decay faster than geometrically, so summing them stays accurate a little
    // inside the unit circle. Switching routes away from |lambda| = 1 keeps difference
    // quotients around lambda = 1 on one route.
    if (std::abs(lam) >= kRouteSwitch) {
        const auto fPlus = integrate_axis_at(fac.etaPlus, fac.uSamples, lam);
        parallel_for(out.size(), [&](std::size_t k) { out[k] = fPlus[k / nV] * evaluate(fac.hMinus[k], lam); });
    } else {
        const auto fMinus = integrate_axis_at(fac.etaMinus, fac.vSamples, lam);
        parallel_for(out.size(), [&](std::size_t k) {
            out[k] = f.valid[k] ? fMinus[k % nV] * evaluate(fac.hPlus[k], lam).inverse() : Matrix2::identity();
        });
    }
    if (f.normalized) {
        const auto [ib, jb] = f.grid.base_index();
        const Matrix2 nb = out[f.grid.index(ib, jb)].inverse();
        for (auto& m : out) m = nb * m;
    }
    return out;
}

double MCData::max_off_pattern(bool interiorOnly) const {
    double worst = 0.0;
    for (int i = 0; i < grid.nU; ++i)
        for (int j = 0; j < grid.nV; ++j) {
            if (interiorOnly && (i == 0 || j == 0 || i == grid.nU - 1 || j == grid.nV - 1)) continue;
            const std::size_t k = grid.index(i, j);
            if (valid[k]) worst = std::max(worst, offPattern[k]);
        }
    return worst;
}

namespace {

/// d/dx of values along one grid axis: central inside, second-order one-sided at the ends.
LoopMatrix axis_derivative(const std::vector<LoopMatrix>& vals, const GridSpec& g, int i, int j, bool alongU) {
    const int n = alongU ? g.nU : g.nV;
    const int k = alongU ? i : j;
    const double h = alongU ? g.hu() : g.hv();
    auto at = [&](int m) -> const LoopMatrix& { return alongU ? vals[g.index(m, j)] : vals[g.index(i, m)]; };
    if (n == 2) return cplx(1.0 / h) * (at(1) - at(0));
    if (k == 0) return cplx(1.0 / (2.0 * h)) * (cplx(-3.0) * at(0) + cplx(4.0) * at(1) - at(2));
    if (k == n - 1) return cplx(1.0 / (2.0 * h)) * (cplx(3.0) * at(n - 1) - cplx(4.0) * at(n - 2) + at(n - 3));
    return cplx(1.0 / (2.0 * h)) * (at(k + 1) - at(k - 1));
}

bool stencil_valid(const ExtendedFrame& f, int i, int j) {
    const GridSpec& g = f.grid;
    for (int di = -1; di <= 1; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
            const int a = std::clamp(i + di, 0, g.nU - 1), b = std::clamp(j + dj, 0, g.nV - 1);
            if (!f.valid[g.index(a, b)]) return false;
        }
    return true;
}

}  // namespace

MCData maurer_cartan(const ExtendedFrame& f) {
    const GridSpec& g = f.grid;
    MCData mc;
    mc.grid = g;
    const std::size_t n = g.size();
    mc.alpha0u.resize(n);
    mc.alpha0v.resize(n);
    mc.b1.resize(n);
    mc.bm1.resize(n);
    mc.offPattern.assign(n, 0.0);
    mc.valid.assign(n, 0);

    parallel_for(n, [&](std::size_t idx) {
        const int i = static_cast<int>(idx / static_cast<std::size_t>(g.nV));
        const int j = static_cast<int>(idx % static_cast<std::size_t>(g.nV));
        if (!f.valid[idx]) return;
        const LoopMatrix inv = inverse(f.values[idx], f.policy);
        const LoopMatrix U = mul(inv, axis_derivative(f.values, g, i, j, true), f.policy);
        const LoopMatrix V = mul(inv, axis_derivative(f.values, g, i, j, false), f.policy);
        mc.alpha0u[idx] = U.coeff(0).diagonal_part();
        mc.alpha0v[idx] = V.coeff(0).diagonal_part();
        mc.b1[idx] = U.coeff(1).off_diagonal_part();
        mc.bm1[idx] = V.coeff(-1).off_diagonal_part();
        double total = 0.0;
        for (const Matrix2& c : U.coefficients()) total += c.norm2();
        for (const Matrix2& c : V.coefficients()) total += c.norm2();
        total -= mc.alpha0u[idx].norm2() + mc.alpha0v[idx].norm2() + mc.b1[idx].norm2() + mc.bm1[idx].norm2();
        mc.offPattern[idx] = std::max(0.0, total);
        mc.valid[idx] = stencil_valid(f, i, j) ? 1 : 0;
    });
    return mc;
}

std::vector<unsigned char> regular_at(const MCData& mc) {
    std::vector<unsigned char> out(mc.b1.size(), 0);
    for (std::size_t k = 0; k < out.size(); ++k) {
        if (!mc.valid.empty() && !mc.valid[k]) continue;
        out[k] = norm(cross(su2_coords(mc.b1[k]), su2_coords(mc.bm1[k]))) > 1e-10 ? 1 : 0;
    }
    return out;
}

ExtendedFrame associated_frame(const ExtendedFrame& f, double s) {
    if (s == 0.0) throw Error("associated_frame: s must be nonzero");
    ExtendedFrame out = f;
    parallel_for(out.values.size(), [&](std::size_t k) { out.values[k] = reindex_scale(f.values[k], s); });
    const auto [ib, jb] = f.grid.base_index();
    const std::size_t b = f.grid.index(ib, jb);
    if (out.valid[b] && max_coeff_diff(out.values[b], LoopMatrix::identity()) > 1e-14) {
        const LoopMatrix nb = inverse(out.values[b], f.policy);
        parallel_for(out.values.size(), [&](std::size_t k) { out.values[k] = mul(nb, out.values[k], f.policy); });
        out.values[b] = LoopMatrix::identity();
    }
    out.normalized = true;
    out.scale = f.scale * s;
    return out;
}

}  // namespace cgc
