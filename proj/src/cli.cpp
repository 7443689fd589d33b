#include "cgc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cgc/geometry.hpp"
#include "cgc/projections.hpp"

namespace cgc::cli {

namespace fs = std::filesystem;

namespace {

/// Maps to exit code 2 or 3.
struct Failure {
    int code;
    std::string message;
};

[[noreturn]] void usage(const std::string& msg) { throw Failure{UsageError, msg}; }
[[noreturn]] void runtime(const std::string& msg) { throw Failure{RuntimeFailure, msg}; }

constexpr int kMaxGrid = 2048;
constexpr const char* kCacheName = "frame.cgcf";

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6e", x);
    return buf;
}

void check_mu(double mu) {
    if (mu == 1.0) usage("mu=1 degenerates; use --sym");
    if (mu == 0.0) usage("mu=0 is a pole of the frame; use --flat");
}

FrameCache load_cache(const RunConfig& cfg) {
    const fs::path path = fs::path(cfg.outDir) / kCacheName;
    std::ifstream in(path, std::ios::binary);
    if (!in) runtime("no frame cache at " + path.string() + "; run build first");
    try {
        return read_frame(in);
    } catch (const Error& e) {
        runtime(path.string() + ": " + e.what());
    }
}

struct Built {
    SurfaceGrid surface;
    double rho = 1.0;
    std::optional<double> K;  ///< the curvature the surface must have, when known
    bool harmonic = true;     ///< whether the normal Gauss map must be harmonic
};

class Surfaces {
public:
    explicit Surfaces(const FrameCache& cache) : cache_(cache) {}

    Built make(const Projection& p) {
        const ExtendedFrame& f = cache_.frame;
        Built b;
        switch (p.kind) {
            case Projection::Kind::Mu: {
                const ProjectionParams params(p.mu);
                b.surface = project_mu(f, params, &regular());
                b.rho = params.rho();
                b.K = params.K();
                break;
            }
            case Projection::Kind::Scaled: {
                const ProjectionParams params(p.mu);
                b.surface = scaled_projection(f, p.mu, &regular());
                b.rho = params.rho();
                b.K = -p.mu;
                break;
            }
            case Projection::Kind::Sym:
                b.surface = sym(f, &regular());
                b.K = -1.0;
                break;
            case Projection::Kind::Flat:
                if (!cache_.pair) runtime("frame cache has no potential; rebuild it to use --flat");
                b.surface = flat_limit(*cache_.pair, f.grid, f.policy);
                b.K = 0.0;
                break;
            case Projection::Kind::Parallel:
                b.surface = parallel_surface(project_mu(f, ProjectionParams(p.mu), &regular()), p.r);
                b.harmonic = false;
                break;
            case Projection::Kind::Ramp:
                b.surface = ramp_projection(f, p.mu, p.r);
                break;
        }
        return b;
    }

private:
    const std::vector<unsigned char>& regular() {
        if (!regular_) regular_ = regular_at(maurer_cartan(cache_.frame));
        return *regular_;
    }

    const FrameCache& cache_;
    std::optional<std::vector<unsigned char>> regular_;
};

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) runtime("cannot write " + path.string());
    body(out);
    if (!out) runtime("write failed: " + path.string());
}

std::vector<unsigned char> singular_flags(const SurfaceGrid& s) { return singular_set(fundamental_forms(s)).flags; }

/// Interior points (two away from the border) that are valid and not singular.
std::vector<unsigned char> stats_mask(const SurfaceGrid& s, const std::vector<unsigned char>& flags) {
    auto m = interior_mask(s.grid, s.valid, 2);
    for (std::size_t k = 0; k < m.size(); ++k)
        if (flags[k]) m[k] = 0;
    return m;
}

void export_surface(const RunConfig& cfg, const std::string& name, const SurfaceGrid& s,
                    const std::vector<unsigned char>& flags, std::ostream& out) {
    const fs::path dir(cfg.outDir);
    const fs::path mesh = dir / (name + "." + extension(cfg.format));
    write_file(mesh, [&](std::ostream& o) { write_mesh(s, flags, cfg.format, o); });
    out << "wrote " << mesh.string() << '\n';
    if (cfg.rawR4) {
        const fs::path raw = dir / (name + "_r4.csv");
        write_file(raw, [&](std::ostream& o) { write_raw_r4(s, o); });
        out << "wrote " << raw.string() << '\n';
    }
}

int cmd_build(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    PotentialPair pair;
    if (!cfg.potential.empty() && !cfg.configPath.empty()) usage("--potential and --config are exclusive");
    if (!cfg.potential.empty()) {
        pair = builtin(cfg.potential);
    } else if (!cfg.configPath.empty()) {
        std::ifstream in(cfg.configPath);
        if (!in) usage("--config: cannot read " + cfg.configPath);
        std::stringstream ss;
        ss << in.rdbuf();
        ParsedPotential parsed = parse_config(ss.str());
        for (const auto& w : parsed.warnings) err << "warning: " << w << '\n';
        pair = std::move(parsed.pair);
    } else {
        usage("build needs --potential or --config");
    }
    GridSpec grid = cfg.grid;
    if (!cfg.domainGiven) {
        grid.uRange = pair.uDomain.value_or(Interval{0.0, 2.0});
        grid.vRange = pair.vDomain.value_or(Interval{0.0, 2.0});
    }
    grid.validate();
    try {
        cfg.policy.validate();
    } catch (const Error& e) {
        usage(std::string("--max-degree: ") + e.what());
    }

    const ExtendedFrame frame = extended_frame(pair, grid, cfg.policy);
    fs::create_directories(cfg.outDir);
    const fs::path cache = fs::path(cfg.outDir) / kCacheName;
    write_file(cache, [&](std::ostream& o) { write_frame(frame, pair, o); });
    out << "grid " << grid.nU << 'x' << grid.nV << '\n'
        << "max_birkhoff_residual " << sci(frame.max_residual()) << '\n'
        << "off_big_cell " << frame.offBigCell.size() << '\n'
        << "wrote " << cache.string() << '\n';
    return Ok;
}

int cmd_project(const RunConfig& cfg, std::ostream& out) {
    if (cfg.projections.empty()) usage("project needs at least one of --mu, --sym, --scaled, --flat, --mu-ramp");
    const FrameCache cache = load_cache(cfg);
    Surfaces surfaces(cache);
    for (const Projection& p : cfg.projections) {
        const Built b = surfaces.make(p);
        export_surface(cfg, p.name(), b.surface, singular_flags(b.surface), out);
    }
    return Ok;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out) {
    if (cfg.projections.empty()) usage("verify needs at least one of --mu, --sym, --scaled, --flat, --mu-ramp");
    const FrameCache cache = load_cache(cfg);
    Surfaces surfaces(cache);
    std::vector<std::string> failed;
    auto report = [&](bool ok, const std::string& criterion, const std::string& detail) {
        out << (ok ? "PASS " : "FAIL ") << criterion << ' ' << detail << '\n';
        if (!ok) failed.push_back(criterion);
    };
    std::vector<std::pair<std::string, std::vector<unsigned char>>> muFlags;
    for (const Projection& p : cfg.projections) {
        const Built b = surfaces.make(p);
        const std::string name = p.name();
        const DiagnosticsReport r = diagnose(b.surface, b.rho, b.K.value_or(0.0));
        const fs::path csv = fs::path(cfg.outDir) / (name + "_diagnostics.csv");
        write_file(csv, [&](std::ostream& o) { write_csv(r, o); });
        out << "wrote " << csv.string() << '\n';

        std::vector<unsigned char> flags(r.rows.size());
        for (std::size_t k = 0; k < flags.size(); ++k) flags[k] = r.rows[k].singular ? 1 : 0;
        const auto mask = stats_mask(b.surface, flags);
        if (p.kind == Projection::Kind::Mu) muFlags.emplace_back(name, flags);

        if (b.K) {
            std::vector<double> K(r.rows.size());
            for (std::size_t k = 0; k < K.size(); ++k) K[k] = r.rows[k].K;
            const double med = median(masked(K, mask));
            const double target = *b.K;
            const double err = target != 0.0 ? std::abs(med - target) / std::abs(target) : std::abs(med);
            const double tol = target != 0.0 ? 1e-2 : 1e-3;
            report(err <= tol, "curvature:" + name,
                   "median_K " + sci(med) + " expected " + sci(target) + (target != 0.0 ? " rel_err " : " abs_err ") + sci(err));
        }
        if (b.harmonic) {
            const Harmonicity h = harmonicity_residual(normal_gauss(b.surface), b.surface.grid);
            const double res = median(masked(h.residual, mask));
            const double floor = median(masked(h.floor, mask));
            report(res <= floor, "harmonicity:" + name, "median_residual " + sci(res) + " floor " + sci(floor));
        }
    }
    for (std::size_t a = 1; a < muFlags.size(); ++a)
        report(muFlags[a].second == muFlags[0].second, "singular-set:" + muFlags[0].first + "=" + muFlags[a].first,
               "flag grids " + std::string(muFlags[a].second == muFlags[0].second ? "identical" : "differ"));
    if (failed.empty()) return Ok;
    out << "verification failed:";
    for (const auto& f : failed) out << ' ' << f;
    out << '\n';
    return VerifyFailed;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& out) {
    std::vector<double> mus;
    for (const Projection& p : cfg.projections)
        if (p.kind == Projection::Kind::Mu) mus.push_back(p.mu);
    if (mus.empty()) usage("sweep needs a non-empty --mu list");
    const FrameCache cache = load_cache(cfg);
    Surfaces surfaces(cache);
    std::ostringstream table;
    table << "mu,K_formula,K_est_median\n";
    for (double mu : mus) {
        Projection p{Projection::Kind::Mu, mu, 0.0};
        const Built b = surfaces.make(p);
        const auto flags = singular_flags(b.surface);
        export_surface(cfg, "sweep_" + p.name(), b.surface, flags, out);
        const auto K = curvature(fundamental_forms(b.surface));
        const double med = median(masked(K, stats_mask(b.surface, flags)));
        table << format_double(mu) << ',' << format_double(*b.K) << ',' << format_double(med) << '\n';
    }
    const fs::path csv = fs::path(cfg.outDir) / "sweep.csv";
    write_file(csv, [&](std::ostream& o) { o << table.str(); });
    out << table.str() << "wrote " << csv.string() << '\n';
    return Ok;
}

}  // namespace

std::string Projection::name() const {
    switch (kind) {
        case Kind::Mu: return "mu_" + format_double(mu);
        case Kind::Scaled: return "scaled_" + format_double(mu);
        case Kind::Sym: return "sym";
        case Kind::Flat: return "flat";
        case Kind::Parallel: return "mu_" + format_double(mu) + "_parallel_" + format_double(r);
        case Kind::Ramp: return "ramp_" + format_double(mu) + "_" + format_double(r);
    }
    return "";
}

std::pair<int, int> parse_grid(const std::string& text) {
    const auto x = text.find('x');
    if (x == std::string::npos) throw std::invalid_argument("--grid: expected NxM, got '" + text + "'");
    std::size_t p1 = 0, p2 = 0;
    const std::string a = text.substr(0, x), b = text.substr(x + 1);
    int n = 0, m = 0;
    try {
        n = std::stoi(a, &p1);
        m = std::stoi(b, &p2);
    } catch (const std::exception&) {
        throw std::invalid_argument("--grid: expected NxM, got '" + text + "'");
    }
    if (p1 != a.size() || p2 != b.size()) throw std::invalid_argument("--grid: expected NxM, got '" + text + "'");
    return {n, m};
}

std::pair<Interval, Interval> parse_domain(const std::string& text) {
    std::vector<double> v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        try {
            v.push_back(std::stod(item, &used));
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw std::invalid_argument("--domain: '" + item + "' is not a number");
    }
    if (v.size() != 4) throw std::invalid_argument("--domain: expected a,b,c,d");
    return {{v[0], v[1]}, {v[2], v[3]}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Constant curvature surfaces from potential pairs", "cgc_cli"};
    app.require_subcommand(1, 1);

    RunConfig cfg;
    std::string grid = "101x101", domain, format = "obj";
    std::vector<double> mus, scaled, parallel, ramp;
    bool symFlag = false, flatFlag = false;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--out", cfg.outDir, "Output directory holding the frame cache");
    };
    auto projections = [&](CLI::App* sub) {
        sub->add_option("--mu", mus, "Evaluate the frame at lambda = mu (repeatable)")->delimiter(',');
        sub->add_flag("--sym", symFlag, "Pseudospherical surface in R^3");
        sub->add_option("--scaled", scaled, "Projection scaled by 2/(1-mu) (repeatable)")->delimiter(',');
        sub->add_flag("--flat", flatFlag, "Flat limit surface");
        sub->add_option("--parallel", parallel, "Parallel surfaces at distance r of every --mu surface")->delimiter(',');
        sub->add_option("--mu-ramp", ramp, "Control surface with mu varying from a to b along u")->delimiter(',')->expected(2);
        sub->add_option("--format", format, "Mesh format: obj, ply or csv");
        sub->add_flag("--raw-r4", cfg.rawR4, "Also write positions in R^4 as CSV");
    };

    CLI::App* build = app.add_subcommand("build", "Construct and cache the extended frame");
    build->add_option("--potential", cfg.potential, "Builtin potential (revolution, amsler)");
    build->add_option("--config", cfg.configPath, "JSON potential document");
    build->add_option("--grid", grid, "Grid size NxM");
    build->add_option("--domain", domain, "u0,u1,v0,v1");
    build->add_option("--max-degree", cfg.policy.maxDegree, "Laurent truncation degree");
    common(build);

    CLI::App* project = app.add_subcommand("project", "Write one mesh per projection");
    CLI::App* verify = app.add_subcommand("verify", "Diagnostics CSV and pass/fail checks per projection");
    CLI::App* sweep = app.add_subcommand("sweep", "Meshes and curvature table over a list of mu");
    for (CLI::App* sub : {project, verify, sweep}) {
        common(sub);
        projections(sub);
    }

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return Ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return Ok;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return UsageError;
    }

    try {
        try {
            const auto [nU, nV] = parse_grid(grid);
            if (nU > kMaxGrid || nV > kMaxGrid) usage("--grid: at most " + std::to_string(kMaxGrid) + " points per axis");
            cfg.grid.nU = nU;
            cfg.grid.nV = nV;
            if (!domain.empty()) {
                std::tie(cfg.grid.uRange, cfg.grid.vRange) = parse_domain(domain);
                cfg.domainGiven = true;
            }
            cfg.format = parse_mesh_format(format);
        } catch (const std::invalid_argument& e) {
            usage(e.what());
        } catch (const Error& e) {
            usage(e.what());
        }
        using K = Projection::Kind;
        for (double mu : mus) {
            check_mu(mu);
            cfg.projections.push_back({K::Mu, mu, 0.0});
        }
        if (symFlag) cfg.projections.push_back({K::Sym, 0.0, 0.0});
        for (double mu : scaled) {
            check_mu(mu);
            cfg.projections.push_back({K::Scaled, mu, 0.0});
        }
        if (flatFlag) cfg.projections.push_back({K::Flat, 0.0, 0.0});
        if (!parallel.empty() && mus.empty()) usage("--parallel needs at least one --mu");
        for (double r : parallel)
            for (double mu : mus) cfg.projections.push_back({K::Parallel, mu, r});
        if (!ramp.empty()) {
            if (ramp[0] * ramp[1] <= 0.0 || (ramp[0] - 1.0) * (ramp[1] - 1.0) <= 0.0)
                usage("--mu-ramp: the range must not contain 0 or 1");
            cfg.projections.push_back({K::Ramp, ramp[0], ramp[1]});
        }

        if (*build) return cmd_build(cfg, out, err);
        if (*project) return cmd_project(cfg, out);
        if (*verify) return cmd_verify(cfg, out);
        return cmd_sweep(cfg, out);
    } catch (const Failure& f) {
        err << "error: " << f.message << '\n';
        return f.code;
    } catch (const UnknownBuiltin& e) {
        err << "error: --potential: " << e.what() << '\n';
        return UsageError;
    } catch (const SchemaError& e) {
        err << "error: " << e.what() << '\n';
        return UsageError;
    } catch (const TwistingViolation& e) {
        err << "error: " << e.what() << '\n';
        return UsageError;
    } catch (const DegreeViolation& e) {
        err << "error: " << e.what() << '\n';
        return UsageError;
    } catch (const RegularityViolation& e) {
        err << "error: " << e.what() << '\n';
        return UsageError;
    } catch (const InvalidGrid& e) {
        err << "error: --grid/--domain: " << e.what() << '\n';
        return UsageError;
    } catch (const DegenerateMu& e) {
        err << "error: " << e.what() << '\n';
        return UsageError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return RuntimeFailure;
    }
}

}  // namespace cgc::cli
