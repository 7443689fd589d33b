#include "cgc/io.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>

namespace cgc {

namespace {

constexpr char kMagic[4] = {'C', 'G', 'C', 'F'};
constexpr std::uint32_t kVersion = 1;

class Writer {
public:
    explicit Writer(std::ostream& out) : out_(out) {}
    template <class T>
    void pod(const T& x) {
        out_.write(reinterpret_cast<const char*>(&x), sizeof x);
    }
    void i32(int x) { pod(static_cast<std::int32_t>(x)); }
    void u8(bool x) { pod(static_cast<std::uint8_t>(x ? 1 : 0)); }
    void matrix(const Matrix2& m) {
        for (const cplx& z : {m.a, m.b, m.c, m.d}) {
            pod(z.real());
            pod(z.imag());
        }
    }
    void loop(const LoopMatrix& l) {
        i32(l.low_degree());
        i32(static_cast<int>(l.coefficients().size()));
        u8(l.under_resolved());
        for (const Matrix2& m : l.coefficients()) matrix(m);
    }
    void text(const std::string& s) {
        pod(static_cast<std::uint64_t>(s.size()));
        out_.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

private:
    std::ostream& out_;
};

class Reader {
public:
    explicit Reader(std::istream& in) : in_(in) {}
    template <class T>
    T pod() {
        T x{};
        in_.read(reinterpret_cast<char*>(&x), sizeof x);
        if (!in_) throw Error("frame cache: unexpected end of data");
        return x;
    }
    int i32() { return pod<std::int32_t>(); }
    bool u8() { return pod<std::uint8_t>() != 0; }
    int count(int limit) {
        const int n = i32();
        if (n < 0 || n > limit) throw Error("frame cache: corrupt length field");
        return n;
    }
    Matrix2 matrix() {
        Matrix2 m;
        for (cplx* z : {&m.a, &m.b, &m.c, &m.d}) {
            const double re = pod<double>();
            const double im = pod<double>();
            *z = {re, im};
        }
        return m;
    }
    LoopMatrix loop() {
        const int low = i32();
        const int n = count(1 << 16);
        const bool flag = u8();
        std::vector<Matrix2> c(static_cast<std::size_t>(n));
        for (auto& m : c) m = matrix();
        LoopMatrix l(low, std::move(c));
        l.set_under_resolved(flag);
        return l;
    }
    std::string text() {
        const auto n = pod<std::uint64_t>();
        if (n > (1u << 26)) throw Error("frame cache: corrupt text length");
        std::string s(n, '\0');
        in_.read(s.data(), static_cast<std::streamsize>(n));
        if (!in_) throw Error("frame cache: unexpected end of data");
        return s;
    }

private:
    std::istream& in_;
};

}  // namespace

void write_frame(const ExtendedFrame& f, const std::optional<PotentialPair>& pair, std::ostream& out) {
    Writer w(out);
    out.write(kMagic, 4);
    w.pod(kVersion);
    const GridSpec& g = f.grid;
    for (double x : {g.uRange.lo, g.uRange.hi, g.vRange.lo, g.vRange.hi}) w.pod(x);
    w.i32(g.nU);
    w.i32(g.nV);
    w.u8(g.basePoint.has_value());
    w.i32(g.basePoint ? g.basePoint->first : 0);
    w.i32(g.basePoint ? g.basePoint->second : 0);
    w.i32(f.policy.maxDegree);
    w.pod(f.policy.tailTolerance);
    w.pod(f.scale);
    w.u8(f.normalized);
    for (std::size_t k = 0; k < g.size(); ++k) {
        w.u8(f.valid[k]);
        w.pod(f.residual[k]);
        w.loop(f.values[k]);
    }
    w.i32(static_cast<int>(f.offBigCell.size()));
    for (auto [i, j] : f.offBigCell) {
        w.i32(i);
        w.i32(j);
    }
    const bool withFactors = pair.has_value() && f.factors != nullptr;
    w.u8(pair.has_value());
    if (pair) w.text(to_config(*pair));
    w.u8(withFactors);
    if (withFactors)
        for (std::size_t k = 0; k < g.size(); ++k) {
            w.loop(f.factors->hMinus[k]);
            w.loop(f.factors->hPlus[k]);
        }
    if (!out) throw Error("frame cache: write failed");
}

FrameCache read_frame(std::istream& in) {
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || !std::equal(magic, magic + 4, kMagic)) throw Error("frame cache: bad magic");
    Reader r(in);
    if (r.pod<std::uint32_t>() != kVersion) throw Error("frame cache: unsupported version");
    FrameCache c;
    ExtendedFrame& f = c.frame;
    GridSpec& g = f.grid;
    g.uRange.lo = r.pod<double>();
    g.uRange.hi = r.pod<double>();
    g.vRange.lo = r.pod<double>();
    g.vRange.hi = r.pod<double>();
    g.nU = r.count(1 << 15);
    g.nV = r.count(1 << 15);
    const bool hasBase = r.u8();
    const int bi = r.i32(), bj = r.i32();
    if (hasBase) g.basePoint = std::pair{bi, bj};
    g.validate();
    f.policy.maxDegree = r.i32();
    f.policy.tailTolerance = r.pod<double>();
    f.scale = r.pod<double>();
    f.normalized = r.u8();
    const std::size_t n = g.size();
    f.values.resize(n);
    f.valid.resize(n);
    f.residual.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        f.valid[k] = r.u8() ? 1 : 0;
        f.residual[k] = r.pod<double>();
        f.values[k] = r.loop();
    }
    const int nOff = r.count(static_cast<int>(n));
    for (int k = 0; k < nOff; ++k) {
        const int i = r.i32();
        const int j = r.i32();
        f.offBigCell.emplace_back(i, j);
    }
    if (r.u8()) c.pair = parse_config(r.text()).pair;
    if (r.u8()) {
        if (!c.pair) throw Error("frame cache: factors without potential");
        auto factors = std::make_shared<FrameFactors>();
        factors->etaPlus = c.pair->etaPlus;
        factors->etaMinus = c.pair->etaMinus;
        factors->uSamples = g.u_samples();
        factors->vSamples = g.v_samples();
        factors->hMinus.resize(n);
        factors->hPlus.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            factors->hMinus[k] = r.loop();
            factors->hPlus[k] = r.loop();
        }
        f.factors = std::move(factors);
    }
    return c;
}

MeshFormat parse_mesh_format(const std::string& name) {
    if (name == "obj") return MeshFormat::Obj;
    if (name == "ply") return MeshFormat::Ply;
    if (name == "csv") return MeshFormat::Csv;
    throw Error("format: expected obj, ply or csv, got '" + name + "'");
}

const char* extension(MeshFormat format) {
    switch (format) {
        case MeshFormat::Obj: return "obj";
        case MeshFormat::Ply: return "ply";
        case MeshFormat::Csv: return "csv";
    }
    return "";
}

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, res.ptr};
}

ExportPoints export_points(const SurfaceGrid& s) {
    ExportPoints p;
    p.xyz.resize(s.position.size());
    p.valid = s.valid;
    for (std::size_t k = 0; k < s.position.size(); ++k) {
        if (!p.valid[k]) continue;
        const Vec4& x = s.position[k];
        if (s.target == Target::E3) {
            p.xyz[k] = {x[1], x[2], x[3]};
            continue;
        }
        try {
            p.xyz[k] = s.radius * stereographic((1.0 / s.radius) * (x - s.center));
        } catch (const AtSouthPole&) {
            p.valid[k] = 0;
            p.xyz[k] = {};
        }
    }
    return p;
}

namespace {

std::vector<std::array<std::size_t, 4>> quads(const GridSpec& g, const std::vector<unsigned char>& ok) {
    std::vector<std::array<std::size_t, 4>> q;
    for (int i = 0; i + 1 < g.nU; ++i)
        for (int j = 0; j + 1 < g.nV; ++j) {
            const std::array<std::size_t, 4> c{g.index(i, j), g.index(i + 1, j), g.index(i + 1, j + 1), g.index(i, j + 1)};
            if (ok[c[0]] && ok[c[1]] && ok[c[2]] && ok[c[3]]) q.push_back(c);
        }
    return q;
}

void xyz_line(std::ostream& out, const Vec3& x, bool valid, char sep) {
    for (std::size_t c = 0; c < 3; ++c) {
        if (c) out << sep;
        out << format_double(valid ? x[c] : 0.0);
    }
}

}  // namespace

void write_mesh(const SurfaceGrid& s, const std::vector<unsigned char>& flagged, MeshFormat format, std::ostream& out) {
    const GridSpec& g = s.grid;
    const ExportPoints p = export_points(s);
    std::vector<unsigned char> ok(p.valid);
    for (std::size_t k = 0; k < ok.size(); ++k)
        if (!flagged.empty() && flagged[k]) ok[k] = 0;
    switch (format) {
        case MeshFormat::Obj: {
            for (std::size_t k = 0; k < p.xyz.size(); ++k) {
                out << "v ";
                xyz_line(out, p.xyz[k], p.valid[k], ' ');
                out << '\n';
            }
            for (const auto& q : quads(g, ok)) out << "f " << q[0] + 1 << ' ' << q[1] + 1 << ' ' << q[2] + 1 << ' ' << q[3] + 1 << '\n';
            break;
        }
        case MeshFormat::Ply: {
            const auto faces = quads(g, ok);
            out << "ply\nformat ascii 1.0\nelement vertex " << p.xyz.size()
                << "\nproperty double x\nproperty double y\nproperty double z\nelement face " << faces.size()
                << "\nproperty list uchar int vertex_indices\nend_header\n";
            for (std::size_t k = 0; k < p.xyz.size(); ++k) {
                xyz_line(out, p.xyz[k], p.valid[k], ' ');
                out << '\n';
            }
            for (const auto& q : faces) out << "4 " << q[0] << ' ' << q[1] << ' ' << q[2] << ' ' << q[3] << '\n';
            break;
        }
        case MeshFormat::Csv: {
            out << "i,j,u,v,x,y,z,valid\n";
            for (int i = 0; i < g.nU; ++i)
                for (int j = 0; j < g.nV; ++j) {
                    const std::size_t k = g.index(i, j);
                    out << i << ',' << j << ',' << format_double(g.u(i)) << ',' << format_double(g.v(j)) << ',';
                    xyz_line(out, p.xyz[k], p.valid[k], ',');
                    out << ',' << int(ok[k]) << '\n';
                }
            break;
        }
    }
}

void write_raw_r4(const SurfaceGrid& s, std::ostream& out) {
    const GridSpec& g = s.grid;
    out << "i,j,u,v,x0,x1,x2,x3,n0,n1,n2,n3,valid\n";
    for (int i = 0; i < g.nU; ++i)
        for (int j = 0; j < g.nV; ++j) {
            const std::size_t k = g.index(i, j);
            out << i << ',' << j << ',' << format_double(g.u(i)) << ',' << format_double(g.v(j));
            for (double x : s.position[k]) out << ',' << format_double(x);
            for (double x : s.normal[k]) out << ',' << format_double(x);
            out << ',' << int(s.valid[k]) << '\n';
        }
}

}  // namespace cgc
