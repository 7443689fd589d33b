#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cgc/dalembert.hpp"
#include "cgc/projections.hpp"

namespace cgc {

/// Binary frame cache. Layout (native little-endian doubles):
/// "CGCF", version, grid, policy, scale, normalized flag, per-point loops,
/// then an optional section with the potential pair (JSON) and the H- factors.
/// Round trip is bit exact.
struct FrameCache {
    ExtendedFrame frame;
    std::optional<PotentialPair> pair;
};

void write_frame(const ExtendedFrame& frame, const std::optional<PotentialPair>& pair, std::ostream& out);
FrameCache read_frame(std::istream& in);  ///< throws Error on a malformed stream

enum class MeshFormat { Obj, Ply, Csv };
MeshFormat parse_mesh_format(const std::string& name);  ///< throws Error
const char* extension(MeshFormat format);

/// Vertices in R^3 for export: stereographic image for sphere targets (rescaled to the sphere
/// radius, centre removed), (x1, x2, x3) for E3. Points at the south pole are reported invalid.
struct ExportPoints {
    std::vector<Vec3> xyz;
    std::vector<unsigned char> valid;
};
ExportPoints export_points(const SurfaceGrid& s);

/// Writes vertices in row-major grid order and one quad per cell whose four corners are
/// valid and not flagged. Invalid vertices are kept (as 0 0 0) so indices stay regular.
void write_mesh(const SurfaceGrid& s, const std::vector<unsigned char>& flagged, MeshFormat format, std::ostream& out);

/// i,j,u,v,x0,x1,x2,x3,n0,n1,n2,n3,valid: the surface before any projection to R^3.
void write_raw_r4(const SurfaceGrid& s, std::ostream& out);

/// Shortest round-trip decimal text for a double (C locale).
std::string format_double(double x);

}  // namespace cgc
