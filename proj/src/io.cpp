/// @file io.cpp
/// @brief Writers for fields, interfaces and the run manifest.

#include "tfd/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "tfd/errors.hpp"

namespace tfd {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // '\n' line ends on every platform
    if (!out) throw ConfigError("io: cannot open '" + path + "' for writing");
    return out;
}

void check_stream(const std::ofstream& out, const std::string& path) {
    if (!out) throw ConfigError("io: write to '" + path + "' failed");
}

}  // namespace

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// ============================================================================
// Field writers
// ============================================================================

void write_vtk_scalar(const std::string& path, const ScalarField& field, const GridSpec& grid,
                      const std::string& array_name) {
    const IndexBox w = field.window();
    if (w.count() == 0) throw ConfigError("io: refusing to write an empty field");
    std::ofstream out = open_out(path);
    const Vec3 origin = grid.position(w.lo);
    out << "# vtk DataFile Version 3.0\n"
        << array_name << "\n"
        << "ASCII\n"
        << "DATASET STRUCTURED_POINTS\n"
        << "DIMENSIONS " << w.n.i << ' ' << w.n.j << ' ' << w.n.k << "\n"
        << "ORIGIN " << format_real(origin.x) << ' ' << format_real(origin.y) << ' '
        << format_real(origin.z) << "\n"
        << "SPACING " << format_real(grid.h) << ' ' << format_real(grid.h) << ' '
        << format_real(grid.h) << "\n"
        << "POINT_DATA " << w.count() << "\n"
        << "SCALARS " << array_name << " double 1\n"
        << "LOOKUP_TABLE default\n";
    for (int k = w.lo.k; k < w.lo.k + w.n.k; ++k)
        for (int j = w.lo.j; j < w.lo.j + w.n.j; ++j)
            for (int i = w.lo.i; i < w.lo.i + w.n.i; ++i)
                out << format_real(field.at({i, j, k})) << '\n';
    check_stream(out, path);
}

void write_field_csv(const std::string& path, const ScalarField& field, const GridSpec& grid) {
    const IndexBox w = field.window();
    std::ofstream out = open_out(path);
    out << "i,j,k,x,y,z,value\n";
    for (int k = w.lo.k; k < w.lo.k + w.n.k; ++k)
        for (int j = w.lo.j; j < w.lo.j + w.n.j; ++j)
            for (int i = w.lo.i; i < w.lo.i + w.n.i; ++i) {
                const Vec3i p{i, j, k};
                const Vec3 x = grid.position(p);
                out << i << ',' << j << ',' << k << ',' << format_real(x.x) << ','
                    << format_real(x.y) << ',' << format_real(x.z) << ','
                    << format_real(field.at(p)) << '\n';
            }
    check_stream(out, path);
}

// ============================================================================
// Interface writers
// ============================================================================

void write_interface_csv(const std::string& path, const InterfaceExtraction& interface) {
    std::ofstream out = open_out(path);
    out << "i,j,k,x,y,z,nx,ny,nz,mean_curvature,area_weight,projection_axis,refined\n";
    for (const InterfacePoint& pt : interface.points) {
        if (pt.degenerate) continue;
        out << pt.node.i << ',' << pt.node.j << ',' << pt.node.k << ','
            << format_real(pt.position.x) << ',' << format_real(pt.position.y) << ','
            << format_real(pt.position.z) << ',' << format_real(pt.normal.x) << ','
            << format_real(pt.normal.y) << ',' << format_real(pt.normal.z) << ','
            << format_real(pt.mean_curvature) << ',' << format_real(pt.area_weight) << ','
            << pt.projection_axis << ',' << (pt.refined ? 1 : 0) << '\n';
    }
    check_stream(out, path);
}

void write_interface_vtk(const std::string& path, const InterfaceExtraction& interface) {
    std::vector<const InterfacePoint*> pts;
    pts.reserve(interface.points.size());
    for (const InterfacePoint& pt : interface.points)
        if (!pt.degenerate) pts.push_back(&pt);

    std::ofstream out = open_out(path);
    out << "# vtk DataFile Version 3.0\n"
        << "interface\n"
        << "ASCII\n"
        << "DATASET POLYDATA\n"
        << "POINTS " << pts.size() << " double\n";
    for (const InterfacePoint* pt : pts)
        out << format_real(pt->position.x) << ' ' << format_real(pt->position.y) << ' '
            << format_real(pt->position.z) << '\n';
    out << "VERTICES " << pts.size() << ' ' << 2 * pts.size() << '\n';
    for (size_t n = 0; n < pts.size(); ++n) out << "1 " << n << '\n';
    out << "POINT_DATA " << pts.size() << "\n"
        << "NORMALS normal double\n";
    for (const InterfacePoint* pt : pts)
        out << format_real(pt->normal.x) << ' ' << format_real(pt->normal.y) << ' '
            << format_real(pt->normal.z) << '\n';
    out << "SCALARS mean_curvature double 1\nLOOKUP_TABLE default\n";
    for (const InterfacePoint* pt : pts) out << format_real(pt->mean_curvature) << '\n';
    out << "SCALARS area_weight double 1\nLOOKUP_TABLE default\n";
    for (const InterfacePoint* pt : pts) out << format_real(pt->area_weight) << '\n';
    check_stream(out, path);
}

// ============================================================================
// Manifest
// ============================================================================

std::uint64_t fnv1a64_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("io: cannot read '" + path + "' for checksumming");
    std::uint64_t hash = 1469598103934665603ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof buf);
        const std::streamsize got = in.gcount();
        for (std::streamsize n = 0; n < got; ++n) {
            hash ^= static_cast<unsigned char>(buf[n]);
            hash *= 1099511628211ull;
        }
    }
    return hash;
}

ArtifactWriter::ArtifactWriter(const std::string& directory) : directory_(directory) {
    std::error_code ec;
    std::filesystem::create_directories(directory_, ec);
    if (ec) throw ConfigError("io: cannot create directory '" + directory_ + "': " + ec.message());
}

std::string ArtifactWriter::path_of(const std::string& relative) const {
    return (std::filesystem::path(directory_) / relative).string();
}

void ArtifactWriter::record(const std::string& relative) {
    const std::string full = path_of(relative);
    std::error_code ec;
    const std::uint64_t bytes = std::filesystem::file_size(full, ec);
    if (ec) throw ConfigError("io: cannot stat '" + full + "': " + ec.message());
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx",
                  static_cast<unsigned long long>(fnv1a64_file(full)));
    entries_.push_back(ManifestEntry{relative, bytes, hex});
}

std::string ArtifactWriter::write_manifest(const std::string& name) const {
    nlohmann::ordered_json doc;
    doc["directory"] = directory_;
    doc["files"] = nlohmann::ordered_json::array();
    for (const ManifestEntry& e : entries_) {
        nlohmann::ordered_json row;
        row["path"] = e.path;
        row["bytes"] = e.bytes;
        row["fnv1a64"] = e.checksum;
        doc["files"].push_back(row);
    }
    const std::string full = path_of(name);
    std::ofstream out = open_out(full);
    out << doc.dump(2) << '\n';
    check_stream(out, full);
    return full;
}

}  // namespace tfd
