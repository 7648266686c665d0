/// @file io.hpp
/// @brief Artifact emission: VTK and CSV writers for fields and interfaces,
/// plus the run manifest with sizes and checksums.
///
/// Every floating-point value is printed with 17 significant digits so that
/// repeated identical runs produce byte-identical files.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tfd/grid.hpp"
#include "tfd/levelset.hpp"

namespace tfd {

// ============================================================================
// Formatting
// ============================================================================

/// @brief Shortest-round-trip decimal form (printf %.17g).
std::string format_real(double v);

// ============================================================================
// Field writers
// ============================================================================

/// @brief ASCII legacy VTK STRUCTURED_POINTS file of the field's window.
/// Nodes outside the window never appear; `array_name` labels the scalars.
void write_vtk_scalar(const std::string& path, const ScalarField& field, const GridSpec& grid,
                      const std::string& array_name);

/// @brief CSV of the field's window: header i,j,k,x,y,z,value then one row
/// per node in lexicographic (k, j, i) order.
void write_field_csv(const std::string& path, const ScalarField& field, const GridSpec& grid);

// ============================================================================
// Interface writers
// ============================================================================

/// @brief CSV of the non-degenerate interface points: header
/// i,j,k,x,y,z,nx,ny,nz,mean_curvature,area_weight,projection_axis,refined.
void write_interface_csv(const std::string& path, const InterfaceExtraction& interface);

/// @brief ASCII legacy VTK POLYDATA vertex cloud of the non-degenerate
/// interface points with normals, curvature and area weights attached.
void write_interface_vtk(const std::string& path, const InterfaceExtraction& interface);

// ============================================================================
// Manifest
// ============================================================================

/// @brief One emitted file: path relative to the output directory, its byte
/// count and the FNV-1a 64-bit checksum of its contents (16 hex digits).
struct ManifestEntry {
    std::string path;
    std::uint64_t bytes = 0;
    std::string checksum;
};

/// @brief FNV-1a 64-bit checksum of a file's bytes; throws ConfigError when
/// the file cannot be read.
std::uint64_t fnv1a64_file(const std::string& path);

/// @brief Collects emitted files under one directory and writes the manifest.
class ArtifactWriter {
public:
    /// Creates `directory` (and parents) if needed.
    explicit ArtifactWriter(const std::string& directory);

    const std::string& directory() const { return directory_; }

    /// Absolute-ish path (directory / relative) for emitting a file.
    std::string path_of(const std::string& relative) const;

    /// Stats and checksums an already-written file and adds it to the index.
    void record(const std::string& relative);

    const std::vector<ManifestEntry>& entries() const { return entries_; }

    /// Writes the JSON manifest listing every recorded file, records nothing
    /// for itself, and returns its full path.
    std::string write_manifest(const std::string& name = "manifest.json") const;

private:
    std::string directory_;
    std::vector<ManifestEntry> entries_;
};

}  // namespace tfd
