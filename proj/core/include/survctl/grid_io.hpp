#pragma once

// Grid files: `<name>.meta.json` next to `<name>.f64le`. The payload holds
// exactly m^n little-endian float64 values in row-major order over compact
// grid indices; the metadata carries its SHA-256.

#include <filesystem>
#include <span>
#include <string>

#include <nlohmann/json.hpp>

#include "survctl/grid.hpp"

namespace survctl {

inline constexpr int kGridFormatVersion = 1;

struct GridFiles {
  std::filesystem::path meta;
  std::filesystem::path payload;
};

/// Paths for `name` inside `dir`.
GridFiles grid_files(const std::filesystem::path& dir, const std::string& name);

/// Resolves a user-supplied path: the meta file, the payload, or the stem.
GridFiles resolve_grid_files(const std::filesystem::path& path);

/// Writes payload and metadata. `provenance` (if not null) is stored under
/// "provenance" in the metadata.
GridFiles save_grid(const ValueGrid& grid, const std::filesystem::path& dir,
                    const std::string& name, const nlohmann::json& provenance = nullptr);

/// Reads a grid back bit-exactly. Throws Error(kFormat) on version, checksum
/// or shape problems and Error(kIo) when files are missing.
ValueGrid load_grid(const std::filesystem::path& path);

/// Metadata object as written to disk.
nlohmann::json grid_metadata(const ValueGrid& grid);

std::string sha256_hex(std::span<const unsigned char> bytes);
/// SHA-256 of the little-endian float64 encoding of the values.
std::string payload_sha256(std::span<const double> values);

/// Load a grid and require a kind; Error(kKind) otherwise.
ValueGrid load_grid_of_kind(const std::filesystem::path& path, ValueKind kind);

}  // namespace survctl
