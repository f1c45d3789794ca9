#pragma once

#include "lidarshape/types.hpp"

#include <filesystem>
#include <string_view>

namespace lidarshape {

enum class CloudFormat { XyzAscii, PlyAscii };

/// Parses "xyz" / "ply"; throws InvalidInput otherwise.
CloudFormat parse_cloud_format(std::string_view name);

/// Guess the format from the file extension (.ply -> PlyAscii, else XyzAscii).
CloudFormat format_from_extension(const std::filesystem::path& path);

/// Reads an ASCII cloud. xyz: one "x y z" triple per line, blank lines and
/// '#' comments skipped. ply: ascii 1.0 with a vertex element whose first
/// three properties are x, y, z; extra vertex properties are ignored.
PointCloud load_cloud(const std::filesystem::path& path, CloudFormat format = CloudFormat::XyzAscii);

/// Writes xyz-ascii, 9 significant digits, one point per line.
void save_cloud(const PointCloud& cloud, const std::filesystem::path& path);

}  // namespace lidarshape
