#pragma once

#include <cstdint>
#include <string>

#include "apml/point_set.hpp"

namespace apml {

enum class CloudFormat {
  AsciiXYZ,  ///< one point per line, '#' comments
  BinaryF32, ///< "PSET", u32 version, u32 n, u32 d, n*d little-endian f32
};

inline constexpr std::uint32_t kBinaryVersion = 1;

/// ".bin" / ".pset" map to BinaryF32, anything else to AsciiXYZ.
CloudFormat format_from_path(const std::string &path);

PointSet<double> load_pointcloud(const std::string &path, CloudFormat format);
inline PointSet<double> load_pointcloud(const std::string &path) {
  return load_pointcloud(path, format_from_path(path));
}

/// Writes to a sibling temporary file and renames it over `path`.
void save_pointcloud(const PointSet<double> &set, const std::string &path,
                     CloudFormat format);
inline void save_pointcloud(const PointSet<double> &set,
                            const std::string &path) {
  save_pointcloud(set, path, format_from_path(path));
}

/// Dense matrix as comma-separated rows, used for saved transport plans.
Matrix<double> load_matrix_csv(const std::string &path);
void save_matrix_csv(const Matrix<double> &m, const std::string &path);

} // namespace apml
