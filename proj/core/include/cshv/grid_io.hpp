#ifndef CSHV_GRID_IO_HPP
#define CSHV_GRID_IO_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "cshv/spectral_torus.hpp"

namespace cshv {

// CSHGRID v1: a single text line
//   "CSHGRID v1 nx ny tau1x tau1y tau2x tau2y\n"
// followed by nx*ny little-endian IEEE-754 doubles in row-major order
// (value (i, j) at position i*ny + j).

std::string encode_cshgrid(const ScalarGrid& grid);
ScalarGrid decode_cshgrid(std::string_view bytes);

void write_cshgrid(const std::filesystem::path& path, const ScalarGrid& grid);
ScalarGrid read_cshgrid(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it over `path`,
/// so readers never observe a truncated file.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);

/// Formats a double with 15 significant digits, the precision used for
/// every numeric CSV column.
std::string format_number(double v);

}  // namespace cshv

#endif  // CSHV_GRID_IO_HPP
