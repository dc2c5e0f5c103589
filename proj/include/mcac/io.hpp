#pragma once

#include <mcac/core.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace mcac::io {

/// Binary PGM (P5). Values are returned in native grey levels (0..maxval).
ScalarField2D read_pgm(const std::filesystem::path& path);

/// Values are rounded and clamped to [0, 255] (8-bit) or [0, 65535] (16-bit, big-endian samples).
void write_pgm(const std::filesystem::path& path, const ScalarField2D& f, int bit_depth = 8);

/// Raw real field: "MCF1", u32 width, u32 height, u32 reserved (0), then
/// width*height little-endian IEEE-754 doubles, row-major.
ScalarField2D read_raw_field(const std::filesystem::path& path);
void write_raw_field(const std::filesystem::path& path, const ScalarField2D& f);

/// "x,y" per line; an optional non-numeric header line is skipped.
PointSet read_points_csv(const std::filesystem::path& path);
void write_points_csv(const std::filesystem::path& path, const PointSet& points);

/// "i,j" per line; an optional non-numeric header line is skipped.
std::vector<std::pair<int, int>> read_pairs_csv(const std::filesystem::path& path);
void write_pairs_csv(const std::filesystem::path& path, const std::vector<std::pair<int, int>>& pairs);

/// Fixed-precision formatting used by every CSV writer, so outputs are byte-stable.
std::string fmt(double v, int precision = 6);

}  // namespace mcac::io
