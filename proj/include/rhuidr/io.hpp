#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rhuidr/core_types.hpp"
#include "rhuidr/ppds.hpp"

namespace rhuidr::io {

namespace fs = std::filesystem;

class FormatError : public Error {
 public:
  using Error::Error;
};

/// Cube file: five text lines
///   RHUIDRCUBE1
///   n1 <int>
///   n2 <int>
///   l <int>
///   layout band-major-colpix
/// then l*n little-endian float64 values, band after band, pixels in
/// column-index order (p = c * n1 + r).
inline constexpr const char* kCubeMagic = "RHUIDRCUBE1";
inline constexpr const char* kCubeLayout = "band-major-colpix";

void write_cube(const HSCube& cube, const fs::path& path);
HSCube read_cube(const fs::path& path);

/// One matrix row per line, comma separated, shortest round-trip decimals.
void write_matrix_csv(const Mat& m, const fs::path& path);
Mat read_matrix_csv(const fs::path& path);

/// One 16-bit binary PGM per row of A (abundance_<row>.pgm) plus scale.txt
/// recording the map pixel = round(65535 * a / max_value), a clamped to
/// [0, max_value]. Returns the written image paths.
std::vector<fs::path> export_abundance_pgm(const Mat& A, const Dims& dims, const fs::path& out_dir);

struct Pgm16 {
  Index width = 0;
  Index height = 0;
  std::vector<unsigned> pixels;  // row-major image order
};
Pgm16 read_pgm16(const fs::path& path);
/// max_value recorded by export_abundance_pgm.
double read_pgm_scale(const fs::path& out_dir);

using Params = std::vector<std::pair<std::string, std::string>>;

/// "# key=value" lines, then
/// iter,rel_change,objective,fidelity_dist,s_l1,stripe_mav
void write_trace_csv(const SolveTrace& trace, const Params& params, const fs::path& path);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace rhuidr::io
