#include "rhuidr/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

namespace rhuidr::io {

namespace {

std::ofstream open_out(const fs::path& path, std::ios::openmode mode = std::ios::out) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream os(path, mode | std::ios::trunc);
  if (!os) throw Error("cannot open '" + path.string() + "' for writing");
  return os;
}

std::ifstream open_in(const fs::path& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream is(path, mode);
  if (!is) throw Error("cannot open '" + path.string() + "'");
  return is;
}

std::uint64_t to_le(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::little) return v;
  return __builtin_bswap64(v);
}

Index parse_dim(const std::string& line, const std::string& key, const fs::path& path) {
  std::istringstream ls(line);
  std::string k;
  long long v = -1;
  std::string extra;
  if (!(ls >> k >> v) || k != key || (ls >> extra))
    throw FormatError(path.string() + ": expected header line '" + key + " <int>', got '" + line + "'");
  if (v <= 0) throw FormatError(path.string() + ": " + key + " must be positive");
  if (v > (1LL << 31)) throw FormatError(path.string() + ": " + key + " too large");
  return static_cast<Index>(v);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_cube(const HSCube& cube, const fs::path& path) {
  const Dims& d = cube.dims();
  auto os = open_out(path, std::ios::out | std::ios::binary);
  os << kCubeMagic << '\n'
     << "n1 " << d.n1 << '\n'
     << "n2 " << d.n2 << '\n'
     << "l " << d.l << '\n'
     << "layout " << kCubeLayout << '\n';
  const Mat& m = cube.data();
  std::vector<std::uint64_t> buf(static_cast<std::size_t>(m.size()));
  for (Index i = 0; i < m.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, m.data() + i, sizeof bits);
    buf[static_cast<std::size_t>(i)] = to_le(bits);
  }
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(std::uint64_t)));
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

HSCube read_cube(const fs::path& path) {
  auto is = open_in(path, std::ios::in | std::ios::binary);
  std::string line;
  if (!std::getline(is, line) || line != kCubeMagic)
    throw FormatError(path.string() + ": not a cube file (bad magic)");
  Dims d;
  std::string l1, l2, l3, l4;
  if (!std::getline(is, l1) || !std::getline(is, l2) || !std::getline(is, l3) || !std::getline(is, l4))
    throw FormatError(path.string() + ": truncated header");
  d.n1 = parse_dim(l1, "n1", path);
  d.n2 = parse_dim(l2, "n2", path);
  d.l = parse_dim(l3, "l", path);
  if (l4 != std::string("layout ") + kCubeLayout) throw FormatError(path.string() + ": unsupported layout '" + l4 + "'");

  const auto n1 = static_cast<unsigned __int128>(d.n1);
  const unsigned __int128 bytes = n1 * static_cast<unsigned __int128>(d.n2) * static_cast<unsigned __int128>(d.l) * 8u;
  if (bytes > (static_cast<unsigned __int128>(1) << 40)) throw FormatError(path.string() + ": dimensions overflow");

  const auto start = is.tellg();
  is.seekg(0, std::ios::end);
  const auto end = is.tellg();
  is.seekg(start);
  const auto payload = static_cast<unsigned __int128>(end - start);
  if (payload != bytes) {
    std::ostringstream os;
    os << path.string() << ": payload is " << static_cast<long long>(end - start) << " bytes, header implies "
       << static_cast<long long>(bytes);
    throw FormatError(os.str());
  }
  std::vector<std::uint64_t> buf(static_cast<std::size_t>(d.l * d.n()));
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(bytes));
  if (!is) throw FormatError(path.string() + ": short read");
  Mat m(d.l, d.n());
  for (std::size_t i = 0; i < buf.size(); ++i) {
    const std::uint64_t bits = to_le(buf[i]);
    std::memcpy(m.data() + i, &bits, sizeof bits);
  }
  return cube_from_matrix(std::move(m), d);
}

void write_matrix_csv(const Mat& m, const fs::path& path) {
  auto os = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

Mat read_matrix_csv(const fs::path& path) {
  auto is = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    const char* p = line.data();
    const char* end = p + line.size();
    while (true) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc())
        throw FormatError(path.string() + ":" + std::to_string(lineno) + ": bad number");
      row.push_back(v);
      p = res.ptr;
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      if (*p != ',') throw FormatError(path.string() + ":" + std::to_string(lineno) + ": expected ','");
      ++p;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw FormatError(path.string() + ":" + std::to_string(lineno) + ": ragged row (" + std::to_string(row.size()) +
                        " values, expected " + std::to_string(rows.front().size()) + ")");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw FormatError(path.string() + ": empty matrix file");
  Mat m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

std::vector<fs::path> export_abundance_pgm(const Mat& A, const Dims& dims, const fs::path& out_dir) {
  require_shape(A, A.rows(), dims.n(), "export_abundance_pgm");
  fs::create_directories(out_dir);
  const double max_value = A.size() ? std::max(A.maxCoeff(), 0.0) : 0.0;
  {
    auto os = open_out(out_dir / "scale.txt");
    os << "max_value " << format_double(max_value) << '\n'
       << "maxval 65535\n"
       << "# a = pixel / 65535 * max_value\n";
  }
  std::vector<fs::path> out;
  for (Index i = 0; i < A.rows(); ++i) {
    const fs::path path = out_dir / ("abundance_" + std::to_string(i) + ".pgm");
    auto os = open_out(path, std::ios::out | std::ios::binary);
    os << "P5\n" << dims.n2 << ' ' << dims.n1 << "\n65535\n";
    std::vector<unsigned char> buf;
    buf.reserve(static_cast<std::size_t>(dims.n() * 2));
    for (Index r = 0; r < dims.n1; ++r) {
      for (Index c = 0; c < dims.n2; ++c) {
        const double a = std::clamp(A(i, c * dims.n1 + r), 0.0, max_value);
        const auto v = max_value > 0.0 ? static_cast<unsigned>(std::lround(a / max_value * 65535.0)) : 0u;
        buf.push_back(static_cast<unsigned char>(v >> 8));
        buf.push_back(static_cast<unsigned char>(v & 0xff));
      }
    }
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!os) throw Error("write failed for '" + path.string() + "'");
    out.push_back(path);
  }
  return out;
}

Pgm16 read_pgm16(const fs::path& path) {
  auto is = open_in(path, std::ios::in | std::ios::binary);
  std::string magic;
  Pgm16 img;
  unsigned maxval = 0;
  if (!(is >> magic >> img.width >> img.height >> maxval) || magic != "P5" || maxval != 65535)
    throw FormatError(path.string() + ": not a 16-bit binary PGM");
  is.get();
  std::vector<unsigned char> buf(static_cast<std::size_t>(img.width * img.height * 2));
  is.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!is) throw FormatError(path.string() + ": truncated PGM");
  img.pixels.resize(buf.size() / 2);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) img.pixels[i] = (unsigned{buf[2 * i]} << 8) | buf[2 * i + 1];
  return img;
}

double read_pgm_scale(const fs::path& out_dir) {
  auto is = open_in(out_dir / "scale.txt");
  std::string key;
  double v = 0.0;
  if (!(is >> key >> v) || key != "max_value") throw FormatError("scale.txt: missing max_value");
  return v;
}

void write_trace_csv(const SolveTrace& trace, const Params& params, const fs::path& path) {
  auto os = open_out(path);
  for (const auto& [k, v] : params) os << "# " << k << '=' << v << '\n';
  os << "# iterations=" << trace.iterations << '\n';
  os << "# termination=" << to_string(trace.reason) << '\n';
  os << "iter,rel_change,objective,fidelity_dist,s_l1,stripe_mav\n";
  for (const auto& r : trace.records) {
    os << r.iter << ',' << format_double(r.rel_change);
    for (std::size_t i = 0; i < 4; ++i) os << ',' << (i < r.diagnostics.size() ? format_double(r.diagnostics[i]) : "");
    os << '\n';
  }
  if (!os) throw Error("write failed for '" + path.string() + "'");
}

}  // namespace rhuidr::io
