#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace rhuidr {

/// Dense row-major matrix. Hyperspectral data is stored band-major (one row
/// per band, one column per pixel), so every band is a contiguous run of n
/// values and spatial differences are flat strided loops.
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NonFiniteError : public Error {
 public:
  NonFiniteError(const std::string& what, Index row, Index col)
      : Error(what), row_(row), col_(col) {}
  Index row() const noexcept { return row_; }
  Index col() const noexcept { return col_; }

 private:
  Index row_;
  Index col_;
};

/// Spatial grid n1 x n2 (rows x columns of the image), l bands and m
/// library members. Pixel (r, c) lives in matrix column c * n1 + r.
struct Dims {
  Index n1 = 0;
  Index n2 = 0;
  Index l = 0;
  Index m = 0;

  Index n() const noexcept { return n1 * n2; }
  void validate(bool require_m = false) const;
  bool operator==(const Dims&) const = default;
};

Index pixel_index(Index r, Index c, const Dims& dims);
std::pair<Index, Index> pixel_coords(Index p, const Dims& dims);

class HSCube {
 public:
  HSCube() = default;
  HSCube(Mat data, const Dims& dims);

  const Mat& data() const noexcept { return data_; }
  const Dims& dims() const noexcept { return dims_; }
  Index bands() const noexcept { return data_.rows(); }
  Index pixels() const noexcept { return data_.cols(); }

 private:
  Mat data_;
  Dims dims_;
};

/// Validates shape and finiteness; never reshapes.
HSCube cube_from_matrix(Mat data, const Dims& dims);

/// l x m matrix of candidate spectra, one per column.
class EndmemberLibrary {
 public:
  EndmemberLibrary() = default;
  explicit EndmemberLibrary(Mat spectra, std::vector<std::string> names = {});

  const Mat& matrix() const noexcept { return spectra_; }
  Index bands() const noexcept { return spectra_.rows(); }
  Index size() const noexcept { return spectra_.cols(); }
  const std::vector<std::string>& names() const noexcept { return names_; }

 private:
  Mat spectra_;
  std::vector<std::string> names_;
};

using AbundanceMatrix = Mat;

struct NoiseTriple {
  Mat sparse;  // S
  Mat stripe;  // L
};

/// Throws NonFiniteError at the first (row-major order) NaN/Inf entry.
void require_finite(const Mat& x, const std::string& what);

void require_shape(const Mat& x, Index rows, Index cols, const std::string& what);

}  // namespace rhuidr
