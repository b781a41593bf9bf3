#include "rhuidr/core_types.hpp"

#include <cmath>
#include <sstream>

namespace rhuidr {

void Dims::validate(bool require_m) const {
  if (n1 <= 0 || n2 <= 0 || l <= 0 || (require_m && m <= 0)) {
    std::ostringstream os;
    os << "invalid dims n1=" << n1 << " n2=" << n2 << " l=" << l << " m=" << m;
    throw ShapeError(os.str());
  }
}

Index pixel_index(Index r, Index c, const Dims& dims) {
  if (r < 0 || r >= dims.n1 || c < 0 || c >= dims.n2) {
    std::ostringstream os;
    os << "pixel (" << r << ", " << c << ") outside " << dims.n1 << "x" << dims.n2 << " grid";
    throw std::out_of_range(os.str());
  }
  return c * dims.n1 + r;
}

std::pair<Index, Index> pixel_coords(Index p, const Dims& dims) {
  if (p < 0 || p >= dims.n()) throw std::out_of_range("pixel index out of range");
  return {p % dims.n1, p / dims.n1};
}

void require_shape(const Mat& x, Index rows, Index cols, const std::string& what) {
  if (x.rows() != rows || x.cols() != cols) {
    std::ostringstream os;
    os << what << ": expected " << rows << "x" << cols << ", got " << x.rows() << "x" << x.cols();
    throw ShapeError(os.str());
  }
}

void require_finite(const Mat& x, const std::string& what) {
  for (Index i = 0; i < x.rows(); ++i) {
    for (Index j = 0; j < x.cols(); ++j) {
      if (!std::isfinite(x(i, j))) {
        std::ostringstream os;
        os << what << ": non-finite entry at (" << i << ", " << j << ")";
        throw NonFiniteError(os.str(), i, j);
      }
    }
  }
}

HSCube::HSCube(Mat data, const Dims& dims) : data_(std::move(data)), dims_(dims) {
  dims_.validate();
  require_shape(data_, dims_.l, dims_.n(), "cube");
}

HSCube cube_from_matrix(Mat data, const Dims& dims) {
  dims.validate();
  require_shape(data, dims.l, dims.n(), "cube_from_matrix");
  require_finite(data, "cube_from_matrix");
  return HSCube(std::move(data), dims);
}

EndmemberLibrary::EndmemberLibrary(Mat spectra, std::vector<std::string> names)
    : spectra_(std::move(spectra)), names_(std::move(names)) {
  if (spectra_.rows() == 0 || spectra_.cols() == 0) throw ShapeError("empty endmember library");
  if (!names_.empty() && static_cast<Index>(names_.size()) != spectra_.cols())
    throw ShapeError("endmember name count does not match library size");
  require_finite(spectra_, "endmember library");
  for (Index j = 0; j < spectra_.cols(); ++j) {
    bool nonzero = false;
    for (Index i = 0; i < spectra_.rows(); ++i) {
      if (spectra_(i, j) < 0.0) {
        std::ostringstream os;
        os << "endmember library: negative entry at (" << i << ", " << j << ")";
        throw Error(os.str());
      }
      nonzero = nonzero || spectra_(i, j) > 0.0;
    }
    if (!nonzero) {
      std::ostringstream os;
      os << "endmember library: column " << j << " is all zero";
      throw Error(os.str());
    }
  }
}

}  // namespace rhuidr
