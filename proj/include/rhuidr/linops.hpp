#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rhuidr/core_types.hpp"

namespace rhuidr {

struct Shape {
  Index rows = 0;
  Index cols = 0;
  bool operator==(const Shape&) const = default;
};

using MatRef = Eigen::Ref<Mat>;
using ConstMatRef = Eigen::Ref<const Mat>;

/// Matrix-free linear map between matrix spaces with a certified upper bound
/// on its operator norm. The bound is stored squared so that stepsizes built
/// from integer bounds (||D||^2 = 8, ...) stay exact.
///
/// forward/adjoint write every entry of `out`, which must already have the
/// output (resp. input) shape and be contiguous.
class LinearMap {
 public:
  LinearMap(Shape in, Shape out, double norm_bound_sq, std::string name)
      : in_(in), out_(out), norm_bound_sq_(norm_bound_sq), name_(std::move(name)) {}
  virtual ~LinearMap() = default;

  Shape in_shape() const noexcept { return in_; }
  Shape out_shape() const noexcept { return out_; }
  double norm_bound_sq() const noexcept { return norm_bound_sq_; }
  double norm_bound() const;
  const std::string& name() const noexcept { return name_; }

  virtual void forward(const ConstMatRef& x, MatRef out) const = 0;
  virtual void adjoint(const ConstMatRef& y, MatRef out) const = 0;

  Mat forward(const Mat& x) const;
  Mat adjoint(const Mat& y) const;

 protected:
  void check_in(const ConstMatRef& x) const;
  void check_out(const ConstMatRef& y) const;

 private:
  Shape in_;
  Shape out_;
  double norm_bound_sq_;
  std::string name_;
};

using LinearMapPtr = std::shared_ptr<const LinearMap>;

enum class DiffAxis { Vertical, Horizontal, Spectral };

/// Forward differences with a zero last slice along one axis. `rows` is the
/// number of stacked bands (l for images, m for abundances).
LinearMapPtr make_identity(Shape shape);
LinearMapPtr make_diff(DiffAxis axis, Index rows, Index n1, Index n2);
/// D = [Dv; Dh], bound 2*sqrt(2).
LinearMapPtr make_spatial_diff(Index rows, Index n1, Index n2);
/// D o Db, bound 4*sqrt(2).
LinearMapPtr make_spatio_spectral_diff(Index rows, Index n1, Index n2);
/// C_omega = [D o Db; omega D], bound sqrt(32 + 8 omega^2).
LinearMapPtr make_hsstv(Index rows, Index n1, Index n2, double omega);
/// Vertical stack of maps sharing one input shape, each scaled by its weight.
LinearMapPtr make_stack(std::vector<LinearMapPtr> parts, std::vector<double> weights = {});
/// outer o inner.
LinearMapPtr make_compose(LinearMapPtr outer, LinearMapPtr inner);
LinearMapPtr make_scaled(LinearMapPtr map, double scale);
/// A -> E A with bound sigma_max(E) (estimated, then inflated by 1e-6),
/// or `known_norm` when the caller can certify it.
LinearMapPtr make_library_map(const Mat& E, Index n, std::optional<double> known_norm = std::nullopt);
/// A -> K(E A).
LinearMapPtr compose_with_library(const LinearMapPtr& K, const EndmemberLibrary& E, Index n);

// Direct forms on image-shaped data.
Mat diff_v(const Mat& x, const Dims& dims);
Mat diff_h(const Mat& x, const Dims& dims);
Mat diff_b(const Mat& x, const Dims& dims);
Mat adjoint_diff_v(const Mat& y, const Dims& dims);
Mat adjoint_diff_h(const Mat& y, const Dims& dims);
Mat adjoint_diff_b(const Mat& y, const Dims& dims);
Mat spatial_diff(const Mat& x, const Dims& dims);
Mat hsstv_op(const Mat& x, const Dims& dims, double omega);

/// Largest singular value of a dense matrix by power iteration on E^T E
/// (fixed seed, up to 1000 steps or relative change below 1e-12).
double largest_singular_value(const Mat& E);

/// Lower estimate of ||G||_op after `iters` power steps on G^*G from a seeded
/// Gaussian start. Returns 0 for the zero operator.
double power_iteration_norm(const LinearMap& G, int iters, std::uint64_t seed);

/// Frobenius inner product.
double inner(const ConstMatRef& a, const ConstMatRef& b);

}  // namespace rhuidr
