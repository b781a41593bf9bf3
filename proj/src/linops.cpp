#include "rhuidr/linops.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "rhuidr/kernels.hpp"

namespace rhuidr {

namespace {

std::string shape_str(Shape s) {
  std::ostringstream os;
  os << s.rows << "x" << s.cols;
  return os.str();
}

void require_contiguous(const ConstMatRef& x) {
  if (x.rows() > 1 && x.outerStride() != x.cols()) throw ShapeError("linear map needs contiguous rows");
}

std::size_t count(const ConstMatRef& x) { return static_cast<std::size_t>(x.rows() * x.cols()); }

}  // namespace

double LinearMap::norm_bound() const { return std::sqrt(norm_bound_sq_); }

void LinearMap::check_in(const ConstMatRef& x) const {
  if (x.rows() != in_.rows || x.cols() != in_.cols)
    throw ShapeError(name_ + ": input " + shape_str({x.rows(), x.cols()}) + ", expected " + shape_str(in_));
  require_contiguous(x);
}

void LinearMap::check_out(const ConstMatRef& y) const {
  if (y.rows() != out_.rows || y.cols() != out_.cols)
    throw ShapeError(name_ + ": output " + shape_str({y.rows(), y.cols()}) + ", expected " + shape_str(out_));
  require_contiguous(y);
}

Mat LinearMap::forward(const Mat& x) const {
  Mat out(out_.rows, out_.cols);
  forward(x, out);
  return out;
}

Mat LinearMap::adjoint(const Mat& y) const {
  Mat out(in_.rows, in_.cols);
  adjoint(y, out);
  return out;
}

double inner(const ConstMatRef& a, const ConstMatRef& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("inner: shape mismatch");
  if (a.outerStride() == a.cols() && b.outerStride() == b.cols())
    return kernels::active().dot(a.data(), b.data(), count(a));
  return a.cwiseProduct(b).sum();
}

namespace {

class Identity final : public LinearMap {
 public:
  explicit Identity(Shape s) : LinearMap(s, s, 1.0, "identity") {}
  void forward(const ConstMatRef& x, MatRef out) const override {
    check_in(x);
    check_out(out);
    out = x;
  }
  void adjoint(const ConstMatRef& y, MatRef out) const override {
    check_out(y);
    check_in(out);
    out = y;
  }
};

/// Forward difference out[i] = x[i + stride] - x[i] on the flattened
/// row-major buffer, forced to zero on a boundary set. The boundary set is
/// described by `each_boundary`, which visits every flat index whose
/// difference is defined as zero.
class Diff final : public LinearMap {
 public:
  Diff(DiffAxis axis, Index rows, Index n1, Index n2)
      : LinearMap({rows, n1 * n2}, {rows, n1 * n2}, 4.0, axis_name(axis)),
        axis_(axis), rows_(rows), n1_(n1), n2_(n2) {
    if (rows <= 0 || n1 <= 0 || n2 <= 0) throw ShapeError("difference operator: invalid grid");
  }

  void forward(const ConstMatRef& x, MatRef out) const override {
    check_in(x);
    check_out(out);
    const std::size_t total = count(x);
    const std::size_t s = stride();
    double* o = out.data();
    if (s < total) kernels::active().sub(x.data() + s, x.data(), o, total - s);
    for (std::size_t i = (s < total ? total - s : 0); i < total; ++i) o[i] = 0.0;
    each_boundary([&](std::size_t i) { o[i] = 0.0; });
  }

  // D^* y[j] = ym[j - s] - ym[j], ym = y with the boundary set zeroed.
  void adjoint(const ConstMatRef& y, MatRef out) const override {
    check_out(y);
    check_in(out);
    const std::size_t total = count(y);
    const std::size_t s = stride();
    const double* yy = y.data();
    double* o = out.data();
    const std::size_t head = std::min(s, total);
    for (std::size_t i = 0; i < head; ++i) o[i] = -yy[i];
    if (s < total) kernels::active().sub(yy, yy + s, o + s, total - s);
    auto fix = [&](std::size_t i) {
      o[i] += yy[i];
      if (i + s < total) o[i + s] -= yy[i];
    };
    for (std::size_t i = (s < total ? total - s : 0); i < total; ++i) fix(i);
    each_boundary(fix);
  }

 private:
  static std::string axis_name(DiffAxis a) {
    switch (a) {
      case DiffAxis::Vertical: return "Dv";
      case DiffAxis::Horizontal: return "Dh";
      case DiffAxis::Spectral: return "Db";
    }
    return "D?";
  }

  std::size_t stride() const {
    switch (axis_) {
      case DiffAxis::Vertical: return 1;
      case DiffAxis::Horizontal: return static_cast<std::size_t>(n1_);
      case DiffAxis::Spectral: return static_cast<std::size_t>(n1_ * n2_);
    }
    return 1;
  }

  // Boundary indices not already covered by the trailing `stride` entries.
  template <class F>
  void each_boundary(F&& f) const {
    const std::size_t n = static_cast<std::size_t>(n1_ * n2_);
    const std::size_t n1 = static_cast<std::size_t>(n1_);
    const std::size_t total = static_cast<std::size_t>(rows_) * n;
    switch (axis_) {
      case DiffAxis::Vertical:
        for (std::size_t i = n1 - 1; i + 1 < total; i += n1) f(i);
        break;
      case DiffAxis::Horizontal:
        for (std::size_t k = 0; k + 1 < static_cast<std::size_t>(rows_); ++k)
          for (std::size_t i = k * n + n - n1; i < (k + 1) * n; ++i) f(i);
        break;
      case DiffAxis::Spectral:
        break;
    }
  }

  DiffAxis axis_;
  Index rows_;
  Index n1_;
  Index n2_;
};

double stack_bound_sq(const std::vector<LinearMapPtr>& parts, const std::vector<double>& w) {
  double s = 0.0;
  for (std::size_t i = 0; i < parts.size(); ++i) s += w[i] * w[i] * parts[i]->norm_bound_sq();
  return s;
}

Index stack_rows(const std::vector<LinearMapPtr>& parts) {
  Index r = 0;
  for (const auto& p : parts) r += p->out_shape().rows;
  return r;
}

class Stack final : public LinearMap {
 public:
  Stack(std::vector<LinearMapPtr> parts, std::vector<double> weights)
      : LinearMap(parts.at(0)->in_shape(), {stack_rows(parts), parts.at(0)->out_shape().cols},
                  stack_bound_sq(parts, weights), "stack"),
        parts_(std::move(parts)), weights_(std::move(weights)) {
    for (const auto& p : parts_) {
      if (!(p->in_shape() == in_shape()) || p->out_shape().cols != out_shape().cols)
        throw ShapeError("stack: incompatible parts");
    }
  }

  void forward(const ConstMatRef& x, MatRef out) const override {
    check_in(x);
    check_out(out);
    Index off = 0;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      const Index r = parts_[i]->out_shape().rows;
      auto block = out.middleRows(off, r);
      parts_[i]->forward(x, block);
      if (weights_[i] != 1.0) block *= weights_[i];
      off += r;
    }
  }

  void adjoint(const ConstMatRef& y, MatRef out) const override {
    check_out(y);
    check_in(out);
    out.setZero();
    Mat tmp(in_shape().rows, in_shape().cols);
    const auto& k = kernels::active();
    Index off = 0;
    for (std::size_t i = 0; i < parts_.size(); ++i) {
      const Index r = parts_[i]->out_shape().rows;
      parts_[i]->adjoint(y.middleRows(off, r), tmp);
      k.axpy(weights_[i], tmp.data(), out.data(), count(out));
      off += r;
    }
  }

 private:
  std::vector<LinearMapPtr> parts_;
  std::vector<double> weights_;
};

class Compose final : public LinearMap {
 public:
  Compose(LinearMapPtr outer, LinearMapPtr inner)
      : LinearMap(inner->in_shape(), outer->out_shape(),
                  outer->norm_bound_sq() * inner->norm_bound_sq(),
                  outer->name() + "o" + inner->name()),
        outer_(std::move(outer)), inner_(std::move(inner)) {
    if (!(inner_->out_shape() == outer_->in_shape())) throw ShapeError("compose: inner dimension mismatch");
  }

  void forward(const ConstMatRef& x, MatRef out) const override {
    check_in(x);
    check_out(out);
    Mat mid(inner_->out_shape().rows, inner_->out_shape().cols);
    inner_->forward(x, mid);
    outer_->forward(mid, out);
  }

  void adjoint(const ConstMatRef& y, MatRef out) const override {
    check_out(y);
    check_in(out);
    Mat mid(inner_->out_shape().rows, inner_->out_shape().cols);
    outer_->adjoint(y, mid);
    inner_->adjoint(mid, out);
  }

 private:
  LinearMapPtr outer_;
  LinearMapPtr inner_;
};

class Scaled final : public LinearMap {
 public:
  Scaled(LinearMapPtr map, double scale)
      : LinearMap(map->in_shape(), map->out_shape(), scale * scale * map->norm_bound_sq(),
                  "scaled(" + map->name() + ")"),
        map_(std::move(map)), scale_(scale) {}

  void forward(const ConstMatRef& x, MatRef out) const override {
    map_->forward(x, out);
    out *= scale_;
  }
  void adjoint(const ConstMatRef& y, MatRef out) const override {
    map_->adjoint(y, out);
    out *= scale_;
  }

 private:
  LinearMapPtr map_;
  double scale_;
};

class LeftMultiply final : public LinearMap {
 public:
  LeftMultiply(const Mat& E, Index n, double sigma_sq)
      : LinearMap({E.cols(), n}, {E.rows(), n}, sigma_sq, "E"), E_(E), Et_(E.transpose()) {}

  void forward(const ConstMatRef& x, MatRef out) const override {
    check_in(x);
    check_out(out);
    out.noalias() = E_ * x;
  }
  void adjoint(const ConstMatRef& y, MatRef out) const override {
    check_out(y);
    check_in(out);
    out.noalias() = Et_ * y;
  }

 private:
  Mat E_;
  Mat Et_;
};

}  // namespace

LinearMapPtr make_identity(Shape shape) { return std::make_shared<Identity>(shape); }

LinearMapPtr make_diff(DiffAxis axis, Index rows, Index n1, Index n2) {
  return std::make_shared<Diff>(axis, rows, n1, n2);
}

LinearMapPtr make_stack(std::vector<LinearMapPtr> parts, std::vector<double> weights) {
  if (parts.empty()) throw ShapeError("stack: no parts");
  if (weights.empty()) weights.assign(parts.size(), 1.0);
  if (weights.size() != parts.size()) throw ShapeError("stack: weight count mismatch");
  return std::make_shared<Stack>(std::move(parts), std::move(weights));
}

LinearMapPtr make_compose(LinearMapPtr outer, LinearMapPtr inner) {
  return std::make_shared<Compose>(std::move(outer), std::move(inner));
}

LinearMapPtr make_scaled(LinearMapPtr map, double scale) {
  return std::make_shared<Scaled>(std::move(map), scale);
}

LinearMapPtr make_spatial_diff(Index rows, Index n1, Index n2) {
  return make_stack({make_diff(DiffAxis::Vertical, rows, n1, n2), make_diff(DiffAxis::Horizontal, rows, n1, n2)});
}

LinearMapPtr make_spatio_spectral_diff(Index rows, Index n1, Index n2) {
  return make_compose(make_spatial_diff(rows, n1, n2), make_diff(DiffAxis::Spectral, rows, n1, n2));
}

LinearMapPtr make_hsstv(Index rows, Index n1, Index n2, double omega) {
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw Error("hsstv: omega must be finite and >= 0");
  return make_stack({make_spatio_spectral_diff(rows, n1, n2), make_spatial_diff(rows, n1, n2)}, {1.0, omega});
}

double largest_singular_value(const Mat& E) {
  if (E.size() == 0) return 0.0;
  const Mat G = E.transpose() * E;
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> normal;
  Vec v(G.cols());
  for (Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  double lambda = 0.0;
  for (int it = 0; it < 1000; ++it) {
    const double nv = v.norm();
    if (nv == 0.0) return 0.0;
    v /= nv;
    Vec w = G * v;
    const double next = v.dot(w);
    v = std::move(w);
    const bool done = it > 0 && std::abs(next - lambda) <= 1e-12 * std::abs(next);
    lambda = next;
    if (done) break;
  }
  return std::sqrt(std::max(lambda, 0.0));
}

LinearMapPtr make_library_map(const Mat& E, Index n, std::optional<double> known_norm) {
  if (known_norm && (!std::isfinite(*known_norm) || *known_norm < 0.0))
    throw Error("make_library_map: known norm must be finite and >= 0");
  const double sigma = known_norm ? *known_norm : largest_singular_value(E) * (1.0 + 1e-6);
  return std::make_shared<LeftMultiply>(E, n, sigma * sigma);
}

LinearMapPtr compose_with_library(const LinearMapPtr& K, const EndmemberLibrary& E, Index n) {
  if (K->in_shape().rows != E.bands() || K->in_shape().cols != n)
    throw ShapeError("compose_with_library: library has " + std::to_string(E.bands()) +
                     " bands, operator expects " + std::to_string(K->in_shape().rows));
  return make_compose(K, make_library_map(E.matrix(), n));
}

double power_iteration_norm(const LinearMap& G, int iters, std::uint64_t seed) {
  if (iters < 1) throw Error("power_iteration_norm: iters must be >= 1");
  const Shape in = G.in_shape();
  const Shape out = G.out_shape();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Mat x(in.rows, in.cols);
  for (Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  Mat gx(out.rows, out.cols);
  double best = 0.0;
  for (int it = 0; it < iters; ++it) {
    const double nx = x.norm();
    if (nx == 0.0) break;
    x /= nx;
    G.forward(x, gx);
    best = std::max(best, gx.norm());
    G.adjoint(gx, x);
  }
  return best;
}

namespace {

Mat apply_diff(DiffAxis axis, const Mat& x, const Dims& dims, bool adjoint) {
  dims.validate();
  require_shape(x, dims.l, dims.n(), "difference operator");
  Diff d(axis, dims.l, dims.n1, dims.n2);
  Mat out(x.rows(), x.cols());
  if (adjoint)
    d.adjoint(x, out);
  else
    d.forward(x, out);
  return out;
}

}  // namespace

Mat diff_v(const Mat& x, const Dims& dims) { return apply_diff(DiffAxis::Vertical, x, dims, false); }
Mat diff_h(const Mat& x, const Dims& dims) { return apply_diff(DiffAxis::Horizontal, x, dims, false); }
Mat diff_b(const Mat& x, const Dims& dims) { return apply_diff(DiffAxis::Spectral, x, dims, false); }
Mat adjoint_diff_v(const Mat& y, const Dims& dims) { return apply_diff(DiffAxis::Vertical, y, dims, true); }
Mat adjoint_diff_h(const Mat& y, const Dims& dims) { return apply_diff(DiffAxis::Horizontal, y, dims, true); }
Mat adjoint_diff_b(const Mat& y, const Dims& dims) { return apply_diff(DiffAxis::Spectral, y, dims, true); }

Mat spatial_diff(const Mat& x, const Dims& dims) {
  dims.validate();
  require_shape(x, dims.l, dims.n(), "spatial_diff");
  return make_spatial_diff(dims.l, dims.n1, dims.n2)->forward(x);
}

Mat hsstv_op(const Mat& x, const Dims& dims, double omega) {
  dims.validate();
  require_shape(x, dims.l, dims.n(), "hsstv_op");
  return make_hsstv(dims.l, dims.n1, dims.n2, omega)->forward(x);
}

}  // namespace rhuidr
