#include "rhuidr/prox.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "rhuidr/kernels.hpp"

namespace rhuidr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::size_t count(const ConstMatRef& x) { return static_cast<std::size_t>(x.size()); }

void require_gamma(double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) throw Error("prox: gamma must be finite and > 0");
}

void require_contiguous(const ConstMatRef& x) {
  if (x.rows() > 1 && x.outerStride() != x.cols()) throw ShapeError("prox needs contiguous rows");
}

class ZeroFunction final : public Prox {
 public:
  void apply(double, MatRef) const override {}
  double value(const ConstMatRef&) const override { return 0.0; }
};

class Nonneg final : public Prox {
 public:
  void apply(double, MatRef x) const override {
    require_contiguous(x);
    kernels::active().clamp_nonneg(x.data(), x.data(), count(x));
  }
  double value(const ConstMatRef& x) const override { return x.minCoeff() >= 0.0 ? 0.0 : kInf; }
};

class L1 final : public Prox {
 public:
  explicit L1(double w) : w_(w) {}
  void apply(double gamma, MatRef x) const override {
    require_contiguous(x);
    kernels::active().soft_threshold(x.data(), gamma * w_, x.data(), count(x));
  }
  double value(const ConstMatRef& x) const override { return w_ * x.cwiseAbs().sum(); }

 private:
  double w_;
};

class L12Rows final : public Prox {
 public:
  explicit L12Rows(double w) : w_(w) {}
  void apply(double gamma, MatRef x) const override {
    require_contiguous(x);
    const auto& k = kernels::active();
    const double t = gamma * w_;
    const std::size_t cols = static_cast<std::size_t>(x.cols());
    for (Index i = 0; i < x.rows(); ++i) {
      double* row = x.data() + i * x.cols();
      const double nrm = std::sqrt(k.sum_sq(row, cols));
      // max(1 - t / 0, 0) is read as 0: the prox of a norm maps 0 to 0.
      const double scale = nrm > 0.0 ? std::max(1.0 - t / nrm, 0.0) : 0.0;
      k.axpby(scale, row, 0.0, row, row, cols);
    }
  }
  double value(const ConstMatRef& x) const override { return w_ * x.rowwise().norm().sum(); }

 private:
  double w_;
};

class L12Cols final : public Prox {
 public:
  explicit L12Cols(double w) : w_(w) {}
  void apply(double gamma, MatRef x) const override {
    require_contiguous(x);
    const auto& k = kernels::active();
    const double t = gamma * w_;
    const std::size_t cols = static_cast<std::size_t>(x.cols());
    std::vector<double> scale(cols, 0.0);
    for (Index i = 0; i < x.rows(); ++i) k.accumulate_sq(x.data() + i * x.cols(), scale.data(), cols);
    for (double& s : scale) {
      const double nrm = std::sqrt(s);
      s = nrm > 0.0 ? std::max(1.0 - t / nrm, 0.0) : 0.0;
    }
    for (Index i = 0; i < x.rows(); ++i) {
      double* row = x.data() + i * x.cols();
      k.mul(row, scale.data(), row, cols);
    }
  }
  double value(const ConstMatRef& x) const override { return w_ * x.colwise().norm().sum(); }

 private:
  double w_;
};

class FroBall final : public Prox {
 public:
  FroBall(Mat center, double radius) : center_(std::move(center)), radius_(radius) {
    if (!(radius_ >= 0.0) || !std::isfinite(radius_)) throw Error("Frobenius ball: radius must be finite and >= 0");
  }
  void apply(double, MatRef x) const override {
    require_contiguous(x);
    if (x.rows() != center_.rows() || x.cols() != center_.cols()) throw ShapeError("Frobenius ball: shape mismatch");
    const auto& k = kernels::active();
    const std::size_t n = count(x);
    const double dist = std::sqrt(k.diff_sq(x.data(), center_.data(), n));
    if (dist <= radius_) return;
    // center + radius * (x - center) / dist
    const double s = radius_ / dist;
    k.axpby(s, x.data(), 1.0 - s, center_.data(), x.data(), n);
  }
  double value(const ConstMatRef& x) const override {
    return (x - center_).norm() <= radius_ * (1.0 + 1e-12) ? 0.0 : kInf;
  }

 private:
  Mat center_;
  double radius_;
};

class L1Ball final : public Prox {
 public:
  explicit L1Ball(double radius) : radius_(radius) {
    if (!(radius_ >= 0.0) || !std::isfinite(radius_)) throw Error("l1 ball: radius must be finite and >= 0");
  }
  void apply(double, MatRef x) const override {
    require_contiguous(x);
    const std::size_t n = count(x);
    const double theta = l1_ball_threshold(x.data(), n, radius_);
    if (theta > 0.0) kernels::active().soft_threshold(x.data(), theta, x.data(), n);
  }
  double value(const ConstMatRef& x) const override {
    return x.cwiseAbs().sum() <= radius_ * (1.0 + 1e-12) ? 0.0 : kInf;
  }

 private:
  double radius_;
};

class ZeroSet final : public Prox {
 public:
  void apply(double, MatRef x) const override { x.setZero(); }
  double value(const ConstMatRef& x) const override { return x.isZero(0.0) ? 0.0 : kInf; }
};

}  // namespace

double l1_ball_threshold(const double* values, std::size_t n, double radius) {
  if (!(radius >= 0.0)) throw Error("l1 ball: radius must be >= 0");
  const double total = kernels::active().sum_abs(values, n);
  if (total <= radius) return 0.0;
  if (radius == 0.0) {
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, std::fabs(values[i]));
    return mx;
  }

  // Condat's pass over |y|: keep a candidate set whose running mean shift
  // rho = (sum(candidates) - radius) / |candidates| tracks the threshold.
  std::vector<double> cand;
  std::vector<double> spill;
  cand.reserve(64);
  double first = std::fabs(values[0]);
  cand.push_back(first);
  double rho = first - radius;
  for (std::size_t i = 1; i < n; ++i) {
    const double y = std::fabs(values[i]);
    if (y <= rho) continue;
    rho += (y - rho) / static_cast<double>(cand.size() + 1);
    if (rho > y - radius) {
      cand.push_back(y);
    } else {
      spill.insert(spill.end(), cand.begin(), cand.end());
      cand.assign(1, y);
      rho = y - radius;
    }
  }
  for (double y : spill) {
    if (y > rho) {
      cand.push_back(y);
      rho += (y - rho) / static_cast<double>(cand.size());
    }
  }
  for (bool changed = true; changed;) {
    changed = false;
    std::size_t keep = 0;
    for (std::size_t j = 0; j < cand.size(); ++j) {
      const double y = cand[j];
      if (y > rho) {
        cand[keep++] = y;
      } else {
        const std::size_t remaining = cand.size() - (j - keep) - 1;
        if (remaining > 0) rho += (rho - y) / static_cast<double>(remaining);
        changed = true;
      }
    }
    cand.resize(keep);
  }
  // Recompute from the final support to shed the drift of the running updates.
  double sum = 0.0;
  for (double y : cand) sum += y;
  return cand.empty() ? rho : std::max((sum - radius) / static_cast<double>(cand.size()), 0.0);
}

ProxPtr make_prox_zero_function() { return std::make_shared<ZeroFunction>(); }
ProxPtr make_prox_nonneg() { return std::make_shared<Nonneg>(); }
ProxPtr make_prox_l1(double weight) { return std::make_shared<L1>(weight); }
ProxPtr make_prox_l12_rows(double weight) { return std::make_shared<L12Rows>(weight); }
ProxPtr make_prox_l12_cols(double weight) { return std::make_shared<L12Cols>(weight); }
ProxPtr make_prox_fro_ball(Mat center, double radius) { return std::make_shared<FroBall>(std::move(center), radius); }
ProxPtr make_prox_l1_ball(double radius) { return std::make_shared<L1Ball>(radius); }
ProxPtr make_prox_zero_set() { return std::make_shared<ZeroSet>(); }

Mat prox_nonneg(const Mat& x) {
  Mat out = x;
  Nonneg().apply(1.0, out);
  return out;
}

Mat prox_l1(const Mat& x, double gamma) {
  if (!(gamma >= 0.0)) throw Error("prox_l1: gamma must be >= 0");
  Mat out = x;
  kernels::active().soft_threshold(out.data(), gamma, out.data(), count(out));
  return out;
}

Mat prox_l12_rows(const Mat& x, double gamma) {
  if (!(gamma >= 0.0)) throw Error("prox_l12_rows: gamma must be >= 0");
  Mat out = x;
  L12Rows(1.0).apply(gamma, out);
  return out;
}

Mat prox_l12_cols(const Mat& x, double gamma) {
  if (!(gamma >= 0.0)) throw Error("prox_l12_cols: gamma must be >= 0");
  Mat out = x;
  L12Cols(1.0).apply(gamma, out);
  return out;
}

Mat project_fro_ball(const Mat& x, const Mat& center, double radius) {
  if (!(radius > 0.0)) throw Error("project_fro_ball: radius must be > 0");
  Mat out = x;
  FroBall(center, radius).apply(1.0, out);
  return out;
}

Mat project_l1_ball(const Mat& x, double radius) {
  Mat out = x;
  L1Ball(radius).apply(1.0, out);
  return out;
}

Mat prox_zero_set(const Mat& x) { return Mat::Zero(x.rows(), x.cols()); }

void prox_conjugate_inplace(MatRef z, double gamma, const Prox& g, Mat& scratch) {
  require_gamma(gamma);
  require_contiguous(z);
  const auto& k = kernels::active();
  const std::size_t n = count(z);
  scratch.resize(z.rows(), z.cols());
  k.axpby(1.0 / gamma, z.data(), 0.0, z.data(), scratch.data(), n);
  g.apply(1.0 / gamma, scratch);
  k.axpy(-gamma, scratch.data(), z.data(), n);
}

Mat prox_conjugate(const Mat& ztilde, double gamma, const Prox& g) {
  Mat out = ztilde;
  Mat scratch;
  prox_conjugate_inplace(out, gamma, g, scratch);
  return out;
}

}  // namespace rhuidr
