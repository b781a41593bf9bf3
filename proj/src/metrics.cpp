#include "rhuidr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace rhuidr {

namespace {

void same_shape(const Mat& a, const Mat& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError(std::string(what) + ": shape mismatch");
}

}  // namespace

std::string MetricReport::to_record() const {
  std::ostringstream os;
  os.precision(10);
  auto put = [&](const char* key, const std::optional<double>& v, bool first = false) {
    if (!first) os << ' ';
    os << key << '=';
    if (v)
      os << *v;
    else
      os << "na";
  };
  put("sre_db", sre_db, true);
  put("rmse", rmse);
  put("ps", ps);
  put("mpsnr_db", mpsnr_db);
  put("mssim", mssim);
  return os.str();
}

double sre(const Mat& truth, const Mat& est) {
  same_shape(truth, est, "sre");
  const double signal = truth.squaredNorm();
  if (signal == 0.0) throw Error("sre: true abundance is zero");
  const double err = (truth - est).squaredNorm();
  if (err == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(signal / err);
}

double rmse(const Mat& truth, const Mat& est) {
  same_shape(truth, est, "rmse");
  if (truth.size() == 0) throw Error("rmse: empty input");
  return std::sqrt((truth - est).squaredNorm() / static_cast<double>(truth.size()));
}

double ps(const Mat& truth, const Mat& est, double threshold) {
  same_shape(truth, est, "ps");
  Index counted = 0;
  Index hits = 0;
  for (Index p = 0; p < truth.cols(); ++p) {
    const double nrm = truth.col(p).squaredNorm();
    if (nrm == 0.0) continue;
    ++counted;
    if ((truth.col(p) - est.col(p)).squaredNorm() / nrm <= threshold) ++hits;
  }
  if (counted == 0) throw Error("ps: every true pixel is zero");
  return static_cast<double>(hits) / static_cast<double>(counted);
}

double mpsnr(const HSCube& truth, const HSCube& est) {
  same_shape(truth.data(), est.data(), "mpsnr");
  const double n = static_cast<double>(truth.pixels());
  double total = 0.0;
  for (Index k = 0; k < truth.bands(); ++k) {
    const double err = (truth.data().row(k) - est.data().row(k)).squaredNorm();
    total += err == 0.0 ? kPsnrCapDb : std::min(kPsnrCapDb, 10.0 * std::log10(n / err));
  }
  return total / static_cast<double>(truth.bands());
}

double ssim_band(const double* x, const double* y, Index n1, Index n2) {
  constexpr double kC1 = 0.01 * 0.01;
  constexpr double kC2 = 0.03 * 0.03;
  Index win = std::min<Index>({11, n1, n2});
  if (win % 2 == 0) --win;
  const Index half = win / 2;
  std::vector<double> w(static_cast<std::size_t>(win * win));
  double wsum = 0.0;
  for (Index a = 0; a < win; ++a) {
    for (Index b = 0; b < win; ++b) {
      const double da = static_cast<double>(a - half);
      const double db = static_cast<double>(b - half);
      const double v = std::exp(-(da * da + db * db) / (2.0 * 1.5 * 1.5));
      w[static_cast<std::size_t>(a * win + b)] = v;
      wsum += v;
    }
  }
  for (double& v : w) v /= wsum;

  auto at = [n1](const double* img, Index r, Index c) { return img[c * n1 + r]; };
  double total = 0.0;
  Index windows = 0;
  for (Index r0 = 0; r0 + win <= n1; ++r0) {
    for (Index c0 = 0; c0 + win <= n2; ++c0) {
      double mx = 0.0, my = 0.0, sxx = 0.0, syy = 0.0, sxy = 0.0;
      for (Index a = 0; a < win; ++a) {
        for (Index b = 0; b < win; ++b) {
          const double wt = w[static_cast<std::size_t>(a * win + b)];
          const double xv = at(x, r0 + a, c0 + b);
          const double yv = at(y, r0 + a, c0 + b);
          mx += wt * xv;
          my += wt * yv;
          sxx += wt * xv * xv;
          syy += wt * yv * yv;
          sxy += wt * xv * yv;
        }
      }
      const double vx = sxx - mx * mx;
      const double vy = syy - my * my;
      const double cxy = sxy - mx * my;
      total += ((2.0 * mx * my + kC1) * (2.0 * cxy + kC2)) / ((mx * mx + my * my + kC1) * (vx + vy + kC2));
      ++windows;
    }
  }
  return total / static_cast<double>(windows);
}

double mssim(const HSCube& truth, const HSCube& est) {
  same_shape(truth.data(), est.data(), "mssim");
  const Dims& d = truth.dims();
  double total = 0.0;
  for (Index k = 0; k < truth.bands(); ++k)
    total += ssim_band(truth.data().row(k).data(), est.data().row(k).data(), d.n1, d.n2);
  return total / static_cast<double>(truth.bands());
}

double sad(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw ShapeError("sad: length mismatch");
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) throw Error("sad: zero spectrum");
  const double c = std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
  return std::acos(c);
}

}  // namespace rhuidr
