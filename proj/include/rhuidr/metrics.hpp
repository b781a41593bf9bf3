#pragma once

#include <optional>
#include <string>

#include "rhuidr/core_types.hpp"

namespace rhuidr {

/// Per-band PSNR is capped here so the band mean stays finite.
inline constexpr double kPsnrCapDb = 300.0;

struct MetricReport {
  std::optional<double> sre_db;
  std::optional<double> rmse;
  std::optional<double> ps;
  std::optional<double> mpsnr_db;
  std::optional<double> mssim;

  /// "sre_db=... rmse=... ps=... mpsnr_db=... mssim=..." with "na" for
  /// missing values.
  std::string to_record() const;
};

/// 10 log10(||A||^2 / ||A - A_est||^2); +inf when the estimate is exact.
double sre(const Mat& truth, const Mat& est);
double rmse(const Mat& truth, const Mat& est);
/// Share of pixels whose relative squared error is <= threshold. Pixels with
/// a zero true abundance vector are left out of numerator and denominator.
double ps(const Mat& truth, const Mat& est, double threshold = 3.16);
/// Mean over bands of 10 log10(n / ||h_i - h_est_i||^2) (peak 1).
double mpsnr(const HSCube& truth, const HSCube& est);
/// Mean over bands of SSIM with an 11x11 Gaussian window (sigma 1.5),
/// C1 = (0.01)^2, C2 = (0.03)^2, valid-region averaging. Grids smaller than
/// 11 pixels on a side shrink the window to the largest odd size that fits.
double mssim(const HSCube& truth, const HSCube& est);
/// SSIM of one band given as an n1 x n2 image in pixel order.
double ssim_band(const double* truth, const double* est, Index n1, Index n2);
/// Spectral angle in radians.
double sad(const Vec& a, const Vec& b);

}  // namespace rhuidr
