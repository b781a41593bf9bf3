#pragma once

#include <memory>

#include "rhuidr/core_types.hpp"
#include "rhuidr/linops.hpp"

namespace rhuidr {

/// Proximity operator of a proper lsc convex function f:
///   prox_{gamma f}(x) = argmin_y f(y) + ||x - y||_F^2 / (2 gamma).
/// apply() works in place on a contiguous matrix.
class Prox {
 public:
  virtual ~Prox() = default;
  virtual void apply(double gamma, MatRef x) const = 0;
  /// f(x); +inf outside the domain of an indicator.
  virtual double value(const ConstMatRef& x) const = 0;
};

using ProxPtr = std::shared_ptr<const Prox>;

ProxPtr make_prox_zero_function();        // f = 0
ProxPtr make_prox_nonneg();               // indicator of x >= 0
ProxPtr make_prox_l1(double weight);      // weight * ||x||_1
ProxPtr make_prox_l12_rows(double weight);  // weight * sum_i ||row_i||_2
ProxPtr make_prox_l12_cols(double weight);  // weight * sum_j ||col_j||_2
ProxPtr make_prox_fro_ball(Mat center, double radius);
ProxPtr make_prox_l1_ball(double radius);
ProxPtr make_prox_zero_set();              // indicator of {O}

Mat prox_nonneg(const Mat& x);
Mat prox_l1(const Mat& x, double gamma);
Mat prox_l12_rows(const Mat& x, double gamma);
Mat prox_l12_cols(const Mat& x, double gamma);
Mat project_fro_ball(const Mat& x, const Mat& center, double radius);
/// Euclidean projection onto {||x||_1 <= radius}; Condat's expected
/// linear-time threshold search. radius == 0 projects onto {O}.
Mat project_l1_ball(const Mat& x, double radius);
Mat prox_zero_set(const Mat& x);

/// Soft-threshold level theta for the l1-ball projection of `values`
/// (0 when already feasible).
double l1_ball_threshold(const double* values, std::size_t n, double radius);

/// Moreau step of the dual updates: ztilde - gamma * prox_{g/gamma}(ztilde / gamma),
/// i.e. the prox of gamma * g^* evaluated at ztilde.
Mat prox_conjugate(const Mat& ztilde, double gamma, const Prox& g);
void prox_conjugate_inplace(MatRef z, double gamma, const Prox& g, Mat& scratch);

}  // namespace rhuidr
