#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rhuidr/core_types.hpp"
#include "rhuidr/linops.hpp"
#include "rhuidr/ppds.hpp"

namespace rhuidr {

/// Image-domain regularizer applied to the reconstruction E A.
///   HTV:   K = D,        R = column-grouped l1,2
///   SSTV:  K = D o Db,   R = l1
///   HSSTV: K = C_omega,  R = l1
enum class Regularizer { None, HTV, SSTV, HSSTV };

const char* to_string(Regularizer r);
Regularizer parse_regularizer(const std::string& s);

/// Solver hyperparameters. lambda1/lambda2 defaults come from a grid search
/// on the seeded 32x32x16 toy scene (see README); lambda3, omega, max_iter
/// and tol are the published settings.
///
/// epsilon: radius of the Frobenius fidelity ball around V.
/// eta: radius of the l1 ball holding the sparse noise; eta == 0 pins S to O.
/// A named regularizer with lambda2 == 0 is still wired (as an inactive
/// block); lambda2 > 0 with Regularizer::None is rejected.
struct RhuidrConfig {
  double lambda1 = 1.0;
  double lambda2 = 10.0;
  double lambda3 = 1.0;
  double epsilon = 0.0;
  double eta = 0.0;
  Regularizer regularizer = Regularizer::HTV;
  double omega = 0.05;
  int max_iter = 50000;
  double tol = 1e-5;
  int diagnostics_stride = 10;
  /// ||E||_op when known exactly (orthonormal columns, say); otherwise a
  /// power-iteration estimate is used.
  std::optional<double> library_norm;

  void validate() const;
};

/// epsilon = alpha * sigma * sqrt((1 - p_S) n l)
double default_epsilon(double sigma, double p_s, const Dims& dims, double alpha_sigma = 1.0);
/// epsilon = alpha * sqrt((1 - p_S) n l sum_i sigma_i)
double default_epsilon_noniid(const std::vector<double>& sigmas, double p_s, const Dims& dims,
                              double alpha_sigma = 1.0);
/// eta = 0.5 alpha p_S n l
double default_eta(double p_s, const Dims& dims, double alpha_eta = 0.9);

/// Block indices of the assembled problem.
struct RhuidrProblem {
  BlockProblem blocks;
  Dims dims;
  std::size_t A = 0, S = 1, L = 2;
  std::size_t z_rowsparse = 0, z_smooth = 1, z_fidelity = 0, z_flat = 0;
  std::optional<std::size_t> z_image;  // absent for Regularizer::None
  LinearMapPtr library;                // A -> E A
  LinearMapPtr abundance_diff;         // D on m x n
  LinearMapPtr image_op;               // K (on l x n), null for None
  LinearMapPtr stripe_diff;            // Dv on l x n
  double sigma_max = 0.0;              // certified bound used for ||E||
};

RhuidrProblem build_problem(const HSCube& V, const EndmemberLibrary& E, const RhuidrConfig& cfg);

/// ||A||_{1,2,r} + lambda1 ||D A||_1 + lambda2 R(K(E A)) + lambda3 ||L||_1
double objective_value(const Mat& A, const Mat& L, const RhuidrConfig& cfg, const EndmemberLibrary& E,
                       const Dims& dims);

struct Diagnostics {
  double objective = 0.0;
  double fidelity_distance = 0.0;  // ||V - E A - S - L||_F
  double s_l1 = 0.0;
  double stripe_mav = 0.0;         // mean |Dv(L)|
};

Diagnostics diagnostics_record(const Mat& A, const Mat& S, const Mat& L, const HSCube& V,
                               const EndmemberLibrary& E, const RhuidrConfig& cfg);

/// Mean absolute value over all entries.
double mean_abs(const Mat& x);

struct UnmixResult {
  AbundanceMatrix A;
  NoiseTriple noise;
  HSCube reconstructed;  // E A
  SolveTrace trace;      // diagnostics = {objective, fidelity, s_l1, stripe_mav}
  Stepsizes steps;
};

struct UnmixOptions {
  /// Warm start for the abundance block; other blocks start at zero.
  std::optional<Mat> init_abundance;
};

UnmixResult unmix(const HSCube& V, const EndmemberLibrary& E, const RhuidrConfig& cfg,
                  const UnmixOptions& opts = {});

}  // namespace rhuidr
