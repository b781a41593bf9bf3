#pragma once

#include <functional>
#include <string>
#include <vector>

#include "rhuidr/core_types.hpp"
#include "rhuidr/linops.hpp"
#include "rhuidr/prox.hpp"

namespace rhuidr {

/// Generic preconditioned primal-dual splitting for
///   min sum_i f_i(Y_i) + sum_j g_j(Z_j)  s.t.  Z_j = sum_i G_{j,i}(Y_i).
struct PrimalBlock {
  std::string name;
  Shape shape;
  ProxPtr f;
};

struct DualBlock {
  std::string name;
  Shape shape;
  ProxPtr g;
};

struct BlockProblem {
  std::vector<PrimalBlock> primal;
  std::vector<DualBlock> dual;
  /// ops[j][i] is G_{j,i}, or nullptr when dual j does not see primal i.
  std::vector<std::vector<LinearMapPtr>> ops;

  std::size_t add_primal(PrimalBlock b);
  std::size_t add_dual(DualBlock b);
  void set_op(std::size_t dual, std::size_t primal, LinearMapPtr op);
  const LinearMapPtr& op(std::size_t dual, std::size_t primal) const { return ops[dual][primal]; }
  void validate() const;
};

struct Stepsizes {
  std::vector<double> primal;  // gamma_{1,i} = 1 / sum_j mu_{j,i}^2
  std::vector<double> dual;    // gamma_{2,j} = 1 / N
};

/// Throws when a primal block has no incident operator.
Stepsizes compute_stepsizes(const BlockProblem& problem);

struct SolverState {
  std::vector<Mat> primal;
  std::vector<Mat> dual;
};

/// All blocks zero.
SolverState zero_state(const BlockProblem& problem);

struct StopCriteria {
  int max_iter = 50000;
  double tol = 1e-5;
  /// The stopping test is not evaluated before this iteration. Iteration 1
  /// reads the initial duals; when those are zero a warm-started primal only
  /// passes through its prox and shows no change at all.
  int min_iter = 2;
  int diagnostics_stride = 10;
};

enum class Termination { Tolerance, MaxIter };
const char* to_string(Termination t);

struct TraceRecord {
  int iter = 0;
  double rel_change = 0.0;
  std::vector<double> diagnostics;
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  int iterations = 0;
  Termination reason = Termination::MaxIter;
};

/// Stopping functional evaluated after every iteration on (previous, new)
/// primal blocks.
using StopFunctional = std::function<double(const std::vector<Mat>& prev, const std::vector<Mat>& next)>;
/// Called every `diagnostics_stride` iterations and at the last one.
using DiagnosticsHook = std::function<std::vector<double>(int iter, const SolverState& state)>;

/// ||next - prev||_F / ||next||_F summed over all primal blocks. A zero
/// `next` gives +inf: an all-zero iterate is never taken as converged, since
/// from a zero start the primal blocks can sit at zero while the duals grow.
double relative_change(const std::vector<Mat>& prev, const std::vector<Mat>& next);
/// Same quantity restricted to one block.
double relative_change(const Mat& prev, const Mat& next);

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int iter) : Error(what), iter_(iter) {}
  int iteration() const noexcept { return iter_; }

 private:
  int iter_;
};

struct SolveResult {
  SolverState state;
  SolveTrace trace;
};

SolveResult solve(const BlockProblem& problem, const Stepsizes& steps, SolverState init,
                  const StopCriteria& stop, const StopFunctional& stop_fn = {},
                  const DiagnosticsHook& hook = {});

}  // namespace rhuidr
