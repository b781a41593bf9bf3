#include "rhuidr/ppds.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "rhuidr/kernels.hpp"

namespace rhuidr {

namespace {

std::size_t count(const Mat& x) { return static_cast<std::size_t>(x.size()); }

void require_block_shape(const Mat& x, Shape s, const std::string& what) {
  require_shape(x, s.rows, s.cols, what);
}

}  // namespace

std::size_t BlockProblem::add_primal(PrimalBlock b) {
  primal.push_back(std::move(b));
  for (auto& row : ops) row.resize(primal.size());
  return primal.size() - 1;
}

std::size_t BlockProblem::add_dual(DualBlock b) {
  dual.push_back(std::move(b));
  ops.emplace_back(primal.size());
  return dual.size() - 1;
}

void BlockProblem::set_op(std::size_t j, std::size_t i, LinearMapPtr g) {
  if (j >= dual.size() || i >= primal.size()) throw Error("set_op: block index out of range");
  ops[j][i] = std::move(g);
}

void BlockProblem::validate() const {
  if (primal.empty()) throw Error("block problem: no primal blocks");
  if (ops.size() != dual.size()) throw Error("block problem: operator table has wrong dual count");
  for (const auto& b : primal)
    if (!b.f) throw Error("block problem: primal block '" + b.name + "' has no prox");
  for (const auto& b : dual)
    if (!b.g) throw Error("block problem: dual block '" + b.name + "' has no prox");
  for (std::size_t j = 0; j < dual.size(); ++j) {
    if (ops[j].size() != primal.size()) throw Error("block problem: operator table has wrong primal count");
    for (std::size_t i = 0; i < primal.size(); ++i) {
      const auto& g = ops[j][i];
      if (!g) continue;
      if (!(g->in_shape() == primal[i].shape) || !(g->out_shape() == dual[j].shape)) {
        std::ostringstream os;
        os << "block problem: operator (" << dual[j].name << ", " << primal[i].name << ") maps "
           << g->in_shape().rows << "x" << g->in_shape().cols << " -> " << g->out_shape().rows << "x"
           << g->out_shape().cols;
        throw ShapeError(os.str());
      }
    }
  }
}

Stepsizes compute_stepsizes(const BlockProblem& problem) {
  problem.validate();
  Stepsizes s;
  const double n_primal = static_cast<double>(problem.primal.size());
  for (std::size_t i = 0; i < problem.primal.size(); ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < problem.dual.size(); ++j) {
      if (const auto& g = problem.op(j, i)) {
        const double mu_sq = g->norm_bound_sq();
        if (!std::isfinite(mu_sq) || mu_sq < 0.0) throw Error("compute_stepsizes: invalid norm bound on " + g->name());
        total += mu_sq;
      }
    }
    if (!(total > 0.0))
      throw Error("compute_stepsizes: primal block '" + problem.primal[i].name + "' has no incident operator");
    s.primal.push_back(1.0 / total);
  }
  s.dual.assign(problem.dual.size(), 1.0 / n_primal);
  return s;
}

SolverState zero_state(const BlockProblem& problem) {
  SolverState st;
  for (const auto& b : problem.primal) st.primal.push_back(Mat::Zero(b.shape.rows, b.shape.cols));
  for (const auto& b : problem.dual) st.dual.push_back(Mat::Zero(b.shape.rows, b.shape.cols));
  return st;
}

const char* to_string(Termination t) {
  switch (t) {
    case Termination::Tolerance: return "tol";
    case Termination::MaxIter: return "max_iter";
  }
  return "unknown";
}

double relative_change(const Mat& prev, const Mat& next) {
  const auto& k = kernels::active();
  const double num = k.diff_sq(next.data(), prev.data(), count(next));
  const double den = k.sum_sq(next.data(), count(next));
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

double relative_change(const std::vector<Mat>& prev, const std::vector<Mat>& next) {
  const auto& k = kernels::active();
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < next.size(); ++i) {
    num += k.diff_sq(next[i].data(), prev[i].data(), count(next[i]));
    den += k.sum_sq(next[i].data(), count(next[i]));
  }
  if (den == 0.0) return std::numeric_limits<double>::infinity();
  return std::sqrt(num / den);
}

SolveResult solve(const BlockProblem& problem, const Stepsizes& steps, SolverState init,
                  const StopCriteria& stop, const StopFunctional& stop_fn, const DiagnosticsHook& hook) {
  problem.validate();
  const std::size_t np = problem.primal.size();
  const std::size_t nd = problem.dual.size();
  if (steps.primal.size() != np || steps.dual.size() != nd) throw Error("solve: stepsize count mismatch");
  for (double g : steps.primal)
    if (!(g > 0.0) || !std::isfinite(g)) throw Error("solve: primal stepsize must be finite and > 0");
  for (double g : steps.dual)
    if (!(g > 0.0) || !std::isfinite(g)) throw Error("solve: dual stepsize must be finite and > 0");
  if (!(stop.tol > 0.0)) throw Error("solve: tol must be > 0");
  if (stop.max_iter < 1) throw Error("solve: max_iter must be >= 1");
  if (init.primal.size() != np || init.dual.size() != nd) throw Error("solve: init block count mismatch");
  for (std::size_t i = 0; i < np; ++i) require_block_shape(init.primal[i], problem.primal[i].shape, "init " + problem.primal[i].name);
  for (std::size_t j = 0; j < nd; ++j) require_block_shape(init.dual[j], problem.dual[j].shape, "init " + problem.dual[j].name);

  const auto& k = kernels::active();
  const int stride = std::max(stop.diagnostics_stride, 1);

  SolveResult result;
  SolverState& st = result.state;
  st = std::move(init);
  std::vector<Mat> prev(np);
  std::vector<Mat> extrap(np);
  std::vector<Mat> primal_scratch(np);
  std::vector<Mat> dual_scratch(nd);
  Mat conj_scratch;
  for (std::size_t i = 0; i < np; ++i) primal_scratch[i].resize(problem.primal[i].shape.rows, problem.primal[i].shape.cols);
  for (std::size_t j = 0; j < nd; ++j) dual_scratch[j].resize(problem.dual[j].shape.rows, problem.dual[j].shape.cols);

  SolveTrace& trace = result.trace;
  for (int t = 1; t <= stop.max_iter; ++t) {
    // Primal phase: every block reads the duals of the previous iterate.
    for (std::size_t i = 0; i < np; ++i) {
      prev[i] = st.primal[i];
      Mat& y = st.primal[i];
      for (std::size_t j = 0; j < nd; ++j) {
        const auto& g = problem.op(j, i);
        if (!g) continue;
        g->adjoint(st.dual[j], primal_scratch[i]);
        k.axpy(-steps.primal[i], primal_scratch[i].data(), y.data(), count(y));
      }
      problem.primal[i].f->apply(steps.primal[i], y);
    }
    // Extrapolated primal 2Y+ - Y.
    for (std::size_t i = 0; i < np; ++i) {
      extrap[i].resize(prev[i].rows(), prev[i].cols());
      k.axpby(2.0, st.primal[i].data(), -1.0, prev[i].data(), extrap[i].data(), count(prev[i]));
    }
    // Dual phase.
    for (std::size_t j = 0; j < nd; ++j) {
      Mat& z = st.dual[j];
      for (std::size_t i = 0; i < np; ++i) {
        const auto& g = problem.op(j, i);
        if (!g) continue;
        g->forward(extrap[i], dual_scratch[j]);
        k.axpy(steps.dual[j], dual_scratch[j].data(), z.data(), count(z));
      }
      prox_conjugate_inplace(z, steps.dual[j], *problem.dual[j].g, conj_scratch);
    }
    for (std::size_t i = 0; i < np; ++i) {
      if (!std::isfinite(k.sum_sq(st.primal[i].data(), count(st.primal[i])))) {
        std::ostringstream os;
        os << "solve: non-finite value in primal block '" << problem.primal[i].name << "' at iteration " << t;
        throw DivergenceError(os.str(), t);
      }
    }

    const double change = stop_fn ? stop_fn(prev, st.primal) : relative_change(prev, st.primal);
    const bool converged = t >= stop.min_iter && change <= stop.tol;
    const bool last = converged || t == stop.max_iter;
    if (t % stride == 0 || last) {
      TraceRecord rec;
      rec.iter = t;
      rec.rel_change = change;
      if (hook) rec.diagnostics = hook(t, st);
      trace.records.push_back(std::move(rec));
    }
    trace.iterations = t;
    if (converged) {
      trace.reason = Termination::Tolerance;
      break;
    }
  }
  if (trace.iterations == stop.max_iter && trace.reason != Termination::Tolerance) trace.reason = Termination::MaxIter;
  return result;
}

}  // namespace rhuidr
