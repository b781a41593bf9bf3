#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "rhuidr/ppds.hpp"
#include "support.hpp"

using namespace rhuidr;
using testing::randn;

namespace {

PrimalBlock primal(const std::string& name, Shape s, ProxPtr f) { return {name, s, std::move(f)}; }
DualBlock dual(const std::string& name, Shape s, ProxPtr g) { return {name, s, std::move(g)}; }

// min w ||y||_1 s.t. ||y - d||_F <= eps
BlockProblem scalar_lasso(const Mat& d, double w, double eps) {
  BlockProblem p;
  const Shape s{d.rows(), d.cols()};
  p.add_primal(primal("y", s, make_prox_l1(w)));
  p.add_dual(dual("z", s, make_prox_fro_ball(d, eps)));
  p.set_op(0, 0, make_identity(s));
  return p;
}

}  // namespace

TEST_CASE("stepsizes follow the norm bounds") {
  BlockProblem p;
  const Shape s{2, 3};
  p.add_primal(primal("a", s, make_prox_zero_function()));
  p.add_dual(dual("z", s, make_prox_zero_function()));
  p.set_op(0, 0, make_identity(s));
  Stepsizes st = compute_stepsizes(p);
  CHECK(st.primal == std::vector<double>{1.0});
  CHECK(st.dual == std::vector<double>{1.0});

  p.add_primal(primal("b", s, make_prox_zero_function()));
  p.add_primal(primal("c", s, make_prox_zero_function()));
  p.set_op(0, 1, make_identity(s));
  p.set_op(0, 2, make_scaled(make_identity(s), 2.0));
  st = compute_stepsizes(p);
  CHECK(st.dual == std::vector<double>{1.0 / 3.0});
  CHECK(st.primal[2] == 0.25);

  BlockProblem q = p;
  q.add_primal(primal("orphan", s, make_prox_zero_function()));
  CHECK_THROWS_AS(compute_stepsizes(q), Error);
}

TEST_CASE("operator shape mismatch is rejected") {
  BlockProblem p;
  p.add_primal(primal("a", {2, 3}, make_prox_zero_function()));
  p.add_dual(dual("z", {2, 4}, make_prox_zero_function()));
  p.set_op(0, 0, make_identity({2, 3}));
  CHECK_THROWS_AS(p.validate(), ShapeError);
  CHECK_THROWS(p.set_op(1, 0, make_identity({2, 3})));
}

TEST_CASE("fixed point: indicator of a point") {
  std::mt19937_64 rng(1);
  const Mat c = randn(3, 4, rng);
  BlockProblem p;
  const Shape s{3, 4};
  p.add_primal(primal("y", s, make_prox_fro_ball(c, 0.0)));
  p.add_dual(dual("z", s, make_prox_zero_function()));
  p.set_op(0, 0, make_identity(s));
  StopCriteria stop;
  stop.max_iter = 100;
  stop.tol = 1e-12;
  const auto r = solve(p, compute_stepsizes(p), zero_state(p), stop);
  CHECK((r.state.primal[0] - c).norm() <= 1e-12);
  CHECK(r.trace.reason == Termination::Tolerance);
}

TEST_CASE("scalar lasso matches a grid minimizer") {
  for (double d : {-2.3, -0.4, 0.0, 0.35, 1.7}) {
    for (double eps : {0.1, 0.5, 1.0}) {
      CAPTURE(d);
      CAPTURE(eps);
      Mat dm(1, 1);
      dm(0, 0) = d;
      const auto p = scalar_lasso(dm, 1.0, eps);
      StopCriteria stop;
      stop.max_iter = 20000;
      stop.tol = 1e-12;
      const auto r = solve(p, compute_stepsizes(p), zero_state(p), stop);
      // brute force over a fine grid
      double best_y = 0.0, best = std::numeric_limits<double>::infinity();
      for (int i = -50000; i <= 50000; ++i) {
        const double y = i * 1e-4;
        if (std::abs(y - d) > eps) continue;
        if (std::abs(y) < best) {
          best = std::abs(y);
          best_y = y;
        }
      }
      CHECK(std::abs(r.state.primal[0](0, 0) - best_y) <= 1e-3);
    }
  }
}

TEST_CASE("coupled two-variable problem matches a grid minimizer") {
  // min |y1| + |y2| + |y2 - y1| s.t. ||y - d|| <= eps, y as a 2x1 image
  // column so Dv couples the entries.
  Mat d(1, 2);
  d << 1.2, -0.6;
  const double eps = 0.5;
  BlockProblem p;
  const Shape s{1, 2};
  p.add_primal(primal("y", s, make_prox_l1(1.0)));
  p.add_dual(dual("dv", s, make_prox_l1(1.0)));
  p.add_dual(dual("fid", s, make_prox_fro_ball(d, eps)));
  p.set_op(0, 0, make_diff(DiffAxis::Vertical, 1, 2, 1));
  p.set_op(1, 0, make_identity(s));
  StopCriteria stop;
  stop.max_iter = 200000;
  stop.tol = 1e-13;
  const auto r = solve(p, compute_stepsizes(p), zero_state(p), stop);
  double best = std::numeric_limits<double>::infinity();
  double b1 = 0.0, b2 = 0.0;
  const double h = 2e-3;
  for (double y1 = d(0, 0) - eps; y1 <= d(0, 0) + eps; y1 += h)
    for (double y2 = d(0, 1) - eps; y2 <= d(0, 1) + eps; y2 += h) {
      if (std::hypot(y1 - d(0, 0), y2 - d(0, 1)) > eps) continue;
      const double v = std::abs(y1) + std::abs(y2) + std::abs(y2 - y1);
      if (v < best) {
        best = v;
        b1 = y1;
        b2 = y2;
      }
    }
  const Mat& y = r.state.primal[0];
  const double got = std::abs(y(0, 0)) + std::abs(y(0, 1)) + std::abs(y(0, 1) - y(0, 0));
  CHECK(got == doctest::Approx(best).epsilon(1e-3));
  CHECK(std::hypot(y(0, 0) - d(0, 0), y(0, 1) - d(0, 1)) <= eps * (1.0 + 1e-3));
  // the objective is linear in the optimal orthant, so the grid argmin on the
  // circle is only located to ~sqrt(h * eps); compare loosely
  CHECK(std::abs(y(0, 0) - b1) <= 0.05);
  CHECK(std::abs(y(0, 1) - b2) <= 0.05);
}

TEST_CASE("trace bookkeeping") {
  std::mt19937_64 rng(2);
  const Mat d = randn(2, 3, rng);
  const auto p = scalar_lasso(d, 0.2, 0.3);
  StopCriteria stop;
  stop.max_iter = 25;
  stop.tol = 1e-300;
  stop.diagnostics_stride = 10;
  int calls = 0;
  const auto r = solve(p, compute_stepsizes(p), zero_state(p), stop, {},
                       [&](int, const SolverState& s) {
                         ++calls;
                         return std::vector<double>{s.primal[0].norm()};
                       });
  CHECK(r.trace.iterations == 25);
  CHECK(r.trace.reason == Termination::MaxIter);
  REQUIRE(r.trace.records.size() == 3);
  CHECK(r.trace.records[0].iter == 10);
  CHECK(r.trace.records[1].iter == 20);
  CHECK(r.trace.records[2].iter == 25);
  CHECK(calls == 3);
  CHECK(r.trace.records[2].diagnostics.size() == 1);
  CHECK(std::string(to_string(Termination::Tolerance)) == "tol");
  CHECK(std::string(to_string(Termination::MaxIter)) == "max_iter");
}

TEST_CASE("custom stop functional and min_iter") {
  std::mt19937_64 rng(3);
  const auto p = scalar_lasso(randn(2, 2, rng), 0.2, 0.3);
  StopCriteria stop;
  stop.max_iter = 100;
  const auto r = solve(p, compute_stepsizes(p), zero_state(p), stop, [](const auto&, const auto&) { return 0.0; });
  CHECK(r.trace.iterations == stop.min_iter);
  CHECK(r.trace.reason == Termination::Tolerance);
}

TEST_CASE("relative change") {
  Mat a(1, 2), b(1, 2);
  a << 1, 1;
  b << 1, 2;
  CHECK(relative_change(a, b) == doctest::Approx(1.0 / std::sqrt(5.0)));
  CHECK(std::isinf(relative_change(Mat::Zero(2, 2), Mat::Zero(2, 2))));
  CHECK(std::isinf(relative_change(a, Mat(Mat::Zero(1, 2)))));
  CHECK(relative_change(std::vector<Mat>{a, a}, std::vector<Mat>{b, a}) ==
        doctest::Approx(1.0 / std::sqrt(7.0)));
}

namespace {

// f = 0, g = indicator of {O}: y and z rotate into each other.
BlockProblem oscillator() {
  BlockProblem p;
  const Shape s{1, 3};
  p.add_primal(primal("y", s, make_prox_zero_function()));
  p.add_dual(dual("z", s, make_prox_zero_set()));
  p.set_op(0, 0, make_identity(s));
  return p;
}

}  // namespace

TEST_CASE("divergence is reported with the iteration") {
  const auto p = oscillator();
  SolverState init = zero_state(p);
  init.dual[0](0, 1) = std::numeric_limits<double>::quiet_NaN();
  try {
    solve(p, compute_stepsizes(p), init, StopCriteria{});
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() == 1);
  }

  // stepsizes far beyond the bound blow up geometrically
  SolverState start = zero_state(p);
  start.primal[0].setOnes();
  Stepsizes big{{50.0}, {50.0}};
  StopCriteria never;
  never.tol = 1e-300;
  try {
    solve(p, big, start, never);
    FAIL("expected DivergenceError");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() > 1);
    CHECK(e.iteration() < 1000);
  }
}

TEST_CASE("invalid solver arguments") {
  const auto p = scalar_lasso(Mat::Ones(1, 2), 0.2, 0.3);
  const auto st = compute_stepsizes(p);
  StopCriteria bad;
  bad.tol = 0.0;
  CHECK_THROWS(solve(p, st, zero_state(p), bad));
  SolverState wrong = zero_state(p);
  wrong.primal[0] = Mat::Zero(2, 2);
  CHECK_THROWS_AS(solve(p, st, wrong, StopCriteria{}), ShapeError);
  Stepsizes neg = st;
  neg.primal[0] = -1.0;
  CHECK_THROWS(solve(p, neg, zero_state(p), StopCriteria{}));
}

TEST_CASE("solution does not depend on the init or the block order") {
  std::mt19937_64 rng(4);
  const Shape s{3, 5};
  const Mat d = randn(3, 5, rng);
  auto build = [&](bool swap) {
    BlockProblem p;
    const std::size_t a = p.add_primal(primal(swap ? "v" : "u", s, make_prox_l1(swap ? 0.5 : 1.0)));
    const std::size_t b = p.add_primal(primal(swap ? "u" : "v", s, make_prox_l1(swap ? 1.0 : 0.5)));
    p.add_dual(dual("fid", s, make_prox_fro_ball(d, 0.8)));
    p.add_dual(dual("u_tv", {3, 5}, make_prox_l1(0.3)));
    p.set_op(0, a, make_identity(s));
    p.set_op(0, b, make_identity(s));
    p.set_op(1, swap ? b : a, make_diff(DiffAxis::Vertical, 3, 5, 1));
    return p;
  };
  auto objective = [&](const Mat& u, const Mat& v) {
    return u.cwiseAbs().sum() + 0.5 * v.cwiseAbs().sum() + 0.3 * diff_v(u, Dims{5, 1, 3, 0}).cwiseAbs().sum();
  };
  StopCriteria stop;
  stop.max_iter = 200000;
  stop.tol = 1e-11;
  const auto p0 = build(false);
  const auto r0 = solve(p0, compute_stepsizes(p0), zero_state(p0), stop);
  SolverState warm = zero_state(p0);
  warm.primal[0] = d;
  warm.primal[1] = randn(3, 5, rng);
  const auto r1 = solve(p0, compute_stepsizes(p0), warm, stop);
  const auto p1 = build(true);
  const auto r2 = solve(p1, compute_stepsizes(p1), zero_state(p1), stop);

  const double f0 = objective(r0.state.primal[0], r0.state.primal[1]);
  const double f1 = objective(r1.state.primal[0], r1.state.primal[1]);
  const double f2 = objective(r2.state.primal[1], r2.state.primal[0]);
  CHECK(testing::rel_err(f0, f1) <= 1e-4);
  CHECK(testing::rel_err(f0, f2) <= 1e-4);
}

TEST_CASE("iterates stay bounded over a long run") {
  std::mt19937_64 rng(5);
  const auto p = scalar_lasso(randn(4, 4, rng), 0.5, 0.2);
  StopCriteria stop;
  stop.max_iter = 50000;
  stop.tol = 1e-300;
  stop.diagnostics_stride = 1000;
  double sup = 0.0;
  const auto r = solve(p, compute_stepsizes(p), zero_state(p), stop, {}, [&](int, const SolverState& s) {
    sup = std::max(sup, s.primal[0].norm() + s.dual[0].norm());
    return std::vector<double>{};
  });
  CHECK(r.trace.iterations == 50000);
  CHECK(std::isfinite(sup));
  CHECK(sup < 100.0);
}

TEST_CASE("deterministic") {
  std::mt19937_64 rng(6);
  const auto p = scalar_lasso(randn(3, 3, rng), 0.5, 0.2);
  StopCriteria stop;
  stop.max_iter = 500;
  const auto a = solve(p, compute_stepsizes(p), zero_state(p), stop);
  const auto b = solve(p, compute_stepsizes(p), zero_state(p), stop);
  CHECK(a.state.primal[0] == b.state.primal[0]);
  CHECK(a.trace.iterations == b.trace.iterations);
}
