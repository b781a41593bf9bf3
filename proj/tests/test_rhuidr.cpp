#include <doctest.h>

#include <cmath>
#include <random>

#include "rhuidr/metrics.hpp"
#include "rhuidr/rhuidr.hpp"
#include "rhuidr/simulate.hpp"
#include "support.hpp"

using namespace rhuidr;

namespace {

struct Toy {
  Dims dims;
  EndmemberLibrary E;
  Mat A;
  HSCube clean;
};

Toy toy(Index n1, Index n2, Index l, Index m, int k, std::uint64_t seed) {
  Toy t;
  t.dims = {n1, n2, l, m};
  t.E = gen_endmembers(l, m, seed);
  SceneSpec spec;
  spec.dims = t.dims;
  spec.active = k;
  spec.seed = seed;
  t.A = gen_abundance(spec, m);
  t.clean = clean_scene(t.E, t.A, t.dims);
  return t;
}

EndmemberLibrary identity_library(Index l) { return EndmemberLibrary(Mat::Identity(l, l)); }

HSCube random_cube(const Dims& d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return HSCube(testing::randu(d.l, d.n(), rng), d);
}

}  // namespace

TEST_CASE("stepsizes with a unit-norm library") {
  const Dims d{6, 5, 4, 4};
  const HSCube V = random_cube(d, 1);
  RhuidrConfig cfg;
  cfg.library_norm = 1.0;

  cfg.regularizer = Regularizer::HTV;
  RhuidrProblem p = build_problem(V, identity_library(4), cfg);
  Stepsizes s = compute_stepsizes(p.blocks);
  CHECK(s.primal[p.A] == 1.0 / 18.0);
  CHECK(s.primal[p.S] == 1.0);
  CHECK(s.primal[p.L] == 1.0 / 5.0);
  REQUIRE(s.dual.size() == 5);
  for (double g : s.dual) CHECK(g == 1.0 / 3.0);

  cfg.regularizer = Regularizer::SSTV;
  p = build_problem(V, identity_library(4), cfg);
  s = compute_stepsizes(p.blocks);
  CHECK(s.primal[p.A] == 1.0 / 42.0);

  cfg.regularizer = Regularizer::HSSTV;
  cfg.omega = 0.5;
  p = build_problem(V, identity_library(4), cfg);
  s = compute_stepsizes(p.blocks);
  CHECK(s.primal[p.A] == 1.0 / 44.0);

  cfg.regularizer = Regularizer::None;
  cfg.lambda2 = 0.0;
  p = build_problem(V, identity_library(4), cfg);
  s = compute_stepsizes(p.blocks);
  CHECK(s.dual.size() == 4);
  CHECK_FALSE(p.z_image.has_value());
  CHECK(s.primal[p.A] == 1.0 / 10.0);
}

TEST_CASE("stepsizes follow the estimated library bound") {
  const Toy t = toy(6, 5, 10, 5, 3, 4);
  RhuidrConfig cfg;
  for (Regularizer r : {Regularizer::HTV, Regularizer::SSTV, Regularizer::HSSTV}) {
    cfg.regularizer = r;
    const RhuidrProblem p = build_problem(t.clean, t.E, cfg);
    const Stepsizes s = compute_stepsizes(p.blocks);
    const double mu2 = p.library->norm_bound_sq();
    const double k2 = r == Regularizer::HTV ? 8.0 : r == Regularizer::SSTV ? 32.0 : 32.0 + 8.0 * cfg.omega * cfg.omega;
    CHECK(s.primal[p.A] == doctest::Approx(1.0 / (1.0 + 8.0 + k2 * mu2 + mu2)).epsilon(1e-14));
    // the bound is an upper estimate, close to the true norm
    const double sigma = largest_singular_value(t.E.matrix());
    CHECK(p.sigma_max >= sigma);
    CHECK(p.sigma_max <= sigma * (1.0 + 2e-6));
  }
  // identity library without a certified norm: 1/18 up to the inflation
  RhuidrConfig htv;
  const RhuidrProblem p = build_problem(random_cube({6, 5, 4, 4}, 2), identity_library(4), htv);
  CHECK(compute_stepsizes(p.blocks).primal[p.A] == doctest::Approx(1.0 / 18.0).epsilon(1e-5));
}

TEST_CASE("default epsilon and eta") {
  const Dims d{10, 10, 100, 1};
  CHECK(default_epsilon(0.05, 0.0, d) == doctest::Approx(5.0));
  CHECK(default_epsilon(0.05, 1.0, d) == 0.0);
  CHECK(default_epsilon(0.1, 0.0, d, 0.5) == doctest::Approx(5.0));
  CHECK(default_eta(0.05, d) == doctest::Approx(225.0));
  CHECK(default_eta(0.1, {10, 10, 20, 1}, 1.0) == doctest::Approx(100.0));
  CHECK(default_eta(0.0, d) == 0.0);

  // equal per-band sigmas: sqrt(n l sum sigma) against sigma sqrt(n l)
  const std::vector<double> sig(4, 0.25);
  const Dims d4{5, 5, 4, 1};
  CHECK(default_epsilon_noniid(sig, 0.0, d4) == doctest::Approx(std::sqrt(100.0 * 1.0)));
  CHECK(default_epsilon_noniid(sig, 0.5, d4) == doctest::Approx(std::sqrt(50.0)));

  CHECK_THROWS_AS(default_epsilon(-1.0, 0.0, d), Error);
  CHECK_THROWS_AS(default_epsilon(0.1, 1.5, d), Error);
  CHECK_THROWS_AS(default_eta(-0.1, d), Error);
  CHECK_THROWS_AS(default_epsilon_noniid({0.1, -0.1}, 0.0, d), Error);
}

TEST_CASE("config validation") {
  RhuidrConfig ok;
  CHECK_NOTHROW(ok.validate());
  auto bad = [](auto mutate) {
    RhuidrConfig c;
    mutate(c);
    CHECK_THROWS_AS(c.validate(), Error);
  };
  bad([](RhuidrConfig& c) { c.lambda1 = 0.0; });
  bad([](RhuidrConfig& c) { c.lambda2 = -1.0; });
  bad([](RhuidrConfig& c) { c.lambda3 = 0.0; });
  bad([](RhuidrConfig& c) { c.epsilon = -1.0; });
  bad([](RhuidrConfig& c) { c.eta = NAN; });
  bad([](RhuidrConfig& c) { c.regularizer = Regularizer::None; c.lambda2 = 0.1; });
  bad([](RhuidrConfig& c) { c.regularizer = Regularizer::HSSTV; c.omega = 0.0; });
  bad([](RhuidrConfig& c) { c.max_iter = 0; });
  bad([](RhuidrConfig& c) { c.tol = 0.0; });
  bad([](RhuidrConfig& c) { c.diagnostics_stride = 0; });
  bad([](RhuidrConfig& c) { c.library_norm = -1.0; });

  RhuidrConfig none;
  none.regularizer = Regularizer::None;
  none.lambda2 = 0.0;
  CHECK_NOTHROW(none.validate());
  RhuidrConfig zero_weight;
  zero_weight.lambda2 = 0.0;
  CHECK_NOTHROW(zero_weight.validate());

  CHECK(parse_regularizer("htv") == Regularizer::HTV);
  CHECK(parse_regularizer("sstv") == Regularizer::SSTV);
  CHECK_THROWS_AS(parse_regularizer("SSTV"), Error);
  CHECK(parse_regularizer("hsstv") == Regularizer::HSSTV);
  CHECK(parse_regularizer("none") == Regularizer::None);
  CHECK_THROWS_AS(parse_regularizer("tv"), Error);
}

TEST_CASE("build_problem rejects mismatched library") {
  const HSCube V = random_cube({4, 4, 5, 1}, 3);
  CHECK_THROWS_AS(build_problem(V, identity_library(4), RhuidrConfig{}), ShapeError);
}

TEST_CASE("objective value") {
  const Dims d{3, 4, 2, 3};
  const EndmemberLibrary E(Mat::Ones(2, 3));
  RhuidrConfig cfg;
  CHECK(objective_value(Mat::Zero(3, 12), Mat::Zero(2, 12), cfg, E, d) == 0.0);

  // constant single row: no differences, only the row norm
  Mat A = Mat::Zero(3, 12);
  A.row(1).setConstant(0.5);
  cfg.lambda2 = 0.0;
  CHECK(objective_value(A, Mat::Zero(2, 12), cfg, E, d) == doctest::Approx(0.5 * std::sqrt(12.0)));

  // term by term against direct forms
  std::mt19937_64 rng(9);
  const Mat Ar = testing::randu(3, 12, rng);
  const Mat Lr = testing::randn(2, 12, rng);
  const Mat Er = testing::randu(2, 3, rng);
  const EndmemberLibrary Elib(Er);
  for (Regularizer r : {Regularizer::HTV, Regularizer::SSTV, Regularizer::HSSTV}) {
    RhuidrConfig c;
    c.lambda1 = 0.3;
    c.lambda2 = 0.7;
    c.lambda3 = 1.3;
    c.regularizer = r;
    const Mat EA = Er * Ar;
    double reg = 0.0;
    if (r == Regularizer::HTV) {
      reg = spatial_diff(EA, {3, 4, 2, 3}).colwise().norm().sum();
    } else if (r == Regularizer::SSTV) {
      reg = spatial_diff(diff_b(EA, {3, 4, 2, 3}), {3, 4, 2, 3}).cwiseAbs().sum();
    } else {
      reg = hsstv_op(EA, {3, 4, 2, 3}, c.omega).cwiseAbs().sum();
    }
    const double expect = Ar.rowwise().norm().sum() + 0.3 * spatial_diff(Ar, {3, 4, 3, 3}).cwiseAbs().sum() +
                          0.7 * reg + 1.3 * Lr.cwiseAbs().sum();
    CHECK(objective_value(Ar, Lr, c, Elib, d) == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("diagnostics of the zero state") {
  const Toy t = toy(5, 4, 6, 4, 2, 5);
  const Mat Z = Mat::Zero(6, 20);
  const Diagnostics dg = diagnostics_record(Mat::Zero(4, 20), Z, Z, t.clean, t.E, RhuidrConfig{});
  CHECK(dg.objective == 0.0);
  CHECK(dg.fidelity_distance == doctest::Approx(t.clean.data().norm()));
  CHECK(dg.s_l1 == 0.0);
  CHECK(dg.stripe_mav == 0.0);
  CHECK(mean_abs(Mat()) == 0.0);
  CHECK(mean_abs(Mat::Constant(2, 3, -2.0)) == 2.0);
}

TEST_CASE("zero cube gives zero abundances") {
  const Toy t = toy(6, 6, 8, 5, 2, 6);
  RhuidrConfig cfg;
  cfg.max_iter = 50;
  const UnmixResult r = unmix(HSCube(Mat::Zero(8, 36), t.dims), t.E, cfg);
  CHECK(r.A.isZero(0.0));
  CHECK(r.noise.sparse.isZero(0.0));
  CHECK(r.noise.stripe.isZero(0.0));
  // A never moves, so the relative change stays undefined and the run hits the cap
  CHECK(r.trace.iterations == 50);
  CHECK(r.trace.reason == Termination::MaxIter);
}

TEST_CASE("clean scene is recovered") {
  const Toy t = toy(16, 16, 8, 6, 2, 11);
  RhuidrConfig cfg;
  cfg.lambda1 = 0.01;
  cfg.lambda2 = 0.01;
  cfg.epsilon = 1e-3;
  cfg.eta = 1e-6;
  cfg.tol = 1e-7;
  cfg.max_iter = 50000;
  const UnmixResult r = unmix(t.clean, t.E, cfg);
  CHECK(sre(t.A, r.A) >= 20.0);
}

TEST_CASE("unmix invariants") {
  const Toy t = toy(10, 8, 8, 5, 2, 21);
  const DegradedScene deg = make_case(t.clean, 5, 22);
  RhuidrConfig cfg;
  cfg.epsilon = default_epsilon(deg.params.sigma, deg.params.p_s, t.dims);
  cfg.eta = default_eta(deg.params.p_s, t.dims);
  cfg.max_iter = 300;
  cfg.diagnostics_stride = 7;
  const UnmixResult r = unmix(deg.degraded, t.E, cfg);

  CHECK(r.A.minCoeff() >= 0.0);
  CHECK(r.A.allFinite());
  CHECK(r.noise.sparse.cwiseAbs().sum() <= cfg.eta * (1.0 + 1e-12));
  CHECK((r.reconstructed.data() - t.E.matrix() * r.A).norm() == 0.0);
  CHECK(r.trace.records.back().iter == r.trace.iterations);
  for (const auto& rec : r.trace.records) CHECK(rec.diagnostics.size() == 4);
  CHECK(r.steps.dual.size() == 5);

  // deterministic
  const UnmixResult r2 = unmix(deg.degraded, t.E, cfg);
  CHECK((r.A - r2.A).norm() == 0.0);
  CHECK(r.trace.iterations == r2.trace.iterations);

  // warm start must match shape and be finite
  UnmixOptions bad;
  bad.init_abundance = Mat::Zero(3, 3);
  CHECK_THROWS_AS(unmix(deg.degraded, t.E, cfg, bad), ShapeError);
  bad.init_abundance = Mat::Constant(5, 80, NAN);
  CHECK_THROWS_AS(unmix(deg.degraded, t.E, cfg, bad), NonFiniteError);
}

TEST_CASE("inactive image block and reg none reach the same solution") {
  const Toy t = toy(8, 8, 6, 4, 2, 31);
  const DegradedScene deg = make_case(t.clean, 2, 32);
  RhuidrConfig wired;
  wired.lambda1 = 0.1;
  wired.lambda2 = 0.0;
  wired.epsilon = default_epsilon(deg.params.sigma, deg.params.p_s, t.dims);
  wired.eta = default_eta(deg.params.p_s, t.dims);
  wired.tol = 1e-9;
  wired.max_iter = 200000;
  RhuidrConfig none = wired;
  none.regularizer = Regularizer::None;

  const UnmixResult a = unmix(deg.degraded, t.E, wired);
  const UnmixResult b = unmix(deg.degraded, t.E, none);
  CHECK(a.steps.dual.size() == 5);
  CHECK(b.steps.dual.size() == 4);
  const double oa = objective_value(a.A, a.noise.stripe, wired, t.E, t.dims);
  const double ob = objective_value(b.A, b.noise.stripe, none, t.E, t.dims);
  CHECK(oa == doctest::Approx(ob).epsilon(1e-4));
  CHECK((a.A - b.A).norm() <= 1e-2 * (1.0 + b.A.norm()));
}

TEST_CASE("tight tolerance run is feasible") {
  const Toy t = toy(8, 8, 6, 4, 2, 41);
  const DegradedScene deg = make_case(t.clean, 5, 42);
  RhuidrConfig cfg;
  cfg.epsilon = default_epsilon(deg.params.sigma, deg.params.p_s, t.dims);
  cfg.eta = default_eta(deg.params.p_s, t.dims);
  cfg.tol = 1e-9;
  cfg.max_iter = 300000;
  const UnmixResult r = unmix(deg.degraded, t.E, cfg);
  const Mat resid = deg.degraded.data() - r.reconstructed.data() - r.noise.sparse - r.noise.stripe;
  CHECK(resid.norm() <= cfg.epsilon * (1.0 + 1e-6));
  CHECK(mean_abs(diff_v(r.noise.stripe, t.dims)) <= 1e-6 * mean_abs(r.noise.stripe) + 1e-12);
}

TEST_CASE("image-domain regularizer helps on a striped cube") {
  const Toy t = toy(16, 16, 8, 6, 3, 51);
  NoiseCase nc;
  nc.sigma = 0.05;
  nc.stripes = true;
  const DegradedScene deg = make_case(t.clean, nc, 52);
  RhuidrConfig cfg;
  cfg.epsilon = default_epsilon(nc.sigma, 0.0, t.dims);
  cfg.eta = 0.0;
  const UnmixResult with = unmix(deg.degraded, t.E, cfg);
  cfg.lambda2 = 0.0;
  const UnmixResult without = unmix(deg.degraded, t.E, cfg);
  const double m_with = mpsnr(t.clean, with.reconstructed);
  const double m_without = mpsnr(t.clean, without.reconstructed);
  MESSAGE("mpsnr with " << m_with << " without " << m_without);
  CHECK(m_with > m_without);
}

TEST_CASE("scaling the data scales the solution") {
  const Toy t = toy(8, 8, 6, 4, 2, 61);
  const DegradedScene deg = make_case(t.clean, 5, 62);
  RhuidrConfig cfg;
  cfg.epsilon = default_epsilon(deg.params.sigma, deg.params.p_s, t.dims);
  cfg.eta = default_eta(deg.params.p_s, t.dims);
  cfg.tol = 1e-9;
  cfg.max_iter = 300000;
  const double c = 3.0;
  RhuidrConfig scaled = cfg;
  scaled.epsilon *= c;
  scaled.eta *= c;
  const UnmixResult a = unmix(deg.degraded, t.E, cfg);
  const UnmixResult b = unmix(HSCube(c * deg.degraded.data(), t.dims), t.E, scaled);
  auto close = [c](const Mat& x, const Mat& y) { return (c * x - y).norm() <= 1e-3 * (1.0 + y.norm()); };
  CHECK(close(a.reconstructed.data(), b.reconstructed.data()));
  CHECK(close(a.noise.sparse, b.noise.sparse));
  CHECK(close(a.noise.stripe, b.noise.stripe));
}
