#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "rhuidr/kernels.hpp"
#include "support.hpp"

using namespace rhuidr::kernels;

namespace {

std::vector<double> random_vec(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = nd(rng);
  // exercise exact zeros and ties with the threshold
  if (n > 3) {
    v[0] = 0.0;
    v[1] = 0.5;
    v[2] = -0.5;
  }
  return v;
}

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("scalar table reference values") {
  const KernelTable& s = scalar_table();
  const std::vector<double> x{3.0, -0.5, 0.2, -4.0};
  std::vector<double> out(4);
  s.soft_threshold(x.data(), 1.0, out.data(), 4);
  CHECK(out == std::vector<double>{2.0, 0.0, 0.0, -3.0});
  s.clamp_nonneg(x.data(), out.data(), 4);
  CHECK(out == std::vector<double>{3.0, 0.0, 0.2, 0.0});
  CHECK(s.sum_abs(x.data(), 4) == doctest::Approx(7.7));
  CHECK(s.sum_sq(x.data(), 4) == doctest::Approx(9.0 + 0.25 + 0.04 + 16.0));
  CHECK(s.dot(x.data(), x.data(), 4) == doctest::Approx(s.sum_sq(x.data(), 4)));
}

TEST_CASE("active table is one of the available ones") {
  const auto av = available();
  REQUIRE(!av.empty());
  CHECK(av.front()->isa == Isa::Scalar);
  bool found = false;
  for (const auto* t : av) found = found || t == &active();
  CHECK(found);
}

TEST_CASE("every variant matches the scalar reference") {
  std::mt19937_64 rng(11);
  const KernelTable& ref = scalar_table();
  for (const KernelTable* t : available()) {
    CAPTURE(t->name);
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 16u, 17u, 1000u, 1023u}) {
      CAPTURE(n);
      const auto a = random_vec(n, rng);
      const auto b = random_vec(n, rng);
      std::vector<double> o1(n), o2(n);

      ref.sub(a.data(), b.data(), o1.data(), n);
      t->sub(a.data(), b.data(), o2.data(), n);
      CHECK(bit_equal(o1, o2));

      ref.axpby(0.3, a.data(), -1.7, b.data(), o1.data(), n);
      t->axpby(0.3, a.data(), -1.7, b.data(), o2.data(), n);
      CHECK(bit_equal(o1, o2));

      o1 = b;
      o2 = b;
      ref.axpy(-2.5, a.data(), o1.data(), n);
      t->axpy(-2.5, a.data(), o2.data(), n);
      CHECK(bit_equal(o1, o2));

      ref.mul(a.data(), b.data(), o1.data(), n);
      t->mul(a.data(), b.data(), o2.data(), n);
      CHECK(bit_equal(o1, o2));

      ref.soft_threshold(a.data(), 0.5, o1.data(), n);
      t->soft_threshold(a.data(), 0.5, o2.data(), n);
      CHECK(bit_equal(o1, o2));

      ref.clamp_nonneg(a.data(), o1.data(), n);
      t->clamp_nonneg(a.data(), o2.data(), n);
      CHECK(bit_equal(o1, o2));

      o1 = b;
      o2 = b;
      ref.accumulate_sq(a.data(), o1.data(), n);
      t->accumulate_sq(a.data(), o2.data(), n);
      CHECK(bit_equal(o1, o2));

      const double tol = 1e-12 * (1.0 + static_cast<double>(n));
      CHECK(std::abs(ref.dot(a.data(), b.data(), n) - t->dot(a.data(), b.data(), n)) <= tol);
      CHECK(std::abs(ref.sum_sq(a.data(), n) - t->sum_sq(a.data(), n)) <= tol);
      CHECK(std::abs(ref.sum_abs(a.data(), n) - t->sum_abs(a.data(), n)) <= tol);
      CHECK(std::abs(ref.diff_sq(a.data(), b.data(), n) - t->diff_sq(a.data(), b.data(), n)) <= tol);
    }
  }
}

TEST_CASE("soft threshold keeps signed zero behaviour sane") {
  for (const KernelTable* t : available()) {
    const double x[4] = {-0.0, 0.0, 1.0, -1.0};
    double out[4];
    t->soft_threshold(x, 1.0, out, 4);
    for (double v : out) CHECK(v == 0.0);
  }
}
