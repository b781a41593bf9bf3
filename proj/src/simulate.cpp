#include "rhuidr/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace rhuidr {

namespace {

// Independent stream per (seed, stage).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint32_t stage) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stage};
  return std::mt19937_64(seq);
}

enum Stage : std::uint32_t {
  kEndmembers = 1,
  kAbundance = 2,
  kGaussian = 3,
  kSaltPepper = 4,
  kStripes = 5,
};

}  // namespace

NoiseCase noise_case(int id) {
  NoiseCase c;
  c.id = id;
  switch (id) {
    case 1: c.sigma = 0.05; break;
    case 2: c.sigma = 0.1; break;
    case 3: c.sigma = 0.05; c.p_s = 0.05; break;
    case 4: c.sigma = 0.05; c.p_s = 0.1; break;
    case 5: c.sigma = 0.05; c.p_s = 0.05; c.stripes = true; break;
    case 6: c.sigma = 0.1; c.p_s = 0.05; c.stripes = true; break;
    case 7: c.noniid = true; c.sigma_lo = 0.1; c.sigma_hi = 0.2; break;
    case 8:
      c.noniid = true;
      c.sigma_lo = 0.1;
      c.sigma_hi = 0.2;
      c.p_s = 0.05;
      c.stripes = true;
      break;
    default: throw Error("unknown noise case " + std::to_string(id) + " (expected 1-8)");
  }
  return c;
}

EndmemberLibrary gen_endmembers(Index l, Index m, std::uint64_t seed) {
  if (l < 1) throw Error("gen_endmembers: need at least one band");
  if (m < 2) throw Error("gen_endmembers: need at least two endmembers");
  auto rng = make_rng(seed, kEndmembers);
  std::uniform_int_distribution<int> bumps(3, 6);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double span = static_cast<double>(std::max<Index>(l - 1, 1));
  Mat E(l, m);
  std::vector<std::string> names;
  for (Index j = 0; j < m; ++j) {
    const int g = bumps(rng);
    for (Index k = 0; k < l; ++k) E(k, j) = 0.0;
    for (int b = 0; b < g; ++b) {
      const double center = unit(rng) * span;
      const double width = std::max(0.5, (0.05 + 0.25 * unit(rng)) * span);
      const double amp = 0.2 + 0.8 * unit(rng);
      for (Index k = 0; k < l; ++k) {
        const double z = (static_cast<double>(k) - center) / width;
        E(k, j) += amp * std::exp(-0.5 * z * z);
      }
    }
    E.col(j) /= E.col(j).maxCoeff();
    names.push_back("em" + std::to_string(j));
  }
  return EndmemberLibrary(std::move(E), std::move(names));
}

AbundanceMatrix gen_abundance(const SceneSpec& spec, Index m) {
  const Dims& d = spec.dims;
  if (d.n1 <= 0 || d.n2 <= 0) throw Error("gen_abundance: invalid grid");
  if (m < 1 || spec.active < 1 || spec.active > m) throw Error("gen_abundance: need 1 <= k <= m");
  auto rng = make_rng(spec.seed, kAbundance);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  std::vector<Index> rows(static_cast<std::size_t>(m));
  std::iota(rows.begin(), rows.end(), Index{0});
  std::shuffle(rows.begin(), rows.end(), rng);
  rows.resize(static_cast<std::size_t>(spec.active));
  std::sort(rows.begin(), rows.end());

  const double width = spec.smoothness > 0.0 ? spec.smoothness : static_cast<double>(std::max(d.n1, d.n2)) / 4.0;
  const Index n = d.n();
  AbundanceMatrix A = AbundanceMatrix::Zero(m, n);
  constexpr int kBlobs = 4;
  constexpr double kFloor = 0.02;
  for (Index row : rows) {
    for (int b = 0; b < kBlobs; ++b) {
      const double cr = unit(rng) * static_cast<double>(d.n1 - 1);
      const double cc = unit(rng) * static_cast<double>(d.n2 - 1);
      const double w = width * (0.7 + 0.6 * unit(rng));
      const double amp = 0.3 + 0.7 * unit(rng);
      for (Index c = 0; c < d.n2; ++c) {
        for (Index r = 0; r < d.n1; ++r) {
          const double dr = (static_cast<double>(r) - cr) / w;
          const double dc = (static_cast<double>(c) - cc) / w;
          A(row, c * d.n1 + r) += amp * std::exp(-0.5 * (dr * dr + dc * dc));
        }
      }
    }
    A.row(row).array() += kFloor;
  }
  for (Index p = 0; p < n; ++p) A.col(p) /= A.col(p).sum();
  return A;
}

std::vector<Index> active_rows(const AbundanceMatrix& A) {
  std::vector<Index> out;
  for (Index i = 0; i < A.rows(); ++i)
    if ((A.row(i).array() != 0.0).any()) out.push_back(i);
  return out;
}

HSCube clean_scene(const EndmemberLibrary& E, const AbundanceMatrix& A, const Dims& dims) {
  if (E.size() != A.rows()) throw ShapeError("clean_scene: library size does not match abundance rows");
  Dims d = dims;
  d.l = E.bands();
  require_shape(A, E.size(), d.n(), "clean_scene");
  Mat V = E.matrix() * A;
  return HSCube(std::move(V), d);
}

namespace {

GaussianNoise apply_band_noise(const HSCube& V, std::vector<double> sigmas, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Mat noise(V.bands(), V.pixels());
  for (Index k = 0; k < V.bands(); ++k)
    for (Index p = 0; p < V.pixels(); ++p) noise(k, p) = sigmas[static_cast<std::size_t>(k)] * normal(rng);
  Mat out = V.data() + noise;
  return {HSCube(std::move(out), V.dims()), std::move(noise), std::move(sigmas)};
}

}  // namespace

GaussianNoise add_gaussian(const HSCube& V, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw Error("add_gaussian: sigma must be >= 0");
  auto rng = make_rng(seed, kGaussian);
  return apply_band_noise(V, std::vector<double>(static_cast<std::size_t>(V.bands()), sigma), rng);
}

GaussianNoise add_gaussian_noniid(const HSCube& V, double lo, double hi, std::uint64_t seed) {
  if (!(lo >= 0.0) || !(hi >= lo)) throw Error("add_gaussian_noniid: need 0 <= lo <= hi");
  auto rng = make_rng(seed, kGaussian);
  std::uniform_real_distribution<double> pick(lo, hi);
  std::vector<double> sigmas(static_cast<std::size_t>(V.bands()));
  for (double& s : sigmas) s = lo == hi ? lo : pick(rng);
  return apply_band_noise(V, std::move(sigmas), rng);
}

SparseNoise add_salt_pepper(const HSCube& V, double p_s, std::uint64_t seed) {
  if (!(p_s >= 0.0 && p_s <= 1.0)) throw Error("add_salt_pepper: rate must lie in [0, 1]");
  auto rng = make_rng(seed, kSaltPepper);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Mat out = V.data();
  for (Index i = 0; i < out.size(); ++i) {
    const double u = unit(rng);
    if (u < 0.5 * p_s)
      out.data()[i] = 0.0;
    else if (u < p_s)
      out.data()[i] = 1.0;
  }
  Mat delta = out - V.data();
  return {HSCube(std::move(out), V.dims()), std::move(delta)};
}

StripeNoise add_stripes(const HSCube& V, double lo, double hi, double fraction, std::uint64_t seed) {
  if (!(hi >= lo)) throw Error("add_stripes: need lo <= hi");
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw Error("add_stripes: fraction must lie in [0, 1]");
  const Dims& d = V.dims();
  auto rng = make_rng(seed, kStripes);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> level(lo, hi);
  Mat L = Mat::Zero(V.bands(), V.pixels());
  for (Index k = 0; k < d.l; ++k) {
    for (Index c = 0; c < d.n2; ++c) {
      if (!(unit(rng) < fraction)) continue;
      const double v = lo == hi ? lo : level(rng);
      L.row(k).segment(c * d.n1, d.n1).setConstant(v);
    }
  }
  Mat out = V.data() + L;
  return {HSCube(std::move(out), d), std::move(L)};
}

DegradedScene make_case(const HSCube& clean, int case_id, std::uint64_t seed) {
  return make_case(clean, noise_case(case_id), seed);
}

DegradedScene make_case(const HSCube& clean, const NoiseCase& params, std::uint64_t seed) {
  DegradedScene out;
  out.params = params;
  GaussianNoise g = params.noniid ? add_gaussian_noniid(clean, params.sigma_lo, params.sigma_hi, seed)
                                  : add_gaussian(clean, params.sigma, seed);
  out.gaussian = std::move(g.noise);
  out.sigmas = std::move(g.sigmas);
  if (params.p_s > 0.0) {
    out.sparse = add_salt_pepper(g.cube, params.p_s, seed).delta;
  } else {
    out.sparse = Mat::Zero(clean.bands(), clean.pixels());
  }
  if (params.stripes) {
    out.stripe = add_stripes(clean, params.stripe_lo, params.stripe_hi, params.stripe_fraction, seed).stripes;
  } else {
    out.stripe = Mat::Zero(clean.bands(), clean.pixels());
  }
  Mat v = clean.data() + out.gaussian;
  v += out.sparse;
  v += out.stripe;
  out.degraded = HSCube(std::move(v), clean.dims());
  return out;
}

}  // namespace rhuidr
