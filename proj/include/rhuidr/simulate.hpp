#pragma once

#include <cstdint>
#include <vector>

#include "rhuidr/core_types.hpp"

namespace rhuidr {

/// Degradation recipe. Cases 1-8 fix every field.
struct NoiseCase {
  int id = 0;
  double sigma = 0.0;            // i.i.d. Gaussian std
  bool noniid = false;           // per-band sigma drawn from [sigma_lo, sigma_hi]
  double sigma_lo = 0.0;
  double sigma_hi = 0.0;
  double p_s = 0.0;              // salt-and-pepper rate
  bool stripes = false;
  double stripe_lo = -0.3;
  double stripe_hi = 0.3;
  double stripe_fraction = 1.0;  // share of (band, column) pairs striped
};

NoiseCase noise_case(int case_id);

struct SceneSpec {
  Dims dims;           // n1, n2, l and library size m
  int active = 4;      // k: endmembers present in the scene
  std::uint64_t seed = 0;
  double smoothness = 0.0;  // blob width in pixels; <= 0 picks max(n1, n2) / 4
};

/// m smooth nonnegative spectra over l bands, each a sum of 3-6 seeded
/// Gaussian bumps, scaled to peak 1. Pairwise spectral angles on typical
/// draws fall between roughly 0.1 and 1.2 rad.
EndmemberLibrary gen_endmembers(Index l, Index m, std::uint64_t seed);

/// k seeded smooth fields (sums of Gaussian blobs over a small floor) on k
/// randomly chosen rows, other rows exactly zero; each pixel is normalized to
/// sum 1.
AbundanceMatrix gen_abundance(const SceneSpec& spec, Index m);

/// Rows of `A` that carry any nonzero entry.
std::vector<Index> active_rows(const AbundanceMatrix& A);

HSCube clean_scene(const EndmemberLibrary& E, const AbundanceMatrix& A, const Dims& dims);

struct GaussianNoise {
  HSCube cube;
  Mat noise;
  std::vector<double> sigmas;  // one per band
};

GaussianNoise add_gaussian(const HSCube& V, double sigma, std::uint64_t seed);
GaussianNoise add_gaussian_noniid(const HSCube& V, double sigma_lo, double sigma_hi, std::uint64_t seed);

struct SparseNoise {
  HSCube cube;
  Mat delta;  // cube - input
};

/// Each entry becomes 0 with probability p/2 and 1 with probability p/2.
SparseNoise add_salt_pepper(const HSCube& V, double p_s, std::uint64_t seed);

struct StripeNoise {
  HSCube cube;
  Mat stripes;  // constant along every image column of every band
};

StripeNoise add_stripes(const HSCube& V, double lo, double hi, double fraction, std::uint64_t seed);

struct DegradedScene {
  HSCube degraded;
  Mat gaussian;
  Mat sparse;
  Mat stripe;
  std::vector<double> sigmas;
  NoiseCase params;
};

/// Gaussian, then salt-and-pepper, then stripes. degraded is assembled as
/// ((clean + gaussian) + sparse) + stripe so the decomposition is exact.
DegradedScene make_case(const HSCube& clean, int case_id, std::uint64_t seed);
DegradedScene make_case(const HSCube& clean, const NoiseCase& params, std::uint64_t seed);

}  // namespace rhuidr
