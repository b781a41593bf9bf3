#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "rhuidr/metrics.hpp"
#include "rhuidr/rhuidr.hpp"
#include "rhuidr/simulate.hpp"

namespace rhuidr {

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Everything a `run` needs; JSON on disk:
/// {
///   "seed": 7,
///   "scene": {"n1": 32, "n2": 32, "bands": 16, "library_size": 8, "active": 3, "smoothness": 0},
///   "library": {"path": "lib.csv"}            // optional; generated from seed otherwise
///   "case_id": 5,
///   "stripe_fraction": 1.0,                   // optional
///   "solver": {"regularizer": "htv", "lambda1": 1, "lambda2": 10, "lambda3": 1,
///              "epsilon": null, "eta": null, "alpha_sigma": 1, "alpha_eta": 0.9,
///              "omega": 0.05, "max_iter": 50000, "tol": 1e-5, "diagnostics_stride": 10},
///   "output_dir": "out"
/// }
/// epsilon/eta left null are derived from the noise case.
struct RunManifest {
  std::uint64_t seed = 0;
  SceneSpec scene;
  std::optional<std::filesystem::path> library_path;
  int case_id = 1;
  double stripe_fraction = 1.0;
  RhuidrConfig solver;
  std::optional<double> epsilon;
  std::optional<double> eta;
  double alpha_sigma = 1.0;
  double alpha_eta = 0.9;
  std::filesystem::path output_dir = "out";
};

RunManifest load_manifest(const std::filesystem::path& path);

struct RunOutcome {
  UnmixResult result;
  MetricReport metrics;
  RhuidrConfig config;  // with epsilon/eta resolved
};

/// Full pipeline: scene, degradation, unmixing, metrics; writes every
/// artifact into manifest.output_dir.
RunOutcome run_pipeline(const RunManifest& manifest);

/// Entry point of the `rhuidr` tool. Returns 0 on success, 2 on usage errors
/// and 1 on runtime failures.
int cli_main(int argc, const char* const* argv);

}  // namespace rhuidr
