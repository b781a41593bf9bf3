#include "rhuidr/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>

#include "rhuidr/io.hpp"

namespace rhuidr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  return j.at(key).get<T>();
}

std::optional<double> get_opt(const json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

io::Params config_params(const RhuidrConfig& c) {
  return {{"regularizer", to_string(c.regularizer)},
          {"lambda1", io::format_double(c.lambda1)},
          {"lambda2", io::format_double(c.lambda2)},
          {"lambda3", io::format_double(c.lambda3)},
          {"epsilon", io::format_double(c.epsilon)},
          {"eta", io::format_double(c.eta)},
          {"omega", io::format_double(c.omega)},
          {"max_iter", std::to_string(c.max_iter)},
          {"tol", io::format_double(c.tol)},
          {"diagnostics_stride", std::to_string(c.diagnostics_stride)}};
}

void write_unmix_outputs(const UnmixResult& r, const RhuidrConfig& cfg, const Dims& dims, const fs::path& dir,
                         bool pgm) {
  fs::create_directories(dir);
  io::write_matrix_csv(r.A, dir / "abundance.csv");
  io::write_cube(HSCube(r.noise.sparse, dims), dir / "S.cube");
  io::write_cube(HSCube(r.noise.stripe, dims), dir / "L.cube");
  io::write_cube(r.reconstructed, dir / "reconstructed.cube");
  io::write_trace_csv(r.trace, config_params(cfg), dir / "trace.csv");
  if (pgm) io::export_abundance_pgm(r.A, dims, dir / "pgm");
}

Dims with_grid(Index n1, Index n2, Index l, Index m) {
  Dims d{n1, n2, l, m};
  d.validate(true);
  return d;
}

}  // namespace

RunManifest load_manifest(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw Error("cannot open manifest '" + path.string() + "'");
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw Error("manifest '" + path.string() + "': " + e.what());
  }
  RunManifest m;
  try {
    m.seed = get_or<std::uint64_t>(j, "seed", 0);
    const json scene = j.value("scene", json::object());
    m.scene.dims = with_grid(get_or<Index>(scene, "n1", 32), get_or<Index>(scene, "n2", 32),
                             get_or<Index>(scene, "bands", 16), get_or<Index>(scene, "library_size", 8));
    m.scene.active = get_or<int>(scene, "active", 3);
    m.scene.smoothness = get_or<double>(scene, "smoothness", 0.0);
    m.scene.seed = m.seed;
    if (j.contains("library") && j.at("library").contains("path")) {
      fs::path lib = j.at("library").at("path").get<std::string>();
      m.library_path = lib.is_relative() ? path.parent_path() / lib : lib;
    }
    m.case_id = get_or<int>(j, "case_id", 1);
    m.stripe_fraction = get_or<double>(j, "stripe_fraction", 1.0);
    const json s = j.value("solver", json::object());
    RhuidrConfig& c = m.solver;
    c.regularizer = parse_regularizer(get_or<std::string>(s, "regularizer", "htv"));
    c.lambda1 = get_or<double>(s, "lambda1", c.lambda1);
    c.lambda2 = get_or<double>(s, "lambda2", c.regularizer == Regularizer::None ? 0.0 : c.lambda2);
    c.lambda3 = get_or<double>(s, "lambda3", c.lambda3);
    c.omega = get_or<double>(s, "omega", c.omega);
    c.max_iter = get_or<int>(s, "max_iter", c.max_iter);
    c.tol = get_or<double>(s, "tol", c.tol);
    c.diagnostics_stride = get_or<int>(s, "diagnostics_stride", c.diagnostics_stride);
    m.epsilon = get_opt(s, "epsilon");
    m.eta = get_opt(s, "eta");
    m.alpha_sigma = get_or<double>(s, "alpha_sigma", m.alpha_sigma);
    m.alpha_eta = get_or<double>(s, "alpha_eta", m.alpha_eta);
    m.output_dir = get_or<std::string>(j, "output_dir", "out");
  } catch (const json::exception& e) {
    throw Error("manifest '" + path.string() + "': " + e.what());
  }
  return m;
}

RunOutcome run_pipeline(const RunManifest& m) {
  const Dims& d = m.scene.dims;
  const EndmemberLibrary E = m.library_path ? EndmemberLibrary(io::read_matrix_csv(*m.library_path))
                                            : gen_endmembers(d.l, d.m, m.seed);
  if (E.bands() != d.l || E.size() != d.m) throw Error("library shape does not match the scene spec");
  const AbundanceMatrix A_true = gen_abundance(m.scene, d.m);
  const HSCube clean = clean_scene(E, A_true, d);
  NoiseCase nc = noise_case(m.case_id);
  nc.stripe_fraction = m.stripe_fraction;
  const DegradedScene deg = make_case(clean, nc, m.seed);

  RunOutcome out;
  RhuidrConfig& cfg = out.config;
  cfg = m.solver;
  cfg.epsilon = m.epsilon ? *m.epsilon
                          : (nc.noniid ? default_epsilon_noniid(deg.sigmas, nc.p_s, d, m.alpha_sigma)
                                       : default_epsilon(nc.sigma, nc.p_s, d, m.alpha_sigma));
  cfg.eta = m.eta ? *m.eta : default_eta(nc.p_s, d, m.alpha_eta);

  out.result = unmix(deg.degraded, E, cfg);
  MetricReport& rep = out.metrics;
  rep.sre_db = sre(A_true, out.result.A);
  rep.rmse = rmse(A_true, out.result.A);
  rep.ps = ps(A_true, out.result.A);
  rep.mpsnr_db = mpsnr(clean, out.result.reconstructed);
  rep.mssim = mssim(clean, out.result.reconstructed);

  const fs::path& dir = m.output_dir;
  fs::create_directories(dir);
  io::write_matrix_csv(E.matrix(), dir / "library.csv");
  io::write_matrix_csv(A_true, dir / "abundance_true.csv");
  io::write_cube(clean, dir / "clean.cube");
  io::write_cube(deg.degraded, dir / "degraded.cube");
  io::write_cube(HSCube(deg.stripe, d), dir / "stripe_true.cube");
  io::write_cube(HSCube(deg.sparse, d), dir / "sparse_true.cube");
  write_unmix_outputs(out.result, cfg, d, dir, true);
  {
    std::ofstream os(dir / "metrics.txt");
    os << rep.to_record() << '\n';
  }
  return out;
}

namespace {

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Robust hyperspectral unmixing with image-domain regularization"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "generate a scene: clean cube, library and true abundances");
  Index s_n1 = 32, s_n2 = 32, s_l = 16, s_m = 8;
  int s_k = 3;
  double s_smooth = 0.0;
  std::uint64_t s_seed = 0;
  std::string s_out;
  synth->add_option("--n1", s_n1, "image rows")->capture_default_str();
  synth->add_option("--n2", s_n2, "image columns")->capture_default_str();
  synth->add_option("--bands", s_l, "spectral bands")->capture_default_str();
  synth->add_option("--library-size", s_m, "library size m")->capture_default_str();
  synth->add_option("--active", s_k, "active endmembers k")->capture_default_str();
  synth->add_option("--smoothness", s_smooth, "blob width in pixels (0: auto)")->capture_default_str();
  synth->add_option("--seed", s_seed, "random seed")->capture_default_str();
  synth->add_option("--out-dir", s_out, "output directory")->required();

  // degrade
  auto* degrade = app.add_subcommand("degrade", "apply one of the eight noise cases");
  std::string d_in, d_out, d_truth;
  int d_case = 1;
  std::uint64_t d_seed = 0;
  double d_fraction = 1.0;
  degrade->add_option("--in", d_in, "clean cube")->required();
  degrade->add_option("--case", d_case, "noise case 1-8")->required()->check(CLI::Range(1, 8));
  degrade->add_option("--seed", d_seed, "random seed")->capture_default_str();
  degrade->add_option("--stripe-fraction", d_fraction, "share of striped (band, column) pairs")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  degrade->add_option("--out", d_out, "degraded cube path")->required();
  degrade->add_option("--truth-dir", d_truth, "directory for ground-truth noise (default: next to --out)");

  // unmix
  auto* um = app.add_subcommand("unmix", "estimate abundances, sparse and stripe noise");
  std::string u_cube, u_lib, u_out, u_reg = "htv";
  RhuidrConfig u_cfg;
  std::optional<double> u_eps, u_eta, u_lambda2;
  double u_sigma = 0.01, u_ps = 0.0, u_alpha_sigma = 1.0, u_alpha_eta = 0.9;
  bool u_no_pgm = false;
  um->add_option("--cube", u_cube, "observed cube")->required();
  um->add_option("--library", u_lib, "endmember library CSV (l rows, m columns)")->required();
  um->add_option("--out-dir", u_out, "output directory")->required();
  um->add_option("--reg", u_reg, "image-domain regularizer")
      ->capture_default_str()
      ->check(CLI::IsMember({"htv", "sstv", "hsstv", "none"}));
  um->add_option("--lambda1", u_cfg.lambda1, "abundance TV weight")->capture_default_str();
  um->add_option("--lambda2", u_lambda2, "image-domain weight (default 10, 0 with --reg none)");
  um->add_option("--lambda3", u_cfg.lambda3, "stripe l1 weight")->capture_default_str();
  um->add_option("--epsilon", u_eps, "fidelity radius (default from --sigma/--ps)");
  um->add_option("--eta", u_eta, "sparse-noise l1 radius (default from --ps; 0 pins S to zero)");
  um->add_option("--omega", u_cfg.omega, "HSSTV balance")->capture_default_str();
  um->add_option("--max-iter", u_cfg.max_iter, "iteration cap")->capture_default_str();
  um->add_option("--tol", u_cfg.tol, "relative-change tolerance on A")->capture_default_str();
  um->add_option("--stride", u_cfg.diagnostics_stride, "diagnostics every k iterations")->capture_default_str();
  um->add_option("--sigma", u_sigma, "Gaussian noise level used for the default epsilon")->capture_default_str();
  um->add_option("--ps", u_ps, "salt-and-pepper rate used for the default epsilon/eta")->capture_default_str();
  um->add_option("--alpha-sigma", u_alpha_sigma, "epsilon scale")->capture_default_str();
  um->add_option("--alpha-eta", u_alpha_eta, "eta scale")->capture_default_str();
  um->add_flag("--no-pgm", u_no_pgm, "skip PGM abundance images");

  // metrics
  auto* met = app.add_subcommand("metrics", "compare estimates with ground truth");
  std::string m_ta, m_ea, m_tc, m_ec, m_csv;
  met->add_option("--truth-abundance", m_ta, "true abundance CSV");
  met->add_option("--est-abundance", m_ea, "estimated abundance CSV");
  met->add_option("--truth-cube", m_tc, "true clean cube");
  met->add_option("--est-cube", m_ec, "reconstructed cube");
  met->add_option("--csv", m_csv, "also write the report as CSV");

  // run
  auto* run = app.add_subcommand("run", "full pipeline from a JSON manifest");
  std::string r_manifest, r_out;
  run->add_option("--manifest", r_manifest, "manifest JSON")->required();
  run->add_option("--out-dir", r_out, "override the manifest output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  if (*synth) {
    SceneSpec spec;
    spec.dims = with_grid(s_n1, s_n2, s_l, s_m);
    if (s_k < 1 || s_k > s_m) throw UsageError("--active must lie in [1, library-size]");
    spec.active = s_k;
    spec.seed = s_seed;
    spec.smoothness = s_smooth;
    const EndmemberLibrary E = gen_endmembers(s_l, s_m, s_seed);
    const AbundanceMatrix A = gen_abundance(spec, s_m);
    const HSCube V = clean_scene(E, A, spec.dims);
    const fs::path dir = s_out;
    io::write_cube(V, dir / "clean.cube");
    io::write_matrix_csv(E.matrix(), dir / "library.csv");
    io::write_matrix_csv(A, dir / "abundance_true.csv");
    std::cout << "wrote " << (dir / "clean.cube").string() << '\n';
    return 0;
  }

  if (*degrade) {
    const HSCube V = io::read_cube(d_in);
    NoiseCase nc = noise_case(d_case);
    nc.stripe_fraction = d_fraction;
    const DegradedScene deg = make_case(V, nc, d_seed);
    const fs::path out = d_out;
    const fs::path truth = d_truth.empty() ? (out.has_parent_path() ? out.parent_path() : fs::path(".")) : fs::path(d_truth);
    io::write_cube(deg.degraded, out);
    io::write_cube(HSCube(deg.gaussian, V.dims()), truth / "gaussian_true.cube");
    io::write_cube(HSCube(deg.sparse, V.dims()), truth / "sparse_true.cube");
    io::write_cube(HSCube(deg.stripe, V.dims()), truth / "stripe_true.cube");
    json info = {{"case_id", nc.id},  {"sigma", nc.sigma},  {"noniid", nc.noniid},
                 {"p_s", nc.p_s},     {"stripes", nc.stripes}, {"stripe_fraction", nc.stripe_fraction},
                 {"sigmas", deg.sigmas}, {"seed", d_seed}};
    std::ofstream(truth / "noise.json") << info.dump(2) << '\n';
    std::cout << "wrote " << out.string() << '\n';
    return 0;
  }

  if (*um) {
    u_cfg.regularizer = parse_regularizer(u_reg);
    if (u_cfg.regularizer == Regularizer::None) {
      if (u_lambda2 && *u_lambda2 > 0.0) throw UsageError("--reg none cannot be combined with --lambda2 > 0");
      u_cfg.lambda2 = 0.0;
    } else if (u_lambda2) {
      u_cfg.lambda2 = *u_lambda2;
    }
    const HSCube V = io::read_cube(u_cube);
    const EndmemberLibrary E(io::read_matrix_csv(u_lib));
    if (E.bands() != V.bands()) throw UsageError("library and cube band counts differ");
    const Dims d = V.dims();
    u_cfg.epsilon = u_eps ? *u_eps : default_epsilon(u_sigma, u_ps, d, u_alpha_sigma);
    u_cfg.eta = u_eta ? *u_eta : default_eta(u_ps, d, u_alpha_eta);
    try {
      u_cfg.validate();
    } catch (const Error& e) {
      throw UsageError(e.what());
    }
    const UnmixResult r = unmix(V, E, u_cfg);
    write_unmix_outputs(r, u_cfg, d, u_out, !u_no_pgm);
    std::cout << "iterations=" << r.trace.iterations << " termination=" << to_string(r.trace.reason) << '\n';
    return 0;
  }

  if (*met) {
    MetricReport rep;
    if (!m_ta.empty() != !m_ea.empty()) throw UsageError("--truth-abundance and --est-abundance go together");
    if (!m_tc.empty() != !m_ec.empty()) throw UsageError("--truth-cube and --est-cube go together");
    if (m_ta.empty() && m_tc.empty()) throw UsageError("nothing to compare");
    if (!m_ta.empty()) {
      const Mat t = io::read_matrix_csv(m_ta);
      const Mat e = io::read_matrix_csv(m_ea);
      rep.sre_db = sre(t, e);
      rep.rmse = rmse(t, e);
      rep.ps = ps(t, e);
    }
    if (!m_tc.empty()) {
      const HSCube t = io::read_cube(m_tc);
      const HSCube e = io::read_cube(m_ec);
      rep.mpsnr_db = mpsnr(t, e);
      rep.mssim = mssim(t, e);
    }
    std::cout << rep.to_record() << '\n';
    if (!m_csv.empty()) {
      std::ofstream os(m_csv);
      os << "sre_db,rmse,ps,mpsnr_db,mssim\n";
      auto put = [&](const std::optional<double>& v) { os << (v ? io::format_double(*v) : "na"); };
      put(rep.sre_db);
      os << ',';
      put(rep.rmse);
      os << ',';
      put(rep.ps);
      os << ',';
      put(rep.mpsnr_db);
      os << ',';
      put(rep.mssim);
      os << '\n';
    }
    return 0;
  }

  if (*run) {
    RunManifest m = load_manifest(r_manifest);
    if (!r_out.empty()) m.output_dir = r_out;
    const RunOutcome o = run_pipeline(m);
    std::cout << o.metrics.to_record() << " iterations=" << o.result.trace.iterations
              << " termination=" << to_string(o.result.trace.reason) << '\n';
    return 0;
  }
  return 2;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  try {
    return run_cli(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace rhuidr
