#include "rhuidr/rhuidr.hpp"

#include <cmath>
#include <numeric>

#include "rhuidr/kernels.hpp"
#include "rhuidr/prox.hpp"

namespace rhuidr {

const char* to_string(Regularizer r) {
  switch (r) {
    case Regularizer::None: return "none";
    case Regularizer::HTV: return "htv";
    case Regularizer::SSTV: return "sstv";
    case Regularizer::HSSTV: return "hsstv";
  }
  return "?";
}

Regularizer parse_regularizer(const std::string& s) {
  if (s == "none") return Regularizer::None;
  if (s == "htv") return Regularizer::HTV;
  if (s == "sstv") return Regularizer::SSTV;
  if (s == "hsstv") return Regularizer::HSSTV;
  throw Error("unknown regularizer '" + s + "' (expected htv, sstv, hsstv or none)");
}

void RhuidrConfig::validate() const {
  auto finite_nonneg = [](double v) { return std::isfinite(v) && v >= 0.0; };
  if (!(lambda1 > 0.0) || !std::isfinite(lambda1)) throw Error("lambda1 must be > 0");
  if (!finite_nonneg(lambda2)) throw Error("lambda2 must be >= 0");
  if (!(lambda3 > 0.0) || !std::isfinite(lambda3)) throw Error("lambda3 must be > 0");
  if (!finite_nonneg(epsilon)) throw Error("epsilon must be >= 0");
  if (!finite_nonneg(eta)) throw Error("eta must be >= 0");
  if (regularizer == Regularizer::None && lambda2 > 0.0)
    throw Error("lambda2 > 0 requires an image-domain regularizer");
  if (regularizer == Regularizer::HSSTV && (!(omega > 0.0) || !std::isfinite(omega)))
    throw Error("omega must be > 0");
  if (max_iter < 1) throw Error("max_iter must be >= 1");
  if (!(tol > 0.0)) throw Error("tol must be > 0");
  if (diagnostics_stride < 1) throw Error("diagnostics stride must be >= 1");
  if (library_norm && (!std::isfinite(*library_norm) || *library_norm < 0.0))
    throw Error("library_norm must be finite and >= 0");
}

double default_epsilon(double sigma, double p_s, const Dims& dims, double alpha_sigma) {
  if (sigma < 0.0 || p_s < 0.0 || p_s > 1.0 || alpha_sigma < 0.0) throw Error("default_epsilon: invalid input");
  const double nl = static_cast<double>(dims.n()) * static_cast<double>(dims.l);
  return alpha_sigma * sigma * std::sqrt((1.0 - p_s) * nl);
}

double default_epsilon_noniid(const std::vector<double>& sigmas, double p_s, const Dims& dims,
                              double alpha_sigma) {
  if (p_s < 0.0 || p_s > 1.0 || alpha_sigma < 0.0) throw Error("default_epsilon_noniid: invalid input");
  double sum = 0.0;
  for (double s : sigmas) {
    if (s < 0.0) throw Error("default_epsilon_noniid: negative sigma");
    sum += s;
  }
  const double nl = static_cast<double>(dims.n()) * static_cast<double>(dims.l);
  return alpha_sigma * std::sqrt((1.0 - p_s) * nl * sum);
}

double default_eta(double p_s, const Dims& dims, double alpha_eta) {
  if (p_s < 0.0 || p_s > 1.0 || alpha_eta < 0.0) throw Error("default_eta: invalid input");
  const double nl = static_cast<double>(dims.n()) * static_cast<double>(dims.l);
  return 0.5 * alpha_eta * p_s * nl;
}

namespace {

LinearMapPtr image_operator(Regularizer r, const Dims& d, double omega) {
  switch (r) {
    case Regularizer::None: return nullptr;
    case Regularizer::HTV: return make_spatial_diff(d.l, d.n1, d.n2);
    case Regularizer::SSTV: return make_spatio_spectral_diff(d.l, d.n1, d.n2);
    case Regularizer::HSSTV: return make_hsstv(d.l, d.n1, d.n2, omega);
  }
  return nullptr;
}

ProxPtr image_prox(Regularizer r, double lambda2) {
  return r == Regularizer::HTV ? make_prox_l12_cols(lambda2) : make_prox_l1(lambda2);
}

void check_inputs(const HSCube& V, const EndmemberLibrary& E) {
  if (E.bands() != V.bands())
    throw ShapeError("library has " + std::to_string(E.bands()) + " bands, cube has " + std::to_string(V.bands()));
}

}  // namespace

RhuidrProblem build_problem(const HSCube& V, const EndmemberLibrary& E, const RhuidrConfig& cfg) {
  cfg.validate();
  check_inputs(V, E);
  RhuidrProblem p;
  p.dims = V.dims();
  p.dims.m = E.size();
  const Dims& d = p.dims;
  const Index n = d.n();
  const Shape abundance{d.m, n};
  const Shape image{d.l, n};

  p.library = make_library_map(E.matrix(), n, cfg.library_norm);
  p.sigma_max = p.library->norm_bound();
  p.abundance_diff = make_spatial_diff(d.m, d.n1, d.n2);
  p.stripe_diff = make_diff(DiffAxis::Vertical, d.l, d.n1, d.n2);
  p.image_op = image_operator(cfg.regularizer, d, cfg.omega);

  BlockProblem& b = p.blocks;
  p.A = b.add_primal({"A", abundance, make_prox_nonneg()});
  p.S = b.add_primal({"S", image, make_prox_l1_ball(cfg.eta)});
  p.L = b.add_primal({"L", image, make_prox_l1(cfg.lambda3)});

  p.z_rowsparse = b.add_dual({"Z1", abundance, make_prox_l12_rows(1.0)});
  b.set_op(p.z_rowsparse, p.A, make_identity(abundance));

  p.z_smooth = b.add_dual({"Z2", p.abundance_diff->out_shape(), make_prox_l1(cfg.lambda1)});
  b.set_op(p.z_smooth, p.A, p.abundance_diff);

  if (p.image_op) {
    const auto KE = make_compose(p.image_op, p.library);
    p.z_image = b.add_dual({"Z3", KE->out_shape(), image_prox(cfg.regularizer, cfg.lambda2)});
    b.set_op(*p.z_image, p.A, KE);
  }

  p.z_fidelity = b.add_dual({"Z4", image, make_prox_fro_ball(V.data(), cfg.epsilon)});
  b.set_op(p.z_fidelity, p.A, p.library);
  b.set_op(p.z_fidelity, p.S, make_identity(image));
  b.set_op(p.z_fidelity, p.L, make_identity(image));

  p.z_flat = b.add_dual({"Z5", image, make_prox_zero_set()});
  b.set_op(p.z_flat, p.L, p.stripe_diff);

  b.validate();
  return p;
}

double mean_abs(const Mat& x) {
  if (x.size() == 0) return 0.0;
  return kernels::active().sum_abs(x.data(), static_cast<std::size_t>(x.size())) / static_cast<double>(x.size());
}

double objective_value(const Mat& A, const Mat& L, const RhuidrConfig& cfg, const EndmemberLibrary& E,
                       const Dims& dims) {
  require_shape(A, E.size(), dims.n(), "objective_value: A");
  require_shape(L, dims.l, dims.n(), "objective_value: L");
  double obj = A.rowwise().norm().sum();
  obj += cfg.lambda1 * make_spatial_diff(A.rows(), dims.n1, dims.n2)->forward(A).cwiseAbs().sum();
  if (cfg.regularizer != Regularizer::None && cfg.lambda2 != 0.0) {
    const Mat EA = E.matrix() * A;
    const Mat KEA = image_operator(cfg.regularizer, dims, cfg.omega)->forward(EA);
    const double r = cfg.regularizer == Regularizer::HTV ? KEA.colwise().norm().sum() : KEA.cwiseAbs().sum();
    obj += cfg.lambda2 * r;
  }
  obj += cfg.lambda3 * L.cwiseAbs().sum();
  return obj;
}

Diagnostics diagnostics_record(const Mat& A, const Mat& S, const Mat& L, const HSCube& V,
                               const EndmemberLibrary& E, const RhuidrConfig& cfg) {
  const Dims& d = V.dims();
  Diagnostics out;
  out.objective = objective_value(A, L, cfg, E, d);
  Mat r = V.data();
  r.noalias() -= E.matrix() * A;
  r -= S;
  r -= L;
  out.fidelity_distance = r.norm();
  out.s_l1 = S.cwiseAbs().sum();
  out.stripe_mav = mean_abs(make_diff(DiffAxis::Vertical, d.l, d.n1, d.n2)->forward(L));
  return out;
}

UnmixResult unmix(const HSCube& V, const EndmemberLibrary& E, const RhuidrConfig& cfg, const UnmixOptions& opts) {
  RhuidrProblem p = build_problem(V, E, cfg);
  const Stepsizes steps = compute_stepsizes(p.blocks);
  SolverState init = zero_state(p.blocks);
  if (opts.init_abundance) {
    require_shape(*opts.init_abundance, p.dims.m, p.dims.n(), "initial abundance");
    require_finite(*opts.init_abundance, "initial abundance");
    init.primal[p.A] = *opts.init_abundance;
  }

  StopCriteria stop;
  stop.max_iter = cfg.max_iter;
  stop.tol = cfg.tol;
  stop.diagnostics_stride = cfg.diagnostics_stride;

  const std::size_t a = p.A;
  auto stop_fn = [a](const std::vector<Mat>& prev, const std::vector<Mat>& next) {
    return relative_change(prev[a], next[a]);
  };
  auto hook = [&](int, const SolverState& st) {
    const Diagnostics d = diagnostics_record(st.primal[p.A], st.primal[p.S], st.primal[p.L], V, E, cfg);
    return std::vector<double>{d.objective, d.fidelity_distance, d.s_l1, d.stripe_mav};
  };

  SolveResult sr = solve(p.blocks, steps, std::move(init), stop, stop_fn, hook);

  UnmixResult out;
  out.A = std::move(sr.state.primal[p.A]);
  out.noise.sparse = std::move(sr.state.primal[p.S]);
  out.noise.stripe = std::move(sr.state.primal[p.L]);
  Mat recon = E.matrix() * out.A;
  out.reconstructed = HSCube(std::move(recon), V.dims());
  out.trace = std::move(sr.trace);
  out.steps = steps;
  return out;
}

}  // namespace rhuidr
