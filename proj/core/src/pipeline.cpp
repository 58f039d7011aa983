#include "stride/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "stride/evalkit.hpp"

namespace stride {

namespace {

Array2D clip01(const Array2D& a) {
  Array2D out = a;
  for (double& v : out.flat()) v = std::clamp(v, 0.0, 1.0);
  return out;
}

double masked_mse(const Array2D& a, const Array2D& b, const SparseMask& m) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < a.rows(); ++r) {
    if (!m.active[r]) continue;
    for (std::size_t c = 0; c < a.cols(); ++c) {
      const double d = a(r, c) - b(r, c);
      s += d * d;
      ++n;
    }
  }
  return n ? s / static_cast<double>(n) : 0.0;
}

StageReport sinogram_stage(const std::string& name, const Array2D& y, const Array2D& ref,
                           const SparseMask& m) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : ref.flat()) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double range = hi > lo ? hi - lo : 1.0;
  return {name, masked_mse(y, ref, m), mse(y, ref), psnr(y, ref, range), ssim(y, ref, range)};
}

void check_finite(const Array2D& a, const std::string& stage) {
  if (!a.all_finite()) throw NumericalError(stage + ": non-finite values");
}

}  // namespace

NoiseSchedule PipelineConfig::schedule() const {
  return NoiseSchedule::linear(T, beta_start, beta_end, ve_sigma_min, ve_sigma_max);
}

void PipelineConfig::validate() const {
  (void)schedule();
  guidance.validate();
  if (guidance.T != T) throw std::invalid_argument("pipeline: guidance T must match schedule T");
  if (ddim_steps < 1 || ddim_steps > T) throw std::invalid_argument("pipeline: ddim_steps in [1, T]");
  if (!(ddim_eta >= 0.0 && ddim_eta <= 1.0)) throw std::invalid_argument("pipeline: eta in [0, 1]");
  if (!std::isfinite(cfg_omega)) throw std::invalid_argument("pipeline: non-finite CFG weight");
  corrector.validate();
  filter.validate();
}

Array2D coarse_generate(const Array2D& y_s, const SparseMask& m, const NoisePredictor& model,
                        const NoiseSchedule& sched, const PipelineConfig& cfg,
                        const Array2D* reference) {
  cfg.validate();
  if (y_s.rows() != m.n_views()) throw ShapeError("coarse_generate: mask does not match y_s");
  const bool optimal = cfg.guidance.mode == GuidanceMode::optimal_closed_form ||
                       cfg.guidance.mode == GuidanceMode::optimal_oracle;
  if (optimal) {
    if (reference == nullptr) throw std::invalid_argument("coarse_generate: optimal guidance needs a reference");
    require_same_shape(y_s, *reference, "coarse_generate reference");
  }
  Rng rng(cfg.seed, 100);
  Array2D y = rng.normal_like(y_s.rows(), y_s.cols());
  const Array2D cond = apply_mask(y_s, m);
  const auto ts = ddim_timesteps(sched.T(), cfg.ddim_steps);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const int t = ts[i];
    const int tp = ts[i + 1];
    Array2D eps = model.predict_eps(y, t, model.conditional() ? &cond : nullptr);
    if (model.conditional() && cfg.cfg_omega != 0.0) {
      eps = cfg_combine(eps, model.predict_eps(y, t, nullptr), cfg.cfg_omega);
    }
    require_same_shape(y, eps, "coarse_generate eps");
    Array2D y0 = predict_x0(y, eps, t, sched);
    if (cfg.align_every_step) y0 = apply_linear_alignment(y0, fit_linear_alignment(y0, y_s, m));
    double lambda = 0.0;
    if (optimal) {
      const Array2D zeta = apply_mask(y0 - *reference, m);
      const Array2D xi = apply_mask(y_s - *reference, m);
      const auto in = make_lambda_inputs(zeta, xi);
      lambda = cfg.guidance.mode == GuidanceMode::optimal_closed_form
                   ? optimal_lambda(in)
                   : optimal_lambda_oracle(in, cfg.guidance.oracle_step);
    } else {
      lambda = guidance_weight(t, cfg.guidance);
    }
    const auto guided = apply_sparse_guidance(y0, y_s, m, lambda);
    const double sigma = cfg.ddim_eta > 0.0 ? ancestral_sigma(t, tp, sched, cfg.ddim_eta) : 0.0;
    y = ddim_step(y, guided.value, eps, t, tp, sigma, sched, &rng);
    if (!y.all_finite()) {
      throw NumericalError("coarse_generate: non-finite state at step t = " + std::to_string(t));
    }
  }
  return y;
}

StrideResult stride_reconstruct(const Sinogram& y_s, const SparseMask& m, const ModelSet& models,
                                const PipelineConfig& cfg, const ImageShape& shape,
                                const Reference& ref) {
  cfg.validate();
  y_s.validate();
  if (models.eps == nullptr) throw std::invalid_argument("stride: no noise predictor");
  if (!(models.data_scale > 0.0)) throw std::invalid_argument("stride: data_scale must be > 0");
  if (m.n_views() != y_s.n_views()) throw ShapeError("stride: mask does not match sinogram");
  if (ref.sinogram) require_same_shape(ref.sinogram->values, y_s.values, "stride reference");
  const auto& g = y_s.geometry;
  const double scale = models.data_scale;
  const NoiseSchedule sched = cfg.schedule();

  const Array2D observed = apply_mask(y_s.values, m);
  Array2D ys_n = observed;
  ys_n *= 1.0 / scale;
  Array2D ref_n;
  if (ref.sinogram) {
    ref_n = ref.sinogram->values;
    ref_n *= 1.0 / scale;
  }

  StrideResult res;
  auto record = [&](const std::string& stage, const Array2D& y_norm) {
    if (!ref.sinogram) return;
    res.report.push_back(sinogram_stage(stage, scale * y_norm, ref.sinogram->values, m));
  };

  Array2D y = coarse_generate(ys_n, m, *models.eps, sched, cfg, ref.sinogram ? &ref_n : nullptr);
  check_finite(y, "coarse");
  record("coarse", y);

  if (cfg.align) {
    res.alignment = fit_linear_alignment(y, ys_n, m);
    y = apply_linear_alignment(y, res.alignment);
    check_finite(y, "aligned");
    record("aligned", y);
  }

  const bool any_band = std::any_of(cfg.corrector.update_band.begin(),
                                    cfg.corrector.update_band.end(), [](bool b) { return b; });
  if (cfg.correct && any_band && cfg.corrector.n_steps > 0) {
    const WaveletBands bands = swt_decompose(y, cfg.wavelet);
    const WaveletBands obs = swt_decompose(ys_n, cfg.wavelet);
    const WaveletBands refined = refine_bands(bands, obs, models.band_scores, cfg.corrector, m, sched);
    y = iswt_reconstruct(refined);
    check_finite(y, "corrected");
    record("corrected", y);
  }

  y *= scale;
  y = data_consistency(y, observed, m);
  res.sinogram = Sinogram(g, y);
  if (ref.sinogram) res.report.push_back(sinogram_stage("final", y, ref.sinogram->values, m));

  res.image = fbp_reconstruct(res.sinogram, g, cfg.filter, shape, cfg.fbp);
  check_finite(res.image.values, "fbp");
  if (ref.image) {
    const Array2D img = clip01(res.image.values);
    const double nan = std::numeric_limits<double>::quiet_NaN();
    res.report.push_back({"image", nan, mse(img, ref.image->values), psnr(img, ref.image->values, 1.0),
                          ssim(img, ref.image->values, 1.0)});
  }
  return res;
}

ImageGrid sparse_fbp(const Sinogram& y_s, const SparseMask& m, const PipelineConfig& cfg,
                     const ImageShape& shape) {
  const Sinogram sub = extract_active_views(y_s, m);
  return fbp_reconstruct(sub, sub.geometry, cfg.filter, shape, cfg.fbp);
}

void write_report_csv(std::ostream& os, const std::vector<StageReport>& report) {
  os << "stage,mse_masked,mse_full,psnr,ssim\n";
  os << std::setprecision(10);
  for (const auto& r : report) {
    os << r.stage << ',' << r.mse_masked << ',' << r.mse_full << ',' << r.psnr << ',' << r.ssim << '\n';
  }
}

std::vector<AblationSetting> component_settings() {
  std::vector<AblationSetting> out;
  const bool table[8][3] = {{false, false, false}, {true, false, false}, {false, true, false},
                            {false, false, true},  {false, true, true},  {true, true, false},
                            {true, false, true},   {true, true, true}};
  for (const auto& row : table) {
    AblationSetting s;
    s.align = row[0];
    s.low = row[1];
    s.high = row[2];
    s.name = std::string("guided") + (s.align ? "+align" : "") + (s.low ? "+low" : "") +
             (s.high ? "+high" : "");
    out.push_back(s);
  }
  return out;
}

std::vector<AblationSetting> lambda_sweep_settings() {
  std::vector<AblationSetting> out;
  for (int k = 0; k <= 10; ++k) {
    AblationSetting s;
    s.guidance = GuidanceMode::fixed;
    s.lambda = k / 10.0;
    std::ostringstream name;
    name << "fixed_" << std::fixed << std::setprecision(1) << s.lambda;
    s.name = name.str();
    out.push_back(s);
  }
  AblationSetting t;
  t.name = "temporal";
  out.push_back(t);
  return out;
}

PipelineConfig configure(const PipelineConfig& base, const AblationSetting& s) {
  PipelineConfig cfg = base;
  cfg.guidance.mode = s.guidance;
  if (s.guidance == GuidanceMode::fixed) cfg.guidance.fixed_lambda = s.lambda;
  if (!s.guided) {
    cfg.guidance.mode = GuidanceMode::fixed;
    cfg.guidance.fixed_lambda = 0.0;
  }
  cfg.align = s.align;
  cfg.corrector.update_band = {s.low, s.high, s.high, s.high};
  return cfg;
}

std::vector<AblationRow> ablate(const std::vector<AblationSetting>& settings, const Sinogram& y_s,
                                const SparseMask& m, const ModelSet& models,
                                const PipelineConfig& base, const ImageShape& shape,
                                const Reference& ref) {
  if (!ref.sinogram || !ref.image) throw std::invalid_argument("ablate: needs reference sinogram and image");
  std::vector<AblationRow> rows;
  for (const auto& s : settings) {
    const auto res = stride_reconstruct(y_s, m, models, configure(base, s), shape, ref);
    const Array2D img = clip01(res.image.values);
    AblationRow row;
    row.setting = s;
    row.psnr = psnr(img, ref.image->values, 1.0);
    row.ssim = ssim(img, ref.image->values, 1.0);
    row.mse = mse(img, ref.image->values);
    row.sino_mse = mse(res.sinogram.values, ref.sinogram->values);
    row.kl = kl_divergence(res.sinogram.values, ref.sinogram->values, 64);
    rows.push_back(row);
  }
  return rows;
}

void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows) {
  os << "setting,guidance,lambda,align,low,high,psnr,ssim,mse,sino_mse,kl\n";
  os << std::setprecision(10);
  for (const auto& r : rows) {
    const auto& s = r.setting;
    const char* mode = !s.guided ? "off"
                       : s.guidance == GuidanceMode::temporal ? "temporal"
                       : s.guidance == GuidanceMode::fixed ? "fixed"
                                                            : "optimal";
    os << s.name << ',' << mode << ',' << s.lambda << ',' << s.align << ',' << s.low << ','
       << s.high << ',' << r.psnr << ',' << r.ssim << ',' << r.mse << ',' << r.sino_mse << ','
       << r.kl << '\n';
  }
}

}  // namespace stride
