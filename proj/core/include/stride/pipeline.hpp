#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "stride/corrector.hpp"
#include "stride/denoiser.hpp"
#include "stride/diffusion.hpp"
#include "stride/fbp.hpp"
#include "stride/geometry.hpp"
#include "stride/wavelet.hpp"

namespace stride {

struct PipelineConfig {
  // Variance-preserving schedule for the coarse stage and VE levels for the corrector.
  int T = 1000;
  double beta_start = 1e-4;
  double beta_end = 2e-2;
  double ve_sigma_min = 3e-3;
  double ve_sigma_max = 5e-2;

  GuidanceConfig guidance;
  int ddim_steps = 100;
  double ddim_eta = 0.0;     // 0 is deterministic DDIM, 1 the ancestral sampler
  double cfg_omega = 0.0;    // classifier-free guidance weight for conditional models
  bool align = true;
  bool align_every_step = false;

  bool correct = true;
  CorrectorConfig corrector;
  WaveletFilter wavelet = WaveletFilter::haar;

  FilterSpec filter;
  FbpOptions fbp;
  std::uint64_t seed = 0;

  NoiseSchedule schedule() const;
  void validate() const;
};

/// Non-owning view of the models a reconstruction needs. Sinograms are divided by
/// data_scale before they reach the models.
struct ModelSet {
  const NoisePredictor* eps = nullptr;
  std::array<const ScoreModel*, 4> band_scores{};
  double data_scale = 1.0;
};

/// Guided DDIM from pure noise: predict eps (CFG-combined for conditional models), estimate
/// y0, pull observed rows toward y_s with the configured weight, and step. `reference`
/// (the clean sinogram) is only read by the optimal guidance modes.
Array2D coarse_generate(const Array2D& y_s, const SparseMask& m, const NoisePredictor& model,
                        const NoiseSchedule& sched, const PipelineConfig& cfg,
                        const Array2D* reference = nullptr);

/// Sinogram stages report MSE on the observed rows and overall; the final "image" row has
/// no observed rows, so its mse_masked is NaN.
struct StageReport {
  std::string stage;
  double mse_masked = 0.0;
  double mse_full = 0.0;
  double psnr = 0.0;
  double ssim = 0.0;
};

struct Reference {
  const Sinogram* sinogram = nullptr;  // full-view clean sinogram
  const ImageGrid* image = nullptr;    // ground-truth image, values in [0, 1]
};

struct StrideResult {
  ImageGrid image;
  Sinogram sinogram;
  std::vector<StageReport> report;
  AlignmentParams alignment;
};

/// coarse_generate -> linear alignment -> SWT -> refine_bands -> ISWT -> final
/// consistency on the observed rows -> FBP.
StrideResult stride_reconstruct(const Sinogram& y_s, const SparseMask& m, const ModelSet& models,
                                const PipelineConfig& cfg, const ImageShape& shape,
                                const Reference& ref = {});

/// FBP from the observed rows alone, over the sub-sampled geometry.
ImageGrid sparse_fbp(const Sinogram& y_s, const SparseMask& m, const PipelineConfig& cfg,
                     const ImageShape& shape);

void write_report_csv(std::ostream& os, const std::vector<StageReport>& report);

struct AblationSetting {
  std::string name;
  GuidanceMode guidance = GuidanceMode::temporal;
  double lambda = 0.0;   // fixed mode only
  bool guided = true;    // false sets nu = 0 / lambda = 0
  bool align = true;
  bool low = true;
  bool high = true;
};

struct AblationRow {
  AblationSetting setting;
  double psnr = 0.0;
  double ssim = 0.0;
  double mse = 0.0;       // image MSE
  double sino_mse = 0.0;  // full-sinogram MSE
  double kl = 0.0;        // sinogram histogram KL to the reference
};

/// Guidance always on; alignment, low-band and high-band correction toggled (8 rows,
/// full configuration last).
std::vector<AblationSetting> component_settings();
/// Fixed lambda 0, 0.1, ..., 1.0 followed by the temporal schedule (12 rows).
std::vector<AblationSetting> lambda_sweep_settings();

PipelineConfig configure(const PipelineConfig& base, const AblationSetting& s);

std::vector<AblationRow> ablate(const std::vector<AblationSetting>& settings, const Sinogram& y_s,
                                const SparseMask& m, const ModelSet& models,
                                const PipelineConfig& base, const ImageShape& shape,
                                const Reference& ref);

void write_ablation_csv(std::ostream& os, const std::vector<AblationRow>& rows);

}  // namespace stride
