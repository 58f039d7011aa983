#pragma once

#include <array>
#include <memory>
#include <string>

#include "stride/pipeline.hpp"
#include "stride/tinynet.hpp"

namespace stride::cli {

enum class ModelKind { analytic = 0, tinynet = 1 };

/// Everything a reconstruction needs from training: the schedule it was fitted under,
/// the sinogram shape, the normalisation scale and the models themselves.
struct ModelBundle {
  ModelKind kind = ModelKind::analytic;
  std::size_t rows = 0;  // n_views
  std::size_t cols = 0;  // n_detectors
  double data_scale = 1.0;
  int T = 1000;
  double beta_start = 1e-4;
  double beta_end = 2e-2;
  double ve_sigma_min = 3e-3;
  double ve_sigma_max = 5e-2;
  WaveletFilter wavelet = WaveletFilter::haar;

  SpectralGaussianPrior prior;          // analytic
  TinyNet eps_net;                      // tinynet
  std::array<TinyNet, 4> score_nets{};  // tinynet

  NoiseSchedule schedule() const;
  /// Copies the schedule fields into `cfg`.
  void apply_schedule(PipelineConfig& cfg) const;
};

/// Instantiated models kept alive for the lifetime of a ModelSet view.
struct LoadedModels {
  std::unique_ptr<NoisePredictor> eps;
  std::array<std::unique_ptr<ScoreModel>, 4> bands;
  double data_scale = 1.0;

  ModelSet view() const;
};

LoadedModels instantiate(const ModelBundle& b);

/// STRDNET1 tensor file: a header tensor, then the prior or the five nets.
void save_model(const std::string& path, const ModelBundle& b);
ModelBundle load_model(const std::string& path);

}  // namespace stride::cli
