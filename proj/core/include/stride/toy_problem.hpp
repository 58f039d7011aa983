#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "stride/denoiser.hpp"
#include "stride/geometry.hpp"
#include "stride/pipeline.hpp"

namespace stride {

/// Desk-scale sparse-view problem: a held-out random Shepp-Logan variant scanned on the
/// scaled fan-beam geometry, plus a training corpus of other variants.
struct ToyProblemSpec {
  std::size_t image_n = 64;
  std::size_t n_views = 180;
  std::size_t n_detectors = 128;
  std::size_t r = 3;
  std::size_t corpus_size = 48;
  std::uint64_t corpus_seed = 1;
  std::uint64_t test_seed = 999;
  double noise_sigma = 0.0;
  std::uint64_t noise_seed = 7;
};

struct ToyProblem {
  ToyProblemSpec spec;
  FanBeamGeometry geometry;
  ImageShape shape;
  ImageGrid phantom;
  Sinogram full;      // clean, all views
  SparseMask mask;
  Sinogram observed;  // noisy, zero-filled on inactive views
  std::vector<Array2D> corpus;  // full sinograms of the training phantoms, divided by data_scale
  double data_scale = 1.0;      // largest value over the corpus sinograms
};

/// Phantom i of the corpus drawn from stream i of `seed`.
ImageGrid corpus_phantom(const ImageShape& shape, std::uint64_t seed, std::uint64_t index);

ToyProblem make_toy_problem(const ToyProblemSpec& spec = {});

/// Owning analytic model bundle built from a spectral prior of the normalised corpus.
struct AnalyticModels {
  SpectralGaussianPrior prior;
  std::unique_ptr<NoisePredictor> eps;
  std::array<std::unique_ptr<ScoreModel>, 4> bands;
  double data_scale = 1.0;

  ModelSet view() const;
};

AnalyticModels make_analytic_models(SpectralGaussianPrior prior, double data_scale,
                                    const NoiseSchedule& sched, WaveletFilter filter);
AnalyticModels make_analytic_models(const ToyProblem& p, const PipelineConfig& cfg);

}  // namespace stride
