#include "stride/toy_problem.hpp"

#include <algorithm>

#include "stride/evalkit.hpp"
#include "stride/projector.hpp"
#include "stride/rng.hpp"

namespace stride {

ImageGrid corpus_phantom(const ImageShape& shape, std::uint64_t seed, std::uint64_t index) {
  Rng rng(seed, index);
  return rasterize_ellipses(random_shepp_logan_table(rng), shape);
}

ToyProblem make_toy_problem(const ToyProblemSpec& spec) {
  ToyProblem p;
  p.spec = spec;
  p.geometry = desk_geometry(spec.n_views, spec.n_detectors);
  p.shape = desk_image_shape(spec.image_n);
  p.phantom = corpus_phantom(p.shape, spec.test_seed, 0);
  p.full = forward_project(p.phantom, p.geometry);
  p.mask = make_sparse_mask(spec.n_views, spec.r);
  NoiseSpec noise{spec.noise_sigma > 0.0 ? NoiseKind::gaussian : NoiseKind::none, spec.noise_sigma,
                  spec.noise_seed};
  p.observed = simulate_measurement(p.phantom, p.geometry, noise, p.mask);
  p.corpus.reserve(spec.corpus_size);
  double peak = 0.0;
  for (std::size_t i = 0; i < spec.corpus_size; ++i) {
    const Sinogram s = forward_project(corpus_phantom(p.shape, spec.corpus_seed, i), p.geometry);
    peak = std::max(peak, max_abs(s.values));
    p.corpus.push_back(s.values);
  }
  p.data_scale = peak > 0.0 ? peak : 1.0;
  for (auto& c : p.corpus) c *= 1.0 / p.data_scale;
  return p;
}

ModelSet AnalyticModels::view() const {
  ModelSet m;
  m.eps = eps.get();
  for (std::size_t w = 0; w < 4; ++w) m.band_scores[w] = bands[w].get();
  m.data_scale = data_scale;
  return m;
}

AnalyticModels make_analytic_models(SpectralGaussianPrior prior, double data_scale,
                                    const NoiseSchedule& sched, WaveletFilter filter) {
  AnalyticModels m;
  m.prior = std::move(prior);
  m.data_scale = data_scale;
  m.eps = std::make_unique<SpectralEpsModel>(m.prior, sched);
  for (int w = 0; w < 4; ++w) {
    m.bands[static_cast<std::size_t>(w)] = std::make_unique<SpectralBandScore>(m.prior, filter, w, sched);
  }
  return m;
}

AnalyticModels make_analytic_models(const ToyProblem& p, const PipelineConfig& cfg) {
  return make_analytic_models(fit_spectral_prior(p.corpus), p.data_scale, cfg.schedule(), cfg.wavelet);
}

}  // namespace stride
