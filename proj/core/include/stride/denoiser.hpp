#pragma once

#include <vector>

#include "stride/array2d.hpp"
#include "stride/diffusion.hpp"
#include "stride/wavelet.hpp"

namespace stride {

/// Predicts the noise in a variance-preserving sample at discrete step t.
class NoisePredictor {
 public:
  virtual ~NoisePredictor() = default;
  /// `condition` is the masked observation M o y0, or null for an unconditional call.
  virtual Array2D predict_eps(const Array2D& y_t, int t, const Array2D* condition) const = 0;
  virtual bool conditional() const noexcept { return false; }
};

/// Approximates grad log p_t at continuous variance-exploding time t in [0, 1].
class ScoreModel {
 public:
  virtual ~ScoreModel() = default;
  virtual Array2D score(const Array2D& y, double t) const = 0;
};

/// eps_hat for y0 ~ N(mean, var I): E[y0 | y_t] = (sqrt(ab) var y_t + (1 - ab) mean) /
/// (ab var + 1 - ab), eps_hat = (y_t - sqrt(ab) E) / sqrt(1 - ab). var is floored at 1e-12
/// and eps_hat is 0 when ab == 1.
Array2D analytic_gaussian_eps(const Array2D& y_t, int t, const NoiseSchedule& sched,
                              const Array2D& prior_mean, double prior_var);

/// -(y - mean) / var.
Array2D analytic_gaussian_score(const Array2D& y, const Array2D& mean, double var);

/// Independent per-entry Gaussian prior.
struct GaussianPrior {
  Array2D mean;
  double var = 1.0;
};

/// Stationary Gaussian prior: covariance is circulant with eigenvalues `spectrum`
/// (one per 2-D DFT bin, full grid) around a non-stationary mean.
struct SpectralGaussianPrior {
  Array2D mean;
  Array2D spectrum;
};

GaussianPrior fit_gaussian_prior(const std::vector<Array2D>& corpus);
/// Mean of the corpus, and the average periodogram |F(x - mean)|^2 / N of its residuals
/// floored at `floor`.
SpectralGaussianPrior fit_spectral_prior(const std::vector<Array2D>& corpus, double floor = 1e-10);

/// Posterior mean E[y0 | y_t] under the spectral prior.
Array2D spectral_posterior_mean(const Array2D& y_t, double alpha_bar,
                                const SpectralGaussianPrior& prior);

class GaussianEpsModel final : public NoisePredictor {
 public:
  GaussianEpsModel(GaussianPrior prior, NoiseSchedule sched)
      : prior_(std::move(prior)), sched_(std::move(sched)) {}
  Array2D predict_eps(const Array2D& y_t, int t, const Array2D* condition) const override;

 private:
  GaussianPrior prior_;
  NoiseSchedule sched_;
};

class SpectralEpsModel final : public NoisePredictor {
 public:
  SpectralEpsModel(SpectralGaussianPrior prior, NoiseSchedule sched)
      : prior_(std::move(prior)), sched_(std::move(sched)) {}
  Array2D predict_eps(const Array2D& y_t, int t, const Array2D* condition) const override;
  const SpectralGaussianPrior& prior() const noexcept { return prior_; }

 private:
  SpectralGaussianPrior prior_;
  NoiseSchedule sched_;
};

/// Score of one wavelet band of an iid Gaussian prior, perturbed by sigma(t) noise:
/// -(y - mean) / (var + sigma(t)^2).
class GaussianBandScore final : public ScoreModel {
 public:
  GaussianBandScore(Array2D mean, double var, NoiseSchedule sched)
      : mean_(std::move(mean)), var_(var), sched_(std::move(sched)) {}
  Array2D score(const Array2D& y, double t) const override;

 private:
  Array2D mean_;
  double var_;
  NoiseSchedule sched_;
};

/// Score of one wavelet band of a spectral prior, perturbed by sigma(t) noise:
/// -F^-1[F(y - m) / (|H|^2 S + sigma(t)^2)].
class SpectralBandScore final : public ScoreModel {
 public:
  SpectralBandScore(const SpectralGaussianPrior& prior, WaveletFilter filter, int band,
                    NoiseSchedule sched);
  Array2D score(const Array2D& y, double t) const override;

 private:
  Array2D mean_;
  Array2D band_spectrum_;
  NoiseSchedule sched_;
};

/// Per-band variance of an iid prior after analysis with `filter`.
std::vector<double> band_variances(const std::vector<Array2D>& corpus, WaveletFilter filter);

}  // namespace stride
