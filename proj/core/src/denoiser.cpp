#include "stride/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stride/fft.hpp"

namespace stride {

Array2D analytic_gaussian_eps(const Array2D& y_t, int t, const NoiseSchedule& sched,
                              const Array2D& prior_mean, double prior_var) {
  require_same_shape(y_t, prior_mean, "analytic_gaussian_eps");
  if (!(prior_var > 0.0)) throw std::invalid_argument("analytic_gaussian_eps: var must be > 0");
  const double ab = sched.alpha_bar(t);
  Array2D eps(y_t.rows(), y_t.cols());
  if (ab >= 1.0) return eps;
  const double v = std::max(prior_var, 1e-12);
  const double sa = std::sqrt(ab);
  const double den = ab * v + 1.0 - ab;
  const double inv = 1.0 / std::sqrt(1.0 - ab);
  for (std::size_t i = 0; i < y_t.size(); ++i) {
    const double y = y_t.data()[i];
    const double post = (sa * v * y + (1.0 - ab) * prior_mean.data()[i]) / den;
    eps.data()[i] = (y - sa * post) * inv;
  }
  return eps;
}

Array2D analytic_gaussian_score(const Array2D& y, const Array2D& mean, double var) {
  require_same_shape(y, mean, "analytic_gaussian_score");
  if (!(var > 0.0)) throw std::invalid_argument("analytic_gaussian_score: var must be > 0");
  Array2D out = mean;
  out -= y;
  out *= 1.0 / var;
  return out;
}

GaussianPrior fit_gaussian_prior(const std::vector<Array2D>& corpus) {
  if (corpus.empty()) throw std::invalid_argument("fit_gaussian_prior: empty corpus");
  GaussianPrior p;
  p.mean = Array2D(corpus[0].rows(), corpus[0].cols());
  for (const auto& x : corpus) {
    require_same_shape(p.mean, x, "fit_gaussian_prior");
    p.mean += x;
  }
  p.mean *= 1.0 / static_cast<double>(corpus.size());
  double ss = 0.0;
  for (const auto& x : corpus) ss += sum_squares(x - p.mean);
  p.var = std::max(ss / static_cast<double>(corpus.size() * p.mean.size()), 1e-12);
  return p;
}

SpectralGaussianPrior fit_spectral_prior(const std::vector<Array2D>& corpus, double floor) {
  const GaussianPrior g = fit_gaussian_prior(corpus);
  SpectralGaussianPrior p;
  p.mean = g.mean;
  const std::size_t R = p.mean.rows();
  const std::size_t C = p.mean.cols();
  p.spectrum = Array2D(R, C);
  const double n = static_cast<double>(R * C);
  for (const auto& x : corpus) {
    const auto s = fft::forward(x - p.mean);
    for (std::size_t r = 0; r < R; ++r) {
      for (std::size_t k = 0; k < s.half_cols(); ++k) {
        const double pw = std::norm(s.at(r, k)) / n;
        p.spectrum(r, k) += pw;
        // Fill the conjugate-symmetric half.
        const std::size_t rc = (R - r) % R;
        const std::size_t kc = (C - k) % C;
        if (kc >= s.half_cols()) p.spectrum(rc, kc) += pw;
      }
    }
  }
  p.spectrum *= 1.0 / static_cast<double>(corpus.size());
  for (double& v : p.spectrum.flat()) v = std::max(v, floor);
  return p;
}

Array2D spectral_posterior_mean(const Array2D& y_t, double alpha_bar,
                                const SpectralGaussianPrior& prior) {
  require_same_shape(y_t, prior.mean, "spectral_posterior_mean");
  const double sa = std::sqrt(alpha_bar);
  Array2D centred = y_t;
  axpy(-sa, prior.mean, centred);
  Array2D gain(y_t.rows(), y_t.cols());
  for (std::size_t i = 0; i < gain.size(); ++i) {
    const double S = prior.spectrum.data()[i];
    gain.data()[i] = sa * S / (alpha_bar * S + 1.0 - alpha_bar);
  }
  Array2D out = fft::apply_response(centred, gain);
  out += prior.mean;
  return out;
}

Array2D GaussianEpsModel::predict_eps(const Array2D& y_t, int t, const Array2D*) const {
  return analytic_gaussian_eps(y_t, t, sched_, prior_.mean, prior_.var);
}

Array2D SpectralEpsModel::predict_eps(const Array2D& y_t, int t, const Array2D*) const {
  const double ab = sched_.alpha_bar(t);
  if (ab >= 1.0) return Array2D(y_t.rows(), y_t.cols());
  Array2D eps = y_t;
  axpy(-std::sqrt(ab), spectral_posterior_mean(y_t, ab, prior_), eps);
  eps *= 1.0 / std::sqrt(1.0 - ab);
  return eps;
}

Array2D GaussianBandScore::score(const Array2D& y, double t) const {
  const double s = sched_.ve_sigma(t);
  return analytic_gaussian_score(y, mean_, var_ + s * s);
}

SpectralBandScore::SpectralBandScore(const SpectralGaussianPrior& prior, WaveletFilter filter,
                                     int band, NoiseSchedule sched)
    : mean_(swt_decompose(prior.mean, filter).band(band)),
      band_spectrum_(band_power_response(filter, band, prior.mean.rows(), prior.mean.cols())),
      sched_(std::move(sched)) {
  for (std::size_t i = 0; i < band_spectrum_.size(); ++i) {
    band_spectrum_.data()[i] *= prior.spectrum.data()[i];
  }
}

Array2D SpectralBandScore::score(const Array2D& y, double t) const {
  require_same_shape(y, mean_, "SpectralBandScore");
  const double s2 = std::pow(sched_.ve_sigma(t), 2);
  Array2D resp(y.rows(), y.cols());
  for (std::size_t i = 0; i < resp.size(); ++i) {
    resp.data()[i] = -1.0 / (band_spectrum_.data()[i] + s2);
  }
  return fft::apply_response(y - mean_, resp);
}

std::vector<double> band_variances(const std::vector<Array2D>& corpus, WaveletFilter filter) {
  const GaussianPrior g = fit_gaussian_prior(corpus);
  const auto mb = swt_decompose(g.mean, filter);
  std::vector<double> v(4, 0.0);
  for (const auto& x : corpus) {
    const auto b = swt_decompose(x, filter);
    for (int w = 0; w < 4; ++w) v[static_cast<std::size_t>(w)] += sum_squares(b.band(w) - mb.band(w));
  }
  for (double& x : v) {
    x = std::max(x / static_cast<double>(corpus.size() * g.mean.size()), 1e-12);
  }
  return v;
}

}  // namespace stride
