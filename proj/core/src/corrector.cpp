#include "stride/corrector.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "stride/parallel.hpp"

namespace stride {

AlignmentParams fit_linear_alignment(const Array2D& y_gen, const Array2D& y_s, const SparseMask& m) {
  require_same_shape(y_gen, y_s, "fit_linear_alignment");
  if (y_gen.rows() != m.n_views()) throw ShapeError("fit_linear_alignment: mask mismatch");
  double n = 0.0, sx = 0.0, sy = 0.0;
  for (std::size_t r = 0; r < y_gen.rows(); ++r) {
    if (!m.active[r]) continue;
    for (std::size_t c = 0; c < y_gen.cols(); ++c) {
      sx += y_gen(r, c);
      sy += y_s(r, c);
      n += 1.0;
    }
  }
  if (n == 0.0) throw std::invalid_argument("fit_linear_alignment: no active rows");
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t r = 0; r < y_gen.rows(); ++r) {
    if (!m.active[r]) continue;
    for (std::size_t c = 0; c < y_gen.cols(); ++c) {
      const double dx = y_gen(r, c) - mx;
      sxx += dx * dx;
      sxy += dx * (y_s(r, c) - my);
    }
  }
  AlignmentParams p;
  if (sxx <= 1e-300 || sxx <= 1e-24 * n * (mx * mx + 1.0)) {
    p.a = 1.0;
    p.b = my - mx;
    p.degenerate = true;
    return p;
  }
  p.a = sxy / sxx;
  p.b = my - p.a * mx;
  return p;
}

Array2D apply_linear_alignment(const Array2D& y, const AlignmentParams& p) {
  Array2D out = y;
  for (double& v : out.flat()) v = p.a * v + p.b;
  return out;
}

Array2D langevin_step(const Array2D& band, const ScoreModel& model, double t, double eps_t,
                      Rng* rng) {
  if (!(eps_t > 0.0)) throw std::invalid_argument("langevin_step: eps_t must be > 0");
  const Array2D s = model.score(band, t);
  require_same_shape(band, s, "langevin_step");
  if (!s.all_finite()) {
    throw NumericalError("langevin_step: non-finite score at t = " + std::to_string(t));
  }
  Array2D out = band;
  axpy(eps_t, s, out);
  if (rng != nullptr) {
    const double k = std::sqrt(2.0 * eps_t);
    for (double& v : out.flat()) v += k * rng->normal();
  }
  return out;
}

Array2D data_consistency(const Array2D& band, const Array2D& observed, const SparseMask& m) {
  require_same_shape(band, observed, "data_consistency");
  if (band.rows() != m.n_views()) throw ShapeError("data_consistency: mask mismatch");
  Array2D out = band;
  for (std::size_t r = 0; r < band.rows(); ++r) {
    if (!m.active[r]) continue;
    auto src = observed.row(r);
    std::copy(src.begin(), src.end(), out.row(r).begin());
  }
  return out;
}

SparseMask shrink_mask(const SparseMask& m, WaveletFilter f) {
  const std::size_t n = m.n_views();
  const std::size_t len = wavelet_filters(f).lo.size();
  SparseMask out = m;
  for (std::size_t i = 0; i < n; ++i) {
    bool ok = true;
    for (std::size_t k = 0; k < len && ok; ++k) ok = m.active[(i + n * len - k) % n];
    out.active[i] = ok;
  }
  return out;
}

void CorrectorConfig::validate() const {
  if (n_steps < 0) throw std::invalid_argument("corrector: n_steps must be >= 0");
  if (!eps_t.empty() && eps_t.size() != static_cast<std::size_t>(n_steps)) {
    throw std::invalid_argument("corrector: eps_t length must equal n_steps");
  }
  for (double e : eps_t) {
    if (!(e > 0.0)) throw std::invalid_argument("corrector: all eps_t must be > 0");
  }
  if (!(eps_min > 0.0)) throw std::invalid_argument("corrector: eps_min must be > 0");
  if (!(lambda_L > 0.0 && lambda_H > 0.0)) {
    throw std::invalid_argument("corrector: band step scales must be > 0");
  }
}

std::vector<double> corrector_step_sizes(const CorrectorConfig& cfg, const NoiseSchedule& ve) {
  cfg.validate();
  if (!cfg.eps_t.empty()) return cfg.eps_t;
  const double emax = 1e-2 * ve.ve_sigma_max() * ve.ve_sigma_max();
  std::vector<double> out(static_cast<std::size_t>(cfg.n_steps));
  for (int i = 0; i < cfg.n_steps; ++i) {
    const double f = cfg.n_steps > 1 ? static_cast<double>(i) / (cfg.n_steps - 1) : 1.0;
    out[static_cast<std::size_t>(i)] = emax * std::pow(cfg.eps_min / emax, f);
  }
  return out;
}

WaveletBands enforce_consistency(const WaveletBands& bands, const WaveletBands& observed,
                                 const SparseMask& m, ConsistencyMode mode) {
  if (mode == ConsistencyMode::row_replace) {
    const SparseMask trusted = shrink_mask(m, bands.filter);
    WaveletBands out = bands;
    for (int w = 0; w < 4; ++w) out.band(w) = data_consistency(bands.band(w), observed.band(w), trusted);
    return out;
  }
  const Array2D y_obs = iswt_reconstruct(observed);
  const Array2D y = data_consistency(iswt_reconstruct(bands), y_obs, m);
  return swt_decompose(y, bands.filter, bands.level);
}

WaveletBands refine_bands(const WaveletBands& bands, const WaveletBands& observed,
                          const std::array<const ScoreModel*, 4>& models,
                          const CorrectorConfig& cfg, const SparseMask& m,
                          const NoiseSchedule& ve) {
  const auto eps = corrector_step_sizes(cfg, ve);
  for (int w = 0; w < 4; ++w) {
    require_same_shape(bands.band(w), observed.band(w), "refine_bands");
    if (cfg.update_band[static_cast<std::size_t>(w)] && models[static_cast<std::size_t>(w)] == nullptr) {
      throw std::invalid_argument("refine_bands: missing score model for an active band");
    }
  }
  if (bands.filter != observed.filter) throw std::invalid_argument("refine_bands: filter mismatch");
  WaveletBands cur = bands;
  if (cfg.n_steps == 0) return cur;
  std::array<Rng, 4> rngs{Rng(cfg.seed, 1), Rng(cfg.seed, 2), Rng(cfg.seed, 3), Rng(cfg.seed, 4)};
  const int n = cfg.n_steps;
  for (int i = 0; i < n; ++i) {
    const double t = n > 1 ? 1.0 - static_cast<double>(i) / (n - 1) : 0.0;
    parallel_for(4, [&](std::size_t w) {
      if (!cfg.update_band[w]) return;
      const double scale = w == 0 ? cfg.lambda_L : cfg.lambda_H;
      auto& b = cur.band(static_cast<int>(w));
      b = langevin_step(b, *models[w], t, scale * eps[static_cast<std::size_t>(i)], &rngs[w]);
    });
    cur = enforce_consistency(cur, observed, m, cfg.consistency);
  }
  if (cfg.final_denoise) {
    const double s2 = ve.ve_sigma_min() * ve.ve_sigma_min();
    parallel_for(4, [&](std::size_t w) {
      if (!cfg.update_band[w]) return;
      auto& b = cur.band(static_cast<int>(w));
      b = langevin_step(b, *models[w], 0.0, s2, nullptr);
    });
    cur = enforce_consistency(cur, observed, m, cfg.consistency);
  }
  return cur;
}

}  // namespace stride
