#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "stride/denoiser.hpp"
#include "stride/diffusion.hpp"
#include "stride/geometry.hpp"
#include "stride/rng.hpp"
#include "stride/wavelet.hpp"

namespace stride {

struct AlignmentParams {
  double a = 1.0;
  double b = 0.0;
  /// Set when the masked generated values were constant and only the shift was fitted.
  bool degenerate = false;
};

/// Least squares over active rows: argmin_{a,b} sum (a y_gen + b - y_s)^2.
AlignmentParams fit_linear_alignment(const Array2D& y_gen, const Array2D& y_s, const SparseMask& m);
/// a y + b elementwise.
Array2D apply_linear_alignment(const Array2D& y, const AlignmentParams& p);

/// band + eps_t s(band, t) + sqrt(2 eps_t) z. A null rng means z = 0.
/// Throws NumericalError if the score is not finite.
Array2D langevin_step(const Array2D& band, const ScoreModel& model, double t, double eps_t,
                      Rng* rng);

/// Replaces the rows active in `m` with the rows of `observed`.
Array2D data_consistency(const Array2D& band, const Array2D& observed, const SparseMask& m);

/// Rows whose band value depends only on active sinogram rows: row i survives when rows
/// i, i-1, ..., i-(filter length - 1) (periodic) are all active.
SparseMask shrink_mask(const SparseMask& m, WaveletFilter f);

/// row_replace: per-band replacement of the shrunken-mask rows by the observed bands.
/// transported: synthesise the bands, replace active sinogram rows by the observation
/// (recovered as iswt(observed)), and analyse again.
enum class ConsistencyMode { row_replace, transported };

struct CorrectorConfig {
  int n_steps = 600;
  /// Explicit step sizes; when empty a geometric ramp from 1e-2 sigma_max^2 to eps_min is used.
  std::vector<double> eps_t;
  double eps_min = 1e-5;
  double lambda_L = 0.1;  // step-size scale of the low-band chain
  double lambda_H = 1.0;  // step-size scale of the high-band chains
  std::array<bool, 4> update_band{true, true, true, true};
  ConsistencyMode consistency = ConsistencyMode::transported;
  /// Finish each chain with a noise-free step b + sigma_min^2 s(b, 0).
  bool final_denoise = true;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Step sizes for each iteration under `cfg` and `ve`.
std::vector<double> corrector_step_sizes(const CorrectorConfig& cfg, const NoiseSchedule& ve);

/// n_steps rounds of per-band Langevin updates (VE time running from 1 to 0), each followed
/// by data consistency. models[b] scores band b. Each band uses its own RNG stream
/// (seed, b + 1), so the result does not depend on the worker count.
WaveletBands refine_bands(const WaveletBands& bands, const WaveletBands& observed,
                          const std::array<const ScoreModel*, 4>& models,
                          const CorrectorConfig& cfg, const SparseMask& m,
                          const NoiseSchedule& ve);

/// Applies the consistency step of `mode` to all four bands.
WaveletBands enforce_consistency(const WaveletBands& bands, const WaveletBands& observed,
                                 const SparseMask& m, ConsistencyMode mode);

}  // namespace stride
