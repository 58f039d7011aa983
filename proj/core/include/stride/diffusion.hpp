#pragma once

#include <cstdint>
#include <vector>

#include "stride/array2d.hpp"
#include "stride/geometry.hpp"
#include "stride/rng.hpp"

namespace stride {

/// Discrete variance-preserving schedule plus a geometric variance-exploding one.
/// Steps are 1..T; step 0 is the clean-data convenience with alpha_bar = 1.
class NoiseSchedule {
 public:
  NoiseSchedule() : NoiseSchedule(linear()) {}
  static NoiseSchedule linear(int T = 1000, double beta_start = 1e-4, double beta_end = 2e-2,
                              double ve_sigma_min = 3e-3, double ve_sigma_max = 5e-2);

  int T() const noexcept { return T_; }
  double beta(int t) const;
  double alpha(int t) const;
  double alpha_bar(int t) const;

  double ve_sigma_min() const noexcept { return ve_min_; }
  double ve_sigma_max() const noexcept { return ve_max_; }
  /// sigma(s) = sigma_min (sigma_max / sigma_min)^s for s in [0, 1].
  double ve_sigma(double s) const;

 private:
  struct Raw {};
  explicit NoiseSchedule(Raw) {}

  int T_ = 0;
  std::vector<double> beta_;
  std::vector<double> alpha_bar_;
  double ve_min_ = 0.0;
  double ve_max_ = 0.0;
};

struct NoisedSample {
  Array2D y_t;
  Array2D eps;
};

/// y_t = sqrt(abar_t) y0 + sqrt(1 - abar_t) eps with eps drawn from rng. t = 0 returns y0.
NoisedSample forward_noising(const Array2D& y0, int t, const NoiseSchedule& sched, Rng& rng);
NoisedSample forward_noising(const Array2D& y0, int t, const NoiseSchedule& sched,
                             std::uint64_t seed);

/// y0_hat = (y_t - sqrt(1 - abar_t) eps_hat) / sqrt(abar_t).
Array2D predict_x0(const Array2D& y_t, const Array2D& eps_hat, int t, const NoiseSchedule& sched);

enum class GuidanceMode { temporal, fixed, optimal_closed_form, optimal_oracle };

struct GuidanceConfig {
  double nu = 1.0;
  int T = 1000;
  GuidanceMode mode = GuidanceMode::temporal;
  double fixed_lambda = 0.0;
  double oracle_step = 1e-4;

  void validate() const;
};

/// Schedule-driven weight: min(1, t/T) nu for temporal mode, the constant for fixed
/// mode. The optimal modes need error terms and go through optimal_lambda instead.
double guidance_weight(int t, const GuidanceConfig& cfg);

struct GuidanceResult {
  Array2D value;
  double lambda = 0.0;
  bool clamped = false;
};

/// y0_hat + lambda M (y_s - y0_hat), lambda clamped to [0, 1].
GuidanceResult apply_sparse_guidance(const Array2D& y0_hat, const Array2D& y_s, const SparseMask& m,
                                     double lambda_t);

/// sqrt(abar_prev) y0_tilde + sqrt(1 - abar_prev - sigma^2) eps_hat + sigma z.
/// `rng` may be null when sigma_t == 0.
Array2D ddim_step(const Array2D& y_t, const Array2D& y0_tilde, const Array2D& eps_hat, int t,
                  int t_prev, double sigma_t, const NoiseSchedule& sched, Rng* rng);

/// Noise level of the ancestral (DDPM-equivalent) sampler between t and t_prev, times eta.
double ancestral_sigma(int t, int t_prev, const NoiseSchedule& sched, double eta = 1.0);

/// (y_t - (1 - alpha_t) / sqrt(1 - abar_t) eps_hat) / sqrt(alpha_t).
Array2D ddpm_posterior_mean(const Array2D& y_t, const Array2D& eps_hat, int t,
                            const NoiseSchedule& sched);

/// (1 + omega) eps_cond - omega eps_uncond.
Array2D cfg_combine(const Array2D& eps_cond, const Array2D& eps_uncond, double omega);

/// Uniform-stride DDIM timesteps T, T - T/n, ..., T/n followed by 0.
std::vector<int> ddim_timesteps(int T, int n_steps);

struct LambdaInputs {
  double a = 0.0;  // |zeta|
  double b = 0.0;  // |xi|
  double c = 0.0;  // <zeta, xi>

  /// Rejects NaN, negative norms, and |c| > a b + 1e-12.
  void validate() const;
};

/// zeta = y0_hat - y_g, xi = y_s - y_g (already restricted to the observed entries).
LambdaInputs make_lambda_inputs(const std::vector<double>& zeta, const std::vector<double>& xi);
LambdaInputs make_lambda_inputs(const Array2D& zeta, const Array2D& xi);

/// f(lambda) = |(1 - lambda) zeta + lambda xi|^2 expressed through (a, b, c).
double lambda_objective(const LambdaInputs& in, double lambda);

/// clamp((a^2 - c) / (a^2 + b^2 - 2c), 0, 1); 0 when the denominator is <= 1e-12.
double optimal_lambda(const LambdaInputs& in);

/// Grid minimiser of lambda_objective over {0, step, 2 step, ...} and 1; lowest index wins ties.
double optimal_lambda_oracle(const LambdaInputs& in, double grid_step);

/// Minimiser of ((1 - lambda) a + lambda b)^2 over [0, 1]: clamp(a / (a - b)); 0 when a == b.
double lambda_worst_case_bound(double a, double b);

}  // namespace stride
