#include "stride/diffusion.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace stride {

namespace {

void check_step(int t, int T, const char* what) {
  if (t < 0 || t > T) {
    throw std::invalid_argument(std::string(what) + ": step " + std::to_string(t) +
                                " outside [0, " + std::to_string(T) + "]");
  }
}

}  // namespace

NoiseSchedule NoiseSchedule::linear(int T, double beta_start, double beta_end, double ve_sigma_min,
                                    double ve_sigma_max) {
  if (T < 1) throw std::invalid_argument("schedule: T must be >= 1");
  if (!(beta_start > 0.0 && beta_end < 1.0 && beta_start <= beta_end)) {
    throw std::invalid_argument("schedule: need 0 < beta_start <= beta_end < 1");
  }
  if (!(ve_sigma_min > 0.0 && ve_sigma_max > ve_sigma_min)) {
    throw std::invalid_argument("schedule: need 0 < ve_sigma_min < ve_sigma_max");
  }
  NoiseSchedule s{Raw{}};
  s.T_ = T;
  s.beta_.resize(static_cast<std::size_t>(T));
  s.alpha_bar_.resize(static_cast<std::size_t>(T) + 1);
  s.alpha_bar_[0] = 1.0;
  for (int t = 1; t <= T; ++t) {
    const double f = T == 1 ? 0.0 : static_cast<double>(t - 1) / static_cast<double>(T - 1);
    const double b = beta_start + f * (beta_end - beta_start);
    s.beta_[static_cast<std::size_t>(t - 1)] = b;
    s.alpha_bar_[static_cast<std::size_t>(t)] = s.alpha_bar_[static_cast<std::size_t>(t - 1)] * (1.0 - b);
  }
  s.ve_min_ = ve_sigma_min;
  s.ve_max_ = ve_sigma_max;
  return s;
}

double NoiseSchedule::beta(int t) const {
  if (t < 1 || t > T_) throw std::invalid_argument("schedule: beta needs 1 <= t <= T");
  return beta_[static_cast<std::size_t>(t - 1)];
}

double NoiseSchedule::alpha(int t) const { return 1.0 - beta(t); }

double NoiseSchedule::alpha_bar(int t) const {
  check_step(t, T_, "schedule");
  return alpha_bar_[static_cast<std::size_t>(t)];
}

double NoiseSchedule::ve_sigma(double s) const {
  if (!(s >= 0.0 && s <= 1.0)) throw std::invalid_argument("schedule: ve time must be in [0, 1]");
  return ve_min_ * std::pow(ve_max_ / ve_min_, s);
}

NoisedSample forward_noising(const Array2D& y0, int t, const NoiseSchedule& sched, Rng& rng) {
  check_step(t, sched.T(), "forward_noising");
  NoisedSample out{y0, Array2D(y0.rows(), y0.cols())};
  if (t == 0) return out;
  rng.fill_normal(out.eps);
  const double ab = sched.alpha_bar(t);
  out.y_t *= std::sqrt(ab);
  axpy(std::sqrt(1.0 - ab), out.eps, out.y_t);
  return out;
}

NoisedSample forward_noising(const Array2D& y0, int t, const NoiseSchedule& sched,
                             std::uint64_t seed) {
  Rng rng(seed);
  return forward_noising(y0, t, sched, rng);
}

Array2D predict_x0(const Array2D& y_t, const Array2D& eps_hat, int t, const NoiseSchedule& sched) {
  require_same_shape(y_t, eps_hat, "predict_x0");
  const double ab = sched.alpha_bar(t);
  Array2D out = y_t;
  axpy(-std::sqrt(1.0 - ab), eps_hat, out);
  out *= 1.0 / std::sqrt(ab);
  return out;
}

void GuidanceConfig::validate() const {
  if (!(nu >= 0.0 && nu <= 1.0)) throw std::invalid_argument("guidance: nu must be in [0, 1]");
  if (T < 1) throw std::invalid_argument("guidance: T must be >= 1");
  if (!std::isfinite(fixed_lambda)) throw std::invalid_argument("guidance: non-finite lambda");
  if (!(oracle_step > 0.0 && oracle_step <= 0.1)) {
    throw std::invalid_argument("guidance: oracle step must be in (0, 0.1]");
  }
}

double guidance_weight(int t, const GuidanceConfig& cfg) {
  check_step(t, cfg.T, "guidance_weight");
  if (cfg.mode == GuidanceMode::fixed) return cfg.fixed_lambda;
  return std::min(1.0, static_cast<double>(t) / static_cast<double>(cfg.T)) * cfg.nu;
}

GuidanceResult apply_sparse_guidance(const Array2D& y0_hat, const Array2D& y_s, const SparseMask& m,
                                     double lambda_t) {
  require_same_shape(y0_hat, y_s, "apply_sparse_guidance");
  if (y0_hat.rows() != m.n_views()) throw ShapeError("apply_sparse_guidance: mask mismatch");
  if (std::isnan(lambda_t)) throw std::invalid_argument("apply_sparse_guidance: NaN lambda");
  GuidanceResult res{y0_hat, std::clamp(lambda_t, 0.0, 1.0), false};
  res.clamped = res.lambda != lambda_t;
  const double l = res.lambda;
  for (std::size_t r = 0; r < y0_hat.rows(); ++r) {
    if (!m.active[r]) continue;
    auto out = res.value.row(r);
    auto obs = y_s.row(r);
    // Convex form keeps lambda = 0 and lambda = 1 exact.
    for (std::size_t c = 0; c < out.size(); ++c) out[c] = (1.0 - l) * out[c] + l * obs[c];
  }
  return res;
}

Array2D ddim_step(const Array2D& y_t, const Array2D& y0_tilde, const Array2D& eps_hat, int t,
                  int t_prev, double sigma_t, const NoiseSchedule& sched, Rng* rng) {
  require_same_shape(y_t, y0_tilde, "ddim_step");
  require_same_shape(y_t, eps_hat, "ddim_step");
  check_step(t, sched.T(), "ddim_step");
  check_step(t_prev, sched.T(), "ddim_step");
  if (!(t_prev < t)) throw std::invalid_argument("ddim_step: need t_prev < t");
  if (!(sigma_t >= 0.0)) throw std::invalid_argument("ddim_step: sigma must be >= 0");
  const double ap = sched.alpha_bar(t_prev);
  const double dir2 = 1.0 - ap - sigma_t * sigma_t;
  if (dir2 < -1e-12) throw std::invalid_argument("ddim_step: sigma too large for this step");
  Array2D out = y0_tilde;
  out *= std::sqrt(ap);
  axpy(std::sqrt(std::max(dir2, 0.0)), eps_hat, out);
  if (sigma_t > 0.0) {
    if (rng == nullptr) throw std::invalid_argument("ddim_step: sigma > 0 needs an rng");
    for (double& v : out.flat()) v += sigma_t * rng->normal();
  }
  return out;
}

double ancestral_sigma(int t, int t_prev, const NoiseSchedule& sched, double eta) {
  const double at = sched.alpha_bar(t);
  const double ap = sched.alpha_bar(t_prev);
  if (at >= 1.0) return 0.0;
  return eta * std::sqrt((1.0 - ap) / (1.0 - at)) * std::sqrt(1.0 - at / ap);
}

Array2D ddpm_posterior_mean(const Array2D& y_t, const Array2D& eps_hat, int t,
                            const NoiseSchedule& sched) {
  require_same_shape(y_t, eps_hat, "ddpm_posterior_mean");
  const double a = sched.alpha(t);
  const double ab = sched.alpha_bar(t);
  Array2D out = y_t;
  axpy(-(1.0 - a) / std::sqrt(1.0 - ab), eps_hat, out);
  out *= 1.0 / std::sqrt(a);
  return out;
}

Array2D cfg_combine(const Array2D& eps_cond, const Array2D& eps_uncond, double omega) {
  require_same_shape(eps_cond, eps_uncond, "cfg_combine");
  Array2D out = eps_cond;
  out *= 1.0 + omega;
  axpy(-omega, eps_uncond, out);
  return out;
}

std::vector<int> ddim_timesteps(int T, int n_steps) {
  if (n_steps < 1 || n_steps > T) throw std::invalid_argument("ddim: need 1 <= steps <= T");
  std::vector<int> ts;
  const int stride = T / n_steps;
  for (int k = 0; k < n_steps; ++k) ts.push_back(T - k * stride);
  ts.push_back(0);
  return ts;
}

void LambdaInputs::validate() const {
  if (std::isnan(a) || std::isnan(b) || std::isnan(c)) {
    throw std::invalid_argument("lambda inputs: NaN");
  }
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c)) {
    throw std::invalid_argument("lambda inputs: non-finite");
  }
  if (a < 0.0 || b < 0.0) throw std::invalid_argument("lambda inputs: norms must be >= 0");
  if (std::abs(c) > a * b + 1e-12) {
    throw std::invalid_argument("lambda inputs: |c| exceeds a b (Cauchy-Schwarz)");
  }
}

LambdaInputs make_lambda_inputs(const std::vector<double>& zeta, const std::vector<double>& xi) {
  if (zeta.size() != xi.size()) throw ShapeError("lambda inputs: length mismatch");
  double aa = 0.0, bb = 0.0, c = 0.0;
  for (std::size_t i = 0; i < zeta.size(); ++i) {
    aa += zeta[i] * zeta[i];
    bb += xi[i] * xi[i];
    c += zeta[i] * xi[i];
  }
  LambdaInputs in{std::sqrt(aa), std::sqrt(bb), c};
  // Rounding can push |c| a hair past a b for parallel vectors.
  in.c = std::clamp(in.c, -in.a * in.b, in.a * in.b);
  in.validate();
  return in;
}

LambdaInputs make_lambda_inputs(const Array2D& zeta, const Array2D& xi) {
  require_same_shape(zeta, xi, "lambda inputs");
  return make_lambda_inputs(std::vector<double>(zeta.flat().begin(), zeta.flat().end()),
                            std::vector<double>(xi.flat().begin(), xi.flat().end()));
}

double lambda_objective(const LambdaInputs& in, double lambda) {
  const double u = 1.0 - lambda;
  return u * u * in.a * in.a + 2.0 * u * lambda * in.c + lambda * lambda * in.b * in.b;
}

double optimal_lambda(const LambdaInputs& in) {
  in.validate();
  const double den = in.a * in.a + in.b * in.b - 2.0 * in.c;
  if (den <= 1e-12) return 0.0;
  return std::clamp((in.a * in.a - in.c) / den, 0.0, 1.0);
}

double optimal_lambda_oracle(const LambdaInputs& in, double grid_step) {
  in.validate();
  if (!(grid_step > 0.0 && grid_step <= 0.1)) {
    throw std::invalid_argument("lambda oracle: grid step must be in (0, 0.1]");
  }
  const auto n = static_cast<long>(std::floor(1.0 / grid_step + 1e-9));
  double best = 0.0;
  double best_f = lambda_objective(in, 0.0);
  for (long k = 1; k <= n + 1; ++k) {
    const double l = k > n ? 1.0 : static_cast<double>(k) * grid_step;
    const double f = lambda_objective(in, l);
    // Ties (up to rounding) keep the lower grid index.
    if (f < best_f - 1e-13 * std::abs(best_f)) {
      best_f = f;
      best = l;
    }
  }
  return best;
}

double lambda_worst_case_bound(double a, double b) {
  if (std::isnan(a) || std::isnan(b) || a < 0.0 || b < 0.0) {
    throw std::invalid_argument("lambda bound: need a, b >= 0");
  }
  if (a == b) return 0.0;
  return std::clamp(a / (a - b), 0.0, 1.0);
}

}  // namespace stride
