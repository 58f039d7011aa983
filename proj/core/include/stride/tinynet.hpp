#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "stride/array2d.hpp"
#include "stride/denoiser.hpp"
#include "stride/diffusion.hpp"

namespace stride {

/// Named parameter block with an explicit shape, as stored in STRDNET1 files.
struct Tensor {
  std::vector<std::uint32_t> shape;
  std::vector<double> data;

  static Tensor zeros(std::vector<std::uint32_t> shape);
  std::size_t numel() const noexcept { return data.size(); }
  bool operator==(const Tensor&) const = default;
};

/// Three 3x3 "same" convolutions (in -> 16 -> 16 -> 1) with SiLU activations. Time enters
/// through a per-channel offset e_c . phi(tau) on both hidden layers, with
/// phi(tau) = (tau, tau^2, sin(pi tau), cos(pi tau)) and tau in [0, 1].
class TinyNet {
 public:
  static constexpr int kHidden = 16;
  static constexpr int kTimeFeatures = 4;

  TinyNet() = default;
  TinyNet(int in_channels, std::uint64_t seed);
  /// Rebuilds a net from stored layers; throws ShapeError if they do not fit.
  static TinyNet from_tensors(std::vector<Tensor> layers);

  int in_channels() const noexcept { return in_channels_; }
  std::vector<Tensor>& tensors() noexcept { return p_; }
  const std::vector<Tensor>& tensors() const noexcept { return p_; }
  std::size_t parameter_count() const noexcept;

  /// `inputs` holds in_channels() arrays of one shape.
  Array2D forward(const std::vector<const Array2D*>& inputs, double tau) const;

  /// loss = scale * mean((forward - target)^2); gradients are accumulated into `grad`
  /// (same layout as tensors()).
  double loss_and_grad(const std::vector<const Array2D*>& inputs, double tau,
                       const Array2D& target, double scale, std::vector<Tensor>& grad) const;

  std::vector<Tensor> zero_grad() const;

 private:
  int in_channels_ = 0;
  std::vector<Tensor> p_;  // w1 b1 e1 w2 b2 e2 w3 b3
};

struct Adam {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Tensor> m, v;

  void update(std::vector<Tensor>& params, const std::vector<Tensor>& grad);
};

struct TrainConfig {
  int epochs = 10;
  int steps_per_epoch = 50;
  int batch_size = 4;
  double lr = 1e-4;
  std::uint64_t seed = 0;
  double p_cond = 0.2;
  std::vector<std::size_t> view_set{6, 8, 10, 12};

  void validate() const;
};

struct TrainResult {
  std::vector<double> epoch_loss;  // mean loss per epoch
  std::vector<double> step_loss;
};

/// Conditional noise-prediction training. Each sample draws t ~ U{1..T}, eps ~ N(0, I),
/// gamma ~ Bernoulli(p_cond) and r ~ U(view_set); the second input channel holds
/// gamma * (M_r o y0). Throws NumericalError on a non-finite loss.
TrainResult train_epsilon(TinyNet& model, const std::vector<Array2D>& data,
                          const NoiseSchedule& sched, const TrainConfig& cfg);

/// Denoising score matching with weight sigma^2: the net output o is read as sigma * s and
/// trained on |o + z|^2 for y = x + sigma(t) z, t ~ U[0, 1].
TrainResult train_score(TinyNet& model, const std::vector<Array2D>& data,
                        const NoiseSchedule& ve_sched, const TrainConfig& cfg);

struct GradCheckSample {
  std::vector<Array2D> inputs;
  double tau = 0.5;
  Array2D target;
  double scale = 1.0;
};

/// Largest |analytic - numeric| / max(|analytic| + |numeric|, 1e-7) over all parameters,
/// using central differences with step h.
double grad_check(const TinyNet& model, const GradCheckSample& sample, double h = 1e-4);

/// Adapts a 2-channel TinyNet to the noise-predictor contract.
class TinyEpsModel final : public NoisePredictor {
 public:
  TinyEpsModel(TinyNet net, int T) : net_(std::move(net)), T_(T) {}
  Array2D predict_eps(const Array2D& y_t, int t, const Array2D* condition) const override;
  bool conditional() const noexcept override { return net_.in_channels() > 1; }

 private:
  TinyNet net_;
  int T_;
};

/// Adapts a 1-channel TinyNet trained by train_score to the score contract.
class TinyScoreModel final : public ScoreModel {
 public:
  TinyScoreModel(TinyNet net, NoiseSchedule sched) : net_(std::move(net)), sched_(std::move(sched)) {}
  Array2D score(const Array2D& y, double t) const override;

 private:
  TinyNet net_;
  NoiseSchedule sched_;
};

}  // namespace stride
