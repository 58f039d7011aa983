#include "stride/tinynet.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "stride/geometry.hpp"
#include "stride/rng.hpp"

namespace stride {

namespace {

enum Slot { W1, B1, E1, W2, B2, E2, W3, B3, kSlots };

using Map = std::vector<double>;  // channels x rows x cols

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

std::array<double, TinyNet::kTimeFeatures> features(double tau) {
  return {tau, tau * tau, std::sin(std::numbers::pi * tau), std::cos(std::numbers::pi * tau)};
}

// out[o] += sum_c w[o][c] (*) in[c], zero padded "same" cross-correlation.
void conv_forward(const Map& in, int cin, const double* w, int cout, std::size_t H, std::size_t W,
                  Map& out) {
  const auto h = static_cast<long>(H);
  const auto wd = static_cast<long>(W);
  for (int o = 0; o < cout; ++o) {
    double* dst = out.data() + static_cast<std::size_t>(o) * H * W;
    for (int c = 0; c < cin; ++c) {
      const double* src = in.data() + static_cast<std::size_t>(c) * H * W;
      for (int ki = 0; ki < 3; ++ki) {
        for (int kj = 0; kj < 3; ++kj) {
          const double k = w[((o * cin + c) * 3 + ki) * 3 + kj];
          if (k == 0.0) continue;
          const long di = ki - 1;
          const long dj = kj - 1;
          const long i0 = std::max(0L, -di), i1 = std::min(h, h - di);
          const long j0 = std::max(0L, -dj), j1 = std::min(wd, wd - dj);
          for (long i = i0; i < i1; ++i) {
            double* drow = dst + i * wd;
            const double* srow = src + (i + di) * wd + dj;
            for (long j = j0; j < j1; ++j) drow[j] += k * srow[j];
          }
        }
      }
    }
  }
}

// Given gout = dL/dout, accumulates dL/dw into gw and (optionally) dL/din into gin.
void conv_backward(const Map& in, int cin, const double* w, int cout, std::size_t H, std::size_t W,
                   const Map& gout, double* gw, Map* gin) {
  const auto h = static_cast<long>(H);
  const auto wd = static_cast<long>(W);
  for (int o = 0; o < cout; ++o) {
    const double* g = gout.data() + static_cast<std::size_t>(o) * H * W;
    for (int c = 0; c < cin; ++c) {
      const double* src = in.data() + static_cast<std::size_t>(c) * H * W;
      double* gsrc = gin ? gin->data() + static_cast<std::size_t>(c) * H * W : nullptr;
      for (int ki = 0; ki < 3; ++ki) {
        for (int kj = 0; kj < 3; ++kj) {
          const std::size_t widx = static_cast<std::size_t>(((o * cin + c) * 3 + ki) * 3 + kj);
          const double k = w[widx];
          const long di = ki - 1;
          const long dj = kj - 1;
          const long i0 = std::max(0L, -di), i1 = std::min(h, h - di);
          const long j0 = std::max(0L, -dj), j1 = std::min(wd, wd - dj);
          double acc = 0.0;
          for (long i = i0; i < i1; ++i) {
            const double* grow = g + i * wd;
            const double* srow = src + (i + di) * wd + dj;
            for (long j = j0; j < j1; ++j) acc += grow[j] * srow[j];
            if (gsrc) {
              double* gs = gsrc + (i + di) * wd + dj;
              for (long j = j0; j < j1; ++j) gs[j] += k * grow[j];
            }
          }
          gw[widx] += acc;
        }
      }
    }
  }
}

struct Cache {
  std::size_t H = 0, W = 0;
  Map x, z1, h1, z2, h2, out;
  std::array<double, TinyNet::kTimeFeatures> phi{};
};

void add_bias_time(Map& z, const Tensor& b, const Tensor& e,
                   const std::array<double, TinyNet::kTimeFeatures>& phi, std::size_t plane) {
  for (std::size_t o = 0; o < b.data.size(); ++o) {
    double off = b.data[o];
    for (int f = 0; f < TinyNet::kTimeFeatures; ++f) {
      off += e.data[o * TinyNet::kTimeFeatures + static_cast<std::size_t>(f)] * phi[static_cast<std::size_t>(f)];
    }
    for (std::size_t i = 0; i < plane; ++i) z[o * plane + i] += off;
  }
}

Map silu(const Map& z) {
  Map h(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) h[i] = z[i] * sigmoid(z[i]);
  return h;
}

Cache run_forward(const std::vector<Tensor>& p, int cin, const std::vector<const Array2D*>& inputs,
                  double tau) {
  if (static_cast<int>(inputs.size()) != cin) throw ShapeError("TinyNet: wrong input channel count");
  Cache c;
  c.H = inputs[0]->rows();
  c.W = inputs[0]->cols();
  const std::size_t plane = c.H * c.W;
  c.x.resize(static_cast<std::size_t>(cin) * plane);
  for (int k = 0; k < cin; ++k) {
    require_same_shape(*inputs[0], *inputs[static_cast<std::size_t>(k)], "TinyNet inputs");
    std::copy(inputs[static_cast<std::size_t>(k)]->data(),
              inputs[static_cast<std::size_t>(k)]->data() + plane,
              c.x.begin() + static_cast<long>(static_cast<std::size_t>(k) * plane));
  }
  c.phi = features(tau);
  const int hid = TinyNet::kHidden;
  c.z1.assign(static_cast<std::size_t>(hid) * plane, 0.0);
  conv_forward(c.x, cin, p[W1].data.data(), hid, c.H, c.W, c.z1);
  add_bias_time(c.z1, p[B1], p[E1], c.phi, plane);
  c.h1 = silu(c.z1);
  c.z2.assign(static_cast<std::size_t>(hid) * plane, 0.0);
  conv_forward(c.h1, hid, p[W2].data.data(), hid, c.H, c.W, c.z2);
  add_bias_time(c.z2, p[B2], p[E2], c.phi, plane);
  c.h2 = silu(c.z2);
  c.out.assign(plane, p[B3].data[0]);
  conv_forward(c.h2, hid, p[W3].data.data(), 1, c.H, c.W, c.out);
  return c;
}

void silu_backward(const Map& z, Map& g) {
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double s = sigmoid(z[i]);
    g[i] *= s * (1.0 + z[i] * (1.0 - s));
  }
}

void bias_time_backward(const Map& gz, std::size_t plane,
                        const std::array<double, TinyNet::kTimeFeatures>& phi, Tensor& gb,
                        Tensor& ge) {
  for (std::size_t o = 0; o < gb.data.size(); ++o) {
    double s = 0.0;
    for (std::size_t i = 0; i < plane; ++i) s += gz[o * plane + i];
    gb.data[o] += s;
    for (int f = 0; f < TinyNet::kTimeFeatures; ++f) {
      ge.data[o * TinyNet::kTimeFeatures + static_cast<std::size_t>(f)] += s * phi[static_cast<std::size_t>(f)];
    }
  }
}

double mse_loss(const Map& out, const Array2D& target, double scale) {
  double s = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double d = out[i] - target.data()[i];
    s += d * d;
  }
  return scale * s / static_cast<double>(out.size());
}

}  // namespace

Tensor Tensor::zeros(std::vector<std::uint32_t> shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return Tensor{std::move(shape), std::vector<double>(n, 0.0)};
}

TinyNet::TinyNet(int in_channels, std::uint64_t seed) : in_channels_(in_channels) {
  if (in_channels < 1) throw std::invalid_argument("TinyNet: need at least one input channel");
  const auto cin = static_cast<std::uint32_t>(in_channels);
  const auto hid = static_cast<std::uint32_t>(kHidden);
  const auto nf = static_cast<std::uint32_t>(kTimeFeatures);
  p_ = {Tensor::zeros({hid, cin, 3, 3}), Tensor::zeros({hid}), Tensor::zeros({hid, nf}),
        Tensor::zeros({hid, hid, 3, 3}), Tensor::zeros({hid}), Tensor::zeros({hid, nf}),
        Tensor::zeros({1, hid, 3, 3}),   Tensor::zeros({1})};
  Rng rng(seed, 0x7e7);
  auto init = [&](Tensor& t, double sd) {
    for (double& v : t.data) v = sd * rng.normal();
  };
  init(p_[W1], std::sqrt(2.0 / (9.0 * in_channels)));
  init(p_[E1], 0.5);
  init(p_[W2], std::sqrt(2.0 / (9.0 * kHidden)));
  init(p_[E2], 0.5);
  init(p_[W3], std::sqrt(1.0 / (9.0 * kHidden)));
}

TinyNet TinyNet::from_tensors(std::vector<Tensor> layers) {
  if (layers.size() != kSlots) throw ShapeError("TinyNet: expected 8 layers");
  const auto& w1 = layers[W1].shape;
  if (w1.size() != 4 || w1[0] != kHidden || w1[2] != 3 || w1[3] != 3 || w1[1] < 1) {
    throw ShapeError("TinyNet: bad first-layer shape");
  }
  TinyNet reference(static_cast<int>(w1[1]), 0);
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].shape != reference.p_[i].shape ||
        layers[i].data.size() != reference.p_[i].data.size()) {
      throw ShapeError("TinyNet: layer " + std::to_string(i) + " has the wrong shape");
    }
  }
  reference.p_ = std::move(layers);
  return reference;
}

std::size_t TinyNet::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& t : p_) n += t.numel();
  return n;
}

std::vector<Tensor> TinyNet::zero_grad() const {
  std::vector<Tensor> g;
  g.reserve(p_.size());
  for (const auto& t : p_) g.push_back(Tensor::zeros(t.shape));
  return g;
}

Array2D TinyNet::forward(const std::vector<const Array2D*>& inputs, double tau) const {
  const Cache c = run_forward(p_, in_channels_, inputs, tau);
  return Array2D(c.H, c.W, c.out);
}

double TinyNet::loss_and_grad(const std::vector<const Array2D*>& inputs, double tau,
                              const Array2D& target, double scale,
                              std::vector<Tensor>& grad) const {
  const Cache c = run_forward(p_, in_channels_, inputs, tau);
  if (target.rows() != c.H || target.cols() != c.W) throw ShapeError("TinyNet: target shape");
  if (grad.size() != p_.size()) grad = zero_grad();
  const std::size_t plane = c.H * c.W;
  const int hid = kHidden;
  Map gout(plane);
  const double k = 2.0 * scale / static_cast<double>(plane);
  for (std::size_t i = 0; i < plane; ++i) gout[i] = k * (c.out[i] - target.data()[i]);
  for (double v : gout) grad[B3].data[0] += v;

  Map gh2(c.h2.size(), 0.0);
  conv_backward(c.h2, hid, p_[W3].data.data(), 1, c.H, c.W, gout, grad[W3].data.data(), &gh2);
  silu_backward(c.z2, gh2);
  bias_time_backward(gh2, plane, c.phi, grad[B2], grad[E2]);

  Map gh1(c.h1.size(), 0.0);
  conv_backward(c.h1, hid, p_[W2].data.data(), hid, c.H, c.W, gh2, grad[W2].data.data(), &gh1);
  silu_backward(c.z1, gh1);
  bias_time_backward(gh1, plane, c.phi, grad[B1], grad[E1]);

  conv_backward(c.x, in_channels_, p_[W1].data.data(), hid, c.H, c.W, gh1, grad[W1].data.data(),
                nullptr);
  return mse_loss(c.out, target, scale);
}

void Adam::update(std::vector<Tensor>& params, const std::vector<Tensor>& grad) {
  if (m.empty()) {
    for (const auto& t : params) {
      m.push_back(Tensor::zeros(t.shape));
      v.push_back(Tensor::zeros(t.shape));
    }
  }
  ++step;
  const double c1 = 1.0 - std::pow(beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto& p = params[i].data;
    const auto& g = grad[i].data;
    auto& mi = m[i].data;
    auto& vi = v[i].data;
    for (std::size_t k = 0; k < p.size(); ++k) {
      mi[k] = beta1 * mi[k] + (1.0 - beta1) * g[k];
      vi[k] = beta2 * vi[k] + (1.0 - beta2) * g[k] * g[k];
      p[k] -= lr * (mi[k] / c1) / (std::sqrt(vi[k] / c2) + eps);
    }
  }
}

void TrainConfig::validate() const {
  if (epochs < 1 || steps_per_epoch < 1 || batch_size < 1) {
    throw std::invalid_argument("train: epochs, steps and batch size must be >= 1");
  }
  if (!(lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
  if (!(p_cond >= 0.0 && p_cond <= 1.0)) throw std::invalid_argument("train: p_cond must be in [0, 1]");
  if (view_set.empty()) throw std::invalid_argument("train: empty view set");
  for (auto r : view_set) {
    if (r < 1) throw std::invalid_argument("train: view interval must be >= 1");
  }
}

namespace {

template <class Sample>
TrainResult run_training(TinyNet& model, const TrainConfig& cfg, Sample&& sample) {
  Adam opt;
  opt.lr = cfg.lr;
  TrainResult res;
  for (int e = 0; e < cfg.epochs; ++e) {
    double epoch_sum = 0.0;
    for (int s = 0; s < cfg.steps_per_epoch; ++s) {
      auto grad = model.zero_grad();
      double loss = 0.0;
      for (int b = 0; b < cfg.batch_size; ++b) loss += sample(grad, 1.0 / cfg.batch_size);
      if (!std::isfinite(loss)) {
        throw NumericalError("training: non-finite loss at epoch " + std::to_string(e) + " step " +
                             std::to_string(s));
      }
      opt.update(model.tensors(), grad);
      res.step_loss.push_back(loss);
      epoch_sum += loss;
    }
    res.epoch_loss.push_back(epoch_sum / cfg.steps_per_epoch);
  }
  return res;
}

}  // namespace

TrainResult train_epsilon(TinyNet& model, const std::vector<Array2D>& data,
                          const NoiseSchedule& sched, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train_epsilon: empty data");
  if (model.in_channels() != 2) throw std::invalid_argument("train_epsilon: model needs 2 channels");
  for (auto r : cfg.view_set) {
    if (r > data[0].rows()) throw std::invalid_argument("train_epsilon: view interval exceeds views");
  }
  Rng rng(cfg.seed);
  const int n = static_cast<int>(data.size());
  return run_training(model, cfg, [&](std::vector<Tensor>& grad, double scale) {
    const auto& y0 = data[static_cast<std::size_t>(rng.uniform_int(0, n - 1))];
    const int t = rng.uniform_int(1, sched.T());
    const bool gamma = rng.bernoulli(cfg.p_cond);
    const auto r = cfg.view_set[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(cfg.view_set.size()) - 1))];
    const auto noised = forward_noising(y0, t, sched, rng);
    const Array2D cond = gamma ? apply_mask(y0, make_sparse_mask(y0.rows(), r))
                               : Array2D(y0.rows(), y0.cols());
    const double tau = static_cast<double>(t) / sched.T();
    return model.loss_and_grad({&noised.y_t, &cond}, tau, noised.eps, scale, grad);
  });
}

TrainResult train_score(TinyNet& model, const std::vector<Array2D>& data,
                        const NoiseSchedule& ve_sched, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) throw std::invalid_argument("train_score: empty data");
  if (model.in_channels() != 1) throw std::invalid_argument("train_score: model needs 1 channel");
  Rng rng(cfg.seed);
  const int n = static_cast<int>(data.size());
  return run_training(model, cfg, [&](std::vector<Tensor>& grad, double scale) {
    const auto& x = data[static_cast<std::size_t>(rng.uniform_int(0, n - 1))];
    const double s = rng.uniform();
    const double sigma = ve_sched.ve_sigma(s);
    Array2D z = rng.normal_like(x.rows(), x.cols());
    Array2D y = x;
    axpy(sigma, z, y);
    z *= -1.0;
    return model.loss_and_grad({&y}, s, z, scale, grad);
  });
}

double grad_check(const TinyNet& model, const GradCheckSample& sample, double h) {
  std::vector<const Array2D*> in;
  for (const auto& a : sample.inputs) in.push_back(&a);
  auto grad = model.zero_grad();
  model.loss_and_grad(in, sample.tau, sample.target, sample.scale, grad);
  TinyNet probe = model;
  auto loss_at = [&]() {
    auto g = probe.zero_grad();
    return probe.loss_and_grad(in, sample.tau, sample.target, sample.scale, g);
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < probe.tensors().size(); ++i) {
    auto& data = probe.tensors()[i].data;
    for (std::size_t k = 0; k < data.size(); ++k) {
      const double keep = data[k];
      data[k] = keep + h;
      const double lp = loss_at();
      data[k] = keep - h;
      const double lm = loss_at();
      data[k] = keep;
      const double num = (lp - lm) / (2.0 * h);
      const double ana = grad[i].data[k];
      const double rel = std::abs(ana - num) / std::max(std::abs(ana) + std::abs(num), 1e-7);
      worst = std::max(worst, rel);
    }
  }
  return worst;
}

Array2D TinyEpsModel::predict_eps(const Array2D& y_t, int t, const Array2D* condition) const {
  const double tau = static_cast<double>(t) / T_;
  if (net_.in_channels() == 1) return net_.forward({&y_t}, tau);
  const Array2D zeros(y_t.rows(), y_t.cols());
  return net_.forward({&y_t, condition ? condition : &zeros}, tau);
}

Array2D TinyScoreModel::score(const Array2D& y, double t) const {
  Array2D out = net_.forward({&y}, t);
  out *= 1.0 / sched_.ve_sigma(t);
  return out;
}

}  // namespace stride
