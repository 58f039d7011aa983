#include "stride_cli/model_file.hpp"

#include <cmath>

#include "stride/io.hpp"
#include "stride/params_io.hpp"
#include "stride/toy_problem.hpp"

namespace stride::cli {

namespace {

constexpr std::size_t kHeaderLen = 10;
constexpr std::size_t kNetLayers = 8;

Tensor from_array(const Array2D& a) {
  Tensor t = Tensor::zeros({static_cast<std::uint32_t>(a.rows()), static_cast<std::uint32_t>(a.cols())});
  std::copy(a.data(), a.data() + a.size(), t.data.begin());
  return t;
}

Array2D to_array(const Tensor& t, std::size_t rows, std::size_t cols) {
  if (t.shape.size() != 2 || t.shape[0] != rows || t.shape[1] != cols) {
    throw io::FormatError("model: prior tensor does not match the header shape");
  }
  Array2D a(rows, cols);
  std::copy(t.data.begin(), t.data.end(), a.data());
  return a;
}

std::size_t whole(double v, const char* what) {
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e9) throw io::FormatError(std::string("model: bad ") + what);
  return static_cast<std::size_t>(v);
}

}  // namespace

NoiseSchedule ModelBundle::schedule() const {
  return NoiseSchedule::linear(T, beta_start, beta_end, ve_sigma_min, ve_sigma_max);
}

void ModelBundle::apply_schedule(PipelineConfig& cfg) const {
  cfg.T = T;
  cfg.guidance.T = T;
  cfg.beta_start = beta_start;
  cfg.beta_end = beta_end;
  cfg.ve_sigma_min = ve_sigma_min;
  cfg.ve_sigma_max = ve_sigma_max;
  cfg.wavelet = wavelet;
}

ModelSet LoadedModels::view() const {
  ModelSet m;
  m.eps = eps.get();
  for (std::size_t w = 0; w < 4; ++w) m.band_scores[w] = bands[w].get();
  m.data_scale = data_scale;
  return m;
}

LoadedModels instantiate(const ModelBundle& b) {
  LoadedModels out;
  out.data_scale = b.data_scale;
  const NoiseSchedule sched = b.schedule();
  if (b.kind == ModelKind::analytic) {
    AnalyticModels a = make_analytic_models(b.prior, b.data_scale, sched, b.wavelet);
    out.eps = std::move(a.eps);
    out.bands = std::move(a.bands);
  } else {
    out.eps = std::make_unique<TinyEpsModel>(b.eps_net, b.T);
    for (std::size_t w = 0; w < 4; ++w) out.bands[w] = std::make_unique<TinyScoreModel>(b.score_nets[w], sched);
  }
  return out;
}

void save_model(const std::string& path, const ModelBundle& b) {
  std::vector<Tensor> layers;
  Tensor head = Tensor::zeros({static_cast<std::uint32_t>(kHeaderLen)});
  head.data = {static_cast<double>(b.kind), static_cast<double>(b.rows), static_cast<double>(b.cols),
               b.data_scale, static_cast<double>(b.T), b.beta_start, b.beta_end, b.ve_sigma_min,
               b.ve_sigma_max, static_cast<double>(b.wavelet)};
  layers.push_back(head);
  if (b.kind == ModelKind::analytic) {
    layers.push_back(from_array(b.prior.mean));
    layers.push_back(from_array(b.prior.spectrum));
  } else {
    for (const auto& t : b.eps_net.tensors()) layers.push_back(t);
    for (const auto& net : b.score_nets) {
      for (const auto& t : net.tensors()) layers.push_back(t);
    }
  }
  try {
    save_tensors(path, layers);
  } catch (const std::runtime_error& e) {
    throw io::FormatError(e.what());
  }
}

ModelBundle load_model(const std::string& path) {
  std::vector<Tensor> layers;
  try {
    layers = load_tensors(path);
  } catch (const std::exception& e) {
    throw io::FormatError(path + ": " + e.what());
  }
  if (layers.empty() || layers[0].shape != std::vector<std::uint32_t>{kHeaderLen}) {
    throw io::FormatError(path + ": missing model header");
  }
  const auto& h = layers[0].data;
  ModelBundle b;
  const std::size_t kind = whole(h[0], "kind");
  if (kind > 1) throw io::FormatError(path + ": unknown model kind");
  b.kind = static_cast<ModelKind>(kind);
  b.rows = whole(h[1], "rows");
  b.cols = whole(h[2], "cols");
  b.data_scale = h[3];
  b.T = static_cast<int>(whole(h[4], "T"));
  b.beta_start = h[5];
  b.beta_end = h[6];
  b.ve_sigma_min = h[7];
  b.ve_sigma_max = h[8];
  const std::size_t wl = whole(h[9], "wavelet");
  if (wl > 1) throw io::FormatError(path + ": unknown wavelet");
  b.wavelet = static_cast<WaveletFilter>(wl);
  if (b.rows == 0 || b.cols == 0 || !(b.data_scale > 0.0)) throw io::FormatError(path + ": bad header");
  try {
    (void)b.schedule();
  } catch (const std::invalid_argument& e) {
    throw io::FormatError(path + ": " + e.what());
  }
  if (b.kind == ModelKind::analytic) {
    if (layers.size() != 3) throw io::FormatError(path + ": expected mean and spectrum");
    b.prior.mean = to_array(layers[1], b.rows, b.cols);
    b.prior.spectrum = to_array(layers[2], b.rows, b.cols);
    return b;
  }
  if (layers.size() != 1 + 5 * kNetLayers) throw io::FormatError(path + ": expected five nets");
  auto net = [&](std::size_t k, int channels) {
    const auto first = layers.begin() + static_cast<std::ptrdiff_t>(1 + k * kNetLayers);
    try {
      TinyNet n = TinyNet::from_tensors({first, first + static_cast<std::ptrdiff_t>(kNetLayers)});
      if (n.in_channels() != channels) throw ShapeError("wrong channel count");
      return n;
    } catch (const ShapeError& e) {
      throw io::FormatError(path + ": net " + std::to_string(k) + ": " + e.what());
    }
  };
  b.eps_net = net(0, 2);
  for (std::size_t w = 0; w < 4; ++w) b.score_nets[w] = net(w + 1, 1);
  return b;
}

}  // namespace stride::cli
