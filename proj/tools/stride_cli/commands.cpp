#include "stride_cli/commands.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include "stride/evalkit.hpp"
#include "stride/io.hpp"
#include "stride/projector.hpp"
#include "stride/toy_problem.hpp"
#include "stride_cli/model_file.hpp"

namespace stride::cli {

namespace fs = std::filesystem;

namespace {

std::set<std::string> join(std::set<std::string> a, const std::set<std::string>& b) {
  a.insert(b.begin(), b.end());
  return a;
}

void check_input(const std::string& path) {
  if (!fs::is_regular_file(path)) throw UsageError("input file not found: " + path);
}

void check_output(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty() && !fs::is_directory(parent)) throw UsageError("output directory not found: " + parent.string());
}

std::string optional_output(const RunConfig& rc, const std::string& key) {
  const std::string p = rc.str(key);
  if (!p.empty()) check_output(p);
  return p;
}

std::size_t image_size(const RunConfig& rc, std::size_t fallback) {
  const std::size_t n = rc.count("size", fallback);
  if (n < 16 || n > 4096) throw UsageError("--size must be in [16, 4096]");
  return n;
}

double fov(const RunConfig& rc) {
  const double f = rc.num("fov", 64.0);
  if (!(f > 0.0)) throw UsageError("--fov must be > 0");
  return f;
}

/// Square image in the desk field of view.
ImageGrid read_image(const std::string& path, double fov_mm) {
  Array2D v = io::read_imgf(path);
  if (v.rows() != v.cols()) throw ShapeError(path + ": image must be square");
  return ImageGrid(desk_image_shape(v.rows(), fov_mm), std::move(v));
}

SparseMask mask_for(const RunConfig& rc, std::size_t n_views) {
  const std::size_t r = rc.count("r", 1);
  if (r < 1 || r > n_views) throw UsageError("--r must be in [1, n_views]");
  return make_sparse_mask(n_views, r);
}

struct Prepared {
  Sinogram y_s;
  SparseMask mask;
  ImageShape shape;
  PipelineConfig cfg;
  ModelBundle bundle;
  std::optional<ImageGrid> truth;
  std::optional<Sinogram> truth_sino;
};

/// Shared front half of reconstruct and ablate: validate paths, read inputs, load the
/// model and check that everything agrees before any heavy work.
Prepared prepare(const RunConfig& rc, bool need_model, bool need_truth) {
  const std::string in = rc.required("in");
  check_input(in);
  check_input(io::geometry_path(in));
  const std::string model_path = need_model ? rc.required("model") : rc.str("model");
  if (!model_path.empty()) check_input(model_path);
  const std::string truth_path = need_truth ? rc.required("truth") : rc.str("truth");
  if (!truth_path.empty()) check_input(truth_path);

  Prepared p;
  p.cfg = pipeline_config(rc);
  p.y_s = io::read_sinogram(in);
  p.mask = mask_for(rc, p.y_s.n_views());
  if (!truth_path.empty()) {
    p.truth = read_image(truth_path, fov(rc));
    if (rc.has("size") && rc.count("size", 0) != p.truth->nx()) {
      throw ShapeError("--size disagrees with the truth image");
    }
    p.shape = p.truth->shape;
    p.truth_sino = forward_project(*p.truth, p.y_s.geometry);
  } else {
    p.shape = desk_image_shape(image_size(rc, 64), fov(rc));
  }
  if (!model_path.empty()) {
    p.bundle = load_model(model_path);
    if (p.bundle.rows != p.y_s.n_views() || p.bundle.cols != p.y_s.n_detectors()) {
      throw ShapeError("model was trained on " + std::to_string(p.bundle.rows) + "x" +
                       std::to_string(p.bundle.cols) + " sinograms, input is " +
                       std::to_string(p.y_s.n_views()) + "x" + std::to_string(p.y_s.n_detectors()));
    }
    p.bundle.apply_schedule(p.cfg);
    p.cfg = pipeline_config(rc, p.cfg);
  }
  return p;
}

void write_csv_file(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw io::FormatError("cannot open " + path + " for writing");
  os << text;
}

}  // namespace

std::set<std::string> phantom_keys() { return {"size", "out", "variant_seed", "pgm"}; }

std::set<std::string> simulate_keys() {
  return {"in", "out", "views", "dets", "r", "noise", "seed", "fov", "geom", "pgm"};
}

std::set<std::string> train_keys() {
  return join({"out", "kind", "size", "views", "dets", "corpus", "corpus_seed", "epochs", "steps", "batch", "lr",
               "p_cond", "train_seed", "loss_csv"},
              schedule_keys());
}

std::set<std::string> reconstruct_keys() {
  return join({"in", "out", "method", "r", "size", "fov", "model", "truth", "report", "sino_out", "pgm"},
              pipeline_keys());
}

std::set<std::string> eval_keys() { return {"ref", "test", "range", "bins"}; }

std::set<std::string> ablate_keys() {
  return join({"in", "truth", "out", "r", "fov", "model", "lambda_sweep"}, pipeline_keys());
}

void cmd_phantom(const RunConfig& rc) {
  const std::size_t n = image_size(rc, 64);
  const std::string out = rc.required("out");
  check_output(out);
  const std::string pgm = optional_output(rc, "pgm");
  const ImageShape shape = desk_image_shape(n);
  const ImageGrid img = rc.has("variant_seed") ? corpus_phantom(shape, rc.seed("variant_seed", 0), 0)
                                               : shepp_logan(shape);
  io::write_imgf(out, img.values);
  if (!pgm.empty()) io::write_pgm(pgm, img.values);
}

void cmd_simulate(const RunConfig& rc) {
  const std::string in = rc.required("in");
  check_input(in);
  const std::string out = rc.required("out");
  check_output(out);
  const std::string pgm = optional_output(rc, "pgm");
  const std::string geom = rc.str("geom");
  if (!geom.empty()) check_input(geom);

  FanBeamGeometry g;
  if (!geom.empty()) {
    g = io::read_geometry(geom);
    if ((rc.has("views") && rc.count("views", 0) != g.n_views) ||
        (rc.has("dets") && rc.count("dets", 0) != g.n_detectors)) {
      throw ShapeError("--views/--dets disagree with " + geom);
    }
  } else {
    g = desk_geometry(rc.count("views", 180), rc.count("dets", 128));
  }
  try {
    g.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const SparseMask m = mask_for(rc, g.n_views);
  const double sigma = rc.num("noise", 0.0);
  if (!(sigma >= 0.0)) throw UsageError("--noise must be >= 0");
  const NoiseSpec noise{sigma > 0.0 ? NoiseKind::gaussian : NoiseKind::none, sigma, rc.seed("seed", 7)};

  const ImageGrid img = read_image(in, fov(rc));
  const Sinogram s = simulate_measurement(img, g, noise, m);
  io::write_sinogram(out, s);
  if (!pgm.empty()) io::write_pgm(pgm, s.values);
}

void cmd_train(const RunConfig& rc, std::ostream& log) {
  const std::string out = rc.required("out");
  check_output(out);
  const std::string loss_csv = optional_output(rc, "loss_csv");
  const std::string kind = rc.str("kind", "analytic");
  if (kind != "analytic" && kind != "tinynet") throw UsageError("--kind must be analytic or tinynet");

  const PipelineConfig cfg = pipeline_config(rc);
  ToyProblemSpec spec;
  spec.image_n = image_size(rc, 64);
  spec.n_views = rc.count("views", 180);
  spec.n_detectors = rc.count("dets", 128);
  spec.r = 1;
  spec.corpus_size = rc.count("corpus", 48);
  spec.corpus_seed = rc.seed("corpus_seed", 1);
  if (spec.corpus_size < 2) throw UsageError("--corpus must be >= 2");
  if (spec.n_views < 4 || spec.n_detectors < 4) throw UsageError("--views and --dets must be >= 4");

  TrainConfig tc;
  tc.epochs = static_cast<int>(rc.integer("epochs", tc.epochs));
  tc.steps_per_epoch = static_cast<int>(rc.integer("steps", tc.steps_per_epoch));
  tc.batch_size = static_cast<int>(rc.integer("batch", tc.batch_size));
  tc.lr = rc.num("lr", tc.lr);
  tc.p_cond = rc.num("p_cond", tc.p_cond);
  tc.seed = rc.seed("train_seed", 0);
  try {
    tc.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  const ToyProblem p = make_toy_problem(spec);
  ModelBundle b;
  b.rows = spec.n_views;
  b.cols = spec.n_detectors;
  b.data_scale = p.data_scale;
  b.T = cfg.T;
  b.beta_start = cfg.beta_start;
  b.beta_end = cfg.beta_end;
  b.ve_sigma_min = cfg.ve_sigma_min;
  b.ve_sigma_max = cfg.ve_sigma_max;
  b.wavelet = cfg.wavelet;

  std::ostringstream trace;
  trace << "net,epoch,loss\n" << std::setprecision(10);
  if (kind == "analytic") {
    b.kind = ModelKind::analytic;
    b.prior = fit_spectral_prior(p.corpus);
    log << "fitted spectral prior on " << p.corpus.size() << " sinograms\n";
  } else {
    b.kind = ModelKind::tinynet;
    const NoiseSchedule sched = b.schedule();
    b.eps_net = TinyNet(2, tc.seed);
    const TrainResult er = train_epsilon(b.eps_net, p.corpus, sched, tc);
    for (std::size_t e = 0; e < er.epoch_loss.size(); ++e) trace << "eps," << e << ',' << er.epoch_loss[e] << '\n';
    log << "eps net: loss " << er.epoch_loss.front() << " -> " << er.epoch_loss.back() << '\n';
    const char* names[4] = {"LL", "LH", "HL", "HH"};
    for (int w = 0; w < 4; ++w) {
      std::vector<Array2D> bands;
      bands.reserve(p.corpus.size());
      for (const auto& c : p.corpus) bands.push_back(swt_decompose(c, b.wavelet).band(w));
      TrainConfig bc = tc;
      bc.seed = tc.seed + static_cast<std::uint64_t>(w) + 1;
      auto& net = b.score_nets[static_cast<std::size_t>(w)];
      net = TinyNet(1, bc.seed);
      const TrainResult sr = train_score(net, bands, sched, bc);
      for (std::size_t e = 0; e < sr.epoch_loss.size(); ++e) {
        trace << names[w] << ',' << e << ',' << sr.epoch_loss[e] << '\n';
      }
      log << names[w] << " score net: loss " << sr.epoch_loss.front() << " -> " << sr.epoch_loss.back() << '\n';
    }
  }
  save_model(out, b);
  if (!loss_csv.empty()) write_csv_file(loss_csv, trace.str());
}

void cmd_reconstruct(const RunConfig& rc, std::ostream& log) {
  const std::string method = rc.str("method", "stride");
  if (method != "fbp" && method != "stride") throw UsageError("--method must be fbp or stride");
  const std::string out = rc.required("out");
  check_output(out);
  const std::string pgm = optional_output(rc, "pgm");
  const std::string report = optional_output(rc, "report");
  const std::string sino_out = optional_output(rc, "sino_out");
  const Prepared p = prepare(rc, method == "stride", false);

  if (method == "fbp") {
    const ImageGrid img = p.mask.interval == 1
                              ? fbp_reconstruct(p.y_s, p.y_s.geometry, p.cfg.filter, p.shape, p.cfg.fbp)
                              : sparse_fbp(p.y_s, p.mask, p.cfg, p.shape);
    io::write_imgf(out, img.values);
    if (!pgm.empty()) io::write_pgm(pgm, img.values);
    return;
  }

  const LoadedModels models = instantiate(p.bundle);
  Reference ref;
  if (p.truth) ref = Reference{&*p.truth_sino, &*p.truth};
  const StrideResult res = stride_reconstruct(p.y_s, p.mask, models.view(), p.cfg, p.shape, ref);
  io::write_imgf(out, res.image.values);
  if (!pgm.empty()) io::write_pgm(pgm, res.image.values);
  if (!sino_out.empty()) io::write_sinogram(sino_out, res.sinogram);
  if (!report.empty()) {
    std::ostringstream os;
    write_report_csv(os, res.report);
    write_csv_file(report, os.str());
  }
  log << "alignment a=" << res.alignment.a << " b=" << res.alignment.b << '\n';
}

void cmd_eval(const RunConfig& rc, std::ostream& out) {
  const std::string ref = rc.required("ref"), test = rc.required("test");
  check_input(ref);
  check_input(test);
  const double range = rc.num("range", 1.0);
  if (!(range > 0.0)) throw UsageError("--range must be > 0");
  const std::size_t bins = rc.count("bins", 64);
  if (bins < 2) throw UsageError("--bins must be >= 2");
  const Array2D a = io::read_imgf(ref), b = io::read_imgf(test);
  require_same_shape(a, b, "eval");
  out << "psnr,ssim,mse,kl\n" << std::setprecision(10) << psnr(b, a, range) << ',' << ssim(b, a, range) << ','
      << mse(b, a) << ',' << kl_divergence(a, b, bins) << '\n';
}

void cmd_ablate(const RunConfig& rc, std::ostream& out) {
  const std::string out_path = optional_output(rc, "out");
  const Prepared p = prepare(rc, true, true);
  const LoadedModels models = instantiate(p.bundle);
  const auto settings = rc.flag("lambda_sweep", false) ? lambda_sweep_settings() : component_settings();
  const Reference ref{&*p.truth_sino, &*p.truth};
  const auto rows = ablate(settings, p.y_s, p.mask, models.view(), p.cfg, p.shape, ref);
  std::ostringstream os;
  write_ablation_csv(os, rows);
  if (out_path.empty()) out << os.str();
  else write_csv_file(out_path, os.str());
}

}  // namespace stride::cli
