#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "stride/io.hpp"
#include "stride/parallel.hpp"
#include "stride_cli/commands.hpp"

namespace {

using namespace stride;
using namespace stride::cli;

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kData = 3;
constexpr int kNumerical = 4;

const std::set<std::string> kFlags{"lambda_sweep"};

const std::map<std::string, std::string> kHelp{
    {"size", "image side in pixels (>= 16)"},
    {"out", "output path"},
    {"variant_seed", "draw a random phantom variant with this seed"},
    {"pgm", "also write an 8-bit PGM preview"},
    {"in", "input file"},
    {"views", "number of view angles"},
    {"dets", "detector elements"},
    {"r", "keep every r-th view"},
    {"noise", "Gaussian noise sigma added to the sinogram"},
    {"seed", "random seed"},
    {"fov", "field of view in mm (pixel size is fov / size)"},
    {"geom", "use this .geom file instead of the desk geometry"},
    {"kind", "analytic or tinynet"},
    {"corpus", "number of training phantoms"},
    {"corpus_seed", "seed of the training phantoms"},
    {"epochs", "training epochs"},
    {"steps", "steps per epoch"},
    {"batch", "batch size"},
    {"lr", "Adam learning rate"},
    {"p_cond", "probability of a conditional training sample"},
    {"train_seed", "training seed"},
    {"loss_csv", "write the loss trace here"},
    {"method", "fbp or stride"},
    {"model", "model file from 'train'"},
    {"truth", "ground-truth image (IMGF)"},
    {"report", "write the per-stage CSV report here"},
    {"sino_out", "write the completed sinogram here"},
    {"ref", "reference image"},
    {"test", "image under test"},
    {"range", "data range for PSNR/SSIM"},
    {"bins", "KL histogram bins"},
    {"lambda_sweep", "run the fixed-lambda sweep instead of the component table"},
    {"T", "diffusion steps"},
    {"beta_start", "first beta"},
    {"beta_end", "last beta"},
    {"ve_sigma_min", "smallest corrector noise level"},
    {"ve_sigma_max", "largest corrector noise level"},
    {"wavelet", "haar or db2"},
    {"guidance", "temporal, fixed, optimal or oracle"},
    {"nu", "temporal guidance scale"},
    {"lambda", "fixed guidance weight"},
    {"oracle_step", "grid step of the oracle guidance search"},
    {"ddim_steps", "sampling steps"},
    {"eta", "DDIM stochasticity (0..1)"},
    {"cfg_omega", "classifier-free guidance weight"},
    {"align", "fit the linear alignment"},
    {"align_every_step", "align after every step"},
    {"correct", "run the wavelet corrector"},
    {"corrector_steps", "Langevin iterations"},
    {"eps_min", "last Langevin step size"},
    {"lambda_L", "low-band step scale"},
    {"lambda_H", "high-band step scale"},
    {"bands", "bands to refine, e.g. LL,HH"},
    {"consistency", "transported or row_replace"},
    {"final_denoise", "finish chains with a noise-free step"},
    {"corrector_seed", "corrector seed"},
    {"filter", "ram_lak or hann"},
    {"cutoff", "filter cutoff as a fraction of Nyquist"},
    {"padding", "zero_pad or periodic"},
    {"preweight", "apply the fan-beam cosine pre-weight"},
    {"bp_weight", "distance or detector"},
};

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

/// One subcommand: every accepted key becomes a --flag, plus --config and --set.
struct Command {
  CLI::App* app = nullptr;
  std::set<std::string> keys;
  std::map<std::string, std::string> raw;
  std::map<std::string, CLI::Option*> opts;
  std::vector<std::string> configs;
  std::vector<std::string> sets;
  std::function<void(const RunConfig&)> run;

  void bind() {
    for (const auto& k : keys) {
      if (kFlags.count(k)) {
        opts[k] = app->add_flag(flag_name(k), kHelp.at(k));
      } else {
        opts[k] = app->add_option(flag_name(k), raw[k], kHelp.at(k));
      }
    }
    app->add_option("--config", configs, "key=value file (repeatable, later files win)");
    app->add_option("--set", sets, "key=value override (repeatable)");
  }

  RunConfig build() const {
    RunConfig rc(keys);
    for (const auto& path : configs) {
      if (!std::filesystem::is_regular_file(path)) throw UsageError("config file not found: " + path);
      rc.merge_text(io::read_text(path), path);
    }
    for (const auto& s : sets) rc.set_pair(s);
    for (const auto& [k, opt] : opts) {
      if (opt->count() == 0) continue;
      rc.set(k, kFlags.count(k) ? "true" : raw.at(k));
    }
    return rc;
  }
};

int thread_setting(int flag_value, bool flag_given) {
  if (flag_given) return flag_value;
  const char* env = std::getenv("STRIDE_THREADS");
  if (!env || !*env) return 1;
  try {
    std::size_t used = 0;
    const int n = std::stoi(env, &used);
    if (used != std::string(env).size()) throw std::invalid_argument("trailing");
    return n;
  } catch (const std::exception&) {
    throw UsageError(std::string("STRIDE_THREADS: expected an integer, got '") + env + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse-view CT reconstruction with guided diffusion and wavelet refinement"};
  app.require_subcommand(1);
  int threads = 1;
  auto* threads_opt = app.add_option("--threads", threads, "worker threads (falls back to STRIDE_THREADS)");

  std::vector<std::unique_ptr<Command>> commands;
  auto add = [&](const char* name, const char* help, std::set<std::string> keys,
                 std::function<void(const RunConfig&)> run) {
    auto c = std::make_unique<Command>();
    c->app = app.add_subcommand(name, help);
    c->keys = std::move(keys);
    c->run = std::move(run);
    c->bind();
    commands.push_back(std::move(c));
  };
  add("phantom", "write a Shepp-Logan phantom (IMGF)", phantom_keys(), cmd_phantom);
  add("simulate", "project an image into a sparse, optionally noisy sinogram", simulate_keys(), cmd_simulate);
  add("train", "fit the analytic prior or train the tiny nets on a phantom corpus", train_keys(),
      [](const RunConfig& rc) { cmd_train(rc, std::cerr); });
  add("reconstruct", "reconstruct an image with --method fbp or stride", reconstruct_keys(),
      [](const RunConfig& rc) { cmd_reconstruct(rc, std::cerr); });
  add("eval", "print PSNR, SSIM, MSE and KL of --test against --ref as CSV", eval_keys(),
      [](const RunConfig& rc) { cmd_eval(rc, std::cout); });
  add("ablate", "run the component or lambda-sweep ablation table as CSV", ablate_keys(),
      [](const RunConfig& rc) { cmd_ablate(rc, std::cout); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const int n = thread_setting(threads, threads_opt->count() > 0);
    if (n < 1 || n > 256) throw UsageError("--threads must be in [1, 256]");
    set_thread_count(n);
    for (const auto& c : commands) {
      if (c->app->parsed()) c->run(c->build());
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kNumerical;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << '\n';
    return kData;
  } catch (const io::FormatError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kOk;
}
