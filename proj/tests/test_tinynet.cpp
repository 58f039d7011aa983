#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "stride/params_io.hpp"
#include "stride/tinynet.hpp"
#include "stride/toy_problem.hpp"
#include "stride/wavelet.hpp"
#include "test_support.hpp"

using namespace stride;

namespace {

GradCheckSample random_sample(int channels, std::size_t R, std::size_t C, std::uint64_t seed) {
  GradCheckSample s;
  for (int k = 0; k < channels; ++k) {
    s.inputs.push_back(testkit::random_array(R, C, seed, static_cast<std::uint64_t>(k)));
  }
  s.target = testkit::random_array(R, C, seed, 99);
  s.tau = 0.37;
  return s;
}

double grad_at(const TinyNet& net, const GradCheckSample& s, std::vector<Tensor>& g) {
  std::vector<const Array2D*> in;
  for (const auto& a : s.inputs) in.push_back(&a);
  g = net.zero_grad();
  return net.loss_and_grad(in, s.tau, s.target, s.scale, g);
}

// 32x32 normalised sinograms of random phantoms.
const std::vector<Array2D>& toy_sinograms() {
  static const std::vector<Array2D> data = [] {
    ToyProblemSpec spec;
    spec.image_n = 32;
    spec.n_views = 32;
    spec.n_detectors = 32;
    spec.corpus_size = 48;
    return make_toy_problem(spec).corpus;
  }();
  return data;
}

}  // namespace

TEST(TinyNet, ShapesAndParameterBudget) {
  const TinyNet net(2, 1);
  EXPECT_EQ(net.in_channels(), 2);
  EXPECT_EQ(net.tensors().size(), 8u);
  EXPECT_LT(net.parameter_count(), 10000u);
  const Array2D y = testkit::random_array(9, 13, 1);
  const Array2D out = net.forward({&y, &y}, 0.5);
  EXPECT_EQ(out.rows(), 9u);
  EXPECT_EQ(out.cols(), 13u);
  EXPECT_THROW(net.forward({&y}, 0.5), ShapeError);
}

TEST(GradCheck, RandomNetAtInitialisation) {
  for (int ch : {1, 2}) {
    const TinyNet net(ch, 3);
    EXPECT_LE(grad_check(net, random_sample(ch, 6, 7, 4)), 1e-3) << ch;
  }
}

TEST(GradCheck, RandomNetAfterTraining) {
  TinyNet net(2, 5);
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.steps_per_epoch = 10;
  cfg.lr = 1e-3;
  train_epsilon(net, toy_sinograms(), NoiseSchedule(), cfg);
  auto s = random_sample(2, 6, 6, 8);
  s.tau = 0.81;
  EXPECT_LE(grad_check(net, s), 1e-3);
}

TEST(GradCheck, ZeroNetZeroInputGivesZeroWeightGradients) {
  TinyNet net(2, 1);
  for (auto& t : net.tensors()) std::fill(t.data.begin(), t.data.end(), 0.0);
  GradCheckSample s;
  s.inputs = {Array2D(5, 5), Array2D(5, 5)};
  s.target = testkit::random_array(5, 5, 2);
  std::vector<Tensor> g;
  grad_at(net, s, g);
  for (std::size_t i : {0u, 3u, 6u}) {
    for (double v : g[i].data) EXPECT_EQ(v, 0.0) << "layer " << i;
  }
}

TEST(GradCheck, DoublingLossScaleDoublesGradients) {
  const TinyNet net(2, 7);
  auto s = random_sample(2, 5, 6, 3);
  std::vector<Tensor> g1, g2;
  const double l1 = grad_at(net, s, g1);
  s.scale = 2.0;
  const double l2 = grad_at(net, s, g2);
  EXPECT_NEAR(l2, 2.0 * l1, 1e-12 * l1);
  for (std::size_t i = 0; i < g1.size(); ++i) {
    for (std::size_t k = 0; k < g1[i].data.size(); ++k) {
      EXPECT_NEAR(g2[i].data[k], 2.0 * g1[i].data[k], 1e-10 * (std::abs(g1[i].data[k]) + 1e-12));
    }
  }
}

TEST(TinyEpsModel, NullConditionMeansZeroChannel) {
  const TinyNet net(2, 11);
  const TinyEpsModel m(net, 1000);
  const Array2D y = testkit::random_array(8, 8, 1), c = testkit::random_array(8, 8, 2);
  const Array2D zeros(8, 8);
  EXPECT_TRUE(m.conditional());
  EXPECT_EQ(m.predict_eps(y, 250, nullptr), net.forward({&y, &zeros}, 0.25));
  EXPECT_EQ(m.predict_eps(y, 250, &c), net.forward({&y, &c}, 0.25));
  EXPECT_NE(m.predict_eps(y, 250, &c), m.predict_eps(y, 250, nullptr));
}

TEST(TinyEpsModel, OutputShapeMatchesInputAtEveryStep) {
  const TinyEpsModel m(TinyNet(2, 1), 1000);
  const Array2D y = testkit::random_array(12, 10, 1);
  for (int t = 1; t <= 1000; t += 37) {
    const Array2D e = m.predict_eps(y, t, &y);
    EXPECT_EQ(e.rows(), 12u);
    EXPECT_EQ(e.cols(), 10u);
  }
}

TEST(TrainEpsilon, UnconditionalTrainingLeavesConditionWeightsUntouched) {
  TinyNet net(2, 2);
  const Tensor w1 = net.tensors()[0];
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.steps_per_epoch = 20;
  cfg.p_cond = 0.0;
  train_epsilon(net, toy_sinograms(), NoiseSchedule(), cfg);
  // w1 is [hidden][channel][3][3]; channel 1 only ever sees the zeroed condition
  const auto& w = net.tensors()[0].data;
  bool image_moved = false;
  for (std::size_t h = 0; h < TinyNet::kHidden; ++h) {
    for (std::size_t k = 0; k < 9; ++k) {
      EXPECT_EQ(w[(h * 2 + 1) * 9 + k], w1.data[(h * 2 + 1) * 9 + k]);
      image_moved |= w[(h * 2) * 9 + k] != w1.data[(h * 2) * 9 + k];
    }
  }
  EXPECT_TRUE(image_moved);

  TinyNet cond(2, 2);
  cfg.p_cond = 1.0;
  train_epsilon(cond, toy_sinograms(), NoiseSchedule(), cfg);
  bool cond_moved = false;
  for (std::size_t h = 0; h < TinyNet::kHidden; ++h) {
    for (std::size_t k = 0; k < 9; ++k) {
      cond_moved |= cond.tensors()[0].data[(h * 2 + 1) * 9 + k] != w1.data[(h * 2 + 1) * 9 + k];
    }
  }
  EXPECT_TRUE(cond_moved);
}

TEST(TrainEpsilon, LossHalvesOnToySinograms) {
  TinyNet net(2, 0);
  const auto r = train_epsilon(net, toy_sinograms(), NoiseSchedule(), TrainConfig{});
  ASSERT_EQ(r.epoch_loss.size(), 10u);
  ASSERT_EQ(r.step_loss.size(), 500u);
  EXPECT_LT(r.epoch_loss.back(), 0.5 * r.epoch_loss.front());
}

TEST(TrainEpsilon, SeededTraceIsRepeatable) {
  TrainConfig cfg;
  cfg.epochs = 2;
  cfg.steps_per_epoch = 15;
  cfg.seed = 4;
  TinyNet a(2, 9), b(2, 9);
  const auto ra = train_epsilon(a, toy_sinograms(), NoiseSchedule(), cfg);
  const auto rb = train_epsilon(b, toy_sinograms(), NoiseSchedule(), cfg);
  EXPECT_EQ(ra.step_loss, rb.step_loss);
  EXPECT_EQ(a.tensors(), b.tensors());
}

TEST(TrainEpsilon, RejectsBadInputs) {
  TinyNet one(1, 0), two(2, 0);
  EXPECT_THROW(train_epsilon(one, toy_sinograms(), NoiseSchedule(), TrainConfig{}), std::invalid_argument);
  EXPECT_THROW(train_epsilon(two, {}, NoiseSchedule(), TrainConfig{}), std::invalid_argument);
  TrainConfig bad;
  bad.lr = 0.0;
  EXPECT_THROW(train_epsilon(two, toy_sinograms(), NoiseSchedule(), bad), std::invalid_argument);
  bad = TrainConfig{};
  bad.p_cond = 1.5;
  EXPECT_THROW(train_epsilon(two, toy_sinograms(), NoiseSchedule(), bad), std::invalid_argument);
}

TEST(TrainScore, LossHalvesOnToyBands) {
  std::vector<Array2D> bands;
  for (const auto& s : toy_sinograms()) bands.push_back(swt_decompose(s, WaveletFilter::haar).band(HH));
  // noise levels above the band scale, so the score-matching floor sits well below the start
  const auto sched = NoiseSchedule::linear(1000, 1e-4, 2e-2, 0.05, 1.0);
  TinyNet net(1, 0);
  const auto r = train_score(net, bands, sched, TrainConfig{});
  EXPECT_LE(r.epoch_loss.back(), 0.5 * r.epoch_loss.front());
}

TEST(TrainScore, LearnsStandardNormalScore) {
  // y ~ N(0, (1 + sigma^2) I) has score -y / (1 + sigma^2)
  std::vector<Array2D> data;
  for (std::uint64_t i = 0; i < 32; ++i) data.push_back(testkit::random_array(16, 16, 500, i));
  const auto sched = NoiseSchedule::linear(1000, 1e-4, 2e-2, 0.5, 5.0);
  TinyNet net(1, 1);
  TrainConfig cfg;
  cfg.lr = 1e-3;
  train_score(net, data, sched, cfg);
  const TinyScoreModel model(net, sched);
  Rng rng(77);
  for (double t : {0.25, 0.5, 0.75, 1.0}) {
    Array2D y = rng.normal_like(16, 16);
    y *= std::sqrt(1.0 + std::pow(sched.ve_sigma(t), 2));
    const Array2D s = model.score(y, t);
    const double cosine = -dot(s, y) / std::sqrt(sum_squares(s) * sum_squares(y));
    EXPECT_GE(cosine, 0.9) << "t = " << t;
  }
}

TEST(TrainScore, SeededTraceIsRepeatable) {
  TrainConfig cfg;
  cfg.epochs = 1;
  cfg.steps_per_epoch = 10;
  TinyNet a(1, 3), b(1, 3);
  EXPECT_EQ(train_score(a, toy_sinograms(), NoiseSchedule(), cfg).step_loss,
            train_score(b, toy_sinograms(), NoiseSchedule(), cfg).step_loss);
}

TEST(ParamsIo, RoundTripThroughStream) {
  const TinyNet net(2, 21);
  std::stringstream ss;
  write_tensors(ss, net.tensors());
  const auto back = read_tensors(ss);
  EXPECT_EQ(back, net.tensors());
  const TinyNet copy = TinyNet::from_tensors(back);
  const Array2D y = testkit::random_array(6, 6, 1);
  EXPECT_EQ(copy.forward({&y, &y}, 0.3), net.forward({&y, &y}, 0.3));
}

TEST(ParamsIo, RoundTripThroughFile) {
  const auto path = std::filesystem::temp_directory_path() / "stride_params_roundtrip.bin";
  const TinyNet net(1, 4);
  save_tensors(path.string(), net.tensors());
  EXPECT_EQ(load_tensors(path.string()), net.tensors());
  std::filesystem::remove(path);
  EXPECT_THROW(load_tensors(path.string()), std::runtime_error);
}

TEST(ParamsIo, HeaderLayout) {
  std::stringstream ss;
  write_tensors(ss, {Tensor{{2}, {1.0, -2.5}}});
  const std::string bytes = ss.str();
  ASSERT_EQ(bytes.size(), 8u + 4u + 4u + 4u + 16u);
  EXPECT_EQ(bytes.substr(0, 8), "STRDNET1");
  EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 1u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 2u);
}

TEST(ParamsIo, RejectsCorruptInput) {
  std::stringstream bad("NOTANET1");
  EXPECT_THROW(read_tensors(bad), std::runtime_error);
  std::stringstream ss;
  write_tensors(ss, TinyNet(1, 0).tensors());
  std::string bytes = ss.str();
  std::stringstream cut(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(read_tensors(cut), std::runtime_error);
  auto layers = TinyNet(1, 0).tensors();
  layers.pop_back();
  EXPECT_THROW(TinyNet::from_tensors(layers), ShapeError);
  layers = TinyNet(1, 0).tensors();
  layers[3].shape = {16, 15, 3, 3};
  layers[3].data.resize(16 * 15 * 9);
  EXPECT_THROW(TinyNet::from_tensors(layers), ShapeError);
}

TEST(Adam, FirstStepMovesByLearningRate) {
  std::vector<Tensor> p{Tensor{{3}, {1.0, 2.0, 3.0}}};
  const std::vector<Tensor> g{Tensor{{3}, {0.5, -4.0, 0.0}}};
  Adam opt;
  opt.lr = 0.01;
  opt.update(p, g);
  EXPECT_NEAR(p[0].data[0], 1.0 - 0.01, 1e-9);
  EXPECT_NEAR(p[0].data[1], 2.0 + 0.01, 1e-9);
  EXPECT_EQ(p[0].data[2], 3.0);
}
