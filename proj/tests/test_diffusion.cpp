#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "stride/diffusion.hpp"
#include "test_support.hpp"

using namespace stride;

namespace {

// Grid search over [0, 1] that evaluates the error norm directly from the vectors.
double grid_argmin(const std::vector<double>& zeta, const std::vector<double>& xi, double step) {
  const int n = static_cast<int>(std::llround(1.0 / step));
  double best = std::numeric_limits<double>::infinity(), arg = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double l = static_cast<double>(k) / n;
    double f = 0.0;
    for (std::size_t i = 0; i < zeta.size(); ++i) {
      const double e = (1.0 - l) * zeta[i] + l * xi[i];
      f += e * e;
    }
    if (f < best) {
      best = f;
      arg = l;
    }
  }
  return arg;
}

double error_norm2(const std::vector<double>& zeta, const std::vector<double>& xi, double l) {
  double f = 0.0;
  for (std::size_t i = 0; i < zeta.size(); ++i) {
    const double e = (1.0 - l) * zeta[i] + l * xi[i];
    f += e * e;
  }
  return f;
}

std::vector<double> random_vector(Rng& rng, std::size_t n) {
  std::vector<double> v(n);
  for (double& x : v) x = rng.normal();
  return v;
}

}  // namespace

TEST(NoiseSchedule, LinearBetasAndProducts) {
  const auto s = NoiseSchedule::linear(1000, 1e-4, 2e-2);
  double ab = 1.0;
  EXPECT_EQ(s.alpha_bar(0), 1.0);
  for (int t = 1; t <= 1000; ++t) {
    const double b = 1e-4 + (2e-2 - 1e-4) * (t - 1) / 999.0;
    ab *= 1.0 - b;
    EXPECT_NEAR(s.beta(t), b, 1e-15);
    EXPECT_NEAR(s.alpha(t), 1.0 - b, 1e-15);
    EXPECT_NEAR(s.alpha_bar(t), ab, 1e-13);
    EXPECT_GT(s.beta(t), 0.0);
    EXPECT_LT(s.beta(t), 1.0);
    if (t > 1) {
      EXPECT_GT(s.beta(t), s.beta(t - 1));
    }
    EXPECT_LT(s.alpha_bar(t), s.alpha_bar(t - 1));
    EXPECT_GT(s.alpha_bar(t), 0.0);
  }
}

TEST(NoiseSchedule, VeSigmaIncreasing) {
  const NoiseSchedule s;
  EXPECT_GE(s.ve_sigma(0.0), 0.0);
  EXPECT_NEAR(s.ve_sigma(0.0), s.ve_sigma_min(), 1e-15);
  EXPECT_NEAR(s.ve_sigma(1.0), s.ve_sigma_max(), 1e-15);
  for (int k = 1; k <= 200; ++k) EXPECT_GT(s.ve_sigma(k / 200.0), s.ve_sigma((k - 1) / 200.0));
}

TEST(NoiseSchedule, RejectsBadParameters) {
  EXPECT_THROW(NoiseSchedule::linear(0), std::invalid_argument);
  EXPECT_THROW(NoiseSchedule::linear(10, 0.0, 0.1), std::invalid_argument);
  EXPECT_THROW(NoiseSchedule::linear(10, 0.2, 0.1), std::invalid_argument);
  EXPECT_THROW(NoiseSchedule::linear(10, 0.1, 1.0), std::invalid_argument);
  EXPECT_THROW(NoiseSchedule::linear(10, 0.1, 0.2, 0.5, 0.4), std::invalid_argument);
  const NoiseSchedule s;
  EXPECT_THROW(s.alpha_bar(1001), std::invalid_argument);
  EXPECT_THROW(s.beta(0), std::invalid_argument);
}

TEST(ForwardNoising, StepZeroIsIdentity) {
  const Array2D y0 = testkit::random_array(5, 7, 1);
  const auto n = forward_noising(y0, 0, NoiseSchedule(), 3);
  EXPECT_EQ(n.y_t, y0);
}

TEST(ForwardNoising, SeededAndRepeatable) {
  const Array2D y0 = testkit::random_array(5, 7, 1);
  const auto a = forward_noising(y0, 500, NoiseSchedule(), 3);
  const auto b = forward_noising(y0, 500, NoiseSchedule(), 3);
  EXPECT_EQ(a.y_t, b.y_t);
  EXPECT_EQ(a.eps, b.eps);
}

TEST(ForwardNoising, MonteCarloMoments) {
  // one step with beta = 0.75 gives alpha_bar = 0.25 exactly
  const auto s = NoiseSchedule::linear(1, 0.75, 0.75);
  ASSERT_DOUBLE_EQ(s.alpha_bar(1), 0.25);
  const double y = 2.0;
  const auto n = forward_noising(Array2D(100000, 1, y), 1, s, 12);
  double m = 0.0, m2 = 0.0;
  for (double v : n.y_t.flat()) {
    m += v;
    m2 += v * v;
  }
  const double N = 100000.0;
  m /= N;
  const double sd = std::sqrt((m2 - N * m * m) / (N - 1.0));
  EXPECT_NEAR(m, 0.5 * y, 0.02 * 0.5 * y);
  EXPECT_NEAR(sd, std::sqrt(0.75), 0.02 * std::sqrt(0.75));
}

TEST(PredictX0, InvertsForwardNoising) {
  const NoiseSchedule s;
  const Array2D y0 = testkit::random_array(6, 9, 2);
  for (int t : {1, 10, 250, 500, 900, 1000}) {
    const auto n = forward_noising(y0, t, s, 7);
    EXPECT_LE(max_abs_diff(predict_x0(n.y_t, n.eps, t, s), y0), 1e-5) << t;
  }
  const Array2D yt = testkit::random_array(3, 3, 9);
  EXPECT_EQ(predict_x0(yt, Array2D(3, 3), 0, s), yt);
}

TEST(GuidanceWeight, Examples) {
  GuidanceConfig c;
  c.nu = 1.0;
  EXPECT_DOUBLE_EQ(guidance_weight(c.T, c), 1.0);
  EXPECT_DOUBLE_EQ(guidance_weight(0, c), 0.0);
  c.nu = 0.8;
  EXPECT_NEAR(guidance_weight(c.T / 2, c), 0.4, 1e-15);
  EXPECT_DOUBLE_EQ(guidance_weight(0, c), 0.0);
  c.mode = GuidanceMode::fixed;
  c.fixed_lambda = 0.3;
  EXPECT_DOUBLE_EQ(guidance_weight(700, c), 0.3);
}

TEST(GuidanceWeight, TemporalScheduleShrinksTowardZero) {
  GuidanceConfig c;
  c.nu = 0.7;
  double prev = std::numeric_limits<double>::infinity();
  for (int t = c.T; t >= 0; --t) {
    const double w = guidance_weight(t, c);
    EXPECT_LE(w, prev);
    EXPECT_LE(w, c.nu);
    EXPECT_GE(w, 0.0);
    prev = w;
  }
}

TEST(ApplySparseGuidance, Limits) {
  const Array2D y0 = testkit::random_array(6, 4, 1), ys = testkit::random_array(6, 4, 2);
  const auto m = make_sparse_mask(6, 2);
  EXPECT_EQ(apply_sparse_guidance(y0, ys, m, 0.0).value, y0);
  const auto one = apply_sparse_guidance(y0, ys, m, 1.0).value;
  for (std::size_t r = 0; r < 6; ++r) {
    for (std::size_t c = 0; c < 4; ++c) EXPECT_EQ(one(r, c), m.active[r] ? ys(r, c) : y0(r, c));
  }
}

TEST(ApplySparseGuidance, HalfwayArithmetic) {
  SparseMask m;
  m.active = {true};
  const auto r = apply_sparse_guidance(Array2D(1, 1, 2.0), Array2D(1, 1, 4.0), m, 0.5);
  EXPECT_DOUBLE_EQ(r.value(0, 0), 3.0);
}

TEST(ApplySparseGuidance, ClampsAndNeverTouchesUnobservedRows) {
  const Array2D y0 = testkit::random_array(9, 3, 1), ys = testkit::random_array(9, 3, 2);
  const auto m = make_sparse_mask(9, 3);
  for (double l : {-0.5, 0.3, 1.7}) {
    const auto r = apply_sparse_guidance(y0, ys, m, l);
    EXPECT_EQ(r.clamped, l < 0.0 || l > 1.0);
    EXPECT_GE(r.lambda, 0.0);
    EXPECT_LE(r.lambda, 1.0);
    for (std::size_t i = 0; i < 9; ++i) {
      if (m.active[i]) continue;
      for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(r.value(i, c), y0(i, c));
    }
  }
  EXPECT_THROW(apply_sparse_guidance(y0, ys, m, std::nan("")), std::invalid_argument);
}

TEST(DdimStep, FinalStepReturnsEstimate) {
  const NoiseSchedule s;
  const Array2D yt = testkit::random_array(4, 4, 1), y0 = testkit::random_array(4, 4, 2),
                eps = testkit::random_array(4, 4, 3);
  EXPECT_EQ(ddim_step(yt, y0, eps, 10, 0, 0.0, s, nullptr), y0);
}

TEST(DdimStep, ExactNoiseTrajectoryRecoversData) {
  const NoiseSchedule s;
  const Array2D y0 = testkit::random_array(8, 8, 4);
  Rng rng(5);
  Array2D y = rng.normal_like(8, 8);
  const auto ts = ddim_timesteps(s.T(), 100);
  for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
    const int t = ts[i];
    const double ab = s.alpha_bar(t);
    Array2D eps = y - std::sqrt(ab) * y0;
    eps *= 1.0 / std::sqrt(1.0 - ab);
    y = ddim_step(y, predict_x0(y, eps, t, s), eps, t, ts[i + 1], 0.0, s, nullptr);
  }
  EXPECT_LE(max_abs_diff(y, y0), 1e-4);
}

TEST(DdimStep, StochasticStepIsSeeded) {
  const NoiseSchedule s;
  const Array2D yt = testkit::random_array(4, 4, 1), y0 = testkit::random_array(4, 4, 2),
                eps = testkit::random_array(4, 4, 3);
  Rng a(9), b(9);
  EXPECT_EQ(ddim_step(yt, y0, eps, 500, 490, 0.05, s, &a), ddim_step(yt, y0, eps, 500, 490, 0.05, s, &b));
}

TEST(DdimTimesteps, UniformStride) {
  const auto ts = ddim_timesteps(1000, 100);
  ASSERT_EQ(ts.size(), 101u);
  for (std::size_t i = 0; i < 100; ++i) EXPECT_EQ(ts[i], 1000 - 10 * static_cast<int>(i));
  EXPECT_EQ(ts.back(), 0);
}

TEST(DdpmPosteriorMean, ZeroNoisePrediction) {
  const NoiseSchedule s;
  const Array2D yt = testkit::random_array(3, 5, 1);
  const Array2D got = ddpm_posterior_mean(yt, Array2D(3, 5), 400, s);
  EXPECT_LE(max_abs_diff(got, (1.0 / std::sqrt(s.alpha(400))) * yt), 1e-14);
}

TEST(DdpmPosteriorMean, FirstStepRecoversData) {
  const auto s = NoiseSchedule::linear(1000, 1e-8, 2e-2);
  const Array2D y0 = testkit::random_array(3, 5, 2);
  const auto n = forward_noising(y0, 1, s, 4);
  EXPECT_LE(max_abs_diff(ddpm_posterior_mean(n.y_t, n.eps, 1, s), y0), 1e-6);
}

TEST(DdpmPosteriorMean, EqualsAncestralDdimMean) {
  const NoiseSchedule s;
  const Array2D yt = testkit::random_array(6, 6, 1), eps = testkit::random_array(6, 6, 2);
  for (int t : {2, 50, 400, 1000}) {
    const double sigma = ancestral_sigma(t, t - 1, s);
    Rng r(11);
    const Array2D step = ddim_step(yt, predict_x0(yt, eps, t, s), eps, t, t - 1, sigma, s, &r);
    Rng r2(11);
    const Array2D z = r2.normal_like(6, 6);
    const Array2D mean = step - sigma * z;
    EXPECT_LE(max_abs_diff(mean, ddpm_posterior_mean(yt, eps, t, s)), 1e-6) << t;
  }
}

TEST(CfgCombine, Examples) {
  const Array2D c = testkit::random_array(2, 3, 1), u = testkit::random_array(2, 3, 2);
  EXPECT_EQ(cfg_combine(c, u, 0.0), c);
  EXPECT_LE(max_abs_diff(cfg_combine(c, c, 3.7), c), 1e-14);
  EXPECT_DOUBLE_EQ(cfg_combine(Array2D(1, 1, 1.0), Array2D(1, 1, 0.0), 2.0)(0, 0), 3.0);
}

TEST(OptimalLambda, Examples) {
  EXPECT_NEAR(optimal_lambda(make_lambda_inputs(std::vector<double>{1, 0}, std::vector<double>{0, 1})),
              0.5, 1e-15);
  EXPECT_NEAR(grid_argmin({1, 0}, {0, 1}, 1e-4), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(optimal_lambda(make_lambda_inputs(std::vector<double>{0.3, -2.0}, std::vector<double>{0, 0})),
                   1.0);
  EXPECT_DOUBLE_EQ(optimal_lambda(make_lambda_inputs(std::vector<double>{0, 0}, std::vector<double>{1, 2})),
                   0.0);
}

TEST(OptimalLambda, AgreesWithDirectGridSearch) {
  Rng rng(3);
  for (int k = 0; k < 300; ++k) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform_int(0, 6));
    auto zeta = random_vector(rng, n), xi = random_vector(rng, n);
    if (k % 3 == 0) {
      for (std::size_t i = 0; i < n; ++i) xi[i] = zeta[i] * (2.0 + rng.uniform()) + 0.01 * xi[i];
    }
    const auto in = make_lambda_inputs(zeta, xi);
    EXPECT_NEAR(optimal_lambda(in), grid_argmin(zeta, xi, 1e-4), 1e-4);
    EXPECT_NEAR(optimal_lambda_oracle(in, 1e-4), grid_argmin(zeta, xi, 1e-4), 1e-4 + 1e-12);
  }
}

TEST(OptimalLambda, BeatsEveryCoarseGridPoint) {
  Rng rng(4);
  for (int k = 0; k < 200; ++k) {
    const auto zeta = random_vector(rng, 5), xi = random_vector(rng, 5);
    const double l = optimal_lambda(make_lambda_inputs(zeta, xi));
    const double f = error_norm2(zeta, xi, l);
    for (int j = 0; j <= 10; ++j) EXPECT_LE(f, error_norm2(zeta, xi, j / 10.0) + 1e-9);
  }
}

TEST(OptimalLambdaOracle, TiesGoToLowestIndex) {
  const std::vector<double> v{1.0, -2.0, 0.5};
  EXPECT_EQ(optimal_lambda_oracle(make_lambda_inputs(v, v), 1e-4), 0.0);
}

TEST(OptimalLambdaOracle, NoWorseThanEndpoints) {
  Rng rng(8);
  for (int k = 0; k < 100; ++k) {
    const auto in = make_lambda_inputs(random_vector(rng, 4), random_vector(rng, 4));
    const double l = optimal_lambda_oracle(in, 1e-3);
    EXPECT_LE(lambda_objective(in, l), lambda_objective(in, 0.0));
    EXPECT_LE(lambda_objective(in, l), lambda_objective(in, 1.0));
  }
}

TEST(LambdaInputs, ObjectiveMatchesVectors) {
  Rng rng(5);
  const auto zeta = random_vector(rng, 7), xi = random_vector(rng, 7);
  const auto in = make_lambda_inputs(zeta, xi);
  for (double l : {0.0, 0.25, 0.8, 1.0}) EXPECT_NEAR(lambda_objective(in, l), error_norm2(zeta, xi, l), 1e-12);
  EXPECT_LE(std::abs(in.c), in.a * in.b + 1e-12);
}

TEST(LambdaInputs, ValidatorRejectsCauchySchwarzViolation) {
  EXPECT_THROW((LambdaInputs{1.0, 1.0, 1.5}.validate()), std::invalid_argument);
  EXPECT_THROW((LambdaInputs{-1.0, 1.0, 0.0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((LambdaInputs{1.0, 1.0, 1.0}.validate()));
  EXPECT_THROW(make_lambda_inputs(std::vector<double>{1.0}, std::vector<double>{1.0, 2.0}), ShapeError);
}

TEST(LambdaWorstCaseBound, Examples) {
  EXPECT_DOUBLE_EQ(lambda_worst_case_bound(2.0, 1.0), 1.0);
  EXPECT_DOUBLE_EQ(lambda_worst_case_bound(1.0, 2.0), 0.0);
}

TEST(LambdaWorstCaseBound, MatchesOneDimensionalGrid) {
  Rng rng(6);
  for (int k = 0; k < 100; ++k) {
    const double a = 3.0 * rng.uniform(), b = 3.0 * rng.uniform();
    double best = std::numeric_limits<double>::infinity(), arg = 0.0;
    for (int j = 0; j <= 10000; ++j) {
      const double l = j / 10000.0;
      const double v = (1.0 - l) * a + l * b;
      if (v * v < best) {
        best = v * v;
        arg = l;
      }
    }
    EXPECT_NEAR(lambda_worst_case_bound(a, b), arg, 1e-4) << a << " " << b;
  }
}

TEST(OptimalLambda, DecaysForContractingErrors) {
  Rng rng(7);
  for (int k = 0; k < 50; ++k) {
    const auto z0 = random_vector(rng, 6), xi = random_vector(rng, 6);
    const double rho = 0.5 + 0.45 * rng.uniform();
    double prev = std::numeric_limits<double>::infinity();
    for (int t = 0; t < 40; ++t) {
      std::vector<double> z = z0;
      for (double& v : z) v *= std::pow(rho, t);
      const auto in = make_lambda_inputs(z, xi);
      if (!(in.c < in.b * in.b)) continue;
      const double l = optimal_lambda(in);
      EXPECT_LE(l, prev + 1e-12);
      prev = l;
    }
  }
}

TEST(GuidanceConfig, Validation) {
  GuidanceConfig c;
  c.nu = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.fixed_lambda = std::nan("");
  c.mode = GuidanceMode::fixed;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.oracle_step = 0.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
