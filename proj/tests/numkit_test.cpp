#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fd_check.hpp"
#include "jerseyid/numkit.hpp"

namespace nk = jerseyid::numkit;
using nk::DiffTensor;

namespace {

DiffTensor random_tensor(nk::Shape shape, std::uint64_t seed, double scale = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, scale);
  auto t = DiffTensor::zeros(std::move(shape), true);
  for (auto& v : t.mutable_data()) v = dist(rng);
  return t;
}

void expect_grads_match(const std::vector<fdcheck::Report>& reports, double tol = 1e-6) {
  for (const auto& r : reports) EXPECT_LT(r.rel_error, tol) << r.name;
}

}  // namespace

TEST(Numkit, MatmulValues) {
  auto a = DiffTensor::from({2, 3}, {1, 2, 3, 4, 5, 6});
  auto b = DiffTensor::from({3, 2}, {7, 8, 9, 10, 11, 12});
  auto c = nk::matmul(a, b);
  ASSERT_EQ(c.shape(), (nk::Shape{2, 2}));
  EXPECT_DOUBLE_EQ(c.at(0, 0), 58);
  EXPECT_DOUBLE_EQ(c.at(0, 1), 64);
  EXPECT_DOUBLE_EQ(c.at(1, 0), 139);
  EXPECT_DOUBLE_EQ(c.at(1, 1), 154);
}

TEST(Numkit, MatmulRejectsInnerMismatch) {
  auto a = DiffTensor::zeros({2, 3});
  auto b = DiffTensor::zeros({2, 2});
  EXPECT_THROW(nk::matmul(a, b), nk::ShapeError);
}

TEST(Numkit, SoftmaxValues) {
  auto p = nk::softmax(DiffTensor::from({3}, {1, 2, 4}), 0);
  EXPECT_NEAR(p[0], 0.04201006613406605, 1e-15);
  EXPECT_NEAR(p[1], 0.11419519938459449, 1e-15);
  EXPECT_NEAR(p[2], 0.8437947344813395, 1e-15);
}

TEST(Numkit, SoftmaxIsStableForLargeLogits) {
  auto p = nk::softmax(DiffTensor::from({2}, {1000, 1000}), 0);
  EXPECT_DOUBLE_EQ(p[0], 0.5);
  EXPECT_DOUBLE_EQ(p[1], 0.5);
}

TEST(Numkit, SoftmaxRejectsNaN) {
  EXPECT_THROW(nk::softmax(DiffTensor::from({2}, {1.0, std::nan("")}), 0), std::invalid_argument);
}

TEST(Numkit, SoftmaxRowsSumToOne) {
  auto p = nk::softmax(random_tensor({4, 7}, 3, 5.0), 1);
  for (std::size_t r = 0; r < 4; ++r) {
    double s = 0;
    for (std::size_t c = 0; c < 7; ++c) s += p.at(r, c);
    EXPECT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(Numkit, LayerNormValues) {
  auto y = nk::layer_norm(DiffTensor::from({4}, {1, 2, 3, 6}), DiffTensor::full({4}, 1.0),
                          DiffTensor::zeros({4}), 1e-5);
  EXPECT_NEAR(y[0], -1.0690434404458735, 1e-12);
  EXPECT_NEAR(y[1], -0.5345217202229368, 1e-12);
  EXPECT_NEAR(y[2], 0.0, 1e-12);
  EXPECT_NEAR(y[3], 1.6035651606688102, 1e-12);
}

TEST(Numkit, CrossEntropyClampsAtFloor) {
  auto p = DiffTensor::from({2}, {0.0, 1.0}, true);
  auto l = nk::cross_entropy(p, nk::one_hot(0, 2));
  EXPECT_NEAR(l.item(), -std::log(nk::kProbabilityFloor), 1e-9);
  l.backward();
  EXPECT_EQ(p.grad()[0], 0.0);
}

TEST(Numkit, OneHotRejectsOutOfRange) { EXPECT_THROW(nk::one_hot(3, 3), std::out_of_range); }

TEST(Numkit, BackwardNeedsScalarRoot) {
  auto x = random_tensor({3}, 1);
  EXPECT_THROW(nk::relu(x).backward(), nk::ShapeError);
}

TEST(Numkit, SharedSubexpressionAccumulates) {
  auto x = DiffTensor::from({1}, {3.0}, true);
  auto y = nk::mul(x, x);  // x^2
  nk::sum(nk::add(y, y)).backward();
  EXPECT_DOUBLE_EQ(x.grad()[0], 12.0);
}

TEST(Numkit, NoGradGuardStopsRecording) {
  auto x = random_tensor({3}, 2);
  DiffTensor y;
  {
    nk::NoGradGuard g;
    y = nk::sum(nk::exp(x));
  }
  EXPECT_FALSE(y.requires_grad());
  EXPECT_TRUE(nk::grad_enabled());
}

TEST(NumkitGrad, ElementwiseOps) {
  auto a = random_tensor({3, 4}, 10);
  auto b = random_tensor({3, 4}, 11);
  auto bias = random_tensor({4}, 12);
  expect_grads_match(fdcheck::check({{"a", a}, {"b", b}, {"bias", bias}}, [&] {
    auto t = nk::add_bias(nk::mul(nk::gelu(a), nk::exp(nk::scale(b, 0.3))), bias);
    return nk::mean(nk::mul(t, t));
  }));
}

TEST(NumkitGrad, Relu) {
  auto a = random_tensor({20}, 13);
  expect_grads_match(fdcheck::check({{"a", a}}, [&] { return nk::sum(nk::mul(nk::relu(a), a)); }));
}

TEST(NumkitGrad, MatmulTransposeSlices) {
  auto a = random_tensor({3, 5}, 20);
  auto b = random_tensor({5, 4}, 21);
  expect_grads_match(fdcheck::check({{"a", a}, {"b", b}}, [&] {
    auto c = nk::matmul(a, b);
    auto top = nk::slice_rows(c, 0, 2);
    auto left = nk::slice_cols(nk::transpose(c), 1, 3);
    auto joined = nk::concat_cols({nk::reshape(top, {4, 2}), left});
    auto stacked = nk::concat_rows({joined, joined});
    return nk::sum(nk::mul(stacked, stacked));
  }));
}

TEST(NumkitGrad, SoftmaxBothAxes) {
  auto x = random_tensor({3, 4}, 30);
  auto w = random_tensor({3, 4}, 31);
  for (std::size_t axis : {0u, 1u}) {
    expect_grads_match(fdcheck::check(
        {{"x", x}}, [&] { return nk::sum(nk::mul(nk::softmax(x, axis), w.detach())); }));
  }
}

TEST(NumkitGrad, LayerNorm) {
  auto x = random_tensor({3, 6}, 40);
  auto g = random_tensor({6}, 41);
  auto b = random_tensor({6}, 42);
  auto w = random_tensor({3, 6}, 43).detach();
  expect_grads_match(fdcheck::check({{"x", x}, {"gain", g}, {"bias", b}}, [&] {
    return nk::sum(nk::mul(nk::layer_norm(x, g, b, 1e-5), w));
  }));
}

TEST(NumkitGrad, CrossEntropy) {
  auto x = random_tensor({5}, 50);
  expect_grads_match(fdcheck::check({{"x", x}}, [&] {
    return nk::cross_entropy(nk::softmax(x, 0), nk::one_hot(2, 5));
  }));
}

TEST(NumkitGrad, ConvPoolStack) {
  auto x = random_tensor({2, 2, 6, 6}, 60);
  auto w1 = random_tensor({3, 2, 3, 3}, 61, 0.5);
  auto b1 = random_tensor({3}, 62);
  expect_grads_match(fdcheck::check({{"x", x}, {"w", w1}, {"b", b1}}, [&] {
    auto y = nk::avg_pool2(nk::conv2d(x, w1, b1, 1));
    auto z = nk::global_mean_pool(y);
    return nk::sum(nk::mul(z, z));
  }));
}

TEST(NumkitGrad, ConvWithoutPadding) {
  auto x = random_tensor({1, 1, 5, 4}, 70);
  auto w = random_tensor({2, 1, 2, 3}, 71);
  auto b = random_tensor({2}, 72);
  expect_grads_match(fdcheck::check({{"x", x}, {"w", w}, {"b", b}}, [&] {
    auto y = nk::conv2d(x, w, b, 0);
    return nk::sum(nk::mul(y, y));
  }));
}

TEST(Numkit, ConvMatchesDirectSum) {
  auto x = random_tensor({1, 2, 4, 5}, 80);
  auto w = random_tensor({3, 2, 3, 3}, 81);
  auto b = random_tensor({3}, 82);
  auto y = nk::conv2d(x, w, b, 1);
  ASSERT_EQ(y.shape(), (nk::Shape{1, 3, 4, 5}));
  for (std::size_t o = 0; o < 3; ++o)
    for (long i = 0; i < 4; ++i)
      for (long j = 0; j < 5; ++j) {
        double acc = b[o];
        for (std::size_t c = 0; c < 2; ++c)
          for (long ki = 0; ki < 3; ++ki)
            for (long kj = 0; kj < 3; ++kj) {
              const long si = i + ki - 1, sj = j + kj - 1;
              if (si < 0 || sj < 0 || si >= 4 || sj >= 5) continue;
              acc += w[((o * 2 + c) * 3 + ki) * 3 + kj] * x[(c * 4 + si) * 5 + sj];
            }
        EXPECT_NEAR(y[(o * 4 + i) * 5 + j], acc, 1e-12);
      }
}

TEST(Adam, HandTrace) {
  auto x = DiffTensor::from({1}, {1.0}, true);
  std::vector<nk::NamedParameter> params = {{"x", x}};
  nk::AdamState state({0.1, 0.9, 0.999, 1e-8});
  const double expected[] = {0.9000000005, 0.8733662967024315, 0.8393233821389425};
  const double grads[] = {2.0, -1.0, 0.5};
  for (int t = 0; t < 3; ++t) {
    nk::zero_grad(params);
    x.mutable_grad()[0] = grads[t];
    nk::adam_step(state, params);
    EXPECT_NEAR(x[0], expected[t], 1e-14) << "step " << t + 1;
  }
}

TEST(Adam, RejectsNonFiniteGradientWithoutUpdating) {
  auto a = DiffTensor::from({1}, {1.0}, true);
  auto b = DiffTensor::from({1}, {2.0}, true);
  std::vector<nk::NamedParameter> params = {{"a", a}, {"b", b}};
  nk::AdamState state;
  a.mutable_grad()[0] = 1.0;
  b.mutable_grad()[0] = std::nan("");
  try {
    nk::adam_step(state, params);
    FAIL();
  } catch (const nk::NonFiniteGradient& e) {
    EXPECT_EQ(e.parameter(), "b");
  }
  EXPECT_EQ(a[0], 1.0);
}

TEST(Adam, RejectsNonPositiveLearningRate) {
  EXPECT_THROW(nk::AdamState({0.0}), std::invalid_argument);
}
