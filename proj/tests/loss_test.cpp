#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "jerseyid/loss/multitask.hpp"

namespace jl = jerseyid::loss;
namespace nk = jerseyid::numkit;
using jerseyid::ClassSpace;

namespace {

jl::HeadOutputs uniform_outputs(std::size_t k) {
  return {nk::DiffTensor::full({k}, 1.0 / k), nk::DiffTensor::full({11}, 1.0 / 11),
          nk::DiffTensor::full({11}, 1.0 / 11)};
}

jl::HeadOutputs one_hot_outputs(const jl::LabelTriple& y, std::size_t k) {
  return {nk::one_hot(y.holistic, k), nk::one_hot(y.first_digit, 11),
          nk::one_hot(y.second_digit, 11)};
}

nk::DiffTensor random_distribution(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = u(rng);
  const double s = std::accumulate(v.begin(), v.end(), 0.0);
  for (auto& x : v) x /= s;
  return nk::DiffTensor::from({n}, v);
}

jl::LossWeights weights(double s1, double s2, double s3) {
  return {nk::DiffTensor::scalar(s1, true), nk::DiffTensor::scalar(s2, true),
          nk::DiffTensor::scalar(s3, true)};
}

}  // namespace

TEST(EncodeLabels, TwoDigitNumberSplits) {
  auto classes = ClassSpace::sequential(21);
  auto y = jl::encode_labels(12, classes);
  EXPECT_EQ(y.holistic, 12u);
  EXPECT_EQ(y.first_digit, 1u);
  EXPECT_EQ(y.second_digit, 2u);
}

TEST(EncodeLabels, SingleDigitUsesFirstSlot) {
  auto y = jl::encode_labels(2, ClassSpace::sequential(21));
  EXPECT_EQ(y.first_digit, 2u);
  EXPECT_EQ(y.second_digit, jl::kDigitAbsent);
}

TEST(EncodeLabels, NullIsAllAbsent) {
  auto y = jl::encode_labels(std::nullopt, ClassSpace::sequential(21));
  EXPECT_EQ(y.holistic, ClassSpace::kNullIndex);
  EXPECT_EQ(y.first_digit, jl::kDigitAbsent);
  EXPECT_EQ(y.second_digit, jl::kDigitAbsent);
}

TEST(EncodeLabels, RejectsOutOfRoster) {
  EXPECT_THROW(jl::encode_labels(40, ClassSpace::sequential(21)), std::out_of_range);
}

TEST(EncodeLabels, RoundTripsEveryClass) {
  auto classes = ClassSpace({7, 12, 3, 99, 40});
  for (std::size_t i = 0; i < classes.size(); ++i) {
    const auto j = classes.jersey_at(i);
    EXPECT_EQ(jl::decode_labels(jl::encode_labels(j, classes), classes), j);
  }
}

TEST(MultitaskLoss, PerfectPredictionsGiveZero) {
  auto classes = ClassSpace::sequential(21);
  for (jerseyid::Jersey j : {jerseyid::Jersey{}, jerseyid::Jersey{7}, jerseyid::Jersey{15}}) {
    auto y = jl::encode_labels(j, classes);
    EXPECT_DOUBLE_EQ(jl::multitask_loss(one_hot_outputs(y, 21), y, weights(0, 0, 0)).item(), 0.0);
  }
}

TEST(MultitaskLoss, UniformPredictionsAtFullScale) {
  auto classes = ClassSpace::sequential(86);
  auto y = jl::encode_labels(42, classes);
  const double l = jl::multitask_loss(uniform_outputs(86), y, weights(0, 0, 0)).item();
  EXPECT_NEAR(l, std::log(86.0) + 2 * std::log(11.0), 1e-9);
  EXPECT_NEAR(l, 9.2501, 1e-4);
}

TEST(MultitaskLoss, DoublingSigmaQuartersCoefficient) {
  auto classes = ClassSpace::sequential(86);
  auto y = jl::encode_labels(42, classes);
  auto out = uniform_outputs(86);
  const double base = jl::multitask_loss(out, y, weights(0, 0, 0)).item();
  const double doubled = jl::multitask_loss(out, y, weights(std::log(2.0), 0, 0)).item();
  const double l0 = std::log(86.0);
  EXPECT_NEAR(doubled, base - l0 + l0 / 4 + std::log(2.0), 1e-12);
}

TEST(MultitaskLoss, SigmaGradientIsAnalytic) {
  std::mt19937_64 rng(5);
  auto classes = ClassSpace::sequential(21);
  auto y = jl::encode_labels(13, classes);
  jl::HeadOutputs out{random_distribution(21, rng), random_distribution(11, rng),
                      random_distribution(11, rng)};
  auto w = weights(0.4, -0.7, 1.1);
  jl::multitask_loss(out, y, w).backward();
  const auto comps = jl::component_losses(out, y);
  const nk::DiffTensor* s[] = {&w.s1, &w.s2, &w.s3};
  for (int i = 0; i < 3; ++i) {
    const double si = (*s[i])[0];
    EXPECT_NEAR(s[i]->grad()[0], -2 * std::exp(-2 * si) * comps[i].item() + 1, 1e-12);
    const double h = 1e-6;
    auto plus = weights(0.4, -0.7, 1.1), minus = weights(0.4, -0.7, 1.1);
    nk::DiffTensor* sp[] = {&plus.s1, &plus.s2, &plus.s3};
    nk::DiffTensor* sm[] = {&minus.s1, &minus.s2, &minus.s3};
    sp[i]->mutable_data()[0] += h;
    sm[i]->mutable_data()[0] -= h;
    const double fd = (jl::multitask_loss(out, y, plus).item() -
                       jl::multitask_loss(out, y, minus).item()) / (2 * h);
    EXPECT_NEAR(s[i]->grad()[0], fd, 1e-6);
  }
}

TEST(MultitaskLoss, SigmaConvergesToTwiceTaskLoss) {
  const double frozen[] = {2.3, 0.7, 0.15};
  std::array<jl::DiffTensor, 3> l = {nk::DiffTensor::scalar(frozen[0]),
                                     nk::DiffTensor::scalar(frozen[1]),
                                     nk::DiffTensor::scalar(frozen[2])};
  auto w = weights(0, 0, 0);
  std::vector<nk::NamedParameter> params = {{"s1", w.s1}, {"s2", w.s2}, {"s3", w.s3}};
  nk::AdamState state({0.01});
  for (int it = 0; it < 5000; ++it) {
    nk::zero_grad(params);
    jl::combine(l, w, {}).backward();
    nk::adam_step(state, params);
  }
  const nk::DiffTensor* s[] = {&w.s1, &w.s2, &w.s3};
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(std::exp(2 * (*s[i])[0]), 2 * frozen[i], 1e-3);
}

TEST(MultitaskLoss, InvariantToConsistentRosterPermutation) {
  std::mt19937_64 rng(8);
  auto a = ClassSpace({3, 9, 14, 22});
  auto b = ClassSpace({22, 3, 14, 9});
  auto p0 = random_distribution(5, rng);
  auto p1 = random_distribution(11, rng), p2 = random_distribution(11, rng);
  std::vector<double> permuted(5);
  for (std::size_t i = 0; i < 5; ++i) permuted[b.index_of(a.jersey_at(i))] = p0[i];
  jl::HeadOutputs oa{p0, p1, p2};
  jl::HeadOutputs ob{nk::DiffTensor::from({5}, permuted), p1, p2};
  for (jerseyid::Jersey j : {jerseyid::Jersey{}, jerseyid::Jersey{9}, jerseyid::Jersey{22}}) {
    EXPECT_DOUBLE_EQ(jl::multitask_loss(oa, jl::encode_labels(j, a), weights(0.1, 0.2, 0.3)).item(),
                     jl::multitask_loss(ob, jl::encode_labels(j, b), weights(0.1, 0.2, 0.3)).item());
  }
}

TEST(MultitaskLoss, FixedWeightToggleIgnoresSigma) {
  auto classes = ClassSpace::sequential(86);
  auto y = jl::encode_labels(42, classes);
  auto w = weights(1.5, -2.0, 0.3);
  const double l = jl::multitask_loss(uniform_outputs(86), y, w, {false}).item();
  EXPECT_NEAR(l, std::log(86.0) + 2 * std::log(11.0), 1e-12);
}

TEST(MultitaskLoss, BatchAveragesComponents) {
  auto classes = ClassSpace::sequential(21);
  std::vector<jl::HeadOutputs> outs = {uniform_outputs(21), uniform_outputs(21)};
  std::vector<jl::LabelTriple> ys = {jl::encode_labels(3, classes), jl::encode_labels(17, classes)};
  auto r = jl::batch_multitask_loss(outs, ys, weights(0, 0, 0));
  EXPECT_NEAR(r.components[0], std::log(21.0), 1e-12);
  EXPECT_NEAR(r.total.item(), std::log(21.0) + 2 * std::log(11.0), 1e-12);
  EXPECT_THROW(jl::batch_multitask_loss(outs, std::span(ys).first(1), weights(0, 0, 0)),
               std::invalid_argument);
}
