#include <gtest/gtest.h>

#include <filesystem>
#include <memory>

#include "jerseyid/synthgen.hpp"
#include "jerseyid/weaklabel.hpp"

using namespace jerseyid;
using namespace jerseyid::weak;

namespace {

Tracklet tracklet_with(std::vector<bool> visibility, Jersey label = 7) {
  Tracklet t;
  t.id = "t";
  t.label = label;
  t.visibility = std::move(visibility);
  for (std::size_t k = 0; k < t.visibility.size(); ++k) {
    synth::Frame f(4, 4);
    f.pixels[0] = static_cast<float>(k) / 100.0f;
    t.frames.push_back(f);
  }
  return t;
}

bool covers_visible(const SampledWindow& w, const Tracklet& t) {
  for (std::size_t k : w.indices)
    if (t.visibility[k]) return true;
  return false;
}

}  // namespace

TEST(ApproxLabels, OracleReproducesVisibility) {
  synth::SynthConfig c;
  c.train_tracklets = 200;
  c.test_tracklets = 0;
  const auto ds = synth::gen_dataset(c);
  const auto scorer = oracle_scorer();
  for (const auto& t : ds.train) {
    const auto l = approx_labels(t, scorer, 0.5);
    EXPECT_EQ(l.bits, t.visibility) << t.id;
    EXPECT_EQ(l.source, LabelSource::oracle);
  }
}

TEST(ApproxLabels, ThresholdIsStrict) {
  const auto l = threshold_scores({0.5, 0.5000001, 0.4999999, 1.0, 0.0}, 0.5, LabelSource::model);
  EXPECT_EQ(l.bits, (std::vector<bool>{false, true, false, true, false}));
}

TEST(ApproxLabels, RejectsBadInput) {
  EXPECT_THROW(threshold_scores({0.2}, 0.0, LabelSource::model), std::invalid_argument);
  EXPECT_THROW(threshold_scores({0.2}, 1.0, LabelSource::model), std::invalid_argument);
  EXPECT_THROW(threshold_scores({1.2}, 0.5, LabelSource::model), std::invalid_argument);
  const FrameScorer short_scorer{LabelSource::model,
                                 [](const Tracklet&) { return std::vector<double>{0.9}; }};
  EXPECT_THROW(approx_labels(tracklet_with({true, false}), short_scorer), std::invalid_argument);
}

TEST(LabelCache, RoundTrip) {
  LabelCache cache;
  cache["a"] = FrameLabels{{true, false, true}, LabelSource::oracle, 0.5};
  cache["b"] = FrameLabels{{false}, LabelSource::model, 0.3};
  const auto path = std::filesystem::temp_directory_path() / "jerseyid_labels.jsonl";
  write_label_cache(path, cache);
  EXPECT_EQ(read_label_cache(path), cache);
  std::filesystem::remove(path);
}

TEST(Sampling, CutWindowPadsWithLastFrame) {
  const auto t = tracklet_with({true, false});
  const auto w = cut_window(t, 1, 4);
  EXPECT_EQ(w.indices, (std::vector<std::size_t>{1, 1, 1, 1}));
  EXPECT_EQ(w.frames.size(), 4u);
  EXPECT_THROW(cut_window(t, 0, 0), std::invalid_argument);
}

TEST(Sampling, WindowStartClampsAtZero) {
  EXPECT_EQ(window_start(5, 2), 3u);
  EXPECT_EQ(window_start(1, 3), 0u);
}

TEST(Sampling, EveryAnchorAndOffsetCoversAVisibleFrame) {
  for (std::size_t n = 1; n <= 12; ++n) {
    for (std::size_t m = 1; m <= 4; ++m) {
      for (std::size_t pattern = 1; pattern < (1u << n); ++pattern) {
        std::vector<bool> bits(n);
        for (std::size_t k = 0; k < n; ++k) bits[k] = (pattern >> k) & 1u;
        const auto t = tracklet_with(bits);
        for (std::size_t a = 0; a < n; ++a) {
          if (!bits[a]) continue;
          for (std::size_t o = 0; o < m; ++o) {
            ASSERT_TRUE(covers_visible(cut_window(t, window_start(a, o), m), t))
                << "n=" << n << " m=" << m << " a=" << a << " o=" << o;
          }
        }
      }
    }
  }
}

TEST(Sampling, SampledWindowsCoverVisibleFrames) {
  std::vector<bool> bits(191, false);
  bits[100] = true;
  const auto t = tracklet_with(bits);
  const FrameLabels labels{bits, LabelSource::oracle, 0.5};
  Rng rng(2);
  for (int i = 0; i < 2000; ++i) {
    const auto w = sample_window(t, labels, 30, rng);
    ASSERT_EQ(w.size(), 30u);
    ASSERT_TRUE(covers_visible(w, t));
  }
}

TEST(Sampling, NoVisibleLabelsFallsBackToUniform) {
  const auto t = tracklet_with(std::vector<bool>(20, false), std::nullopt);
  const FrameLabels labels{std::vector<bool>(20, false), LabelSource::oracle, 0.5};
  Rng rng(3);
  const auto w = sample_window(t, labels, 5, rng);
  EXPECT_EQ(w.size(), 5u);
  EXPECT_LE(w.start, 15u);
}

TEST(Sampling, LabelLengthMismatchThrows) {
  const auto t = tracklet_with({true, true});
  Rng rng(1);
  EXPECT_THROW(sample_window(t, FrameLabels{{true}, LabelSource::oracle, 0.5}, 2, rng),
               std::invalid_argument);
}

TEST(TrackletSampler, NullFraction) {
  std::vector<Tracklet> ts;
  for (int i = 0; i < 30; ++i) ts.push_back(tracklet_with({true}, i % 3 == 0 ? Jersey{} : Jersey{5}));
  const TrackletSampler sampler(ts, 0.1);
  Rng rng(4);
  int nulls = 0;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) nulls += sampler.draw(rng).is_null();
  EXPECT_NEAR(nulls / static_cast<double>(draws), 0.1, 0.01);
}

TEST(TrackletSampler, RejectsEmptyStratum) {
  std::vector<Tracklet> ts{tracklet_with({true})};
  EXPECT_THROW(TrackletSampler(ts, 0.1), std::invalid_argument);
  EXPECT_NO_THROW(TrackletSampler(ts, 0.0));
  EXPECT_THROW(TrackletSampler(ts, 1.5), std::invalid_argument);
}

TEST(Augment, NoneIsACentreCrop) {
  synth::Frame f(32, 32);
  for (std::size_t i = 0; i < f.pixels.size(); ++i) f.pixels[i] = static_cast<float>(i % 97) / 97.0f;
  SampledWindow w;
  w.frames = {f};
  w.indices = {0};
  const auto c = center_crop(w, AugmentConfig{});
  ASSERT_EQ(c.frames[0].height, 28u);
  for (std::size_t r = 0; r < 28; ++r)
    for (std::size_t col = 0; col < 28; ++col) EXPECT_EQ(c.frames[0].at(r, col), f.at(r + 2, col + 2));
}

TEST(Augment, SameParamsForWholeWindow) {
  synth::SynthConfig sc;
  sc.train_tracklets = 1;
  sc.test_tracklets = 0;
  sc.null_fraction = 0.0;
  sc.referee_fraction = 0.0;
  const auto t = synth::gen_dataset(sc).train.front();
  SampledWindow w = cut_window(t, 0, 4);
  w.frames[1] = w.frames[0];
  Rng rng(8);
  const auto a = augment_window(w, AugmentConfig{}, rng);
  EXPECT_EQ(a.frames[0], a.frames[1]);
  for (const auto& f : a.frames) {
    EXPECT_EQ(f.height, 28u);
    for (float v : f.pixels) {
      ASSERT_GE(v, 0.0f);
      ASSERT_LE(v, 1.0f);
    }
  }
  Rng again(8);
  EXPECT_EQ(augment_window(w, AugmentConfig{}, again).frames, a.frames);
}

TEST(Augment, RejectsOversizedCrop) {
  synth::Frame f(16, 16);
  AugmentConfig cfg;
  Rng rng(1);
  EXPECT_THROW(draw_augment_params(cfg, f, rng), std::invalid_argument);
}

TEST(FrameScorer, LearnsVisibility) {
  synth::SynthConfig sc;
  sc.train_tracklets = 30;
  sc.test_tracklets = 0;
  const auto ds = synth::gen_dataset(sc);
  FrameClassifierConfig fc;
  fc.steps = 150;
  const auto m = std::make_shared<const FrameClassifier>(train_frame_classifier(sc, ds.classes, fc));
  const auto scorer = model_scorer(m);
  EXPECT_EQ(scorer.source, LabelSource::model);
  std::size_t agree = 0, total = 0;
  for (const auto& t : ds.train) {
    const auto l = approx_labels(t, scorer, 0.5);
    ASSERT_EQ(l.size(), t.size());
    for (std::size_t k = 0; k < t.size(); ++k) agree += l.bits[k] == t.visibility[k];
    total += t.size();
  }
  EXPECT_GT(static_cast<double>(agree) / static_cast<double>(total), 0.8);
}
