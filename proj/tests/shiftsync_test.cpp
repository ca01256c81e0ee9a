#include <gtest/gtest.h>

#include <numeric>

#include "jerseyid/model/params.hpp"
#include "jerseyid/shiftsync.hpp"
#include "jerseyid/synthgen.hpp"
#include "fixtures.hpp"

using namespace jerseyid;
using namespace jerseyid::shiftsync;
using synth::ShiftDb;
using synth::ShiftRecord;

namespace {

ShiftDb two_record_db() {
  return ShiftDb({{TeamSide::home, 12, 0.0, 45.0}, {TeamSide::away, 2, 30.0, 90.0}});
}

std::vector<double> random_probs(std::size_t k, Rng& rng) {
  std::vector<double> p(k);
  double total = 0.0;
  for (auto& v : p) total += v = uniform01(rng);
  for (auto& v : p) v /= total;
  return p;
}

ClassSpace full_scale_classes() {
  std::vector<int> j;
  for (int i = 1; i <= 84; ++i) j.push_back(i);
  j.push_back(97);
  return ClassSpace(j);
}

}  // namespace

TEST(Clock, RoundTripEverySecond) {
  for (int t = 0; t < 3600; ++t) {
    const auto r = read_clock(synth::render_clock_strip(t));
    ASSERT_EQ(r.t, t);
    EXPECT_GT(r.confidence, 0.99);
  }
}

TEST(Clock, RejectsNoise) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    synth::Frame strip(synth::kClockHeight, synth::kClockWidth);
    for (auto& v : strip.pixels) v = static_cast<float>(uniform01(rng));
    EXPECT_THROW(read_clock(strip), UnreadableClock);
  }
}

TEST(Clock, RejectsBlankAndWrongGeometry) {
  EXPECT_THROW(read_clock(synth::Frame(synth::kClockHeight, synth::kClockWidth)), UnreadableClock);
  EXPECT_THROW(read_clock(synth::Frame(5, 5)), std::invalid_argument);
}

TEST(Clock, ClipWindowWidensEnd) {
  const auto w = read_clip_window(synth::render_clock_strip(100.4), synth::render_clock_strip(101.9));
  ASSERT_TRUE(w.has_value());
  EXPECT_EQ(w->t_s, 100.0);
  EXPECT_EQ(w->t_e, 102.0);
  synth::Frame noise(synth::kClockHeight, synth::kClockWidth, 1, 0.5f);
  noise.pixels[3] = 1.0f;
  EXPECT_FALSE(read_clip_window(noise, synth::render_clock_strip(5)).has_value());
}

TEST(ShiftsInWindow, Examples) {
  const auto db = two_record_db();
  auto s = shifts_in_window(db, 40, 50);
  EXPECT_EQ(s.home, (std::set<int>{12}));
  EXPECT_EQ(s.away, (std::set<int>{2}));
  s = shifts_in_window(db, 46, 50);
  EXPECT_TRUE(s.home.empty());
  EXPECT_EQ(s.away, (std::set<int>{2}));
  s = shifts_in_window(db, 45, 45);
  EXPECT_EQ(s.home, (std::set<int>{12}));
  EXPECT_THROW(shifts_in_window(db, 5, 4), std::invalid_argument);
}

TEST(ShiftsInWindow, MatchesBruteForce) {
  Rng rng(12);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<ShiftRecord> recs;
    const std::size_t n = 1 + uniform_index(rng, 20);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = uniform(rng, 0, 100), len = uniform(rng, 0.5, 30);
      recs.push_back({uniform01(rng) < 0.5 ? TeamSide::home : TeamSide::away,
                      static_cast<int>(uniform_index(rng, 30)), a, a + len});
    }
    const ShiftDb db(recs);
    const double t_s = uniform(rng, 0, 120), t_e = t_s + uniform(rng, 0, 20);
    std::set<int> home, away;
    for (const auto& r : recs) {
      const bool disjoint = r.end_s < t_s || r.start_s > t_e;
      if (!disjoint) (r.team == TeamSide::home ? home : away).insert(r.jersey);
    }
    const auto got = shifts_in_window(db, t_s, t_e);
    ASSERT_EQ(got.home, home);
    ASSERT_EQ(got.away, away);
  }
}

TEST(ShiftVector, FullScaleBits) {
  const auto classes = full_scale_classes();
  ASSERT_EQ(classes.size(), 86u);
  const auto v = build_shift_vector({12, 97}, TeamSide::home, classes);
  EXPECT_EQ(v.count(), 3u);
  EXPECT_TRUE(v.bits[ClassSpace::kNullIndex]);
  EXPECT_TRUE(v.bits[classes.index_of(12)]);
  EXPECT_TRUE(v.bits[classes.index_of(97)]);
}

TEST(ShiftVector, EmptyAndFull) {
  const auto classes = ClassSpace::sequential(10);
  EXPECT_EQ(build_shift_vector({}, TeamSide::away, classes).count(), 1u);
  const std::set<int> all(classes.jerseys().begin(), classes.jerseys().end());
  EXPECT_EQ(build_shift_vector(all, TeamSide::away, classes).count(), 10u);
  EXPECT_THROW(build_shift_vector({42}, TeamSide::away, classes), std::out_of_range);
}

TEST(Aggregate, Examples) {
  const std::vector<std::vector<double>> w = {{0.2, 0.8}, {0.4, 0.6}};
  const auto p = aggregate_tracklet(w);
  EXPECT_NEAR(p[0], 0.3, 1e-12);
  EXPECT_NEAR(p[1], 0.7, 1e-12);
  const std::vector<std::vector<double>> one = {{0.1, 0.2, 0.7}};
  EXPECT_EQ(aggregate_tracklet(one), one[0]);
  EXPECT_THROW(aggregate_tracklet(std::span<const std::vector<double>>{}), std::invalid_argument);
  const std::vector<std::vector<double>> ragged = {{0.5, 0.5}, {1.0}};
  EXPECT_THROW(aggregate_tracklet(ragged), std::invalid_argument);
}

TEST(Aggregate, SumsToOne) {
  Rng rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<std::vector<double>> w;
    for (std::size_t i = 0; i < 1 + uniform_index(rng, 6); ++i) w.push_back(random_probs(21, rng));
    const auto p = aggregate_tracklet(w);
    EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
  }
}

TEST(MaskedIdentity, FigureFiveScenario) {
  const ClassSpace classes({2, 12});
  const std::vector<double> p = {0.1, 0.35, 0.55};
  EXPECT_EQ(argmax_lowest(p), classes.index_of(12));
  const auto v = build_shift_vector({2}, TeamSide::away, classes);
  EXPECT_EQ(masked_identity(p, v), classes.index_of(2));
}

TEST(MaskedIdentity, AllOnesEqualsArgmax) {
  Rng rng(6);
  const auto ones = all_ones_vector(86, TeamSide::home);
  for (int trial = 0; trial < 10000; ++trial) {
    const auto p = random_probs(86, rng);
    ASSERT_EQ(masked_identity(p, ones), argmax_lowest(p));
  }
}

TEST(MaskedIdentity, TiesAndErrors) {
  EXPECT_EQ(argmax_lowest(std::vector<double>{0.25, 0.5, 0.5}), 1u);
  const auto v = build_shift_vector({}, TeamSide::home, ClassSpace::sequential(3));
  EXPECT_EQ(masked_identity(std::vector<double>{0.0, 0.5, 0.5}, v), 0u);
  EXPECT_THROW(masked_identity(std::vector<double>{1.0}, v), std::invalid_argument);
}

TEST(MaskedIdentity, MaskingOnlyRemovesCompetitors) {
  Rng rng(7);
  const auto classes = ClassSpace::sequential(21);
  for (int trial = 0; trial < 5000; ++trial) {
    const auto p = random_probs(21, rng);
    const std::size_t truth = argmax_lowest(p);
    std::set<int> on;
    for (int j : classes.jerseys())
      if (uniform01(rng) < 0.3) on.insert(j);
    if (truth != ClassSpace::kNullIndex) on.insert(*classes.jersey_at(truth));
    ASSERT_EQ(masked_identity(p, build_shift_vector(on, TeamSide::home, classes)), truth);
  }
}

TEST(Identify, RefereesBypassMasking) {
  const auto classes = ClassSpace::sequential(5);
  const synth::Rosters rosters{{1, 2}, {3, 4}};
  const ShiftDb db({{TeamSide::home, 1, 0.0, 100.0}});
  synth::Tracklet t;
  t.id = "ref";
  t.team_side = TeamSide::referee;
  t.clip_start_s = 10.0;
  t.clip_end_s = 12.0;
  const MaskContext ctx{&classes, &db, &rosters};
  const auto pred = identify(t, {0.1, 0.1, 0.1, 0.1, 0.6}, ctx);
  EXPECT_EQ(pred.unmasked, 4u);
  EXPECT_EQ(pred.masked, 4u);
  EXPECT_EQ(pred.roster, 4u);
  EXPECT_FALSE(pred.clock_read);

  t.team_side = TeamSide::home;
  const auto home = identify(t, {0.1, 0.2, 0.1, 0.1, 0.5}, ctx);
  EXPECT_TRUE(home.clock_read);
  EXPECT_EQ(home.unmasked, 4u);
  EXPECT_EQ(home.masked, 1u);
  EXPECT_EQ(home.roster, 1u);
}

TEST(Inference, WindowsTileTheTracklet) {
  auto cfg = fixtures::tiny_config();
  synth::Tracklet t;
  t.id = "x";
  std::mt19937_64 rng(2);
  for (int i = 0; i < 7; ++i) t.frames.push_back(fixtures::random_frame(18, 18, rng));
  t.visibility.assign(7, false);
  const auto windows = inference_windows(t, cfg);
  ASSERT_EQ(windows.size(), 3u);
  EXPECT_EQ(windows[2].indices, (std::vector<std::size_t>{6, 6, 6}));
  EXPECT_EQ(windows[0].frames[0].height, cfg.frame_height);
  const auto params = model::init_params(cfg, 1);
  const auto p = tracklet_probabilities(t, params, cfg);
  EXPECT_EQ(p.size(), cfg.classes);
  EXPECT_NEAR(std::accumulate(p.begin(), p.end(), 0.0), 1.0, 1e-9);
}

TEST(Inference, ReportRow) {
  const auto classes = ClassSpace::sequential(5);
  TrackletPrediction pred{"trk1", TeamSide::away, {}, 0, 3, 2, true};
  EXPECT_EQ(report_header(), "tracklet_id,team_side,unmasked_id,masked_id,roster_id,true_id");
  EXPECT_EQ(report_row(pred, 3, classes), "trk1,away,null,3,2,3");
}
