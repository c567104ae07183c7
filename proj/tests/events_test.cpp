/* Copyright 2026 The AppWatch Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <random>

#include <gtest/gtest.h>

#include "appwatch/events.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace appwatch {
namespace {

using testing::box;
using testing::daily_images;

const EventContext kCtx{"F1", SeasonWindow::winter(2019)};

BoxesByImage by_image(const std::vector<ImageRecord>& images,
                      const std::vector<std::vector<GeoBox>>& per_image) {
  BoxesByImage out;
  for (std::size_t i = 0; i < per_image.size(); ++i) {
    for (const auto& b : per_image[i]) out[images[i].image_id].push_back(ScoredBox{b, 1.0});
  }
  return out;
}

TEST(BuildEvents, SingleBoxIsSingletonEvent) {
  const auto images = daily_images(3);
  const auto ev = build_events(kCtx, {{images[1].image_id, {{box(0, 0, 2, 2), 1.0}}}}, images,
                               EventKind::kGroundTruth);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].start_index, 2);
  EXPECT_EQ(ev[0].end_index, 2);
  EXPECT_EQ(ev[0].union_box, box(0, 0, 2, 2));
  EXPECT_EQ(ev[0].member_image_ids, std::vector<std::string>{images[1].image_id});
  EXPECT_EQ(format_date(ev[0].start_date), "2019-11-02");
}

TEST(BuildEvents, ChainsThroughConsecutiveOverlaps) {
  const auto images = daily_images(3);
  const auto ev = build_events(
      kCtx, by_image(images, {{box(0, 0, 2, 2)}, {box(1, 1, 3, 3)}, {box(2.5, 2.5, 4, 4)}}), images,
      EventKind::kGroundTruth);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].start_index, 1);
  EXPECT_EQ(ev[0].end_index, 3);
  EXPECT_EQ(ev[0].union_box, box(0, 0, 4, 4));
  EXPECT_EQ(ev[0].member_image_ids.size(), 3u);
}

TEST(BuildEvents, BoxlessRetainedImageBreaksSequence) {
  const auto images = daily_images(3);
  const auto ev = build_events(kCtx, by_image(images, {{box(0, 0, 1, 1)}, {}, {box(0, 0, 1, 1)}}),
                               images, EventKind::kGroundTruth);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].end_index, 1);
  EXPECT_EQ(ev[1].start_index, 3);
  EXPECT_NE(ev[0].event_id, ev[1].event_id);
}

TEST(BuildEvents, FilteredImagesAreInvisible) {
  auto all = daily_images(3);
  all[1].retained = false;
  const auto seq = retained_sequence(all);
  ASSERT_EQ(seq.size(), 2u);
  const auto ev = build_events(
      kCtx, {{all[0].image_id, {{box(0, 0, 1, 1), 1}}}, {all[2].image_id, {{box(0, 0, 1, 1), 1}}}},
      seq, EventKind::kGroundTruth);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].end_index, 2);
  EXPECT_THROW(build_events(kCtx, {{all[1].image_id, {{box(0, 0, 1, 1), 1}}}}, seq,
                            EventKind::kGroundTruth),
               Error);
}

TEST(BuildEvents, TenImageTrueEvent) {
  const auto images = daily_images(12);
  std::vector<std::vector<GeoBox>> boxes(12);
  for (int i = 1; i <= 10; ++i) boxes[i] = {box(10 + i, 10, 30 + i, 30)};
  const auto ev = build_events(kCtx, by_image(images, boxes), images, EventKind::kGroundTruth);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].start_index, 2);
  EXPECT_EQ(ev[0].end_index, 11);
  EXPECT_EQ(ev[0].member_image_ids.size(), 10u);
  EXPECT_EQ(ev[0].union_box, box(11, 10, 40, 30));
}

TEST(BuildEvents, EmptyInput) {
  EXPECT_TRUE(build_events(kCtx, {}, daily_images(4), EventKind::kPredicted).empty());
  EXPECT_TRUE(build_events(kCtx, {}, {}, EventKind::kPredicted).empty());
}

TEST(EventsFromDetections, ThresholdAndMaxScore) {
  const auto images = daily_images(2);
  std::vector<Detection> dets{
      {images[0].image_id, box(0, 0, 2, 2), 0.4, "m"},
      {images[0].image_id, box(1, 1, 3, 3), 0.8, "m"},
      {images[1].image_id, box(2, 2, 4, 4), 0.5, "m"},
  };
  const auto ev = events_from_detections(kCtx, dets, images, 0.0);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_DOUBLE_EQ(ev[0].score, 0.8);
  EXPECT_EQ(ev[0].kind, EventKind::kPredicted);
  EXPECT_TRUE(events_from_detections(kCtx, dets, images, 0.9).empty());
}

TEST(EventsFromDetections, DisjointApplicationsInOneImageAreSimultaneousEvents) {
  const auto images = daily_images(2);
  std::vector<Detection> dets{
      {images[0].image_id, box(0, 0, 10, 10), 0.9, "m"},
      {images[0].image_id, box(100, 100, 110, 110), 0.7, "m"},
      {images[1].image_id, box(101, 101, 111, 111), 0.6, "m"},
  };
  const auto ev = events_from_detections(kCtx, dets, images, 0.25);
  ASSERT_EQ(ev.size(), 2u);
  EXPECT_EQ(ev[0].start_index, ev[1].start_index);
  EXPECT_DOUBLE_EQ(ev[0].score, 0.9);
  EXPECT_EQ(ev[1].end_index, 2);
  EXPECT_DOUBLE_EQ(ev[1].score, 0.7);
}

TEST(BuildEvents, SameImageDisjointBoxesJoinThroughNeighbour) {
  const auto images = daily_images(2);
  const auto ev = build_events(
      kCtx, by_image(images, {{box(0, 0, 2, 2), box(5, 0, 7, 2)}, {box(1, 0, 6, 1)}}), images,
      EventKind::kGroundTruth);
  ASSERT_EQ(ev.size(), 1u);
  EXPECT_EQ(ev[0].union_box, box(0, 0, 7, 2));
}

TEST(BuildEventsProperty, MatchesConnectedComponentsOracle) {
  std::mt19937_64 rng(123);
  const auto images = daily_images(10);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto inst = oracle::random_instance(rng);
    std::vector<ImageRecord> seq(images.begin(), images.begin() + long(inst.size()));
    std::vector<std::vector<ScoredBox>> scored(inst.size());
    for (std::size_t i = 0; i < inst.size(); ++i) {
      for (const auto& b : inst[i]) scored[i].push_back(ScoredBox{b, 1.0});
    }
    BoxesByImage m;
    for (std::size_t i = 0; i < inst.size(); ++i) {
      if (!inst[i].empty()) m[seq[i].image_id] = scored[i];
    }
    const EventBuild built = build_events_detailed(kCtx, m, seq, EventKind::kGroundTruth);
    const auto expected = oracle::components(inst);
    ASSERT_EQ(built.events.size(), expected.size()) << "trial " << trial;
    std::size_t covered = 0;
    for (std::size_t e = 0; e < expected.size(); ++e) {
      const auto& ev = built.events[e];
      ASSERT_EQ(std::make_tuple(ev.start_index, ev.end_index, ev.union_box.min_e, ev.union_box.min_n,
                                ev.union_box.max_e, ev.union_box.max_n),
                expected[e].tuple());
      std::set<std::pair<int, std::size_t>> got;
      for (const auto& r : built.members[e]) got.emplace(r.image_index, r.box_index);
      ASSERT_EQ(got, expected[e].boxes);
      covered += got.size();
      // Members cover every index between k1 and k2 and sit inside the union.
      std::set<int> idx;
      for (const auto& [i, b] : got) {
        idx.insert(i + 1);
        ASSERT_TRUE(ev.union_box.contains(inst[i][b]));
      }
      ASSERT_EQ(int(idx.size()), ev.end_index - ev.start_index + 1);
      ASSERT_EQ(ev.member_image_ids.size(), idx.size());
    }
    std::size_t total = 0;
    for (const auto& v : inst) total += v.size();
    ASSERT_EQ(covered, total);  // every box in exactly one event
  }
}

TEST(BuildEventsProperty, EventsAreMaximal) {
  std::mt19937_64 rng(77);
  const auto images = daily_images(10);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = oracle::random_instance(rng);
    std::vector<ImageRecord> seq(images.begin(), images.begin() + long(inst.size()));
    BoxesByImage m = by_image(seq, inst);
    const EventBuild built = build_events_detailed(kCtx, m, seq, EventKind::kGroundTruth);
    // No box of one event links to a box of another.
    for (std::size_t a = 0; a < built.events.size(); ++a) {
      for (std::size_t b = a + 1; b < built.events.size(); ++b) {
        for (const auto& ra : built.members[a]) {
          for (const auto& rb : built.members[b]) {
            if (std::abs(ra.image_index - rb.image_index) > 1) continue;
            ASSERT_FALSE(intersects(inst[ra.image_index][ra.box_index], inst[rb.image_index][rb.box_index]));
          }
        }
      }
    }
  }
}

TEST(BuildEventsProperty, RaisingThresholdNestsEvents) {
  std::mt19937_64 rng(99);
  const auto images = daily_images(10);
  for (int trial = 0; trial < 300; ++trial) {
    const auto inst = oracle::random_instance(rng);
    std::vector<Detection> dets;
    for (std::size_t i = 0; i < inst.size(); ++i) {
      for (const auto& b : inst[i]) dets.push_back(Detection{images[i].image_id, b, double(rng() % 101) / 100, "m"});
    }
    std::vector<ImageRecord> seq(images.begin(), images.begin() + long(inst.size()));
    const double t1 = double(rng() % 60) / 100, t2 = t1 + double(rng() % 40) / 100;
    const auto lo = events_from_detections(kCtx, dets, seq, t1);
    const auto hi = events_from_detections(kCtx, dets, seq, t2);
    for (const auto& h : hi) {
      bool contained = false;
      for (const auto& l : lo) {
        contained = contained || (l.start_index <= h.start_index && h.end_index <= l.end_index &&
                                  l.union_box.contains(h.union_box));
      }
      ASSERT_TRUE(contained);
    }
  }
}

}  // namespace
}  // namespace appwatch
