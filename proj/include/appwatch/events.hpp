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

#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "appwatch/detection_store.hpp"
#include "appwatch/error.hpp"
#include "appwatch/geometry.hpp"
#include "appwatch/model.hpp"

namespace appwatch {

/// A box on one image, with the detector confidence when it has one.
struct ScoredBox {
  GeoBox box;
  double confidence = 1.0;
};

using BoxesByImage = std::map<std::string, std::vector<ScoredBox>>;

/// Which (facility, season) the events belong to; feeds event ids.
struct EventContext {
  std::string facility_id;
  SeasonWindow season;
};

/// Position of one input box: 0-based image index in the sequence and the
/// box's position within that image's list.
struct BoxRef {
  int image_index = 0;
  std::size_t box_index = 0;

  friend auto operator<=>(const BoxRef&, const BoxRef&) = default;
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n), rank_(n, 0) {
    std::iota(parent_.begin(), parent_.end(), std::size_t{0});
  }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<int> rank_;
};

}  // namespace detail

/// Groups boxes into chains. Two boxes are linked when they intersect and
/// sit on the same image or on consecutive images of the sequence; groups
/// are the connected components of that graph. Components come back with
/// members sorted, in order of their first member.
inline std::vector<std::vector<BoxRef>> cluster_boxes(
    const std::vector<std::vector<ScoredBox>>& boxes_per_image) {
  std::vector<BoxRef> nodes;
  std::vector<std::size_t> first_node(boxes_per_image.size() + 1, 0);
  for (std::size_t i = 0; i < boxes_per_image.size(); ++i) {
    first_node[i] = nodes.size();
    for (std::size_t b = 0; b < boxes_per_image[i].size(); ++b) {
      nodes.push_back(BoxRef{static_cast<int>(i), b});
    }
  }
  first_node[boxes_per_image.size()] = nodes.size();

  detail::DisjointSets sets(nodes.size());
  for (std::size_t i = 0; i < boxes_per_image.size(); ++i) {
    const auto& here = boxes_per_image[i];
    for (std::size_t a = 0; a < here.size(); ++a) {
      for (std::size_t b = a + 1; b < here.size(); ++b) {
        if (intersects(here[a].box, here[b].box)) {
          sets.unite(first_node[i] + a, first_node[i] + b);
        }
      }
      if (i + 1 < boxes_per_image.size()) {
        const auto& next = boxes_per_image[i + 1];
        for (std::size_t b = 0; b < next.size(); ++b) {
          if (intersects(here[a].box, next[b].box)) {
            sets.unite(first_node[i] + a, first_node[i + 1] + b);
          }
        }
      }
    }
  }

  std::map<std::size_t, std::size_t> slot_of_root;
  std::vector<std::vector<BoxRef>> out;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    const std::size_t root = sets.find(n);
    auto [it, inserted] = slot_of_root.try_emplace(root, out.size());
    if (inserted) out.emplace_back();
    out[it->second].push_back(nodes[n]);
  }
  return out;
}

/// Events with the box membership each one was built from.
struct EventBuild {
  std::vector<ApplicationEvent> events;
  std::vector<std::vector<BoxRef>> members;  // parallel to `events`
};

/// Turns per-image boxes into application events over the ordered image
/// sequence `images` (retained images only; indices are 1-based in the
/// output). A boxless image between two box-bearing images breaks the chain.
inline EventBuild build_events_detailed(const EventContext& ctx,
                                        const BoxesByImage& boxes_by_image,
                                        const std::vector<ImageRecord>& images,
                                        EventKind kind) {
  std::unordered_map<std::string, int> index_of;
  index_of.reserve(images.size());
  for (std::size_t i = 0; i < images.size(); ++i) {
    index_of.emplace(images[i].image_id, static_cast<int>(i));
  }
  std::vector<std::vector<ScoredBox>> per_image(images.size());
  for (const auto& [image_id, boxes] : boxes_by_image) {
    auto it = index_of.find(image_id);
    if (it == index_of.end()) {
      fail(ErrorCode::kReferential,
           "box references image '" + image_id + "' which is not in the retained sequence");
    }
    auto& slot = per_image[static_cast<std::size_t>(it->second)];
    slot.insert(slot.end(), boxes.begin(), boxes.end());
  }

  auto components = cluster_boxes(per_image);
  EventBuild out;
  out.events.reserve(components.size());
  for (auto& comp : components) {
    std::sort(comp.begin(), comp.end());
    const int k1 = comp.front().image_index;
    const int k2 = comp.back().image_index;
    ApplicationEvent ev;
    ev.facility_id = ctx.facility_id;
    ev.season = ctx.season;
    ev.kind = kind;
    ev.start_index = k1 + 1;
    ev.end_index = k2 + 1;
    ev.start_date = images[static_cast<std::size_t>(k1)].date();
    ev.end_date = images[static_cast<std::size_t>(k2)].date();
    ev.union_box = per_image[static_cast<std::size_t>(k1)][comp.front().box_index].box;
    double score = 0.0;
    for (const BoxRef& ref : comp) {
      const ScoredBox& sb = per_image[static_cast<std::size_t>(ref.image_index)][ref.box_index];
      ev.union_box = envelope(ev.union_box, sb.box);
      score = std::max(score, sb.confidence);
    }
    ev.union_box.crs_id = images[static_cast<std::size_t>(k1)].aoi.crs_id;
    if (kind == EventKind::kPredicted) ev.score = score;
    for (int i = k1; i <= k2; ++i) {
      ev.member_image_ids.push_back(images[static_cast<std::size_t>(i)].image_id);
    }
    ev.event_id = make_event_id(kind, ctx.facility_id, ctx.season.season_year,
                                ev.start_index, ev.end_index, ev.union_box);
    out.events.push_back(std::move(ev));
    out.members.push_back(std::move(comp));
  }

  std::vector<std::size_t> order(out.events.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  auto sort_key = [&](std::size_t i) {
    const ApplicationEvent& e = out.events[i];
    return std::make_tuple(e.start_index, e.union_box.min_e, e.union_box.min_n,
                           e.end_index, e.union_box.max_e, e.union_box.max_n);
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sort_key(a) < sort_key(b); });
  EventBuild sorted;
  for (std::size_t i : order) {
    sorted.events.push_back(std::move(out.events[i]));
    sorted.members.push_back(std::move(out.members[i]));
  }
  return sorted;
}

inline std::vector<ApplicationEvent> build_events(const EventContext& ctx,
                                                  const BoxesByImage& boxes_by_image,
                                                  const std::vector<ImageRecord>& images,
                                                  EventKind kind) {
  return build_events_detailed(ctx, boxes_by_image, images, kind).events;
}

/// Predicted events: detections below `threshold` are dropped first, then
/// the survivors are chained. Event score is the highest member confidence.
inline std::vector<ApplicationEvent> events_from_detections(
    const EventContext& ctx, const std::vector<Detection>& detections,
    const std::vector<ImageRecord>& images, double threshold) {
  BoxesByImage boxes;
  for (const Detection& d : detections) {
    if (d.confidence < threshold) continue;
    boxes[d.image_id].push_back(ScoredBox{d.box, d.confidence});
  }
  return build_events(ctx, boxes, images, EventKind::kPredicted);
}

inline std::vector<ApplicationEvent> events_from_labels(const EventContext& ctx,
                                                        const std::vector<LabelBox>& labels,
                                                        const std::vector<ImageRecord>& images) {
  BoxesByImage boxes;
  for (const LabelBox& l : labels) boxes[l.image_id].push_back(ScoredBox{l.box, 1.0});
  return build_events(ctx, boxes, images, EventKind::kGroundTruth);
}

/// The retained images of a catalog, in sequence order.
inline std::vector<ImageRecord> retained_sequence(std::vector<ImageRecord> images) {
  std::erase_if(images, [](const ImageRecord& r) { return !r.retained; });
  sort_images(images);
  return images;
}

}  // namespace appwatch
