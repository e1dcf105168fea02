#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "saldet/dataset.hpp"
#include "saldet/geometry.hpp"

namespace saldet {

/// One predicted box with its confidence score in [0, 1].
struct Detection {
    std::string image_id;
    Box box;
    double score = 0.0;

    bool operator==(const Detection&) const = default;
};

/// Throws ValidationError unless score is in [0, 1] and finite.
void validate(const Detection& det);

inline constexpr double kHitIouThreshold = 0.5;
inline constexpr std::size_t kMaxDetectionsPerImage = 100;

struct MatchedPair {
    std::size_t detection_index = 0; ///< index into the detection list passed in
    std::string annotation_id;
    double iou = 0.0;

    bool operator==(const MatchedPair&) const = default;
};

/// Outcome of matching one image: every considered detection appears in
/// exactly one of matched_pairs / unmatched_detections, and every
/// annotation in exactly one of matched_pairs / unmatched_annotations.
struct MatchResult {
    std::vector<MatchedPair> matched_pairs;          ///< in claim (score-descending) order
    std::vector<std::size_t> unmatched_detections;   ///< ascending detection index
    std::vector<std::string> unmatched_annotations;  ///< input annotation order

    bool operator==(const MatchResult&) const = default;
};

/// Keeps the max_dets highest-score detections, descending score with
/// input-order ties (stable). Throws MixedImages if the detections do not
/// all share one image_id.
std::vector<Detection> cap_detections(std::span<const Detection> dets,
                                      std::size_t max_dets = kMaxDetectionsPerImage);

/// Greedy score-descending matching for one image: after capping, each
/// detection in turn claims the still-unmatched annotation with the highest
/// IoU among those at or above iou_threshold; IoU ties break toward the
/// lowest annotation id. Category and salience play no role here.
MatchResult match_image(std::span<const Detection> dets, std::span<const SignAnnotation> gts,
                        double iou_threshold = kHitIouThreshold,
                        std::size_t max_dets = kMaxDetectionsPerImage);

} // namespace saldet
