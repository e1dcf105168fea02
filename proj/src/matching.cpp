#include "saldet/matching.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "saldet/errors.hpp"

namespace saldet {

namespace {

void check_single_image(std::span<const Detection> dets) {
    for (std::size_t i = 1; i < dets.size(); ++i) {
        if (dets[i].image_id != dets[0].image_id) {
            throw MixedImages("detections span multiple images: '" + dets[0].image_id +
                              "' and '" + dets[i].image_id + "'");
        }
    }
}

/// Detection indices in processing order: descending score, stable ties,
/// truncated to max_dets.
std::vector<std::size_t> capped_order(std::span<const Detection> dets, std::size_t max_dets) {
    std::vector<std::size_t> order(dets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&dets](std::size_t a, std::size_t b) {
        return dets[a].score > dets[b].score;
    });
    if (order.size() > max_dets) {
        order.resize(max_dets);
    }
    return order;
}

} // namespace

void validate(const Detection& det) {
    if (!(std::isfinite(det.score) && det.score >= 0.0 && det.score <= 1.0)) {
        throw ValidationError("detection score " + std::to_string(det.score) +
                              " outside [0, 1] (image '" + det.image_id + "')");
    }
}

std::vector<Detection> cap_detections(std::span<const Detection> dets, std::size_t max_dets) {
    check_single_image(dets);
    std::vector<Detection> out;
    out.reserve(std::min(dets.size(), max_dets));
    for (std::size_t i : capped_order(dets, max_dets)) {
        out.push_back(dets[i]);
    }
    return out;
}

MatchResult match_image(std::span<const Detection> dets, std::span<const SignAnnotation> gts,
                        double iou_threshold, std::size_t max_dets) {
    check_single_image(dets);

    // IoU table computed once; rows follow the detection list, columns the
    // annotation list.
    const std::size_t n_gts = gts.size();
    std::vector<double> iou_table(dets.size() * n_gts);
    for (std::size_t d = 0; d < dets.size(); ++d) {
        for (std::size_t g = 0; g < n_gts; ++g) {
            iou_table[d * n_gts + g] = iou(dets[d].box, gts[g].box);
        }
    }

    std::vector<bool> gt_taken(n_gts, false);
    MatchResult result;
    std::vector<std::size_t> unmatched;

    for (std::size_t d : capped_order(dets, max_dets)) {
        std::size_t best_g = n_gts;
        double best_iou = 0.0;
        for (std::size_t g = 0; g < n_gts; ++g) {
            if (gt_taken[g]) {
                continue;
            }
            const double v = iou_table[d * n_gts + g];
            if (v < iou_threshold) {
                continue;
            }
            if (best_g == n_gts || v > best_iou ||
                (v == best_iou && gts[g].id < gts[best_g].id)) {
                best_g = g;
                best_iou = v;
            }
        }
        if (best_g == n_gts) {
            unmatched.push_back(d);
        } else {
            gt_taken[best_g] = true;
            result.matched_pairs.push_back({d, gts[best_g].id, best_iou});
        }
    }

    std::sort(unmatched.begin(), unmatched.end());
    result.unmatched_detections = std::move(unmatched);
    for (std::size_t g = 0; g < n_gts; ++g) {
        if (!gt_taken[g]) {
            result.unmatched_annotations.push_back(gts[g].id);
        }
    }
    return result;
}

} // namespace saldet
