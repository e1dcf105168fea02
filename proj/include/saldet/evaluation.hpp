#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "saldet/dataset.hpp"
#include "saldet/matching.hpp"

namespace saldet {

/// Detections / annotations grouped by image id; std::map keeps the
/// cross-image aggregation order deterministic.
using DetectionsByImage = std::map<std::string, std::vector<Detection>>;
using AnnotationsByImage = std::map<std::string, std::vector<SignAnnotation>>;

DetectionsByImage group_detections(std::span<const Detection> dets);
AnnotationsByImage annotations_by_image(const Dataset& ds);

struct EvalParams {
    double iou_threshold = kHitIouThreshold;
    std::size_t max_detections = kMaxDetectionsPerImage;
};

/// Aggregated confusion counts at one score threshold. tp_salient counts
/// matched pairs whose annotation is salient; n_salient_gt is the total
/// salient annotation count (the salient-recall denominator).
struct ConfusionCounts {
    std::int64_t tp_all = 0;
    std::int64_t fp = 0;
    std::int64_t fn_all = 0;
    std::int64_t tp_salient = 0;
    std::int64_t n_salient_gt = 0;

    bool operator==(const ConfusionCounts&) const = default;
};

/// Keeps detections with score >= t, caps and matches each image, and sums
/// counts across images in image-id order.
ConfusionCounts confusion_at_threshold(const DetectionsByImage& dets,
                                       const AnnotationsByImage& gts, double threshold,
                                       const EvalParams& params = {});

struct PRPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall_all = 0.0;
    double recall_salient = 0.0;
    double margin = 0.0; ///< recall_salient - recall_all

    bool operator==(const PRPoint&) const = default;
};

struct CurveMetadata {
    std::string dataset_id;
    std::string model_id;
    std::string loss_mode;

    bool operator==(const CurveMetadata&) const = default;
};

/// Threshold-ascending sweep points. Built by pr_sweep; thresholds are
/// strictly increasing and recall_all is non-increasing along the curve.
struct PRCurve {
    std::vector<PRPoint> points;
    CurveMetadata metadata;

    bool operator==(const PRCurve&) const = default;
};

/// The sweep grid 0.0, 0.1, ..., 1.0.
std::vector<double> default_thresholds();

/// One PRPoint per threshold, stopping (exclusive) at the first threshold
/// where no detection survives. Throws EmptyDenominator when the ground
/// truth has no annotations or no salient annotations at all.
PRCurve pr_sweep(const DetectionsByImage& dets, const AnnotationsByImage& gts,
                 const std::vector<double>& thresholds = default_thresholds(),
                 const EvalParams& params = {}, CurveMetadata metadata = {});

enum class RecallAxis {
    All,
    Salient,
};

/// Area under the precision-recall curve for the chosen recall axis:
/// points sorted by ascending recall, precision linearly interpolated,
/// trapezoidal integral over the covered recall span. Curves with fewer
/// than two distinct recall values integrate to 0.
double auc(const PRCurve& curve, RecallAxis axis);

enum class CurveFormat {
    Csv,
    Svg,
};

std::string render_curve_csv(const PRCurve& curve);
std::string render_curve_svg(const PRCurve& curve);

/// Writes the curve atomically in the requested format.
void emit_curve(const PRCurve& curve, CurveFormat format, const std::filesystem::path& path);

} // namespace saldet
