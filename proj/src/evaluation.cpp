#include "saldet/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include "saldet/errors.hpp"
#include "saldet/io.hpp"

namespace saldet {

namespace {

std::string fmt6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string fmt2(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::int64_t count_salient(std::span<const SignAnnotation> gts) {
    std::int64_t n = 0;
    for (const auto& g : gts) {
        if (g.salient) {
            ++n;
        }
    }
    return n;
}

std::size_t count_survivors(const DetectionsByImage& dets, double threshold) {
    std::size_t n = 0;
    for (const auto& [id, image_dets] : dets) {
        for (const auto& d : image_dets) {
            if (d.score >= threshold) {
                ++n;
            }
        }
    }
    return n;
}

} // namespace

DetectionsByImage group_detections(std::span<const Detection> dets) {
    DetectionsByImage grouped;
    for (const auto& d : dets) {
        validate(d);
        grouped[d.image_id].push_back(d);
    }
    return grouped;
}

AnnotationsByImage annotations_by_image(const Dataset& ds) {
    AnnotationsByImage grouped;
    for (const auto& img : ds.images) {
        auto& slot = grouped[img.image_id];
        slot.insert(slot.end(), img.annotations.begin(), img.annotations.end());
    }
    return grouped;
}

ConfusionCounts confusion_at_threshold(const DetectionsByImage& dets,
                                       const AnnotationsByImage& gts, double threshold,
                                       const EvalParams& params) {
    static const std::vector<Detection> no_dets;
    static const std::vector<SignAnnotation> no_gts;

    std::set<std::string> image_ids;
    for (const auto& [id, v] : dets) {
        image_ids.insert(id);
    }
    for (const auto& [id, v] : gts) {
        image_ids.insert(id);
    }

    ConfusionCounts counts;
    for (const auto& id : image_ids) {
        auto dit = dets.find(id);
        auto git = gts.find(id);
        const auto& image_dets = dit != dets.end() ? dit->second : no_dets;
        const auto& image_gts = git != gts.end() ? git->second : no_gts;

        std::vector<Detection> surviving;
        for (const auto& d : image_dets) {
            if (d.score >= threshold) {
                surviving.push_back(d);
            }
        }

        const MatchResult match =
            match_image(surviving, image_gts, params.iou_threshold, params.max_detections);

        counts.tp_all += static_cast<std::int64_t>(match.matched_pairs.size());
        counts.fp += static_cast<std::int64_t>(match.unmatched_detections.size());
        counts.fn_all += static_cast<std::int64_t>(match.unmatched_annotations.size());
        counts.n_salient_gt += count_salient(image_gts);
        for (const auto& pair : match.matched_pairs) {
            for (const auto& g : image_gts) {
                if (g.id == pair.annotation_id) {
                    if (g.salient) {
                        ++counts.tp_salient;
                    }
                    break;
                }
            }
        }
    }
    return counts;
}

std::vector<double> default_thresholds() {
    std::vector<double> t(11);
    for (int i = 0; i <= 10; ++i) {
        t[static_cast<std::size_t>(i)] = static_cast<double>(i) / 10.0;
    }
    return t;
}

PRCurve pr_sweep(const DetectionsByImage& dets, const AnnotationsByImage& gts,
                 const std::vector<double>& thresholds, const EvalParams& params,
                 CurveMetadata metadata) {
    if (thresholds.empty()) {
        throw ConfigError("threshold sweep needs at least one threshold");
    }
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0)) {
            throw ConfigError("thresholds must lie in [0, 1]");
        }
        if (i > 0 && !(thresholds[i] > thresholds[i - 1])) {
            throw ConfigError("thresholds must be strictly increasing");
        }
    }

    std::int64_t total_gt = 0;
    std::int64_t total_salient = 0;
    for (const auto& [id, image_gts] : gts) {
        total_gt += static_cast<std::int64_t>(image_gts.size());
        total_salient += count_salient(image_gts);
    }
    if (total_gt == 0) {
        throw EmptyDenominator("evaluation set has no ground-truth annotations");
    }
    if (total_salient == 0) {
        throw EmptyDenominator("evaluation set has no salient ground-truth annotations");
    }

    PRCurve curve;
    curve.metadata = std::move(metadata);
    for (double t : thresholds) {
        if (count_survivors(dets, t) == 0) {
            break; // early stop: no positive detections at this threshold
        }
        const ConfusionCounts c = confusion_at_threshold(dets, gts, t, params);
        PRPoint point;
        point.threshold = t;
        point.precision =
            static_cast<double>(c.tp_all) / static_cast<double>(c.tp_all + c.fp);
        point.recall_all =
            static_cast<double>(c.tp_all) / static_cast<double>(c.tp_all + c.fn_all);
        point.recall_salient =
            static_cast<double>(c.tp_salient) / static_cast<double>(c.n_salient_gt);
        point.margin = point.recall_salient - point.recall_all;
        curve.points.push_back(point);
    }
    return curve;
}

double auc(const PRCurve& curve, RecallAxis axis) {
    struct Sample {
        double recall;
        double precision;
        double threshold;
    };
    std::vector<Sample> samples;
    samples.reserve(curve.points.size());
    for (const auto& p : curve.points) {
        samples.push_back({axis == RecallAxis::All ? p.recall_all : p.recall_salient, p.precision,
                           p.threshold});
    }
    // Total order makes the integral independent of input point order.
    std::sort(samples.begin(), samples.end(), [](const Sample& a, const Sample& b) {
        if (a.recall != b.recall) {
            return a.recall < b.recall;
        }
        if (a.precision != b.precision) {
            return a.precision < b.precision;
        }
        return a.threshold < b.threshold;
    });

    double integral = 0.0;
    for (std::size_t i = 1; i < samples.size(); ++i) {
        const double width = samples[i].recall - samples[i - 1].recall;
        integral += width * 0.5 * (samples[i].precision + samples[i - 1].precision);
    }
    return integral;
}

std::string render_curve_csv(const PRCurve& curve) {
    std::vector<PRPoint> points = curve.points;
    std::sort(points.begin(), points.end(),
              [](const PRPoint& a, const PRPoint& b) { return a.threshold < b.threshold; });

    std::string out = "threshold,precision,recall_all,recall_salient,margin\n";
    for (const auto& p : points) {
        out += fmt6(p.threshold) + "," + fmt6(p.precision) + "," + fmt6(p.recall_all) + "," +
               fmt6(p.recall_salient) + "," + fmt6(p.margin) + "\n";
    }
    return out;
}

namespace {

// Plot geometry shared by the SVG series: precision on x in [0, 1],
// recall / margin on y in [-1, 1].
constexpr double kPlotLeft = 70.0;
constexpr double kPlotRight = 470.0;
constexpr double kPlotTop = 40.0;
constexpr double kPlotBottom = 420.0;

double svg_x(double precision) {
    return kPlotLeft + precision * (kPlotRight - kPlotLeft);
}

double svg_y(double value) {
    return kPlotBottom - (value + 1.0) * 0.5 * (kPlotBottom - kPlotTop);
}

void append_polyline(std::string& svg, const std::vector<PRPoint>& points, const char* color,
                     double (*value)(const PRPoint&)) {
    if (points.empty()) {
        return;
    }
    svg += "  <polyline fill=\"none\" stroke=\"" + std::string(color) +
           "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0) {
            svg += " ";
        }
        svg += fmt2(svg_x(points[i].precision)) + "," + fmt2(svg_y(value(points[i])));
    }
    svg += "\"/>\n";
}

} // namespace

std::string render_curve_svg(const PRCurve& curve) {
    std::vector<PRPoint> points = curve.points;
    std::sort(points.begin(), points.end(),
              [](const PRPoint& a, const PRPoint& b) { return a.threshold < b.threshold; });

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"660\" height=\"470\" "
           "viewBox=\"0 0 660 470\">\n";
    svg += "  <rect x=\"0\" y=\"0\" width=\"660\" height=\"470\" fill=\"white\"/>\n";

    // Grid and tick labels.
    for (int i = 0; i <= 4; ++i) {
        const double p = static_cast<double>(i) / 4.0;
        const double x = svg_x(p);
        svg += "  <line x1=\"" + fmt2(x) + "\" y1=\"" + fmt2(kPlotTop) + "\" x2=\"" + fmt2(x) +
               "\" y2=\"" + fmt2(kPlotBottom) + "\" stroke=\"#dddddd\"/>\n";
        svg += "  <text x=\"" + fmt2(x) + "\" y=\"" + fmt2(kPlotBottom + 18.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" +
               fmt2(p) + "</text>\n";
    }
    for (int i = -2; i <= 2; ++i) {
        const double v = static_cast<double>(i) / 2.0;
        const double y = svg_y(v);
        const char* stroke = i == 0 ? "#aaaaaa" : "#dddddd";
        svg += "  <line x1=\"" + fmt2(kPlotLeft) + "\" y1=\"" + fmt2(y) + "\" x2=\"" +
               fmt2(kPlotRight) + "\" y2=\"" + fmt2(y) + "\" stroke=\"" + stroke + "\"/>\n";
        svg += "  <text x=\"" + fmt2(kPlotLeft - 8.0) + "\" y=\"" + fmt2(y + 4.0) +
               "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" + fmt2(v) +
               "</text>\n";
    }

    svg += "  <rect x=\"" + fmt2(kPlotLeft) + "\" y=\"" + fmt2(kPlotTop) + "\" width=\"" +
           fmt2(kPlotRight - kPlotLeft) + "\" height=\"" + fmt2(kPlotBottom - kPlotTop) +
           "\" fill=\"none\" stroke=\"#333333\"/>\n";

    append_polyline(svg, points, "#1f77b4", [](const PRPoint& p) { return p.recall_all; });
    append_polyline(svg, points, "#2ca02c", [](const PRPoint& p) { return p.recall_salient; });
    append_polyline(svg, points, "#d62728", [](const PRPoint& p) { return p.margin; });

    // Axis labels.
    svg += "  <text x=\"" + fmt2((kPlotLeft + kPlotRight) / 2.0) + "\" y=\"452\" "
           "font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">precision</text>\n";
    svg += "  <text x=\"16\" y=\"" + fmt2((kPlotTop + kPlotBottom) / 2.0) +
           "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\" "
           "transform=\"rotate(-90 16 " +
           fmt2((kPlotTop + kPlotBottom) / 2.0) + ")\">recall / margin</text>\n";

    // Legend.
    const struct {
        const char* color;
        const char* label;
    } legend[] = {
        {"#1f77b4", "recall_all"},
        {"#2ca02c", "recall_salient"},
        {"#d62728", "margin"},
    };
    double ly = 52.0;
    for (const auto& entry : legend) {
        svg += "  <line x1=\"490\" y1=\"" + fmt2(ly - 4.0) + "\" x2=\"514\" y2=\"" +
               fmt2(ly - 4.0) + "\" stroke=\"" + entry.color + "\" stroke-width=\"2\"/>\n";
        svg += "  <text x=\"520\" y=\"" + fmt2(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + entry.label + "</text>\n";
        ly += 18.0;
    }

    if (!curve.metadata.loss_mode.empty() || !curve.metadata.dataset_id.empty() ||
        !curve.metadata.model_id.empty()) {
        std::string title = curve.metadata.dataset_id;
        for (const std::string& part : {curve.metadata.model_id, curve.metadata.loss_mode}) {
            if (!part.empty()) {
                if (!title.empty()) {
                    title += " / ";
                }
                title += part;
            }
        }
        svg += "  <text x=\"" + fmt2((kPlotLeft + kPlotRight) / 2.0) + "\" y=\"24\" "
               "font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">" +
               title + "</text>\n";
    }

    svg += "</svg>\n";
    return svg;
}

void emit_curve(const PRCurve& curve, CurveFormat format, const std::filesystem::path& path) {
    write_file_atomic(path,
                      format == CurveFormat::Csv ? render_curve_csv(curve) : render_curve_svg(curve));
}

} // namespace saldet
