#include "saldet/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "saldet/errors.hpp"
#include "saldet/io.hpp"

namespace saldet {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr std::array<std::string_view, kNumSignCategories> kCategoryNames = {
    "stop",
    "yield",
    "do-not-enter",
    "wrong-way",
    "school-zone",
    "railroad",
    "red-white-regulatory",
    "white-regulatory",
    "construction-maintenance",
    "warning",
    "no-turn",
    "one-way",
    "no-turn-on-red",
    "do-not-pass",
    "speed-limit",
    "guide",
    "service-recreation",
    "undefined",
};

void check_allowed_keys(const ordered_json& obj, std::initializer_list<std::string_view> allowed,
                        const std::string& context, const std::string& record_id) {
    for (const auto& item : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
            throw SchemaError("unknown field '" + item.key() + "' in " + context, record_id);
        }
    }
}

const ordered_json& require_field(const ordered_json& obj, const char* key,
                                  const std::string& context, const std::string& record_id) {
    auto it = obj.find(key);
    if (it == obj.end()) {
        throw SchemaError("missing field '" + std::string(key) + "' in " + context, record_id);
    }
    return *it;
}

std::string as_string(const ordered_json& v, const char* key, const std::string& context,
                      const std::string& record_id) {
    if (!v.is_string()) {
        throw SchemaError("field '" + std::string(key) + "' must be a string in " + context,
                          record_id);
    }
    return v.get<std::string>();
}

bool as_bool(const ordered_json& v, const char* key, const std::string& context,
             const std::string& record_id) {
    if (!v.is_boolean()) {
        throw SchemaError("field '" + std::string(key) + "' must be a boolean in " + context,
                          record_id);
    }
    return v.get<bool>();
}

std::int64_t as_int(const ordered_json& v, const char* key, const std::string& context,
                    const std::string& record_id) {
    if (!v.is_number_integer()) {
        throw SchemaError("field '" + std::string(key) + "' must be an integer in " + context,
                          record_id);
    }
    return v.get<std::int64_t>();
}

Box parse_box(const ordered_json& v, const std::string& context, const std::string& record_id) {
    if (!v.is_array() || v.size() != 4) {
        throw SchemaError("field 'box' must be an array [x_min, y_min, x_max, y_max] in " + context,
                          record_id);
    }
    double c[4];
    for (int i = 0; i < 4; ++i) {
        if (!v[i].is_number()) {
            throw SchemaError("box coordinates must be numbers in " + context, record_id);
        }
        c[i] = v[i].get<double>();
    }
    try {
        return Box(c[0], c[1], c[2], c[3]);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string(e.what()) + " (" + context + ")", record_id);
    }
}

SignAnnotation parse_annotation(const ordered_json& obj, const std::string& image_id) {
    if (!obj.is_object()) {
        throw SchemaError("annotation must be an object", image_id);
    }
    std::string context = "annotation";
    std::string id;
    if (auto it = obj.find("id"); it != obj.end() && it->is_string()) {
        id = it->get<std::string>();
        context = "annotation '" + id + "'";
    }
    check_allowed_keys(obj, {"id", "box", "category", "salient", "occluded"}, context, id);
    id = as_string(require_field(obj, "id", context, id), "id", context, id);
    context = "annotation '" + id + "'";

    SignAnnotation ann{
        id,
        image_id,
        parse_box(require_field(obj, "box", context, id), context, id),
        sign_category_from_string(
            as_string(require_field(obj, "category", context, id), "category", context, id)),
        as_bool(require_field(obj, "salient", context, id), "salient", context, id),
        std::nullopt,
    };
    if (auto it = obj.find("occluded"); it != obj.end()) {
        ann.occluded = as_bool(*it, "occluded", context, id);
    }
    return ann;
}

ImageRecord parse_image(const ordered_json& obj) {
    if (!obj.is_object()) {
        throw SchemaError("image entry must be an object");
    }
    std::string context = "image";
    std::string id;
    if (auto it = obj.find("image_id"); it != obj.end() && it->is_string()) {
        id = it->get<std::string>();
        context = "image '" + id + "'";
    }
    check_allowed_keys(obj, {"image_id", "width", "height", "source_clip", "annotations"}, context,
                       id);
    id = as_string(require_field(obj, "image_id", context, id), "image_id", context, id);
    context = "image '" + id + "'";

    ImageRecord rec;
    rec.image_id = id;
    rec.width = static_cast<int>(as_int(require_field(obj, "width", context, id), "width", context, id));
    rec.height =
        static_cast<int>(as_int(require_field(obj, "height", context, id), "height", context, id));
    if (auto it = obj.find("source_clip"); it != obj.end()) {
        rec.source_clip = as_string(*it, "source_clip", context, id);
    }
    const auto& anns = require_field(obj, "annotations", context, id);
    if (!anns.is_array()) {
        throw SchemaError("field 'annotations' must be an array in " + context, id);
    }
    rec.annotations.reserve(anns.size());
    for (const auto& a : anns) {
        rec.annotations.push_back(parse_annotation(a, id));
    }
    return rec;
}

ordered_json box_to_json(const Box& b) {
    return ordered_json::array({b.x_min(), b.y_min(), b.x_max(), b.y_max()});
}

ordered_json annotation_to_json(const SignAnnotation& ann) {
    ordered_json j;
    j["id"] = ann.id;
    j["box"] = box_to_json(ann.box);
    j["category"] = std::string(to_string(ann.category));
    j["salient"] = ann.salient;
    if (ann.occluded.has_value()) {
        j["occluded"] = *ann.occluded;
    }
    return j;
}

ordered_json image_to_json(const ImageRecord& rec) {
    ordered_json j;
    j["image_id"] = rec.image_id;
    j["width"] = rec.width;
    j["height"] = rec.height;
    if (rec.source_clip.has_value()) {
        j["source_clip"] = *rec.source_clip;
    }
    ordered_json anns = ordered_json::array();
    for (const auto& a : rec.annotations) {
        anns.push_back(annotation_to_json(a));
    }
    j["annotations"] = std::move(anns);
    return j;
}

/// Deterministic Fisher-Yates shuffle; index draw via modulo keeps the
/// result identical across standard library implementations.
void shuffle_indices(std::vector<std::size_t>& idx, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(idx[i - 1], idx[j]);
    }
}

Dataset subset_by_indices(const Dataset& ds, std::vector<std::size_t> indices) {
    std::sort(indices.begin(), indices.end());
    Dataset out;
    out.images.reserve(indices.size());
    for (std::size_t i : indices) {
        out.images.push_back(ds.images[i]);
    }
    return out;
}

} // namespace

const std::array<SignCategory, kNumSignCategories>& all_sign_categories() {
    static const std::array<SignCategory, kNumSignCategories> cats = [] {
        std::array<SignCategory, kNumSignCategories> a{};
        for (int i = 0; i < kNumSignCategories; ++i) {
            a[static_cast<std::size_t>(i)] = static_cast<SignCategory>(i);
        }
        return a;
    }();
    return cats;
}

std::string_view to_string(SignCategory c) {
    return kCategoryNames[static_cast<std::size_t>(c)];
}

SignCategory sign_category_from_string(std::string_view s) {
    for (int i = 0; i < kNumSignCategories; ++i) {
        if (kCategoryNames[static_cast<std::size_t>(i)] == s) {
            return static_cast<SignCategory>(i);
        }
    }
    throw ValidationError("unknown sign category '" + std::string(s) + "'");
}

void validate_dataset(const Dataset& ds) {
    std::unordered_set<std::string> image_ids;
    std::unordered_set<std::string> annotation_ids;
    std::int64_t total = 0;
    std::int64_t salient = 0;

    for (const auto& img : ds.images) {
        if (img.width <= 0 || img.height <= 0) {
            throw ValidationError("image '" + img.image_id + "' has non-positive size",
                                  img.image_id);
        }
        if (!image_ids.insert(img.image_id).second) {
            throw ValidationError("duplicate image id '" + img.image_id + "'", img.image_id);
        }
        for (const auto& ann : img.annotations) {
            if (ann.image_id != img.image_id) {
                throw ValidationError("annotation '" + ann.id + "' references image '" +
                                          ann.image_id + "' but belongs to '" + img.image_id + "'",
                                      ann.id);
            }
            if (!annotation_ids.insert(ann.id).second) {
                throw ValidationError("duplicate annotation id '" + ann.id + "'", ann.id);
            }
            const Box& b = ann.box;
            if (b.x_min() < 0.0 || b.y_min() < 0.0 || b.x_max() > img.width ||
                b.y_max() > img.height) {
                throw ValidationError("annotation '" + ann.id + "' box " + b.to_string() +
                                          " lies outside image '" + img.image_id + "' (" +
                                          std::to_string(img.width) + "x" +
                                          std::to_string(img.height) + ")",
                                      ann.id);
            }
            ++total;
            if (ann.salient) {
                ++salient;
            }
        }
    }

    if (ds.declared_counts.has_value()) {
        const DeclaredCounts& dc = *ds.declared_counts;
        if (dc.salient + dc.non_salient != dc.total) {
            throw ValidationError("declared counts are inconsistent: " +
                                  std::to_string(dc.salient) + " + " +
                                  std::to_string(dc.non_salient) +
                                  " != " + std::to_string(dc.total));
        }
        if (dc.total != total || dc.salient != salient) {
            throw ValidationError(
                "declared counts {total: " + std::to_string(dc.total) + ", salient: " +
                std::to_string(dc.salient) + "} do not match recomputed {total: " +
                std::to_string(total) + ", salient: " + std::to_string(salient) + "}");
        }
    }
}

Dataset parse_dataset(const std::string& text) {
    ordered_json root;
    try {
        root = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("malformed dataset file: ") + e.what());
    }
    if (!root.is_object()) {
        throw SchemaError("dataset top level must be an object");
    }
    check_allowed_keys(root, {"declared_counts", "images"}, "dataset", {});

    Dataset ds;
    if (auto it = root.find("declared_counts"); it != root.end()) {
        if (!it->is_object()) {
            throw SchemaError("field 'declared_counts' must be an object");
        }
        check_allowed_keys(*it, {"total", "salient", "non_salient"}, "declared_counts", {});
        DeclaredCounts dc;
        dc.total = as_int(require_field(*it, "total", "declared_counts", {}), "total",
                          "declared_counts", {});
        dc.salient = as_int(require_field(*it, "salient", "declared_counts", {}), "salient",
                            "declared_counts", {});
        dc.non_salient = as_int(require_field(*it, "non_salient", "declared_counts", {}),
                                "non_salient", "declared_counts", {});
        ds.declared_counts = dc;
    }

    const auto& images = require_field(root, "images", "dataset", {});
    if (!images.is_array()) {
        throw SchemaError("field 'images' must be an array");
    }
    ds.images.reserve(images.size());
    for (const auto& img : images) {
        ds.images.push_back(parse_image(img));
    }

    validate_dataset(ds);
    return ds;
}

Dataset load_dataset(const std::filesystem::path& path) {
    return parse_dataset(read_text_file(path));
}

std::string serialize_dataset(const Dataset& ds) {
    ordered_json root;
    if (ds.declared_counts.has_value()) {
        ordered_json dc;
        dc["total"] = ds.declared_counts->total;
        dc["salient"] = ds.declared_counts->salient;
        dc["non_salient"] = ds.declared_counts->non_salient;
        root["declared_counts"] = std::move(dc);
    }
    ordered_json images = ordered_json::array();
    for (const auto& img : ds.images) {
        images.push_back(image_to_json(img));
    }
    root["images"] = std::move(images);
    return root.dump(2) + "\n";
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
    validate_dataset(ds);
    write_file_atomic(path, serialize_dataset(ds));
}

StatsReport dataset_stats(const Dataset& ds) {
    StatsReport report;
    report.images = static_cast<std::int64_t>(ds.images.size());
    for (const auto& img : ds.images) {
        for (const auto& ann : img.annotations) {
            ++report.total;
            CategoryCount& cc = report.per_category[static_cast<std::size_t>(ann.category)];
            if (ann.salient) {
                ++report.salient;
                ++cc.salient;
            } else {
                ++report.non_salient;
                ++cc.non_salient;
            }
        }
    }
    return report;
}

SplitResult split_dataset(const Dataset& ds, const SplitSpec& spec) {
    const double sum = spec.train_fraction + spec.val_fraction + spec.test_fraction;
    if (spec.train_fraction < 0.0 || spec.val_fraction < 0.0 || spec.test_fraction < 0.0 ||
        spec.train_fraction > 1.0 || spec.val_fraction > 1.0 || spec.test_fraction > 1.0 ||
        std::abs(sum - 1.0) > 1e-9) {
        throw ConfigError("split fractions must lie in [0, 1] and sum to 1");
    }

    const std::size_t n = ds.images.size();
    const auto dn = static_cast<double>(n);
    const auto n_val = static_cast<std::size_t>(std::floor(spec.val_fraction * dn));
    const auto n_test = static_cast<std::size_t>(std::floor(spec.test_fraction * dn));
    // floor-sized val and test; train takes its floor plus the remainder.
    const std::size_t n_train = n - n_val - n_test;

    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    shuffle_indices(idx, spec.seed);

    SplitResult result;
    result.train = subset_by_indices(
        ds, std::vector<std::size_t>(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train)));
    result.val = subset_by_indices(
        ds, std::vector<std::size_t>(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                                     idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val)));
    result.test = subset_by_indices(
        ds, std::vector<std::size_t>(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val),
                                     idx.end()));
    return result;
}

} // namespace saldet
