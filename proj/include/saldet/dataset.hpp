#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "saldet/geometry.hpp"

namespace saldet {

/// Closed set of sign categories carried by the annotation schema.
enum class SignCategory : int {
    Stop = 0,
    Yield,
    DoNotEnter,
    WrongWay,
    SchoolZone,
    Railroad,
    RedWhiteRegulatory,
    WhiteRegulatory,
    ConstructionMaintenance,
    Warning,
    NoTurn,
    OneWay,
    NoTurnOnRed,
    DoNotPass,
    SpeedLimit,
    Guide,
    ServiceRecreation,
    Undefined,
};

inline constexpr int kNumSignCategories = 18;

/// All categories in enum order.
const std::array<SignCategory, kNumSignCategories>& all_sign_categories();

std::string_view to_string(SignCategory c);

/// Parses the serialized category name; throws ValidationError on an
/// unknown string.
SignCategory sign_category_from_string(std::string_view s);

/// One ground-truth sign: a box, its category and the salience flag.
struct SignAnnotation {
    std::string id;
    std::string image_id;
    Box box;
    SignCategory category = SignCategory::Undefined;
    bool salient = false;
    std::optional<bool> occluded;

    bool operator==(const SignAnnotation&) const = default;
};

struct ImageRecord {
    std::string image_id;
    int width = 0;
    int height = 0;
    std::vector<SignAnnotation> annotations;
    std::optional<std::string> source_clip;

    bool operator==(const ImageRecord&) const = default;
};

struct DeclaredCounts {
    std::int64_t total = 0;
    std::int64_t salient = 0;
    std::int64_t non_salient = 0;

    bool operator==(const DeclaredCounts&) const = default;
};

struct Dataset {
    std::vector<ImageRecord> images;
    std::optional<DeclaredCounts> declared_counts;

    bool operator==(const Dataset&) const = default;
};

/// Per-category tally split by salience.
struct CategoryCount {
    std::int64_t salient = 0;
    std::int64_t non_salient = 0;

    bool operator==(const CategoryCount&) const = default;
};

struct StatsReport {
    std::int64_t images = 0;
    std::int64_t total = 0;
    std::int64_t salient = 0;
    std::int64_t non_salient = 0;
    std::array<CategoryCount, kNumSignCategories> per_category{};

    bool operator==(const StatsReport&) const = default;
};

/// Fractions must sum to 1 (within 1e-9); the seed pins the shuffle.
struct SplitSpec {
    double train_fraction = 0.8;
    double val_fraction = 0.1;
    double test_fraction = 0.1;
    std::uint64_t seed = 0;
};

struct SplitResult {
    Dataset train;
    Dataset val;
    Dataset test;
};

/// Checks every dataset invariant: positive image sizes, unique image and
/// annotation ids, boxes inside their image, annotation image_id matching
/// the owning image, and declared counts (when present) matching the
/// recomputed census. Throws ValidationError naming the offending record.
void validate_dataset(const Dataset& ds);

/// Loads and fully validates an annotation file (see README for the schema).
Dataset load_dataset(const std::filesystem::path& path);

/// Parses a dataset from an in-memory JSON string.
Dataset parse_dataset(const std::string& text);

/// Canonical serialization: fixed key order, full round-trip float
/// precision, two-space indent. load(save(ds)) == ds, and saving a loaded
/// file reproduces it byte for byte.
std::string serialize_dataset(const Dataset& ds);

void save_dataset(const Dataset& ds, const std::filesystem::path& path);

StatsReport dataset_stats(const Dataset& ds);

/// Seed-deterministic partition of images into train/val/test. Split sizes
/// are floor(fraction * N) with the remainder assigned to train; each split
/// keeps the input image order. Splits carry no declared_counts.
SplitResult split_dataset(const Dataset& ds, const SplitSpec& spec);

} // namespace saldet
