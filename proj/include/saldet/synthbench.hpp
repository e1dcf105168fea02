#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "saldet/dataset.hpp"
#include "saldet/geometry.hpp"
#include "saldet/losses.hpp"

namespace saldet {

/// Anchors within this IoU of a sign receive its appearance features,
/// scaled by the IoU. Deliberately looser than the 0.5 positivity
/// threshold so near-miss anchors carry signal.
inline constexpr double kFeatureInjectionIou = 0.3;

/// Synthetic world parameters. Salient signs are placed with centers
/// uniform inside the corridor; non-salient signs anywhere in the image.
struct SceneGenConfig {
    int image_width = 64;
    int image_height = 64;
    Box corridor{8.0, 36.0, 56.0, 58.0};
    int signs_min = 2;
    int signs_max = 5;
    double salient_fraction = 0.6;
    double sign_size_min = 12.0;
    double sign_size_max = 20.0;
    int appearance_dim = 8;
    double appearance_noise_sigma = 0.6;
    double clutter_rate = 8.0;
    double anchor_stride = 3.0;
    std::vector<double> anchor_sizes = {12.0, 16.0, 20.0};
    std::uint64_t seed = 0;
};

/// Throws ConfigError on any violated invariant (corridor outside the
/// image, empty size ranges, non-positive scales, ...).
void validate(const SceneGenConfig& cfg);

/// Square candidate boxes tiling the image: centers on a regular stride
/// grid (row-major), one anchor per size at each center (size-innermost
/// order). Anchor boxes may overhang the image edge.
struct AnchorGrid {
    int image_width = 0;
    int image_height = 0;
    double stride = 0.0;
    std::vector<double> sizes;
    std::vector<Box> anchors;

    static AnchorGrid build(int image_width, int image_height, double stride,
                            std::vector<double> sizes);
    static AnchorGrid build(const SceneGenConfig& cfg);
};

/// One generated image: its ground-truth record plus the per-anchor
/// appearance feature table (rows follow the anchor order of the grid).
struct SyntheticScene {
    ImageRecord record;
    Eigen::MatrixXd features; // anchors x appearance_dim
};

/// Appearance feature table per image id.
struct FeatureStore {
    int appearance_dim = 0;
    std::map<std::string, Eigen::MatrixXd> by_image;
};

struct SynthDataset {
    Dataset dataset;
    AnchorGrid grid;
    FeatureStore features;
};

/// Fixed unit-norm appearance prototype for a category: a shared component
/// on axis 0 (common "sign-ness" evidence) plus a category-specific
/// direction in the remaining dims. Independent of any scene seed.
Eigen::VectorXd category_prototype(SignCategory category, int appearance_dim);

/// Deterministic in (cfg.seed, scene_index). Draws the sign count, places
/// signs by salience rule with rejection sampling against overlap (100
/// attempts per sign, then the sign is dropped), then fills the feature
/// table: per-sign prototype-plus-noise injections at IoU >= 0.3 (scaled
/// by IoU) and Poisson clutter bumps at random anchors.
SyntheticScene gen_scene(const SceneGenConfig& cfg, const AnchorGrid& grid, int scene_index);

/// Convenience overload building the grid from cfg.
SyntheticScene gen_scene(const SceneGenConfig& cfg, int scene_index);

/// Scenes first_index .. first_index + n_scenes - 1 collected into a
/// validated Dataset plus its feature store.
SynthDataset gen_dataset(const SceneGenConfig& cfg, int n_scenes, int first_index = 0);

struct AnchorLabel {
    bool positive = false;       ///< max IoU to any annotation >= 0.5
    double salience_weight = 1.0;
};

/// Per-anchor positivity and salience weight (losses-module semantics;
/// weight 1 everywhere when gts is empty).
std::vector<AnchorLabel> assign_labels(const AnchorGrid& grid, std::span<const SignAnnotation> gts,
                                       const SalienceParams& sp);

/// Binary feature sidecar (see README for the exact layout): grid
/// parameters plus one row-major double matrix per image, little-endian.
void save_feature_sidecar(const AnchorGrid& grid, const FeatureStore& store,
                          const std::filesystem::path& path);

struct FeatureSidecar {
    AnchorGrid grid;
    FeatureStore features;
};

FeatureSidecar load_feature_sidecar(const std::filesystem::path& path);

} // namespace saldet
