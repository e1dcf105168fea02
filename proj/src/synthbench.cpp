#include "saldet/synthbench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <utility>

#include "saldet/errors.hpp"
#include "saldet/io.hpp"
#include "saldet/rng.hpp"

namespace saldet {

namespace {

std::string format_scene_id(int scene_index) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "scene-%06d", scene_index);
    return buf;
}

std::string format_annotation_id(const std::string& image_id, int k) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "-a%02d", k);
    return image_id + buf;
}

} // namespace

void validate(const SceneGenConfig& cfg) {
    if (cfg.image_width <= 0 || cfg.image_height <= 0) {
        throw ConfigError("image dimensions must be positive");
    }
    if (cfg.corridor.x_min() < 0.0 || cfg.corridor.y_min() < 0.0 ||
        cfg.corridor.x_max() > cfg.image_width || cfg.corridor.y_max() > cfg.image_height) {
        throw ConfigError("corridor must lie within the image");
    }
    if (cfg.signs_min < 0 || cfg.signs_max < cfg.signs_min) {
        throw ConfigError("signs_per_scene range is empty or negative");
    }
    if (!(cfg.salient_fraction >= 0.0 && cfg.salient_fraction <= 1.0)) {
        throw ConfigError("salient_fraction must be in [0, 1]");
    }
    if (!(cfg.sign_size_min > 0.0) || !(cfg.sign_size_max >= cfg.sign_size_min)) {
        throw ConfigError("sign_size range is empty or non-positive");
    }
    if (cfg.sign_size_max > std::min(cfg.image_width, cfg.image_height)) {
        throw ConfigError("sign_size_max exceeds the image");
    }
    if (cfg.appearance_dim < 2) {
        throw ConfigError("appearance_dim must be at least 2");
    }
    if (!(cfg.appearance_noise_sigma >= 0.0) || !std::isfinite(cfg.appearance_noise_sigma)) {
        throw ConfigError("appearance_noise_sigma must be finite and non-negative");
    }
    if (!(cfg.clutter_rate >= 0.0) || !std::isfinite(cfg.clutter_rate)) {
        throw ConfigError("clutter_rate must be finite and non-negative");
    }
    if (!(cfg.anchor_stride > 0.0) || !std::isfinite(cfg.anchor_stride)) {
        throw ConfigError("anchor_stride must be finite and positive");
    }
    if (cfg.anchor_sizes.empty()) {
        throw ConfigError("anchor_sizes must be non-empty");
    }
    for (double s : cfg.anchor_sizes) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw ConfigError("anchor sizes must be finite and positive");
        }
    }
    if (!std::is_sorted(cfg.anchor_sizes.begin(), cfg.anchor_sizes.end())) {
        throw ConfigError("anchor_sizes must be sorted ascending");
    }
}

AnchorGrid AnchorGrid::build(int image_width, int image_height, double stride,
                             std::vector<double> sizes) {
    if (image_width <= 0 || image_height <= 0) {
        throw ConfigError("anchor grid image dimensions must be positive");
    }
    if (!(stride > 0.0) || !std::isfinite(stride)) {
        throw ConfigError("anchor grid stride must be finite and positive");
    }
    if (sizes.empty()) {
        throw ConfigError("anchor grid needs at least one size");
    }
    for (double s : sizes) {
        if (!(s > 0.0) || !std::isfinite(s)) {
            throw ConfigError("anchor sizes must be finite and positive");
        }
    }

    AnchorGrid grid;
    grid.image_width = image_width;
    grid.image_height = image_height;
    grid.stride = stride;
    grid.sizes = std::move(sizes);

    const auto cols = static_cast<int>(std::floor(image_width / stride));
    const auto rows = static_cast<int>(std::floor(image_height / stride));
    if (cols <= 0 || rows <= 0) {
        throw ConfigError("anchor grid stride leaves no cells");
    }
    grid.anchors.reserve(static_cast<std::size_t>(cols) * rows * grid.sizes.size());
    for (int r = 0; r < rows; ++r) {
        const double cy = (r + 0.5) * stride;
        for (int c = 0; c < cols; ++c) {
            const double cx = (c + 0.5) * stride;
            for (double s : grid.sizes) {
                const double h = s / 2.0;
                grid.anchors.emplace_back(cx - h, cy - h, cx + h, cy + h);
            }
        }
    }
    return grid;
}

AnchorGrid AnchorGrid::build(const SceneGenConfig& cfg) {
    return build(cfg.image_width, cfg.image_height, cfg.anchor_stride, cfg.anchor_sizes);
}

Eigen::VectorXd category_prototype(SignCategory category, int appearance_dim) {
    if (appearance_dim < 2) {
        throw ConfigError("appearance_dim must be at least 2");
    }
    // Shared evidence component: a linear scorer can pick up axis 0 as a
    // generic sign detector without learning all 18 directions.
    constexpr double kSharedWeight = 0.7;
    constexpr std::uint64_t kPrototypeSeed = 0x5157a11e5ULL;

    Eigen::VectorXd proto = Eigen::VectorXd::Zero(appearance_dim);
    proto[0] = kSharedWeight;

    Rng rng(mix_seed(kPrototypeSeed, static_cast<std::uint64_t>(category)));
    Eigen::VectorXd rest(appearance_dim - 1);
    for (int i = 0; i < rest.size(); ++i) {
        rest[i] = rng.gaussian();
    }
    const double norm = rest.norm();
    const double target = std::sqrt(1.0 - kSharedWeight * kSharedWeight);
    if (norm > 0.0) {
        rest *= target / norm;
    }
    proto.tail(appearance_dim - 1) = rest;
    return proto;
}

namespace {

struct CenterRegion {
    double x_lo, x_hi, y_lo, y_hi;
    bool empty() const { return !(x_hi > x_lo) || !(y_hi > y_lo); }
};

CenterRegion center_region(const SceneGenConfig& cfg, double size, bool salient) {
    const double h = size / 2.0;
    CenterRegion r{h, cfg.image_width - h, h, cfg.image_height - h};
    if (salient) {
        r.x_lo = std::max(r.x_lo, cfg.corridor.x_min());
        r.x_hi = std::min(r.x_hi, cfg.corridor.x_max());
        r.y_lo = std::max(r.y_lo, cfg.corridor.y_min());
        r.y_hi = std::min(r.y_hi, cfg.corridor.y_max());
    }
    return r;
}

} // namespace

SyntheticScene gen_scene(const SceneGenConfig& cfg, const AnchorGrid& grid, int scene_index) {
    validate(cfg);
    if (scene_index < 0) {
        throw ConfigError("scene_index must be non-negative");
    }

    Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(scene_index)));
    const std::string image_id = format_scene_id(scene_index);
    const auto categories = all_sign_categories();

    ImageRecord record;
    record.image_id = image_id;
    record.width = cfg.image_width;
    record.height = cfg.image_height;

    const int n_signs = rng.uniform_int(cfg.signs_min, cfg.signs_max);
    for (int k = 0; k < n_signs; ++k) {
        const bool salient = rng.bernoulli(cfg.salient_fraction);
        const SignCategory category = categories[rng.uniform_index(categories.size())];

        for (int attempt = 0; attempt < 100; ++attempt) {
            const double size = rng.uniform(cfg.sign_size_min, cfg.sign_size_max);
            const CenterRegion region = center_region(cfg, size, salient);
            if (region.empty()) {
                continue;
            }
            const double cx = rng.uniform(region.x_lo, region.x_hi);
            const double cy = rng.uniform(region.y_lo, region.y_hi);
            const Box box(cx - size / 2.0, cy - size / 2.0, cx + size / 2.0, cy + size / 2.0);

            bool overlaps = false;
            for (const auto& placed : record.annotations) {
                if (intersection_area(box, placed.box) > 0.0) {
                    overlaps = true;
                    break;
                }
            }
            if (overlaps) {
                continue;
            }
            record.annotations.push_back(SignAnnotation{
                format_annotation_id(image_id, static_cast<int>(record.annotations.size())),
                image_id, box, category, salient, std::nullopt});
            break;
        }
        // A sign that found no free spot in 100 attempts is dropped.
    }

    SyntheticScene scene{std::move(record),
                         Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(grid.anchors.size()),
                                               cfg.appearance_dim)};

    for (const auto& ann : scene.record.annotations) {
        const Eigen::VectorXd proto = category_prototype(ann.category, cfg.appearance_dim);
        for (std::size_t a = 0; a < grid.anchors.size(); ++a) {
            const double v = iou(grid.anchors[a], ann.box);
            if (v < kFeatureInjectionIou) {
                continue;
            }
            for (int j = 0; j < cfg.appearance_dim; ++j) {
                scene.features(static_cast<Eigen::Index>(a), j) +=
                    v * (proto[j] + rng.gaussian(cfg.appearance_noise_sigma));
            }
        }
    }

    const int n_clutter = rng.poisson(cfg.clutter_rate);
    for (int k = 0; k < n_clutter; ++k) {
        const auto a = static_cast<Eigen::Index>(rng.uniform_index(grid.anchors.size()));
        const SignCategory category = categories[rng.uniform_index(categories.size())];
        const double scale = rng.uniform(0.3, 1.0);
        const Eigen::VectorXd proto = category_prototype(category, cfg.appearance_dim);
        for (int j = 0; j < cfg.appearance_dim; ++j) {
            scene.features(a, j) += scale * (proto[j] + rng.gaussian(cfg.appearance_noise_sigma));
        }
    }

    return scene;
}

SyntheticScene gen_scene(const SceneGenConfig& cfg, int scene_index) {
    return gen_scene(cfg, AnchorGrid::build(cfg), scene_index);
}

SynthDataset gen_dataset(const SceneGenConfig& cfg, int n_scenes, int first_index) {
    validate(cfg);
    if (n_scenes <= 0) {
        throw ConfigError("n_scenes must be positive");
    }
    if (first_index < 0) {
        throw ConfigError("first_index must be non-negative");
    }

    SynthDataset out;
    out.grid = AnchorGrid::build(cfg);
    out.features.appearance_dim = cfg.appearance_dim;
    out.dataset.images.reserve(static_cast<std::size_t>(n_scenes));
    for (int i = 0; i < n_scenes; ++i) {
        SyntheticScene scene = gen_scene(cfg, out.grid, first_index + i);
        out.features.by_image.emplace(scene.record.image_id, std::move(scene.features));
        out.dataset.images.push_back(std::move(scene.record));
    }
    validate_dataset(out.dataset);
    return out;
}

std::vector<AnchorLabel> assign_labels(const AnchorGrid& grid, std::span<const SignAnnotation> gts,
                                       const SalienceParams& sp) {
    std::vector<AnchorLabel> labels(grid.anchors.size());
    for (std::size_t a = 0; a < grid.anchors.size(); ++a) {
        double best = 0.0;
        for (const auto& gt : gts) {
            best = std::max(best, iou(grid.anchors[a], gt.box));
        }
        labels[a].positive = best >= 0.5;
        labels[a].salience_weight = salience_weight(grid.anchors[a], gts, sp);
    }
    return labels;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "feature sidecar writer assumes a little-endian host");

constexpr char kMagic[4] = {'S', 'S', 'F', 'B'};
constexpr std::uint32_t kVersion = 1;

void append_u32(std::string& buf, std::uint32_t v) {
    char bytes[4];
    std::memcpy(bytes, &v, 4);
    buf.append(bytes, 4);
}

void append_f64(std::string& buf, double v) {
    char bytes[8];
    std::memcpy(bytes, &v, 8);
    buf.append(bytes, 8);
}

struct Cursor {
    const std::string& data;
    std::size_t pos = 0;

    void require(std::size_t n) const {
        if (pos + n > data.size()) {
            throw ParseError("feature sidecar truncated");
        }
    }
    std::uint32_t u32() {
        require(4);
        std::uint32_t v;
        std::memcpy(&v, data.data() + pos, 4);
        pos += 4;
        return v;
    }
    double f64() {
        require(8);
        double v;
        std::memcpy(&v, data.data() + pos, 8);
        pos += 8;
        return v;
    }
    std::string bytes(std::size_t n) {
        require(n);
        std::string v = data.substr(pos, n);
        pos += n;
        return v;
    }
};

} // namespace

void save_feature_sidecar(const AnchorGrid& grid, const FeatureStore& store,
                          const std::filesystem::path& path) {
    const auto n_anchors = static_cast<std::uint32_t>(grid.anchors.size());
    const auto dim = static_cast<std::uint32_t>(store.appearance_dim);
    for (const auto& [image_id, m] : store.by_image) {
        if (m.rows() != static_cast<Eigen::Index>(n_anchors) ||
            m.cols() != static_cast<Eigen::Index>(dim)) {
            throw ValidationError("feature matrix shape mismatch for image '" + image_id + "'",
                                  image_id);
        }
    }

    std::string buf;
    buf.append(kMagic, 4);
    append_u32(buf, kVersion);
    append_u32(buf, static_cast<std::uint32_t>(grid.image_width));
    append_u32(buf, static_cast<std::uint32_t>(grid.image_height));
    append_f64(buf, grid.stride);
    append_u32(buf, static_cast<std::uint32_t>(grid.sizes.size()));
    for (double s : grid.sizes) {
        append_f64(buf, s);
    }
    append_u32(buf, dim);
    append_u32(buf, static_cast<std::uint32_t>(store.by_image.size()));
    for (const auto& [image_id, m] : store.by_image) {
        append_u32(buf, static_cast<std::uint32_t>(image_id.size()));
        buf.append(image_id);
        append_u32(buf, n_anchors);
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                append_f64(buf, m(r, c));
            }
        }
    }
    write_file_atomic(path, buf);
}

FeatureSidecar load_feature_sidecar(const std::filesystem::path& path) {
    const std::string data = read_text_file(path);
    Cursor cur{data};

    if (cur.bytes(4) != std::string(kMagic, 4)) {
        throw ParseError("feature sidecar has wrong magic");
    }
    if (cur.u32() != kVersion) {
        throw ParseError("unsupported feature sidecar version");
    }

    const auto width = static_cast<int>(cur.u32());
    const auto height = static_cast<int>(cur.u32());
    const double stride = cur.f64();
    const auto n_sizes = cur.u32();
    std::vector<double> sizes;
    sizes.reserve(n_sizes);
    for (std::uint32_t i = 0; i < n_sizes; ++i) {
        sizes.push_back(cur.f64());
    }

    FeatureSidecar out;
    out.grid = AnchorGrid::build(width, height, stride, std::move(sizes));
    const auto expected_anchors = static_cast<std::uint32_t>(out.grid.anchors.size());

    const auto dim = cur.u32();
    if (dim == 0) {
        throw ParseError("feature sidecar has zero appearance_dim");
    }
    out.features.appearance_dim = static_cast<int>(dim);

    const auto n_images = cur.u32();
    for (std::uint32_t i = 0; i < n_images; ++i) {
        const auto id_len = cur.u32();
        std::string image_id = cur.bytes(id_len);
        const auto n_anchors = cur.u32();
        if (n_anchors != expected_anchors) {
            throw ParseError("feature sidecar anchor count does not match its grid");
        }
        Eigen::MatrixXd m(static_cast<Eigen::Index>(n_anchors), static_cast<Eigen::Index>(dim));
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                m(r, c) = cur.f64();
            }
        }
        if (!out.features.by_image.emplace(std::move(image_id), std::move(m)).second) {
            throw ParseError("feature sidecar repeats an image id");
        }
    }
    if (cur.pos != data.size()) {
        throw ParseError("feature sidecar has trailing bytes");
    }
    return out;
}

} // namespace saldet
