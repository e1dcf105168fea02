#include "saldet/trainer.hpp"

#include <algorithm>
#include <cmath>

#include <nlohmann/json.hpp>

#include "saldet/errors.hpp"
#include "saldet/io.hpp"

namespace saldet {

namespace {

double sigmoid(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

} // namespace

void validate(const TrainConfig& cfg) {
    if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
        throw ConfigError("learning_rate must be finite and positive");
    }
    if (cfg.epochs <= 0) {
        throw ConfigError("epochs must be positive");
    }
    if (!(cfg.grad_clip_norm > 0.0) || !std::isfinite(cfg.grad_clip_norm)) {
        throw ConfigError("grad_clip_norm must be finite and positive");
    }
    if (!(cfg.lr_decay_factor > 0.0 && cfg.lr_decay_factor <= 1.0)) {
        throw ConfigError("lr_decay_factor must be in (0, 1]");
    }
    for (std::size_t i = 0; i < cfg.lr_milestones.size(); ++i) {
        if (cfg.lr_milestones[i] < 0) {
            throw ConfigError("lr_milestones must be non-negative");
        }
        if (i > 0 && cfg.lr_milestones[i] <= cfg.lr_milestones[i - 1]) {
            throw ConfigError("lr_milestones must be strictly increasing");
        }
    }
    if (!(cfg.prob_epsilon > 0.0 && cfg.prob_epsilon < 1.0)) {
        throw ConfigError("prob_epsilon must be in (0, 1)");
    }
    validate(cfg.focal);
    validate(cfg.salience);
}

TrainData assemble_training_data(const Dataset& dataset, const FeatureStore& store,
                                 const AnchorGrid& grid, const SalienceParams& sp) {
    const auto n_anchors = static_cast<Eigen::Index>(grid.anchors.size());
    const int dim = store.appearance_dim;
    if (dim < 1) {
        throw ValidationError("feature store has no appearance dims");
    }

    TrainData data;
    data.appearance_dim = dim;
    const auto n_rows = static_cast<Eigen::Index>(dataset.images.size()) * n_anchors;
    data.design.resize(n_rows, dim + 2);
    data.positive.resize(static_cast<std::size_t>(n_rows), 0);
    data.salience_weights.resize(n_rows);

    const double inv_w = 1.0 / grid.image_width;
    const double inv_h = 1.0 / grid.image_height;

    Eigen::Index row = 0;
    bool any_positive = false;
    for (const auto& image : dataset.images) {
        const auto it = store.by_image.find(image.image_id);
        if (it == store.by_image.end()) {
            throw ValidationError("feature store is missing image '" + image.image_id + "'",
                                  image.image_id);
        }
        const Eigen::MatrixXd& feats = it->second;
        if (feats.rows() != n_anchors || feats.cols() != dim) {
            throw ValidationError("feature matrix shape mismatch for image '" + image.image_id +
                                      "'",
                                  image.image_id);
        }

        const auto labels = assign_labels(grid, image.annotations, sp);
        for (Eigen::Index a = 0; a < n_anchors; ++a) {
            data.design.block(row, 0, 1, dim) = feats.row(a);
            const Box& anchor = grid.anchors[static_cast<std::size_t>(a)];
            data.design(row, dim) = anchor.center_x() * inv_w;
            data.design(row, dim + 1) = anchor.center_y() * inv_h;
            const auto& lab = labels[static_cast<std::size_t>(a)];
            data.positive[static_cast<std::size_t>(row)] = lab.positive ? 1 : 0;
            data.salience_weights[row] = lab.salience_weight;
            any_positive = any_positive || lab.positive;
            ++row;
        }
    }
    if (!any_positive) {
        throw NoPositives("no anchor overlaps any annotation at IoU 0.5");
    }
    return data;
}

LossGrad compute_loss_and_gradient(const TrainData& data, const Eigen::VectorXd& weights,
                                   double bias, const FocalParams& fp, LossMode mode,
                                   double prob_epsilon) {
    const Eigen::Index n = data.design.rows();
    if (n == 0) {
        throw EmptyBatch("no training rows");
    }
    if (weights.size() != data.design.cols()) {
        throw ValidationError("weight vector length does not match the design matrix");
    }

    const Eigen::VectorXd z = data.design * weights + Eigen::VectorXd::Constant(n, bias);

    std::vector<Probability> ps;
    std::vector<double> wts;
    ps.reserve(static_cast<std::size_t>(n));
    wts.reserve(static_cast<std::size_t>(n));
    Eigen::VectorXd dp_dz(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const bool pos = data.positive[static_cast<std::size_t>(i)] != 0;
        const double s = sigmoid(z[i]);
        const double sm = sigmoid(-z[i]);
        ps.emplace_back(pos ? s : sm, prob_epsilon);
        wts.push_back(mode == LossMode::SSFL ? data.salience_weights[i] : 1.0);
        // d p_t / d z: sigma' for positives, -sigma' for negatives.
        dp_dz[i] = (pos ? 1.0 : -1.0) * s * sm;
    }

    const BatchLossResult batch = weighted_focal_batch(ps, wts, fp);

    Eigen::VectorXd dz(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dz[i] = batch.gradients[static_cast<std::size_t>(i)] * dp_dz[i];
    }

    LossGrad out;
    out.loss = batch.total;
    out.grad_weights = data.design.transpose() * dz;
    out.grad_bias = dz.sum();
    return out;
}

TrainResult train(const TrainData& data, const TrainConfig& cfg) {
    validate(cfg);
    if (std::find(data.positive.begin(), data.positive.end(), 1) == data.positive.end()) {
        throw NoPositives("no positive rows in the training data");
    }

    Eigen::VectorXd w = Eigen::VectorXd::Zero(data.design.cols());
    double b = 0.0;
    double lr = cfg.learning_rate;

    TrainResult result;
    result.loss_trace.reserve(static_cast<std::size_t>(cfg.epochs));
    result.weight_trace.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (std::binary_search(cfg.lr_milestones.begin(), cfg.lr_milestones.end(), epoch)) {
            lr *= cfg.lr_decay_factor;
        }

        LossGrad lg;
        try {
            lg = compute_loss_and_gradient(data, w, b, cfg.focal, cfg.loss_mode,
                                           cfg.prob_epsilon);
        } catch (const DomainError&) {
            // Overflowing parameters surface as non-finite logits in the
            // probability check; report them as divergence with the epoch.
            throw DivergedLoss("training diverged: non-finite logits at epoch " +
                                   std::to_string(epoch),
                               epoch);
        }
        if (!std::isfinite(lg.loss)) {
            throw DivergedLoss("training diverged: non-finite loss at epoch " +
                                   std::to_string(epoch),
                               epoch);
        }
        result.loss_trace.push_back(lg.loss);

        const double joint_norm =
            std::sqrt(lg.grad_weights.squaredNorm() + lg.grad_bias * lg.grad_bias);
        if (joint_norm > cfg.grad_clip_norm) {
            const double scale = cfg.grad_clip_norm / joint_norm;
            lg.grad_weights *= scale;
            lg.grad_bias *= scale;
        }

        w -= lr * lg.grad_weights;
        b -= lr * lg.grad_bias;
        result.weight_trace.push_back(ModelWeights{w, b});
    }

    result.model = ModelWeights{std::move(w), b};
    return result;
}

TrainResult train(const Dataset& dataset, const FeatureStore& store, const AnchorGrid& grid,
                  const TrainConfig& cfg) {
    validate(cfg);
    const TrainData data = assemble_training_data(dataset, store, grid, cfg.salience);
    return train(data, cfg);
}

std::vector<Detection> predict(const ModelWeights& model, const AnchorGrid& grid,
                               const Eigen::MatrixXd& appearance, const std::string& image_id,
                               std::size_t max_dets) {
    const auto n_anchors = static_cast<Eigen::Index>(grid.anchors.size());
    if (appearance.rows() != n_anchors) {
        throw ValidationError("appearance rows do not match the anchor grid for image '" +
                                  image_id + "'",
                              image_id);
    }
    if (appearance.cols() + 2 != model.weights.size()) {
        throw ValidationError("model width does not match appearance dims plus position for "
                              "image '" +
                                  image_id + "'",
                              image_id);
    }

    const int dim = static_cast<int>(appearance.cols());
    Eigen::VectorXd z = appearance * model.weights.head(dim);
    const double wx = model.weights[dim];
    const double wy = model.weights[dim + 1];
    const double inv_w = 1.0 / grid.image_width;
    const double inv_h = 1.0 / grid.image_height;

    std::vector<Detection> dets;
    dets.reserve(grid.anchors.size());
    for (Eigen::Index a = 0; a < n_anchors; ++a) {
        const Box& anchor = grid.anchors[static_cast<std::size_t>(a)];
        const double logit = z[a] + wx * anchor.center_x() * inv_w +
                             wy * anchor.center_y() * inv_h + model.bias;
        dets.push_back(Detection{image_id, anchor, sigmoid(logit)});
    }
    return cap_detections(dets, max_dets);
}

std::vector<Detection> predict(const ModelWeights& model, const SyntheticScene& scene,
                               const AnchorGrid& grid, std::size_t max_dets) {
    return predict(model, grid, scene.features, scene.record.image_id, max_dets);
}

std::string serialize_model(const ModelWeights& model, LossMode loss_mode) {
    if (model.weights.size() < 3) {
        throw ValidationError("model needs at least one appearance dim plus two position dims");
    }
    nlohmann::ordered_json j;
    j["feature_dim"] = model.weights.size();
    j["appearance_dim"] = model.weights.size() - 2;
    j["weights"] = std::vector<double>(model.weights.begin(), model.weights.end());
    j["bias"] = model.bias;
    j["loss_mode"] = std::string(to_string(loss_mode));
    return j.dump(2) + "\n";
}

LoadedModel parse_model(const std::string& text) {
    nlohmann::ordered_json doc;
    try {
        doc = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::ordered_json::parse_error& e) {
        throw ParseError(std::string("invalid model JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw SchemaError("model file must be a JSON object");
    }
    for (const auto& [key, _] : doc.items()) {
        if (key != "feature_dim" && key != "appearance_dim" && key != "weights" &&
            key != "bias" && key != "loss_mode") {
            throw SchemaError("unknown field '" + key + "' in model file");
        }
    }
    const auto require = [&](const char* key) -> const nlohmann::ordered_json& {
        const auto it = doc.find(key);
        if (it == doc.end()) {
            throw SchemaError("missing field '" + std::string(key) + "' in model file");
        }
        return *it;
    };

    const auto& fd = require("feature_dim");
    const auto& ad = require("appearance_dim");
    if (!fd.is_number_integer() || !ad.is_number_integer()) {
        throw SchemaError("model dims must be integers");
    }
    const auto& weights = require("weights");
    if (!weights.is_array()) {
        throw SchemaError("field 'weights' must be an array in model file");
    }
    const auto& bias = require("bias");
    if (!bias.is_number()) {
        throw SchemaError("field 'bias' must be a number in model file");
    }
    const auto& mode = require("loss_mode");
    if (!mode.is_string()) {
        throw SchemaError("field 'loss_mode' must be a string in model file");
    }

    LoadedModel out;
    out.model.weights.resize(static_cast<Eigen::Index>(weights.size()));
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!weights[i].is_number()) {
            throw SchemaError("model weights must be numbers");
        }
        out.model.weights[static_cast<Eigen::Index>(i)] = weights[i].get<double>();
    }
    out.model.bias = bias.get<double>();
    out.loss_mode = loss_mode_from_string(mode.get<std::string>());

    const auto feature_dim = fd.get<std::int64_t>();
    const auto appearance_dim = ad.get<std::int64_t>();
    if (feature_dim != static_cast<std::int64_t>(weights.size()) ||
        appearance_dim + 2 != feature_dim || appearance_dim < 1) {
        throw ValidationError("model dims are inconsistent with the weight vector");
    }
    return out;
}

void save_model(const ModelWeights& model, LossMode loss_mode,
                const std::filesystem::path& path) {
    write_file_atomic(path, serialize_model(model, loss_mode));
}

LoadedModel load_model(const std::filesystem::path& path) {
    return parse_model(read_text_file(path));
}

} // namespace saldet
