#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "saldet/dataset.hpp"
#include "saldet/losses.hpp"
#include "saldet/matching.hpp"
#include "saldet/synthbench.hpp"

namespace saldet {

/// Linear logit model over [appearance features, cx / width, cy / height].
struct ModelWeights {
    Eigen::VectorXd weights;
    double bias = 0.0;
};

struct TrainConfig {
    double learning_rate = 32.0;
    int epochs = 200;
    double grad_clip_norm = 5.0;
    double lr_decay_factor = 0.5;
    std::vector<int> lr_milestones = {100, 150};
    LossMode loss_mode = LossMode::SSFL;
    FocalParams focal{};
    SalienceParams salience{};
    double prob_epsilon = kDefaultProbEpsilon;
};

/// Throws ConfigError on any violated invariant.
void validate(const TrainConfig& cfg);

/// Anchor-level design matrix for a whole dataset. Rows are scenes in
/// dataset order, anchors in grid order within each scene. The last two
/// columns are the normalized anchor center.
struct TrainData {
    Eigen::MatrixXd design;             // n x (appearance_dim + 2)
    std::vector<char> positive;         // n, boolean per row
    Eigen::VectorXd salience_weights;   // n
    int appearance_dim = 0;
};

/// Throws ValidationError if the store is missing an image or a matrix
/// has the wrong shape, NoPositives if no anchor reaches IoU 0.5 with
/// any annotation.
TrainData assemble_training_data(const Dataset& dataset, const FeatureStore& store,
                                 const AnchorGrid& grid, const SalienceParams& sp);

struct LossGrad {
    double loss = 0.0;
    Eigen::VectorXd grad_weights;
    double grad_bias = 0.0;
};

/// Mean weighted focal loss over all rows at the given parameters, with
/// its exact gradient. In FL mode every row weight is 1; in SSFL mode
/// the precomputed salience weights apply.
LossGrad compute_loss_and_gradient(const TrainData& data, const Eigen::VectorXd& weights,
                                   double bias, const FocalParams& fp, LossMode mode,
                                   double prob_epsilon = kDefaultProbEpsilon);

struct TrainResult {
    ModelWeights model;
    std::vector<double> loss_trace;          ///< loss before each update, length epochs
    std::vector<ModelWeights> weight_trace;  ///< parameters after each update
};

/// Full-batch gradient descent from zero init: per epoch, compute the
/// batch loss and gradient, clip the joint gradient to grad_clip_norm
/// (global L2 norm), and step. The learning rate is multiplied by
/// lr_decay_factor at the start of each milestone epoch. Throws
/// DivergedLoss when the loss stops being finite.
TrainResult train(const TrainData& data, const TrainConfig& cfg);

/// Convenience: assemble and train in one call.
TrainResult train(const Dataset& dataset, const FeatureStore& store, const AnchorGrid& grid,
                  const TrainConfig& cfg);

/// Sigmoid-scored detections for every anchor of one scene, capped to the
/// top max_dets by score.
std::vector<Detection> predict(const ModelWeights& model, const AnchorGrid& grid,
                               const Eigen::MatrixXd& appearance, const std::string& image_id,
                               std::size_t max_dets = kMaxDetectionsPerImage);

std::vector<Detection> predict(const ModelWeights& model, const SyntheticScene& scene,
                               const AnchorGrid& grid,
                               std::size_t max_dets = kMaxDetectionsPerImage);

/// Model files look like
///   {"feature_dim": 10, "appearance_dim": 8, "weights": [...], "bias": ...,
///    "loss_mode": "ssfl"}
/// where feature_dim = appearance_dim + 2 and len(weights) = feature_dim.
struct LoadedModel {
    ModelWeights model;
    LossMode loss_mode = LossMode::FL;
};

std::string serialize_model(const ModelWeights& model, LossMode loss_mode);
LoadedModel parse_model(const std::string& text);
void save_model(const ModelWeights& model, LossMode loss_mode,
                const std::filesystem::path& path);
LoadedModel load_model(const std::filesystem::path& path);

} // namespace saldet
