#include "saldet/experiment.hpp"

#include <utility>

#include <nlohmann/json.hpp>

#include "saldet/errors.hpp"

namespace saldet {

using ordered_json = nlohmann::ordered_json;

namespace {

void require_comparable(const TrainConfig& a, const TrainConfig& b) {
    const bool same = a.learning_rate == b.learning_rate && a.epochs == b.epochs &&
                      a.grad_clip_norm == b.grad_clip_norm &&
                      a.lr_decay_factor == b.lr_decay_factor &&
                      a.lr_milestones == b.lr_milestones &&
                      a.focal.alpha_fl == b.focal.alpha_fl && a.focal.gamma == b.focal.gamma &&
                      a.prob_epsilon == b.prob_epsilon;
    if (!same) {
        throw ConfigError(
            "experiment arms must differ only in loss_mode and salience parameters");
    }
}

ExperimentArm run_arm(const TrainConfig& cfg, const SynthDataset& train_set,
                      const SynthDataset& test_set, const EvalParams& eval_params,
                      const std::vector<double>& thresholds) {
    const TrainResult trained = train(train_set.dataset, train_set.features, train_set.grid, cfg);

    std::vector<Detection> all_dets;
    for (const auto& image : test_set.dataset.images) {
        const auto& feats = test_set.features.by_image.at(image.image_id);
        auto dets = predict(trained.model, test_set.grid, feats, image.image_id,
                            eval_params.max_detections);
        all_dets.insert(all_dets.end(), dets.begin(), dets.end());
    }

    CurveMetadata metadata;
    metadata.dataset_id = "synth-test";
    metadata.model_id = "linear-logit";
    metadata.loss_mode = std::string(to_string(cfg.loss_mode));

    ExperimentArm arm;
    arm.loss_mode = cfg.loss_mode;
    arm.curve = pr_sweep(group_detections(all_dets), annotations_by_image(test_set.dataset),
                         thresholds, eval_params, std::move(metadata));
    arm.auc_recall_all = auc(arm.curve, RecallAxis::All);
    arm.auc_recall_salient = auc(arm.curve, RecallAxis::Salient);

    double margin_sum = 0.0;
    for (const auto& pt : arm.curve.points) {
        margin_sum += pt.margin;
    }
    arm.mean_margin = arm.curve.points.empty()
                          ? 0.0
                          : margin_sum / static_cast<double>(arm.curve.points.size());
    return arm;
}

ordered_json arm_to_json(const ExperimentArm& arm) {
    ordered_json j;
    j["loss_mode"] = std::string(to_string(arm.loss_mode));
    j["auc_recall_all"] = arm.auc_recall_all;
    j["auc_recall_salient"] = arm.auc_recall_salient;
    j["mean_margin"] = arm.mean_margin;
    ordered_json points = ordered_json::array();
    for (const auto& pt : arm.curve.points) {
        ordered_json p;
        p["threshold"] = pt.threshold;
        p["precision"] = pt.precision;
        p["recall_all"] = pt.recall_all;
        p["recall_salient"] = pt.recall_salient;
        p["margin"] = pt.margin;
        points.push_back(std::move(p));
    }
    j["points"] = std::move(points);
    return j;
}

} // namespace

ExperimentReport run_experiment(const SceneGenConfig& gen_cfg, const TrainConfig& baseline_cfg,
                                const TrainConfig& treatment_cfg, int n_train, int n_test,
                                const EvalParams& eval_params,
                                const std::vector<double>& thresholds) {
    validate(gen_cfg);
    validate(baseline_cfg);
    validate(treatment_cfg);
    require_comparable(baseline_cfg, treatment_cfg);
    if (n_train <= 0 || n_test <= 0) {
        throw ConfigError("experiment needs positive n_train and n_test");
    }

    const SynthDataset train_set = gen_dataset(gen_cfg, n_train, 0);
    const SynthDataset test_set = gen_dataset(gen_cfg, n_test, n_train);

    ExperimentReport report;
    report.n_train = n_train;
    report.n_test = n_test;
    report.seed = gen_cfg.seed;
    report.baseline = run_arm(baseline_cfg, train_set, test_set, eval_params, thresholds);
    report.treatment = run_arm(treatment_cfg, train_set, test_set, eval_params, thresholds);
    report.delta_auc_recall_all = report.treatment.auc_recall_all - report.baseline.auc_recall_all;
    report.delta_auc_recall_salient =
        report.treatment.auc_recall_salient - report.baseline.auc_recall_salient;
    report.delta_mean_margin = report.treatment.mean_margin - report.baseline.mean_margin;
    return report;
}

std::string serialize_report(const ExperimentReport& report) {
    ordered_json j;
    j["n_train"] = report.n_train;
    j["n_test"] = report.n_test;
    j["seed"] = report.seed;
    j["baseline"] = arm_to_json(report.baseline);
    j["treatment"] = arm_to_json(report.treatment);
    ordered_json delta;
    delta["auc_recall_all"] = report.delta_auc_recall_all;
    delta["auc_recall_salient"] = report.delta_auc_recall_salient;
    delta["mean_margin"] = report.delta_mean_margin;
    j["delta"] = std::move(delta);
    return j.dump(2) + "\n";
}

} // namespace saldet
