#pragma once

#include <string>
#include <vector>

#include "saldet/evaluation.hpp"
#include "saldet/synthbench.hpp"
#include "saldet/trainer.hpp"

namespace saldet {

/// One trained arm of the comparison, evaluated on the shared test split.
struct ExperimentArm {
    LossMode loss_mode = LossMode::FL;
    PRCurve curve;
    double auc_recall_all = 0.0;
    double auc_recall_salient = 0.0;
    double mean_margin = 0.0; ///< mean of (recall_salient - recall_all) over swept thresholds
};

struct ExperimentReport {
    int n_train = 0;
    int n_test = 0;
    std::uint64_t seed = 0;
    ExperimentArm baseline;
    ExperimentArm treatment;
    double delta_auc_recall_all = 0.0;     ///< treatment - baseline
    double delta_auc_recall_salient = 0.0; ///< treatment - baseline
    double delta_mean_margin = 0.0;        ///< treatment - baseline
};

/// Generates train scenes 0..n_train-1 and test scenes n_train..
/// n_train+n_test-1 from one generator config, trains both arms on the
/// identical training set, and sweeps both over the identical test set.
/// The two train configs must agree on everything except loss_mode and
/// salience params (ConfigError otherwise), so the loss is the only
/// difference between the arms. With both arms in the same mode the
/// curves, and hence every delta, are identical by construction.
ExperimentReport run_experiment(const SceneGenConfig& gen_cfg, const TrainConfig& baseline_cfg,
                                const TrainConfig& treatment_cfg, int n_train, int n_test,
                                const EvalParams& eval_params = {},
                                const std::vector<double>& thresholds = default_thresholds());

/// Canonical JSON rendering of a report (stable key order, two-space
/// indent, trailing newline).
std::string serialize_report(const ExperimentReport& report);

} // namespace saldet
