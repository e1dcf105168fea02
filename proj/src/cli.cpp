#include "saldet/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <utility>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "saldet/config.hpp"
#include "saldet/dataset.hpp"
#include "saldet/detections_io.hpp"
#include "saldet/errors.hpp"
#include "saldet/evaluation.hpp"
#include "saldet/experiment.hpp"
#include "saldet/io.hpp"
#include "saldet/synthbench.hpp"
#include "saldet/trainer.hpp"

namespace saldet {

namespace {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct CommonOpts {
    std::string config_path;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool quiet = false;
    CLI::Option* seed_opt = nullptr;
};

void add_common(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--config", o.config_path, "JSON config file; defaults apply when omitted");
    sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
    o.seed_opt = sub->add_option("--seed", o.seed, "override the config seed");
    sub->add_flag("--quiet", o.quiet, "suppress informational output");
}

RunConfig resolve_config(const CommonOpts& o) {
    RunConfig cfg = o.config_path.empty() ? RunConfig{} : RunConfig::load(o.config_path);
    if (o.seed_opt != nullptr && o.seed_opt->count() > 0) {
        cfg.set_seed(o.seed);
    }
    cfg.validate_all();
    return cfg;
}

fs::path prepare_out_dir(const CommonOpts& o) {
    fs::path dir(o.out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    }
    return dir;
}

std::string format_line(const char* fmt, auto... args) {
    char buf[160];
    std::snprintf(buf, sizeof(buf), fmt, args...);
    return buf;
}

int cmd_validate(const CommonOpts& o, const std::string& dataset_path, std::ostream& out) {
    resolve_config(o);
    const Dataset ds = load_dataset(dataset_path);
    const StatsReport stats = dataset_stats(ds);
    if (o.quiet) {
        return 0;
    }

    out << format_line("images        %lld\n", static_cast<long long>(stats.images));
    out << format_line("annotations   %lld\n", static_cast<long long>(stats.total));
    out << format_line("salient       %lld\n", static_cast<long long>(stats.salient));
    out << format_line("non-salient   %lld\n\n", static_cast<long long>(stats.non_salient));
    out << format_line("%-26s %10s %12s\n", "category", "salient", "non-salient");
    const auto categories = all_sign_categories();
    for (std::size_t i = 0; i < categories.size(); ++i) {
        const auto& c = stats.per_category[i];
        out << format_line("%-26s %10lld %12lld\n", std::string(to_string(categories[i])).c_str(),
                           static_cast<long long>(c.salient),
                           static_cast<long long>(c.non_salient));
    }
    out << "\ndataset valid\n";
    return 0;
}

int cmd_gen_synth(const CommonOpts& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const fs::path dir = prepare_out_dir(o);

    const SynthDataset synth = gen_dataset(cfg.gen, cfg.n_scenes, 0);
    write_file_atomic(dir / "dataset.json", serialize_dataset(synth.dataset));
    save_feature_sidecar(synth.grid, synth.features, dir / "features.bin");
    write_file_atomic(dir / "config.json", cfg.serialize());

    if (!o.quiet) {
        const StatsReport stats = dataset_stats(synth.dataset);
        out << format_line("wrote %lld scenes, %lld annotations (%lld salient) to %s\n",
                           static_cast<long long>(stats.images),
                           static_cast<long long>(stats.total),
                           static_cast<long long>(stats.salient), dir.string().c_str());
    }
    return 0;
}

std::string render_loss_trace_csv(const std::vector<double>& trace) {
    std::string csv = "epoch,loss\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        csv += format_line("%zu,%.12g\n", i, trace[i]);
    }
    return csv;
}

int cmd_train(const CommonOpts& o, const std::string& dataset_path,
              const std::string& features_path, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const fs::path dir = prepare_out_dir(o);

    const Dataset ds = load_dataset(dataset_path);
    const FeatureSidecar sidecar = load_feature_sidecar(features_path);
    const TrainResult result = train(ds, sidecar.features, sidecar.grid, cfg.train);

    save_model(result.model, cfg.train.loss_mode, dir / "model.json");
    write_file_atomic(dir / "loss_trace.csv", render_loss_trace_csv(result.loss_trace));
    write_file_atomic(dir / "config.json", cfg.serialize());

    if (!o.quiet) {
        out << format_line("trained %s for %d epochs, final loss %.12g\n",
                           std::string(to_string(cfg.train.loss_mode)).c_str(), cfg.train.epochs,
                           result.loss_trace.back());
    }
    return 0;
}

int cmd_detect(const CommonOpts& o, const std::string& model_path,
               const std::string& features_path, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const fs::path dir = prepare_out_dir(o);

    const LoadedModel loaded = load_model(model_path);
    const FeatureSidecar sidecar = load_feature_sidecar(features_path);

    std::vector<Detection> all;
    for (const auto& [image_id, feats] : sidecar.features.by_image) {
        auto dets = predict(loaded.model, sidecar.grid, feats, image_id,
                            cfg.eval.max_detections);
        all.insert(all.end(), dets.begin(), dets.end());
    }
    save_detections(all, dir / "detections.json");
    write_file_atomic(dir / "config.json", cfg.serialize());

    if (!o.quiet) {
        out << format_line("wrote %zu detections over %zu images to %s\n", all.size(),
                           sidecar.features.by_image.size(), dir.string().c_str());
    }
    return 0;
}

int cmd_eval(const CommonOpts& o, const std::string& detections_path,
             const std::string& dataset_path, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const fs::path dir = prepare_out_dir(o);

    const std::vector<Detection> dets = load_detections(detections_path);
    const Dataset ds = load_dataset(dataset_path);
    const AnnotationsByImage gts = annotations_by_image(ds);
    for (const auto& det : dets) {
        if (gts.find(det.image_id) == gts.end()) {
            throw ValidationError("detections reference image '" + det.image_id +
                                      "' absent from the dataset",
                                  det.image_id);
        }
    }

    CurveMetadata metadata;
    metadata.dataset_id = fs::path(dataset_path).filename().string();
    const PRCurve curve =
        pr_sweep(group_detections(dets), gts, cfg.thresholds, cfg.eval, std::move(metadata));

    const double auc_all = auc(curve, RecallAxis::All);
    const double auc_salient = auc(curve, RecallAxis::Salient);
    double margin_sum = 0.0;
    for (const auto& pt : curve.points) {
        margin_sum += pt.margin;
    }
    const double mean_margin =
        curve.points.empty() ? 0.0 : margin_sum / static_cast<double>(curve.points.size());

    ordered_json summary;
    summary["n_points"] = curve.points.size();
    summary["auc_recall_all"] = auc_all;
    summary["auc_recall_salient"] = auc_salient;
    summary["mean_margin"] = mean_margin;

    write_file_atomic(dir / "curve.csv", render_curve_csv(curve));
    write_file_atomic(dir / "curve.svg", render_curve_svg(curve));
    write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
    write_file_atomic(dir / "config.json", cfg.serialize());

    if (!o.quiet) {
        out << format_line("auc_recall_all      %.6f\n", auc_all);
        out << format_line("auc_recall_salient  %.6f\n", auc_salient);
        out << format_line("mean_margin         %.6f\n", mean_margin);
    }
    return 0;
}

int cmd_experiment(const CommonOpts& o, std::ostream& out) {
    const RunConfig cfg = resolve_config(o);
    const fs::path dir = prepare_out_dir(o);

    TrainConfig baseline_cfg = cfg.train;
    baseline_cfg.loss_mode = cfg.baseline_mode;
    TrainConfig treatment_cfg = cfg.train;
    treatment_cfg.loss_mode = cfg.treatment_mode;

    const ExperimentReport report = run_experiment(cfg.gen, baseline_cfg, treatment_cfg,
                                                   cfg.n_train, cfg.n_test, cfg.eval,
                                                   cfg.thresholds);

    write_file_atomic(dir / "curve_baseline.csv", render_curve_csv(report.baseline.curve));
    write_file_atomic(dir / "curve_baseline.svg", render_curve_svg(report.baseline.curve));
    write_file_atomic(dir / "curve_treatment.csv", render_curve_csv(report.treatment.curve));
    write_file_atomic(dir / "curve_treatment.svg", render_curve_svg(report.treatment.curve));
    write_file_atomic(dir / "report.json", serialize_report(report));
    write_file_atomic(dir / "config.json", cfg.serialize());

    if (!o.quiet) {
        out << format_line("salient-recall AUC delta: %.6f\n", report.delta_auc_recall_salient);
    }
    return 0;
}

} // namespace

int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"salience-aware sign detection toolkit"};
    app.name("saldet");
    app.require_subcommand(1);

    CommonOpts validate_opts;
    std::string validate_dataset;
    CLI::App* sub_validate = app.add_subcommand("validate", "check a dataset and print stats");
    sub_validate->add_option("--dataset", validate_dataset, "dataset JSON path")->required();
    add_common(sub_validate, validate_opts);

    CommonOpts gen_opts;
    CLI::App* sub_gen =
        app.add_subcommand("gen-synth", "generate a synthetic dataset with features");
    add_common(sub_gen, gen_opts);

    CommonOpts train_opts;
    std::string train_dataset;
    std::string train_features;
    CLI::App* sub_train = app.add_subcommand("train", "fit the linear detector");
    sub_train->add_option("--dataset", train_dataset, "dataset JSON path")->required();
    sub_train->add_option("--features", train_features, "feature sidecar path")->required();
    add_common(sub_train, train_opts);

    CommonOpts detect_opts;
    std::string detect_model;
    std::string detect_features;
    CLI::App* sub_detect = app.add_subcommand("detect", "score anchors with a trained model");
    sub_detect->add_option("--model", detect_model, "model JSON path")->required();
    sub_detect->add_option("--features", detect_features, "feature sidecar path")->required();
    add_common(sub_detect, detect_opts);

    CommonOpts eval_opts;
    std::string eval_detections;
    std::string eval_dataset;
    CLI::App* sub_eval = app.add_subcommand("eval", "sweep precision-recall against a dataset");
    sub_eval->add_option("--detections", eval_detections, "detections JSON path")->required();
    sub_eval->add_option("--dataset", eval_dataset, "dataset JSON path")->required();
    add_common(sub_eval, eval_opts);

    CommonOpts exp_opts;
    CLI::App* sub_exp =
        app.add_subcommand("experiment", "train and compare both loss arms end to end");
    add_common(sub_exp, exp_opts);

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        if (sub_validate->parsed()) {
            return cmd_validate(validate_opts, validate_dataset, out);
        }
        if (sub_gen->parsed()) {
            return cmd_gen_synth(gen_opts, out);
        }
        if (sub_train->parsed()) {
            return cmd_train(train_opts, train_dataset, train_features, out);
        }
        if (sub_detect->parsed()) {
            return cmd_detect(detect_opts, detect_model, detect_features, out);
        }
        if (sub_eval->parsed()) {
            return cmd_eval(eval_opts, eval_detections, eval_dataset, out);
        }
        if (sub_exp->parsed()) {
            return cmd_experiment(exp_opts, out);
        }
        err << "error: no command selected\n";
        return 2;
    } catch (const DivergedLoss& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const ToolkitError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
}

} // namespace saldet
