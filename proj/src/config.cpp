#include "saldet/config.hpp"

#include <limits>

#include <nlohmann/json.hpp>

#include "saldet/errors.hpp"
#include "saldet/io.hpp"

namespace saldet {

using ordered_json = nlohmann::ordered_json;

namespace {

void check_keys(const ordered_json& obj, std::initializer_list<const char*> allowed,
                const std::string& section) {
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) {
            throw ConfigError("unknown config key '" + key + "' in " + section);
        }
    }
}

const ordered_json* find(const ordered_json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

const ordered_json* find_section(const ordered_json& obj, const char* key) {
    const ordered_json* v = find(obj, key);
    if (v != nullptr && !v->is_object()) {
        throw ConfigError("config section '" + std::string(key) + "' must be an object");
    }
    return v;
}

double as_double(const ordered_json& v, const std::string& name) {
    if (!v.is_number()) {
        throw ConfigError("config key '" + name + "' must be a number");
    }
    return v.get<double>();
}

int as_int(const ordered_json& v, const std::string& name) {
    if (!v.is_number_integer()) {
        throw ConfigError("config key '" + name + "' must be an integer");
    }
    const auto raw = v.get<std::int64_t>();
    if (raw < std::numeric_limits<int>::min() || raw > std::numeric_limits<int>::max()) {
        throw ConfigError("config key '" + name + "' is out of range");
    }
    return static_cast<int>(raw);
}

std::uint64_t as_u64(const ordered_json& v, const std::string& name) {
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw ConfigError("config key '" + name + "' must be a non-negative integer");
}

std::string as_string(const ordered_json& v, const std::string& name) {
    if (!v.is_string()) {
        throw ConfigError("config key '" + name + "' must be a string");
    }
    return v.get<std::string>();
}

std::vector<double> as_double_array(const ordered_json& v, const std::string& name) {
    if (!v.is_array()) {
        throw ConfigError("config key '" + name + "' must be an array of numbers");
    }
    std::vector<double> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        if (!e.is_number()) {
            throw ConfigError("config key '" + name + "' must be an array of numbers");
        }
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<int> as_int_array(const ordered_json& v, const std::string& name) {
    if (!v.is_array()) {
        throw ConfigError("config key '" + name + "' must be an array of integers");
    }
    std::vector<int> out;
    out.reserve(v.size());
    for (const auto& e : v) {
        out.push_back(as_int(e, name));
    }
    return out;
}

Box as_box(const ordered_json& v, const std::string& name) {
    const auto c = as_double_array(v, name);
    if (c.size() != 4) {
        throw ConfigError("config key '" + name + "' must be [x_min, y_min, x_max, y_max]");
    }
    try {
        return Box(c[0], c[1], c[2], c[3]);
    } catch (const ValidationError& e) {
        throw ConfigError("config key '" + name + "' is not a valid box: " + e.what());
    }
}

void apply_gen(RunConfig& cfg, const ordered_json& obj) {
    check_keys(obj,
               {"image_width", "image_height", "corridor", "signs_per_scene", "salient_fraction",
                "sign_size", "appearance_dim", "appearance_noise_sigma", "clutter_rate",
                "anchor_stride", "anchor_sizes", "n_scenes"},
               "gen");
    if (const auto* v = find(obj, "image_width")) cfg.gen.image_width = as_int(*v, "gen.image_width");
    if (const auto* v = find(obj, "image_height")) cfg.gen.image_height = as_int(*v, "gen.image_height");
    if (const auto* v = find(obj, "corridor")) cfg.gen.corridor = as_box(*v, "gen.corridor");
    if (const auto* v = find(obj, "signs_per_scene")) {
        const auto r = as_int_array(*v, "gen.signs_per_scene");
        if (r.size() != 2) {
            throw ConfigError("config key 'gen.signs_per_scene' must be [min, max]");
        }
        cfg.gen.signs_min = r[0];
        cfg.gen.signs_max = r[1];
    }
    if (const auto* v = find(obj, "salient_fraction"))
        cfg.gen.salient_fraction = as_double(*v, "gen.salient_fraction");
    if (const auto* v = find(obj, "sign_size")) {
        const auto r = as_double_array(*v, "gen.sign_size");
        if (r.size() != 2) {
            throw ConfigError("config key 'gen.sign_size' must be [min, max]");
        }
        cfg.gen.sign_size_min = r[0];
        cfg.gen.sign_size_max = r[1];
    }
    if (const auto* v = find(obj, "appearance_dim"))
        cfg.gen.appearance_dim = as_int(*v, "gen.appearance_dim");
    if (const auto* v = find(obj, "appearance_noise_sigma"))
        cfg.gen.appearance_noise_sigma = as_double(*v, "gen.appearance_noise_sigma");
    if (const auto* v = find(obj, "clutter_rate"))
        cfg.gen.clutter_rate = as_double(*v, "gen.clutter_rate");
    if (const auto* v = find(obj, "anchor_stride"))
        cfg.gen.anchor_stride = as_double(*v, "gen.anchor_stride");
    if (const auto* v = find(obj, "anchor_sizes"))
        cfg.gen.anchor_sizes = as_double_array(*v, "gen.anchor_sizes");
    if (const auto* v = find(obj, "n_scenes")) cfg.n_scenes = as_int(*v, "gen.n_scenes");
}

void apply_train(RunConfig& cfg, const ordered_json& obj) {
    check_keys(obj,
               {"learning_rate", "epochs", "grad_clip_norm", "lr_decay_factor", "lr_milestones",
                "loss_mode"},
               "train");
    if (const auto* v = find(obj, "learning_rate"))
        cfg.train.learning_rate = as_double(*v, "train.learning_rate");
    if (const auto* v = find(obj, "epochs")) cfg.train.epochs = as_int(*v, "train.epochs");
    if (const auto* v = find(obj, "grad_clip_norm"))
        cfg.train.grad_clip_norm = as_double(*v, "train.grad_clip_norm");
    if (const auto* v = find(obj, "lr_decay_factor"))
        cfg.train.lr_decay_factor = as_double(*v, "train.lr_decay_factor");
    if (const auto* v = find(obj, "lr_milestones"))
        cfg.train.lr_milestones = as_int_array(*v, "train.lr_milestones");
    if (const auto* v = find(obj, "loss_mode"))
        cfg.train.loss_mode = loss_mode_from_string(as_string(*v, "train.loss_mode"));
}

void apply_loss(RunConfig& cfg, const ordered_json& obj) {
    check_keys(obj, {"alpha_fl", "gamma", "alpha_ss", "prob_epsilon"}, "loss");
    if (const auto* v = find(obj, "alpha_fl"))
        cfg.train.focal.alpha_fl = as_double(*v, "loss.alpha_fl");
    if (const auto* v = find(obj, "gamma")) cfg.train.focal.gamma = as_double(*v, "loss.gamma");
    if (const auto* v = find(obj, "alpha_ss"))
        cfg.train.salience.alpha_ss = as_double(*v, "loss.alpha_ss");
    if (const auto* v = find(obj, "prob_epsilon"))
        cfg.train.prob_epsilon = as_double(*v, "loss.prob_epsilon");
}

void apply_eval(RunConfig& cfg, const ordered_json& obj) {
    check_keys(obj, {"thresholds", "iou_threshold", "max_detections"}, "eval");
    if (const auto* v = find(obj, "thresholds"))
        cfg.thresholds = as_double_array(*v, "eval.thresholds");
    if (const auto* v = find(obj, "iou_threshold"))
        cfg.eval.iou_threshold = as_double(*v, "eval.iou_threshold");
    if (const auto* v = find(obj, "max_detections")) {
        const int m = as_int(*v, "eval.max_detections");
        if (m <= 0) {
            throw ConfigError("config key 'eval.max_detections' must be positive");
        }
        cfg.eval.max_detections = static_cast<std::size_t>(m);
    }
}

void apply_experiment(RunConfig& cfg, const ordered_json& obj) {
    check_keys(obj, {"n_train", "n_test", "baseline_mode", "treatment_mode"}, "experiment");
    if (const auto* v = find(obj, "n_train")) cfg.n_train = as_int(*v, "experiment.n_train");
    if (const auto* v = find(obj, "n_test")) cfg.n_test = as_int(*v, "experiment.n_test");
    if (const auto* v = find(obj, "baseline_mode"))
        cfg.baseline_mode = loss_mode_from_string(as_string(*v, "experiment.baseline_mode"));
    if (const auto* v = find(obj, "treatment_mode"))
        cfg.treatment_mode = loss_mode_from_string(as_string(*v, "experiment.treatment_mode"));
}

} // namespace

void RunConfig::set_seed(std::uint64_t s) {
    seed = s;
    gen.seed = s;
}

void RunConfig::validate_all() const {
    if (gen.seed != seed) {
        throw ConfigError("gen.seed is out of sync with the top-level seed");
    }
    validate(gen);
    validate(train);
    if (n_scenes <= 0) {
        throw ConfigError("gen.n_scenes must be positive");
    }
    if (n_train <= 0 || n_test <= 0) {
        throw ConfigError("experiment.n_train and experiment.n_test must be positive");
    }
    if (thresholds.empty()) {
        throw ConfigError("eval.thresholds must be non-empty");
    }
    for (std::size_t i = 0; i < thresholds.size(); ++i) {
        if (!(thresholds[i] >= 0.0 && thresholds[i] <= 1.0)) {
            throw ConfigError("eval.thresholds must lie in [0, 1]");
        }
        if (i > 0 && thresholds[i] <= thresholds[i - 1]) {
            throw ConfigError("eval.thresholds must be strictly increasing");
        }
    }
    if (!(eval.iou_threshold > 0.0 && eval.iou_threshold <= 1.0)) {
        throw ConfigError("eval.iou_threshold must be in (0, 1]");
    }
    if (eval.max_detections == 0) {
        throw ConfigError("eval.max_detections must be positive");
    }
}

RunConfig RunConfig::from_json_text(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError(std::string("invalid config JSON: ") + e.what());
    }
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    check_keys(doc, {"seed", "gen", "train", "loss", "eval", "experiment"}, "the top level");

    RunConfig cfg;
    if (const auto* v = find(doc, "seed")) {
        cfg.set_seed(as_u64(*v, "seed"));
    }
    if (const auto* s = find_section(doc, "gen")) apply_gen(cfg, *s);
    if (const auto* s = find_section(doc, "train")) apply_train(cfg, *s);
    if (const auto* s = find_section(doc, "loss")) apply_loss(cfg, *s);
    if (const auto* s = find_section(doc, "eval")) apply_eval(cfg, *s);
    if (const auto* s = find_section(doc, "experiment")) apply_experiment(cfg, *s);

    cfg.validate_all();
    return cfg;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    return from_json_text(read_text_file(path));
}

std::string RunConfig::serialize() const {
    ordered_json j;
    j["seed"] = seed;

    ordered_json g;
    g["image_width"] = gen.image_width;
    g["image_height"] = gen.image_height;
    g["corridor"] = ordered_json::array(
        {gen.corridor.x_min(), gen.corridor.y_min(), gen.corridor.x_max(), gen.corridor.y_max()});
    g["signs_per_scene"] = ordered_json::array({gen.signs_min, gen.signs_max});
    g["salient_fraction"] = gen.salient_fraction;
    g["sign_size"] = ordered_json::array({gen.sign_size_min, gen.sign_size_max});
    g["appearance_dim"] = gen.appearance_dim;
    g["appearance_noise_sigma"] = gen.appearance_noise_sigma;
    g["clutter_rate"] = gen.clutter_rate;
    g["anchor_stride"] = gen.anchor_stride;
    g["anchor_sizes"] = gen.anchor_sizes;
    g["n_scenes"] = n_scenes;
    j["gen"] = std::move(g);

    ordered_json t;
    t["learning_rate"] = train.learning_rate;
    t["epochs"] = train.epochs;
    t["grad_clip_norm"] = train.grad_clip_norm;
    t["lr_decay_factor"] = train.lr_decay_factor;
    t["lr_milestones"] = train.lr_milestones;
    t["loss_mode"] = std::string(to_string(train.loss_mode));
    j["train"] = std::move(t);

    ordered_json l;
    l["alpha_fl"] = train.focal.alpha_fl;
    l["gamma"] = train.focal.gamma;
    l["alpha_ss"] = train.salience.alpha_ss;
    l["prob_epsilon"] = train.prob_epsilon;
    j["loss"] = std::move(l);

    ordered_json e;
    e["thresholds"] = thresholds;
    e["iou_threshold"] = eval.iou_threshold;
    e["max_detections"] = eval.max_detections;
    j["eval"] = std::move(e);

    ordered_json x;
    x["n_train"] = n_train;
    x["n_test"] = n_test;
    x["baseline_mode"] = std::string(to_string(baseline_mode));
    x["treatment_mode"] = std::string(to_string(treatment_mode));
    j["experiment"] = std::move(x);

    return j.dump(2) + "\n";
}

} // namespace saldet
