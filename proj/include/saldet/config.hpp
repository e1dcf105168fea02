#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "saldet/evaluation.hpp"
#include "saldet/synthbench.hpp"
#include "saldet/trainer.hpp"

namespace saldet {

/// One declarative config drives every CLI command. Every field has a
/// committed default (the tuned benchmark), a config file overrides only
/// the keys it names, and unknown keys anywhere are errors. See the
/// README for the JSON layout.
struct RunConfig {
    std::uint64_t seed = 0;
    SceneGenConfig gen;                               ///< gen.seed mirrors seed
    int n_scenes = 500;                               ///< gen-synth scene count
    TrainConfig train;
    std::vector<double> thresholds = default_thresholds();
    EvalParams eval;
    int n_train = 500;
    int n_test = 100;
    LossMode baseline_mode = LossMode::FL;
    LossMode treatment_mode = LossMode::SSFL;

    /// Sets the top-level seed and mirrors it into gen.seed.
    void set_seed(std::uint64_t s);

    /// Runs every embedded config's validator plus the cross-field checks
    /// owned by this struct. Throws ConfigError.
    void validate_all() const;

    /// Defaults overridden by the keys present in the JSON text. Throws
    /// ParseError on invalid JSON and ConfigError on unknown keys, wrong
    /// types, or invalid values.
    static RunConfig from_json_text(const std::string& text);
    static RunConfig load(const std::filesystem::path& path);

    /// Canonical full snapshot: every field, fixed key order, two-space
    /// indent, trailing newline. Reloading it reproduces this config.
    std::string serialize() const;
};

} // namespace saldet
