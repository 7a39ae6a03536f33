#pragma once

// Run configuration: one JSON document with optional sections
//   classes, schema, data, model, charm, mlp, train, synth
// Every key is optional; unknown keys are rejected. With no file at all the
// defaults describe the shipped synthetic experiment.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "charm/dataset.hpp"
#include "charm/model.hpp"
#include "charm/synth.hpp"
#include "charm/traineval.hpp"

namespace charm {

struct RunConfig {
    std::vector<std::string> classes;
    SchemaConfig schema;
    std::size_t sequence_length = 512;  // fixed input length n_target
    std::size_t stride = 256;           // crop stride for long segments
    ModelKind model = ModelKind::Charm;
    CharmConfig charm;
    MlpConfig mlp;
    TrainConfig train;
    SynthConfig synth;

    ActivityLabelSet label_set() const { return ActivityLabelSet(classes); }
    Architecture architecture() const { return Architecture{model, charm, mlp}; }
    Architecture architecture(ModelKind kind) const { return Architecture{kind, charm, mlp}; }
    void validate() const;
};

/// Synthetic-scale defaults: r = 16, z = 32, q = 6, n_target = 512.
RunConfig default_run_config();

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::filesystem::path& path);

/// Effective configuration as JSON (every key, defaults filled in).
std::string dump_run_config(const RunConfig& config);

}  // namespace charm
