#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ticknet/ingest.hpp"
#include "ticknet/netgraph.hpp"
#include "ticknet/synth.hpp"

namespace ticknet {

/// Everything a pipeline run needs, parsed from one key-value config file.
/// See README for the schema.
struct PipelineConfig {
    SessionConfig session;
    std::string ticks_path;
    std::string sectors_path;
    std::string out_dir = "out";

    int permutation_trials = 199;
    double alpha = 0.05;

    int surrogate_trials = 50;
    int histogram_bins = 50;
    int top_eigenvectors = 3;

    int hub_degree_threshold = 4;
    GraphFormat graph_format = GraphFormat::graphml;
    std::vector<std::string> methods = {"corr", "mi"};

    uint64_t seed = 42;
    unsigned threads = 0;

    MarketSpec synth;

    std::string config_hash;  // FNV-1a of the config text, hex

    void validate() const;
};

/// Parse config text (`key = value` lines, '#' comments, repeatable keys
/// for lists). Unknown keys are an error.
PipelineConfig parse_pipeline_config(const std::string& text);

PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// FNV-1a 64 of a byte string, as 16 hex characters.
std::string content_hash(const std::string& text);

}  // namespace ticknet
