// ticknet CLI: config-driven pipeline from tick CSVs to network reports.
//
//   ticknet synth    --config run.cfg        emit synthetic ticks + truth
//   ticknet ingest   --config run.cfg        ticks -> per-period panels
//   ticknet pairs    --config run.cfg        panels -> pair statistics
//   ticknet rmt      --config run.cfg        panels -> spectrum reports
//   ticknet network  --config run.cfg        distances -> MST reports
//   ticknet report   --config run.cfg        ingest + pairs + rmt + network
//
// Common flags: --seed, --period, --method {corr,mi}, --strict, --out-dir.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "ticknet/config.hpp"
#include "ticknet/pipeline.hpp"
#include "ticknet/rng.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<std::string> period;
    std::optional<std::string> method;
    std::optional<std::string> out_dir;
    bool strict = false;
    std::optional<unsigned> threads;
};

void add_common(CLI::App* cmd, CliOptions& opt) {
    cmd->add_option("--config", opt.config_path, "pipeline config file")->required();
    cmd->add_option("--seed", opt.seed, "override the master seed");
    cmd->add_option("--period", opt.period, "restrict to one named period");
    cmd->add_option("--method", opt.method, "restrict to one method (corr or mi)")
        ->check(CLI::IsMember({"corr", "mi"}));
    cmd->add_option("--out-dir", opt.out_dir, "override the output directory");
    cmd->add_flag("--strict", opt.strict, "abort on malformed tick rows");
    cmd->add_option("--threads", opt.threads, "worker thread count (0 = hardware)");
}

ticknet::PipelineConfig configure(const CliOptions& opt) {
    ticknet::PipelineConfig cfg = ticknet::load_pipeline_config(opt.config_path);
    if (opt.seed) {
        cfg.seed = *opt.seed;
        cfg.synth.seed = ticknet::derive_seed(cfg.seed, "synth");
    }
    if (opt.out_dir) cfg.out_dir = *opt.out_dir;
    if (opt.strict) cfg.session.strict = true;
    if (opt.threads) cfg.threads = *opt.threads;
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"stock-interaction networks from tick data (correlation + mutual information)"};
    app.require_subcommand(1);

    CliOptions opt;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic tick file");
    CLI::App* ingest = app.add_subcommand("ingest", "aggregate ticks into returns panels");
    CLI::App* pairs = app.add_subcommand("pairs", "pairwise correlation / MI statistics");
    CLI::App* rmt = app.add_subcommand("rmt", "eigenvalue spectrum vs the Marchenko-Pastur law");
    CLI::App* network = app.add_subcommand("network", "minimum spanning tree reports");
    CLI::App* report = app.add_subcommand("report", "run every stage into one directory");
    for (CLI::App* cmd : {synth, ingest, pairs, rmt, network, report}) add_common(cmd, opt);

    CLI11_PARSE(app, argc, argv);

    try {
        const ticknet::PipelineConfig cfg = configure(opt);
        if (synth->parsed()) {
            ticknet::run_synth(cfg);
        } else if (ingest->parsed()) {
            for (const std::string& period : ticknet::run_ingest(cfg))
                std::cout << "panel written: " << period << '\n';
        } else if (pairs->parsed()) {
            ticknet::run_pairs(cfg, opt.period);
        } else if (rmt->parsed()) {
            ticknet::run_rmt(cfg, opt.period);
        } else if (network->parsed()) {
            ticknet::run_network(cfg, opt.period, opt.method);
        } else if (report->parsed()) {
            ticknet::run_report(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
