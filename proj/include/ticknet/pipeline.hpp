#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "ticknet/config.hpp"
#include "ticknet/infostats.hpp"
#include "ticknet/ingest.hpp"

namespace ticknet {

inline constexpr const char* kArtifactVersion = "ticknet 0.1.0";

/// Provenance stamp embedded in every output file (CSV comment line or JSON
/// fields). No timestamps anywhere, so identical runs are byte-identical.
struct FileStamp {
    std::string config_hash;
    uint64_t seed = 0;

    [[nodiscard]] std::string csv_comment() const;
};

/// Stage entry points. Stages communicate through files under
/// config.out_dir, so each is independently rerunnable:
///
///   synth/ticks.csv, synth/truth.json
///   ingest/panel_<period>.csv|.json, ingest/drops.json
///   pairs/<period>/{rho,mi,nmi,d_corr,d_mi,p_value,scatter}.csv
///   rmt/<period>/{spectrum.json,histogram.csv,surrogate_histogram.csv,
///                 eigenvector_components.csv}
///   network/<period>/<method>/{tree.graphml|tree.gexf,degrees.csv,
///                              centrality.csv,hubs.csv}
///   manifest.json (report stage)
void run_synth(const PipelineConfig& config);
std::vector<std::string> run_ingest(const PipelineConfig& config);
void run_pairs(const PipelineConfig& config, const std::optional<std::string>& period = {});
void run_rmt(const PipelineConfig& config, const std::optional<std::string>& period = {});
void run_network(const PipelineConfig& config, const std::optional<std::string>& period = {},
                 const std::optional<std::string>& method = {});
void run_report(const PipelineConfig& config);

/// Panel file round-trip used by the stages (CSV + JSON metadata sidecar).
void write_returns_panel(const ReturnsPanel& panel, const std::filesystem::path& csv_path,
                         const std::filesystem::path& meta_path, const FileStamp& stamp);
ReturnsPanel load_returns_panel(const std::filesystem::path& csv_path,
                                const std::filesystem::path& meta_path);

/// Square matrix CSV with a symbol header row and column.
void write_matrix_csv(const Eigen::MatrixXd& matrix, const std::vector<std::string>& symbols,
                      const std::filesystem::path& path, const FileStamp& stamp);
Eigen::MatrixXd load_matrix_csv(const std::filesystem::path& path,
                                std::vector<std::string>* symbols = nullptr);

/// Period names a run will produce (configured periods, or "all").
std::vector<std::string> period_names(const PipelineConfig& config);

}  // namespace ticknet
