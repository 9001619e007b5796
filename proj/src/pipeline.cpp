#include "ticknet/pipeline.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ticknet/csv.hpp"
#include "ticknet/netgraph.hpp"
#include "ticknet/rmt.hpp"
#include "ticknet/rng.hpp"
#include "ticknet/synth.hpp"

namespace ticknet {

namespace fs = std::filesystem;
using nlohmann::json;

std::string FileStamp::csv_comment() const {
    return "# config_hash=" + config_hash + " seed=" + std::to_string(seed) +
           " version=" + std::string(kArtifactVersion) + "\n";
}

namespace {

FileStamp stamp_of(const PipelineConfig& cfg) { return FileStamp{cfg.config_hash, cfg.seed}; }

std::ofstream open_out(const fs::path& path) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    return in;
}

void add_stamp(json& j, const FileStamp& stamp) {
    j["config_hash"] = stamp.config_hash;
    j["seed"] = stamp.seed;
    j["version"] = kArtifactVersion;
}

double parse_double_field(std::string_view v, const fs::path& path) {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw std::runtime_error("bad numeric field '" + std::string(v) + "' in " + path.string());
    return out;
}

std::string tree_file_name(GraphFormat format) {
    return format == GraphFormat::graphml ? "tree.graphml" : "tree.gexf";
}

}  // namespace

std::vector<std::string> period_names(const PipelineConfig& config) {
    std::vector<std::string> names;
    for (const PeriodRange& p : config.session.periods) names.push_back(p.name);
    if (names.empty()) names.emplace_back("all");
    return names;
}

void write_returns_panel(const ReturnsPanel& panel, const fs::path& csv_path,
                         const fs::path& meta_path, const FileStamp& stamp) {
    std::ofstream out = open_out(csv_path);
    out << stamp.csv_comment();
    out << "timestamp";
    for (const std::string& s : panel.symbols) out << ',' << s;
    out << '\n';
    for (Eigen::Index r = 0; r < panel.rows(); ++r) {
        out << panel.row_time(r).to_string();
        for (Eigen::Index c = 0; c < panel.cols(); ++c)
            out << ',' << fmt_double(panel.returns(r, c));
        out << '\n';
    }

    json meta;
    add_stamp(meta, stamp);
    meta["period"] = panel.period;
    meta["rows"] = panel.rows();
    meta["symbols"] = panel.symbols;
    meta["sectors"] = panel.sectors;
    meta["windows_per_day"] = panel.windows_per_day;
    meta["session_open"] = TimeOfDay{panel.session_open}.to_string();
    meta["bar_seconds"] = panel.bar_seconds;
    json dates = json::array();
    for (const Date& d : panel.dates) dates.push_back(d.to_string());
    meta["dates"] = dates;
    json filled = json::array();
    for (Eigen::Index d = 0; d < panel.filled_counts.rows(); ++d) {
        json row = json::array();
        for (Eigen::Index c = 0; c < panel.filled_counts.cols(); ++c)
            row.push_back(panel.filled_counts(d, c));
        filled.push_back(row);
    }
    meta["filled_counts"] = filled;
    open_out(meta_path) << meta.dump(2) << '\n';
}

ReturnsPanel load_returns_panel(const fs::path& csv_path, const fs::path& meta_path) {
    json meta = json::parse(open_in(meta_path));
    ReturnsPanel panel;
    panel.period = meta.at("period").get<std::string>();
    panel.symbols = meta.at("symbols").get<std::vector<std::string>>();
    panel.sectors = meta.at("sectors").get<std::vector<std::string>>();
    panel.windows_per_day = meta.at("windows_per_day").get<int>();
    panel.session_open = TimeOfDay::parse(meta.at("session_open").get<std::string>());
    panel.bar_seconds = meta.at("bar_seconds").get<int>();
    for (const auto& d : meta.at("dates")) panel.dates.push_back(Date::parse(d.get<std::string>()));

    const auto k = static_cast<Eigen::Index>(panel.symbols.size());
    const auto n_days = static_cast<Eigen::Index>(panel.dates.size());
    panel.filled_counts = Eigen::MatrixXi::Zero(n_days, k);
    const auto& filled = meta.at("filled_counts");
    for (Eigen::Index d = 0; d < n_days; ++d)
        for (Eigen::Index c = 0; c < k; ++c)
            panel.filled_counts(d, c) = filled.at(static_cast<size_t>(d))
                                            .at(static_cast<size_t>(c))
                                            .get<int>();

    const auto m = static_cast<Eigen::Index>(meta.at("rows").get<int64_t>());
    panel.returns.resize(m, k);
    std::ifstream in = open_in(csv_path);
    std::string line;
    Eigen::Index r = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
        std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        if (!header_seen) {
            header_seen = true;  // column names repeated in the meta sidecar
            continue;
        }
        auto fields = split_csv(body);
        if (static_cast<Eigen::Index>(fields.size()) != k + 1)
            throw std::runtime_error("panel row width mismatch in " + csv_path.string());
        if (r >= m) throw std::runtime_error("panel has more rows than metadata claims");
        for (Eigen::Index c = 0; c < k; ++c)
            panel.returns(r, c) = parse_double_field(fields[static_cast<size_t>(c + 1)], csv_path);
        ++r;
    }
    if (r != m) throw std::runtime_error("panel has fewer rows than metadata claims");
    return panel;
}

void write_matrix_csv(const Eigen::MatrixXd& matrix, const std::vector<std::string>& symbols,
                      const fs::path& path, const FileStamp& stamp) {
    const auto k = matrix.rows();
    if (matrix.cols() != k || static_cast<size_t>(k) != symbols.size())
        throw std::invalid_argument("write_matrix_csv: shape mismatch");
    std::ofstream out = open_out(path);
    out << stamp.csv_comment();
    out << "symbol";
    for (const std::string& s : symbols) out << ',' << s;
    out << '\n';
    for (Eigen::Index i = 0; i < k; ++i) {
        out << symbols[static_cast<size_t>(i)];
        for (Eigen::Index j = 0; j < k; ++j) out << ',' << fmt_double(matrix(i, j));
        out << '\n';
    }
}

Eigen::MatrixXd load_matrix_csv(const fs::path& path, std::vector<std::string>* symbols) {
    std::ifstream in = open_in(path);
    std::string line;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        auto fields = split_csv(body);
        if (header.empty()) {
            for (size_t f = 1; f < fields.size(); ++f) header.emplace_back(fields[f]);
            continue;
        }
        std::vector<double> row;
        for (size_t f = 1; f < fields.size(); ++f)
            row.push_back(parse_double_field(fields[f], path));
        rows.push_back(std::move(row));
    }
    const auto k = static_cast<Eigen::Index>(header.size());
    if (static_cast<Eigen::Index>(rows.size()) != k)
        throw std::runtime_error("matrix CSV is not square: " + path.string());
    Eigen::MatrixXd m(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (static_cast<Eigen::Index>(rows[static_cast<size_t>(i)].size()) != k)
            throw std::runtime_error("matrix CSV row width mismatch: " + path.string());
        for (Eigen::Index j = 0; j < k; ++j) m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
    if (symbols) *symbols = std::move(header);
    return m;
}

void run_synth(const PipelineConfig& config) {
    const FileStamp stamp = stamp_of(config);
    const fs::path dir = fs::path(config.out_dir) / "synth";
    std::ofstream ticks = open_out(dir / "ticks.csv");
    ticks << stamp.csv_comment();
    generate_ticks(config.synth, ticks);
    json truth = json::parse(truth_sidecar(config.synth));
    truth["config_hash"] = stamp.config_hash;
    truth["version"] = kArtifactVersion;
    open_out(dir / "truth.json") << truth.dump(2) << '\n';
    std::ofstream sectors = open_out(dir / "sectors.csv");
    sectors << stamp.csv_comment() << "symbol,sector\n";
    for (const auto& [symbol, sector] : market_symbols(config.synth))
        sectors << symbol << ',' << sector << '\n';
}

std::vector<std::string> run_ingest(const PipelineConfig& config) {
    if (config.ticks_path.empty())
        throw std::runtime_error("ingest: no ticks path configured (key 'ticks')");
    std::ifstream ticks = open_in(config.ticks_path);

    std::map<std::string, std::string> sectors;
    if (!config.sectors_path.empty()) {
        std::ifstream sec = open_in(config.sectors_path);
        sectors = parse_sector_map(sec);
    }

    ParsedTicks info;
    ReturnsPanel panel = ingest_panel(ticks, config.session, sectors, &info);
    std::vector<ReturnsPanel> periods = split_periods(panel, config.session);
    FilterReport filter;
    periods = filter_symbols(periods, config.session.max_empty_fraction, &filter);

    const FileStamp stamp = stamp_of(config);
    const fs::path dir = fs::path(config.out_dir) / "ingest";
    std::vector<std::string> names;
    for (const ReturnsPanel& p : periods) {
        write_returns_panel(p, dir / ("panel_" + p.period + ".csv"),
                            dir / ("panel_" + p.period + ".json"), stamp);
        names.push_back(p.period);
    }

    json drops;
    add_stamp(drops, stamp);
    drops["max_empty_fraction"] = config.session.max_empty_fraction;
    drops["dropped_symbols"] = filter.dropped;
    json fractions = json::object();
    for (const auto& [sym, frac] : filter.worst_fraction) fractions[sym] = frac;
    drops["worst_filled_fraction"] = fractions;
    drops["rows_read"] = info.rows_read;
    drops["rows_dropped_outside_session"] = info.rows_dropped_session;
    drops["rows_dropped_off_calendar"] = info.rows_dropped_offday;
    drops["rows_skipped_malformed"] = info.rows_skipped;
    drops["warnings"] = info.warnings;
    open_out(dir / "drops.json") << drops.dump(2) << '\n';
    return names;
}

namespace {

std::vector<std::string> selected_periods(const PipelineConfig& config,
                                          const std::optional<std::string>& period) {
    std::vector<std::string> all = period_names(config);
    if (!period) return all;
    for (const std::string& name : all)
        if (name == *period) return {name};
    throw std::runtime_error("unknown period '" + *period + "'");
}

ReturnsPanel load_period_panel(const PipelineConfig& config, const std::string& period) {
    const fs::path dir = fs::path(config.out_dir) / "ingest";
    return load_returns_panel(dir / ("panel_" + period + ".csv"),
                              dir / ("panel_" + period + ".json"));
}

}  // namespace

void run_pairs(const PipelineConfig& config, const std::optional<std::string>& period) {
    const FileStamp stamp = stamp_of(config);
    for (const std::string& name : selected_periods(config, period)) {
        const ReturnsPanel panel = load_period_panel(config, name);
        PairSweepConfig sweep;
        sweep.permutation_trials = config.permutation_trials;
        sweep.alpha = config.alpha;
        sweep.seed = derive_seed(config.seed, "pairs-stage", name);
        sweep.threads = config.threads;
        const PairMatrix pm = pair_sweep(panel, sweep);

        const fs::path dir = fs::path(config.out_dir) / "pairs" / name;
        write_matrix_csv(pm.rho, pm.symbols, dir / "rho.csv", stamp);
        write_matrix_csv(pm.mi, pm.symbols, dir / "mi.csv", stamp);
        write_matrix_csv(pm.nmi, pm.symbols, dir / "nmi.csv", stamp);
        write_matrix_csv(pm.d_corr, pm.symbols, dir / "d_corr.csv", stamp);
        write_matrix_csv(pm.d_mi, pm.symbols, dir / "d_mi.csv", stamp);
        write_matrix_csv(pm.p_value, pm.symbols, dir / "p_value.csv", stamp);

        std::ofstream scatter = open_out(dir / "scatter.csv");
        scatter << stamp.csv_comment() << "symbol_i,symbol_j,rho,nmi\n";
        for (const PairStats& s : pm.pairs) {
            scatter << pm.symbols[static_cast<size_t>(s.i)] << ','
                    << pm.symbols[static_cast<size_t>(s.j)] << ',' << fmt_double(s.rho) << ','
                    << fmt_double(s.nmi) << '\n';
        }
    }
}

void run_rmt(const PipelineConfig& config, const std::optional<std::string>& period) {
    const FileStamp stamp = stamp_of(config);
    for (const std::string& name : selected_periods(config, period)) {
        const ReturnsPanel panel = load_period_panel(config, name);
        const SpectrumReport report = analyze_spectrum(panel);
        const SurrogateEnsemble ensemble =
            surrogate_ensemble(panel, config.surrogate_trials,
                               derive_seed(config.seed, "rmt-stage", name), config.histogram_bins);

        const fs::path dir = fs::path(config.out_dir) / "rmt" / name;
        json j;
        add_stamp(j, stamp);
        j["period"] = report.period;
        j["observations"] = report.observations;
        j["variables"] = report.variables;
        j["q_ratio"] = report.mp.q_ratio;
        j["lambda_min"] = report.mp.lambda_min;
        j["lambda_max"] = report.mp.lambda_max;
        j["empirical_lambda_max"] = report.empirical_lambda_max;
        j["fractions"] = {{"within", report.fractions.within},
                          {"above", report.fractions.above},
                          {"below", report.fractions.below}};
        std::vector<double> eigenvalues(report.eigenvalues.data(),
                                        report.eigenvalues.data() + report.eigenvalues.size());
        j["eigenvalues"] = eigenvalues;
        j["surrogate"] = {{"trials", ensemble.trials},
                          {"per_trial_frac_within", ensemble.per_trial_frac_within},
                          {"pooled_frac_within", ensemble.pooled_frac_within}};
        open_out(dir / "spectrum.json") << j.dump(2) << '\n';

        // Empirical spectrum histogram with the MP overlay.
        const double hi =
            std::max(report.empirical_lambda_max, report.mp.lambda_max) * 1.05;
        const HistogramData hist =
            make_histogram(eigenvalues, config.histogram_bins, hi);
        std::ofstream hcsv = open_out(dir / "histogram.csv");
        hcsv << stamp.csv_comment() << "bin_left,bin_right,empirical_density,mp_density\n";
        for (size_t b = 0; b + 1 < hist.edges.size(); ++b) {
            const double mid = 0.5 * (hist.edges[b] + hist.edges[b + 1]);
            hcsv << fmt_double(hist.edges[b]) << ',' << fmt_double(hist.edges[b + 1]) << ','
                 << fmt_double(hist.density[b]) << ',' << fmt_double(mp_pdf(mid, report.mp))
                 << '\n';
        }

        std::ofstream scsv = open_out(dir / "surrogate_histogram.csv");
        scsv << stamp.csv_comment() << "bin_left,bin_right,empirical_density,mp_density\n";
        const HistogramData& sh = ensemble.pooled_histogram;
        for (size_t b = 0; b + 1 < sh.edges.size(); ++b) {
            const double mid = 0.5 * (sh.edges[b] + sh.edges[b + 1]);
            scsv << fmt_double(sh.edges[b]) << ',' << fmt_double(sh.edges[b + 1]) << ','
                 << fmt_double(sh.density[b]) << ',' << fmt_double(mp_pdf(mid, ensemble.mp))
                 << '\n';
        }

        const int n_top = std::min<int>(config.top_eigenvectors,
                                        static_cast<int>(report.eigenvalues.size()));
        const auto components =
            top_eigenvector_components(report, n_top, panel.symbols, panel.sectors);
        std::ofstream ccsv = open_out(dir / "eigenvector_components.csv");
        ccsv << stamp.csv_comment() << "symbol,sector";
        for (int c = 1; c <= n_top; ++c) ccsv << ",ev" << c;
        ccsv << '\n';
        for (const ComponentRow& row : components) {
            ccsv << row.symbol << ',' << row.sector;
            for (double v : row.components) ccsv << ',' << fmt_double(v);
            ccsv << '\n';
        }
    }
}

void run_network(const PipelineConfig& config, const std::optional<std::string>& period,
                 const std::optional<std::string>& method) {
    const FileStamp stamp = stamp_of(config);
    std::vector<std::string> methods = config.methods;
    if (method) {
        if (*method != "corr" && *method != "mi")
            throw std::runtime_error("unknown method '" + *method + "'");
        methods = {*method};
    }

    for (const std::string& name : selected_periods(config, period)) {
        const fs::path pair_dir = fs::path(config.out_dir) / "pairs" / name;
        const ReturnsPanel panel = load_period_panel(config, name);
        for (const std::string& m : methods) {
            std::vector<std::string> symbols;
            const Eigen::MatrixXd dist = load_matrix_csv(
                pair_dir / (m == "corr" ? "d_corr.csv" : "d_mi.csv"), &symbols);
            if (symbols != panel.symbols)
                throw std::runtime_error("distance matrix symbols disagree with panel " + name);

            const WeightedGraph graph = graph_from_distances(dist, panel.symbols, panel.sectors);
            const TreeAnalysis analysis =
                analyze_tree(mst_prim(graph), config.hub_degree_threshold);

            const fs::path dir = fs::path(config.out_dir) / "network" / name / m;
            // Splice the provenance stamp in as an XML comment after the
            // declaration line.
            std::string doc = export_graph(analysis, config.graph_format);
            const size_t first_newline = doc.find('\n');
            doc.insert(first_newline + 1, "<!-- config_hash=" + stamp.config_hash + " seed=" +
                                              std::to_string(stamp.seed) + " version=" +
                                              std::string(kArtifactVersion) + " -->\n");
            open_out(dir / tree_file_name(config.graph_format)) << doc;

            // Degree histogram with the fitted power-law pmf (normalized on
            // the observed degree range).
            std::ofstream dcsv = open_out(dir / "degrees.csv");
            dcsv << stamp.csv_comment();
            const auto& fit = analysis.degrees.fit;
            if (fit)
                dcsv << "# alpha=" << fmt_double(fit->alpha)
                     << " alpha_uncorrected=" << fmt_double(fit->alpha_uncorrected)
                     << " x_min=" << fit->x_min << '\n';
            else
                dcsv << "# alpha=undefined\n";
            dcsv << "degree,count,empirical_pmf,fitted_pmf\n";
            const int max_degree = analysis.degrees.histogram.rbegin()->first;
            double norm = 0;
            for (int d = 1; d <= max_degree; ++d)
                norm += fit ? std::pow(static_cast<double>(d), -fit->alpha) : 1.0;
            const auto n_nodes = static_cast<double>(analysis.degrees.degree.size());
            for (int d = 1; d <= max_degree; ++d) {
                auto it = analysis.degrees.histogram.find(d);
                const int count = it == analysis.degrees.histogram.end() ? 0 : it->second;
                dcsv << d << ',' << count << ',' << fmt_double(count / n_nodes) << ','
                     << fmt_double((fit ? std::pow(static_cast<double>(d), -fit->alpha) : 1.0) /
                                   norm)
                     << '\n';
            }

            // Centrality table sorted by Perron score, ties by symbol.
            std::vector<size_t> order(panel.symbols.size());
            for (size_t i = 0; i < order.size(); ++i) order[i] = i;
            std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
                const double pa = analysis.perron(static_cast<Eigen::Index>(a));
                const double pb = analysis.perron(static_cast<Eigen::Index>(b));
                if (pa != pb) return pa > pb;
                return panel.symbols[a] < panel.symbols[b];
            });
            std::ofstream ccsv = open_out(dir / "centrality.csv");
            ccsv << stamp.csv_comment() << "symbol,sector,degree,perron_pct,fiedler,community\n";
            for (size_t idx : order) {
                ccsv << panel.symbols[idx] << ',' << panel.sectors[idx] << ','
                     << analysis.degrees.degree[idx] << ','
                     << fmt_fixed(100.0 * analysis.perron(static_cast<Eigen::Index>(idx)), 2)
                     << ',' << fmt_double(analysis.fiedler.vector(static_cast<Eigen::Index>(idx)))
                     << ',' << analysis.fiedler.community[idx] << '\n';
            }

            std::ofstream hcsv = open_out(dir / "hubs.csv");
            hcsv << stamp.csv_comment()
                 << "hub_symbol,sector,degree,same_sector_fraction,neighbors\n";
            for (const HubNeighborhood& hub : analysis.hubs) {
                hcsv << panel.symbols[static_cast<size_t>(hub.node)] << ','
                     << panel.sectors[static_cast<size_t>(hub.node)] << ',' << hub.degree << ','
                     << fmt_double(hub.same_sector_fraction) << ',';
                for (size_t n = 0; n < hub.neighbors.size(); ++n) {
                    if (n) hcsv << ';';
                    hcsv << panel.symbols[static_cast<size_t>(hub.neighbors[n])];
                }
                hcsv << '\n';
            }
        }
    }
}

void run_report(const PipelineConfig& config) {
    const std::vector<std::string> periods = run_ingest(config);
    run_pairs(config);
    run_rmt(config);
    run_network(config);

    json manifest;
    add_stamp(manifest, stamp_of(config));
    manifest["periods"] = periods;
    manifest["methods"] = config.methods;
    manifest["stages"] = {"ingest", "pairs", "rmt", "network"};
    json files = json::array();
    const fs::path root(config.out_dir);
    std::vector<std::string> names;
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.is_regular_file() && entry.path().filename() != "manifest.json")
            names.push_back(fs::relative(entry.path(), root).generic_string());
    }
    std::sort(names.begin(), names.end());
    for (const std::string& n : names) files.push_back(n);
    manifest["files"] = files;
    open_out(root / "manifest.json") << manifest.dump(2) << '\n';
}

}  // namespace ticknet
