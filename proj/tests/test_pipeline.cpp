#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ticknet/config.hpp"
#include "ticknet/pipeline.hpp"
#include "ticknet/synth.hpp"

using namespace ticknet;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Small two-sector market config; %OUT% is substituted by the caller.
std::string small_config_text(const std::string& out_dir) {
    std::string text = R"(# test pipeline config
session_open = 09:30
session_close = 09:45
bar_seconds = 30
max_empty_fraction = 0.5
period = early 2014-01-01 2014-01-02
period = late 2014-01-03 2014-01-05
seed = 1234
permutation_trials = 99
alpha = 0.05
surrogate_trials = 5
histogram_bins = 20
top_eigenvectors = 2
hub_degree_threshold = 3
graph_format = graphml
methods = corr,mi
threads = 2
synth_days = 5
synth_windows_per_day = 30
synth_sector = FIN 4 0.45
synth_sector = NRG 4 0.45
synth_market_beta = 0.2
synth_return_scale = 0.001
)";
    text += "ticks = " + out_dir + "/synth/ticks.csv\n";
    text += "sectors = " + out_dir + "/synth/sectors.csv\n";
    text += "out_dir = " + out_dir + "\n";
    return text;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("config parsing") {
    const PipelineConfig cfg = parse_pipeline_config(small_config_text("/tmp/x"));
    CHECK(cfg.session.windows_per_day() == 30);
    CHECK(cfg.session.periods.size() == 2);
    CHECK(cfg.session.periods[1].name == "late");
    CHECK(cfg.seed == 1234);
    CHECK(cfg.synth.sectors.size() == 2);
    CHECK(cfg.synth.symbol_count() == 8);
    CHECK(cfg.graph_format == GraphFormat::graphml);
    CHECK(cfg.methods == std::vector<std::string>{"corr", "mi"});
    CHECK(cfg.config_hash.size() == 16);

    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS(parse_pipeline_config("no_such_key = 1\n"));
    }
    SUBCASE("malformed lines are rejected") {
        CHECK_THROWS(parse_pipeline_config("session_open 09:30\n"));
    }
    SUBCASE("date ranges expand inclusively") {
        const PipelineConfig c2 =
            parse_pipeline_config("trading_days = 2014-01-01..2014-01-03,2014-02-01\n");
        REQUIRE(c2.session.trading_days.size() == 4);
        CHECK(c2.session.trading_days[2] == Date{2014, 1, 3});
        CHECK(c2.session.trading_days[3] == Date{2014, 2, 1});
    }
    SUBCASE("validation catches bad knobs") {
        CHECK_THROWS(parse_pipeline_config("permutation_trials = 10\n"));
        CHECK_THROWS(parse_pipeline_config("alpha = 1.5\n"));
        CHECK_THROWS(parse_pipeline_config("methods = corr,bogus\n"));
    }
}

TEST_CASE("panel file round-trip is exact") {
    MarketSpec spec;
    spec.sectors = {{"AAA", 3, 0.3}};
    spec.market_beta = 0.1;
    spec.days = 2;
    spec.windows_per_day = 10;
    spec.seed = 5;
    ReturnsPanel panel = generate_returns(spec);
    panel.period = "roundtrip";
    panel.filled_counts(1, 2) = 3;

    TempDir tmp("ticknet_panel_rt");
    const FileStamp stamp{"deadbeef00000000", 5};
    write_returns_panel(panel, tmp.path / "p.csv", tmp.path / "p.json", stamp);
    const ReturnsPanel loaded = load_returns_panel(tmp.path / "p.csv", tmp.path / "p.json");
    CHECK(loaded.period == "roundtrip");
    CHECK(loaded.symbols == panel.symbols);
    CHECK(loaded.sectors == panel.sectors);
    CHECK(loaded.dates == panel.dates);
    CHECK(loaded.returns == panel.returns);  // bitwise via shortest round-trip format
    CHECK(loaded.filled_counts == panel.filled_counts);
    CHECK(read_file(tmp.path / "p.csv").starts_with("# config_hash=deadbeef00000000 seed=5"));
}

TEST_CASE("matrix csv round-trip is exact") {
    TempDir tmp("ticknet_matrix_rt");
    Eigen::MatrixXd m(2, 2);
    m << 1.0, 0.123456789123456789, 0.123456789123456789, 1.0;
    write_matrix_csv(m, {"A", "B"}, tmp.path / "m.csv", FileStamp{"c0ffee", 1});
    std::vector<std::string> symbols;
    const Eigen::MatrixXd loaded = load_matrix_csv(tmp.path / "m.csv", &symbols);
    CHECK(symbols == std::vector<std::string>{"A", "B"});
    CHECK(loaded == m);
}

TEST_CASE("full pipeline: stages, artifacts, determinism") {
    TempDir tmp("ticknet_pipeline_e2e");
    const std::string out = (tmp.path / "run").string();
    const PipelineConfig cfg = parse_pipeline_config(small_config_text(out));

    run_synth(cfg);
    CHECK(fs::exists(fs::path(out) / "synth" / "ticks.csv"));
    CHECK(fs::exists(fs::path(out) / "synth" / "truth.json"));
    CHECK(fs::exists(fs::path(out) / "synth" / "sectors.csv"));

    const auto periods = run_ingest(cfg);
    CHECK(periods == std::vector<std::string>{"early", "late"});
    CHECK(fs::exists(fs::path(out) / "ingest" / "panel_early.csv"));
    CHECK(fs::exists(fs::path(out) / "ingest" / "drops.json"));

    const ReturnsPanel early = load_returns_panel(fs::path(out) / "ingest" / "panel_early.csv",
                                                  fs::path(out) / "ingest" / "panel_early.json");
    CHECK(early.rows() == 2 * 29);
    CHECK(early.cols() == 8);
    CHECK(early.sectors[0] == "FIN");

    run_pairs(cfg);
    for (const char* name :
         {"rho.csv", "mi.csv", "nmi.csv", "d_corr.csv", "d_mi.csv", "p_value.csv", "scatter.csv"})
        CHECK(fs::exists(fs::path(out) / "pairs" / "late" / name));
    // 8 symbols -> 28 scatter rows (+ comment + header)
    {
        const std::string scatter = read_file(fs::path(out) / "pairs" / "late" / "scatter.csv");
        CHECK(std::count(scatter.begin(), scatter.end(), '\n') == 30);
    }

    run_rmt(cfg);
    const auto spectrum = nlohmann::json::parse(
        read_file(fs::path(out) / "rmt" / "early" / "spectrum.json"));
    CHECK(spectrum.at("variables").get<int>() == 8);
    CHECK(spectrum.at("eigenvalues").size() == 8);
    CHECK(spectrum.at("surrogate").at("trials").get<int>() == 5);
    const double within = spectrum.at("fractions").at("within").get<double>();
    const double above = spectrum.at("fractions").at("above").get<double>();
    const double below = spectrum.at("fractions").at("below").get<double>();
    CHECK(within + above + below == doctest::Approx(1.0));
    CHECK(fs::exists(fs::path(out) / "rmt" / "early" / "eigenvector_components.csv"));

    run_network(cfg);
    for (const char* method : {"corr", "mi"}) {
        const fs::path dir = fs::path(out) / "network" / "late" / method;
        CHECK(fs::exists(dir / "tree.graphml"));
        CHECK(fs::exists(dir / "degrees.csv"));
        CHECK(fs::exists(dir / "centrality.csv"));
        CHECK(fs::exists(dir / "hubs.csv"));
        const std::string degrees = read_file(dir / "degrees.csv");
        CHECK(degrees.find("# alpha=") != std::string::npos);
        const std::string tree = read_file(dir / "tree.graphml");
        // k-1 edges for 8 nodes
        size_t edges = 0, pos = 0;
        while ((pos = tree.find("<edge ", pos)) != std::string::npos) {
            ++edges;
            pos += 5;
        }
        CHECK(edges == 7);
    }

    SUBCASE("method and period filters restrict the outputs") {
        TempDir tmp2("ticknet_pipeline_filter");
        const std::string out2 = (tmp2.path / "run").string();
        PipelineConfig cfg2 = parse_pipeline_config(small_config_text(out2));
        run_synth(cfg2);
        run_ingest(cfg2);
        run_pairs(cfg2, std::optional<std::string>{"early"});
        CHECK(fs::exists(fs::path(out2) / "pairs" / "early" / "rho.csv"));
        CHECK_FALSE(fs::exists(fs::path(out2) / "pairs" / "late"));
        run_network(cfg2, std::optional<std::string>{"early"}, std::optional<std::string>{"corr"});
        CHECK(fs::exists(fs::path(out2) / "network" / "early" / "corr" / "tree.graphml"));
        CHECK_FALSE(fs::exists(fs::path(out2) / "network" / "early" / "mi"));
        CHECK_THROWS(run_pairs(cfg2, std::optional<std::string>{"nonexistent"}));
    }
}

TEST_CASE("report stage writes a manifest and is byte-deterministic") {
    TempDir tmp("ticknet_report_det");
    const std::string out_a = (tmp.path / "a").string();
    const std::string out_b = (tmp.path / "b").string();

    for (const std::string& out : {out_a, out_b}) {
        PipelineConfig cfg = parse_pipeline_config(small_config_text(out));
        run_synth(cfg);
        run_report(cfg);
    }

    const auto manifest = nlohmann::json::parse(read_file(fs::path(out_a) / "manifest.json"));
    CHECK(manifest.at("periods").size() == 2);
    REQUIRE(manifest.at("files").size() > 10);

    // Every file in run A is byte-identical in run B, except the two config
    // hashes differ (out_dir is part of the config text), so compare content
    // after stripping the hash lines.
    size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(out_a)) {
        if (!entry.is_regular_file()) continue;
        const fs::path rel = fs::relative(entry.path(), out_a);
        const fs::path other = fs::path(out_b) / rel;
        REQUIRE_MESSAGE(fs::exists(other), rel.string());
        std::string a = read_file(entry.path());
        std::string b = read_file(other);
        const std::string ha = content_hash(small_config_text(out_a));
        const std::string hb = content_hash(small_config_text(out_b));
        size_t pos;
        while ((pos = a.find(ha)) != std::string::npos) a.replace(pos, ha.size(), "HASH");
        while ((pos = b.find(hb)) != std::string::npos) b.replace(pos, hb.size(), "HASH");
        while ((pos = a.find(out_a)) != std::string::npos) a.replace(pos, out_a.size(), "OUT");
        while ((pos = b.find(out_b)) != std::string::npos) b.replace(pos, out_b.size(), "OUT");
        CHECK_MESSAGE(a == b, rel.string());
        ++compared;
    }
    CHECK(compared == manifest.at("files").size() + 1);  // + manifest itself
}

TEST_CASE("ingest fails cleanly without inputs") {
    PipelineConfig cfg = parse_pipeline_config("out_dir = /tmp/ticknet_nowhere\n");
    CHECK_THROWS(run_ingest(cfg));
    cfg.ticks_path = "/tmp/definitely_missing_ticks.csv";
    CHECK_THROWS(run_ingest(cfg));
}

TEST_CASE("full-year calendar splits into the configured panel row counts") {
    // 42 trading days in Jan-Feb, 46 in Mar-May, 141 in Jun-Dec, each with
    // 720 windows: rows = days * 719.
    TempDir tmp("ticknet_calendar_shape");
    const std::string out = (tmp.path / "run").string();
    std::string text = R"(session_open = 09:30
session_close = 15:30
bar_seconds = 30
max_empty_fraction = 1
seed = 2014
period = pre 2014-01-01 2014-02-28
period = mid 2014-03-01 2014-05-31
period = post 2014-06-01 2014-12-31
synth_windows_per_day = 720
synth_sector = AAA 1 0.0
synth_sector = BBB 1 0.0
synth_dates = 2014-01-01..2014-02-11,2014-03-01..2014-04-15,2014-06-01..2014-10-19
)";
    text += "ticks = " + out + "/synth/ticks.csv\n";
    text += "sectors = " + out + "/synth/sectors.csv\n";
    text += "out_dir = " + out + "\n";
    const PipelineConfig cfg = parse_pipeline_config(text);
    REQUIRE(cfg.synth.trading_dates().size() == 229);

    run_synth(cfg);
    const auto periods = run_ingest(cfg);
    CHECK(periods == std::vector<std::string>{"pre", "mid", "post"});
    const std::vector<std::pair<std::string, Eigen::Index>> expected{
        {"pre", 30198}, {"mid", 33074}, {"post", 101379}};
    for (const auto& [name, rows] : expected) {
        const auto meta = nlohmann::json::parse(
            read_file(fs::path(out) / "ingest" / ("panel_" + name + ".json")));
        CHECK(meta.at("rows").get<Eigen::Index>() == rows);
    }
}

#ifdef TICKNET_CLI_PATH
TEST_CASE("CLI binary: subcommands run and errors exit nonzero") {
    TempDir tmp("ticknet_cli_smoke");
    const std::string out = (tmp.path / "run").string();
    const fs::path cfg_path = tmp.path / "run.cfg";
    {
        std::ofstream cfg(cfg_path);
        cfg << small_config_text(out);
    }
    const std::string cli = TICKNET_CLI_PATH;
    auto run = [&](const std::string& args) {
        return std::system((cli + " " + args + " > /dev/null 2>&1").c_str());
    };

    CHECK(run("synth --config " + cfg_path.string()) == 0);
    CHECK(run("report --config " + cfg_path.string()) == 0);
    CHECK(fs::exists(fs::path(out) / "manifest.json"));
    CHECK(fs::exists(fs::path(out) / "network" / "late" / "mi" / "tree.graphml"));

    SUBCASE("period and method filters") {
        CHECK(run("pairs --config " + cfg_path.string() + " --period early") == 0);
        CHECK(run("network --config " + cfg_path.string() + " --period early --method corr") ==
              0);
        CHECK(run("network --config " + cfg_path.string() + " --method bogus") != 0);
    }
    SUBCASE("missing config and unknown period fail") {
        CHECK(run("ingest --config /nonexistent.cfg") != 0);
        CHECK(run("pairs --config " + cfg_path.string() + " --period nope") != 0);
        CHECK(run("") != 0);  // a subcommand is required
    }
    SUBCASE("out-dir override redirects the tree") {
        const std::string out2 = (tmp.path / "other").string();
        CHECK(run("synth --config " + cfg_path.string() + " --out-dir " + out2) == 0);
        CHECK(fs::exists(fs::path(out2) / "synth" / "ticks.csv"));
    }
}
#endif
