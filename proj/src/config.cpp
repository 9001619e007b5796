#include "ticknet/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "ticknet/csv.hpp"
#include "ticknet/rng.hpp"

namespace ticknet {

namespace {

std::vector<std::string> split_words(std::string_view s) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
        size_t start = i;
        while (i < s.size() && s[i] != ' ' && s[i] != '\t') ++i;
        if (i > start) out.emplace_back(s.substr(start, i - start));
    }
    return out;
}

int64_t to_int(std::string_view v, const std::string& key) {
    int64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw std::invalid_argument("config: bad integer for '" + key + "': '" + std::string(v) +
                                    "'");
    return out;
}

double to_double(std::string_view v, const std::string& key) {
    double out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || p != v.data() + v.size())
        throw std::invalid_argument("config: bad number for '" + key + "': '" + std::string(v) +
                                    "'");
    return out;
}

bool to_bool(std::string_view v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw std::invalid_argument("config: bad boolean for '" + key + "': '" + std::string(v) + "'");
}

/// "A..B" (inclusive date range) or a single date; comma-separated list.
std::vector<Date> parse_date_ranges(std::string_view v, const std::string& key) {
    std::vector<Date> out;
    for (std::string_view part : split_csv(v)) {
        part = trim(part);
        if (part.empty()) continue;
        size_t dots = part.find("..");
        if (dots == std::string_view::npos) {
            out.push_back(Date::parse(part));
            continue;
        }
        const Date a = Date::parse(trim(part.substr(0, dots)));
        const Date b = Date::parse(trim(part.substr(dots + 2)));
        if (b < a) throw std::invalid_argument("config: reversed date range in '" + key + "'");
        for (int64_t s = a.serial(); s <= b.serial(); ++s) out.push_back(Date::from_serial(s));
    }
    return out;
}

}  // namespace

std::string content_hash(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

PipelineConfig parse_pipeline_config(const std::string& text) {
    PipelineConfig cfg;
    cfg.config_hash = content_hash(text);
    cfg.synth.days = 0;  // force explicit configuration for synth runs

    std::istringstream in(text);
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view body = trim(line);
        if (body.empty() || body.front() == '#') continue;
        const size_t eq = body.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value'");
        const std::string key{trim(body.substr(0, eq))};
        const std::string_view value = trim(body.substr(eq + 1));

        if (key == "session_open") cfg.session.session_open = TimeOfDay::parse(value);
        else if (key == "session_close") cfg.session.session_close = TimeOfDay::parse(value);
        else if (key == "bar_seconds") cfg.session.bar_seconds = static_cast<int>(to_int(value, key));
        else if (key == "strict") cfg.session.strict = to_bool(value, key);
        else if (key == "max_empty_fraction") cfg.session.max_empty_fraction = to_double(value, key);
        else if (key == "trading_days") cfg.session.trading_days = parse_date_ranges(value, key);
        else if (key == "period") {
            auto w = split_words(value);
            if (w.size() != 3)
                throw std::invalid_argument("config: period wants 'name begin end', got '" +
                                            std::string(value) + "'");
            cfg.session.periods.push_back({w[0], Date::parse(w[1]), Date::parse(w[2])});
        } else if (key == "ticks") cfg.ticks_path = std::string(value);
        else if (key == "sectors") cfg.sectors_path = std::string(value);
        else if (key == "out_dir") cfg.out_dir = std::string(value);
        else if (key == "permutation_trials") cfg.permutation_trials = static_cast<int>(to_int(value, key));
        else if (key == "alpha") cfg.alpha = to_double(value, key);
        else if (key == "surrogate_trials") cfg.surrogate_trials = static_cast<int>(to_int(value, key));
        else if (key == "histogram_bins") cfg.histogram_bins = static_cast<int>(to_int(value, key));
        else if (key == "top_eigenvectors") cfg.top_eigenvectors = static_cast<int>(to_int(value, key));
        else if (key == "hub_degree_threshold") cfg.hub_degree_threshold = static_cast<int>(to_int(value, key));
        else if (key == "graph_format") cfg.graph_format = graph_format_from_name(std::string(value));
        else if (key == "methods") {
            cfg.methods.clear();
            for (auto part : split_csv(value)) {
                const std::string method{trim(part)};
                if (method != "corr" && method != "mi")
                    throw std::invalid_argument("config: unknown method '" + method + "'");
                cfg.methods.push_back(method);
            }
        } else if (key == "seed") cfg.seed = static_cast<uint64_t>(to_int(value, key));
        else if (key == "threads") cfg.threads = static_cast<unsigned>(to_int(value, key));
        else if (key == "synth_days") cfg.synth.days = static_cast<int>(to_int(value, key));
        else if (key == "synth_windows_per_day") cfg.synth.windows_per_day = static_cast<int>(to_int(value, key));
        else if (key == "synth_market_beta") cfg.synth.market_beta = to_double(value, key);
        else if (key == "synth_return_scale") cfg.synth.return_scale = to_double(value, key);
        else if (key == "synth_price_scale") cfg.synth.price_scale = to_double(value, key);
        else if (key == "synth_start_date") cfg.synth.start_date = Date::parse(value);
        else if (key == "synth_dates") cfg.synth.dates = parse_date_ranges(value, key);
        else if (key == "synth_sector") {
            auto w = split_words(value);
            if (w.size() != 3)
                throw std::invalid_argument("config: synth_sector wants 'name size intra_corr'");
            cfg.synth.sectors.push_back(
                {w[0], static_cast<int>(to_int(w[1], key)), to_double(w[2], key)});
        } else if (key == "synth_nonlinear") {
            auto w = split_words(value);
            if (w.size() != 3)
                throw std::invalid_argument("config: synth_nonlinear wants 'x y square|sine'");
            CouplingForm form;
            if (w[2] == "square") form = CouplingForm::square;
            else if (w[2] == "sine") form = CouplingForm::sine;
            else throw std::invalid_argument("config: unknown coupling '" + w[2] + "'");
            cfg.synth.nonlinear_pairs.push_back(
                {static_cast<int>(to_int(w[0], key)), static_cast<int>(to_int(w[1], key)), form});
        } else {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": unknown key '" + key + "'");
        }
    }
    cfg.synth.seed = derive_seed(cfg.seed, "synth");
    cfg.validate();
    return cfg;
}

void PipelineConfig::validate() const {
    session.validate();
    if (permutation_trials < 99)
        throw std::invalid_argument("config: permutation_trials must be >= 99");
    if (alpha <= 0.0 || alpha > 1.0) throw std::invalid_argument("config: alpha must be in (0, 1]");
    if (surrogate_trials < 1) throw std::invalid_argument("config: surrogate_trials must be >= 1");
    if (histogram_bins < 1) throw std::invalid_argument("config: histogram_bins must be >= 1");
    if (top_eigenvectors < 1) throw std::invalid_argument("config: top_eigenvectors must be >= 1");
    if (methods.empty()) throw std::invalid_argument("config: methods must not be empty");
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_pipeline_config(buf.str());
}

}  // namespace ticknet
