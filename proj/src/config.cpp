#include "qoe/config.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace qoe {

namespace {

std::string_view trim(std::string_view s) {
    const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
    const auto b = std::find_if(s.begin(), s.end(), not_space);
    const auto e = std::find_if(s.rbegin(), s.rend(), not_space).base();
    return b < e ? std::string_view(&*b, static_cast<std::size_t>(e - b)) : std::string_view{};
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* what) {
    throw ConfigError("config key '" + std::string(key) + "': cannot parse '" + std::string(value) + "' as " +
                      what);
}

double parse_double(std::string_view key, std::string_view value) {
    const std::string s(value);
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        bad_value(key, value, "a number");
    }
    if (used != s.size()) bad_value(key, value, "a number");
    return v;
}

std::uint64_t parse_u64(std::string_view key, std::string_view value) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "a non-negative integer");
    return v;
}

std::vector<std::string> parse_list(std::string_view value) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= value.size()) {
        const std::size_t comma = value.find(',', start);
        const std::string_view item =
            trim(value.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        if (!item.empty()) out.emplace_back(item);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

} // namespace

const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys{"r0",    "rc",        "eps",       "d_min",          "d_max",
                                               "d_step", "policies", "trials",    "seed",           "file_size",
                                               "truncation_tol", "output", "threads"};
    return keys;
}

void apply_config_value(ExperimentConfig& cfg, std::string_view key, std::string_view raw) {
    const std::string_view value = trim(raw);
    if (key == "r0") cfg.r0 = parse_double(key, value);
    else if (key == "rc") cfg.rc = parse_double(key, value);
    else if (key == "eps") cfg.eps = parse_double(key, value);
    else if (key == "d_min") cfg.d_min = parse_double(key, value);
    else if (key == "d_max") cfg.d_max = parse_double(key, value);
    else if (key == "d_step") cfg.d_step = parse_double(key, value);
    else if (key == "policies") cfg.policies = parse_list(value);
    else if (key == "trials") cfg.trials = parse_u64(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "file_size") {
        if (value == "auto") cfg.file_size.reset();
        else cfg.file_size = parse_double(key, value);
    } else if (key == "truncation_tol") cfg.truncation_tol = parse_double(key, value);
    else if (key == "output") cfg.output = std::string(value);
    else if (key == "threads") {
        const std::uint64_t t = parse_u64(key, value);
        if (t > 4096) bad_value(key, value, "a thread count");
        cfg.threads = static_cast<unsigned>(t);
    } else {
        throw ConfigError("unknown config key '" + std::string(key) + "'");
    }
}

void apply_config_text(ExperimentConfig& cfg, std::string_view text, const std::string& origin) {
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string_view body(line);
        if (const auto hash = body.find('#'); hash != std::string_view::npos) body = body.substr(0, hash);
        body = trim(body);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected 'key = value'");
        }
        const std::string_view key = trim(body.substr(0, eq));
        try {
            apply_config_value(cfg, key, body.substr(eq + 1));
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    ExperimentConfig cfg;
    apply_config_text(cfg, buf.str(), path.string());
    return cfg;
}

} // namespace qoe
