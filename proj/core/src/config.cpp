#include "dekg/config.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "dekg/error.hpp"

namespace dekg {

// Single source of truth for the field list; parsing, env lookup, dumping and
// validation all walk it. X(type-tag, member)
#define DEKG_CONFIG_FIELDS(X)          \
    X(Double, lr)                      \
    X(Size, d)                         \
    X(Double, beta)                    \
    X(Double, sigma)                   \
    X(Double, gamma_rank)              \
    X(Double, gamma_c)                 \
    X(Double, theta)                   \
    X(Int, hops)                          \
    X(Size, layers)                    \
    X(Size, epochs)                    \
    X(Size, negatives_per_positive)    \
    X(Size, contrastive_samples)       \
    X(U64, seed)                       \
    X(Size, batch_size)                \
    X(Size, max_ball_nodes)            \
    X(Size, d_att)                     \
    X(Size, workers)                   \
    X(Bool, direction_aware)           \
    X(Bool, disable_semantic_score)    \
    X(Bool, disable_contrastive)       \
    X(Bool, disable_improved_labeling)

namespace {

[[noreturn]] void bad_value(const std::string& origin, const std::string& key,
                            const std::string& value) {
    throw ConfigError(origin + ": bad value '" + value + "' for " + key);
}

template <class T>
T parse_integer(const std::string& origin, const std::string& key,
                const std::string& value) {
    T out{};
    const char* first = value.data();
    const char* last = first + value.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    if (ec != std::errc{} || ptr != last) bad_value(origin, key, value);
    return out;
}

double parse_double(const std::string& origin, const std::string& key,
                    const std::string& value) {
    if (value.empty()) bad_value(origin, key, value);
    std::size_t used = 0;
    double out;
    try {
        out = std::stod(value, &used);
    } catch (const std::exception&) {
        bad_value(origin, key, value);
    }
    if (used != value.size()) bad_value(origin, key, value);
    return out;
}

bool parse_bool(const std::string& origin, const std::string& key,
                const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    bad_value(origin, key, value);
}

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void set_config_field(TrainConfig& cfg, const std::string& key,
                      const std::string& value, const std::string& origin) {
#define DEKG_SET_Double(member) cfg.member = parse_double(origin, key, value);
#define DEKG_SET_Size(member) \
    cfg.member = parse_integer<std::size_t>(origin, key, value);
#define DEKG_SET_U64(member) \
    cfg.member = parse_integer<std::uint64_t>(origin, key, value);
#define DEKG_SET_Int(member) cfg.member = parse_integer<int>(origin, key, value);
#define DEKG_SET_Bool(member) cfg.member = parse_bool(origin, key, value);
#define DEKG_X(tag, member)          \
    if (key == #member) {            \
        DEKG_SET_##tag(member);      \
        return;                      \
    }
    DEKG_CONFIG_FIELDS(DEKG_X)
#undef DEKG_X
#undef DEKG_SET_Double
#undef DEKG_SET_Size
#undef DEKG_SET_U64
#undef DEKG_SET_Int
#undef DEKG_SET_Bool
    throw ConfigError(origin + ": unknown config key '" + key + "'");
}

TrainConfig parse_config_text(const std::string& text, TrainConfig base,
                              const std::string& origin) {
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string where = origin + ":" + std::to_string(lineno);
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key=value, got '" + line + "'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(where + ": empty config key");
        set_config_field(base, key, value, where);
    }
    return base;
}

TrainConfig load_config_file(const std::string& path, TrainConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open config file " + path);
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config_text(text.str(), base, path);
}

void apply_env_overrides(
    TrainConfig& cfg,
    const std::function<std::optional<std::string>(const std::string&)>& get) {
    auto lookup = [&](const std::string& name) -> std::optional<std::string> {
        if (get) return get(name);
        const char* v = std::getenv(name.c_str());
        if (v == nullptr) return std::nullopt;
        return std::string(v);
    };
    auto env_name = [](std::string field) {
        for (char& c : field) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        return "DEKG_" + field;
    };
#define DEKG_X(tag, member)                                              \
    if (auto v = lookup(env_name(#member)))                              \
        set_config_field(cfg, #member, *v, "environment " + env_name(#member));
    DEKG_CONFIG_FIELDS(DEKG_X)
#undef DEKG_X
}

void validate(const TrainConfig& cfg) {
    auto fail = [](const std::string& what) { throw ConfigError("config: " + what); };
    if (!(cfg.lr >= 0.0)) fail("lr must be non-negative");
    if (cfg.d == 0) fail("d must be positive");
    if (!(cfg.beta >= 0.0 && cfg.beta < 1.0)) fail("beta must lie in [0, 1)");
    if (!(cfg.sigma >= 0.0)) fail("sigma must be non-negative");
    if (!(cfg.gamma_rank > 0.0)) fail("gamma_rank must be positive");
    if (!(cfg.gamma_c > 0.0)) fail("gamma_c must be positive");
    if (!(cfg.theta > 0.0)) fail("theta must be positive");
    if (cfg.hops < 1) fail("hops must be at least 1");
    if (cfg.layers == 0) fail("layers must be positive");
    if (cfg.epochs == 0) fail("epochs must be positive");
    if (cfg.negatives_per_positive == 0) fail("negatives_per_positive must be positive");
    if (cfg.batch_size == 0) fail("batch_size must be positive");
    if (cfg.max_ball_nodes == 0) fail("max_ball_nodes must be positive");
    if (cfg.d_att == 0) fail("d_att must be positive");
    // workers == 0 is valid: it requests one worker per available core.
}

std::string dump_config(const TrainConfig& cfg) {
    std::ostringstream out;
#define DEKG_FMT_Double(member) format_double(cfg.member)
#define DEKG_FMT_Size(member) std::to_string(cfg.member)
#define DEKG_FMT_U64(member) std::to_string(cfg.member)
#define DEKG_FMT_Int(member) std::to_string(cfg.member)
#define DEKG_FMT_Bool(member) (cfg.member ? "true" : "false")
#define DEKG_X(tag, member) out << #member << '=' << DEKG_FMT_##tag(member) << '\n';
    DEKG_CONFIG_FIELDS(DEKG_X)
#undef DEKG_X
#undef DEKG_FMT_Double
#undef DEKG_FMT_Size
#undef DEKG_FMT_U64
#undef DEKG_FMT_Int
#undef DEKG_FMT_Bool
    return out.str();
}

}  // namespace dekg
