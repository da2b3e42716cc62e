#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace dekg {

// Every knob of a training/evaluation run. Field names double as config-file
// keys and, uppercased with a DEKG_ prefix, as environment override names.
struct TrainConfig {
    double lr = 0.01;
    std::size_t d = 32;  // embedding and hidden width
    double beta = 0.5;   // edge dropout probability
    double sigma = 0.1;  // weight of the contrastive loss
    double gamma_rank = 10.0;
    double gamma_c = 1.0;
    double theta = 2.0;  // contrastive count range factor
    int hops = 2;        // subgraph hop budget
    std::size_t layers = 3;
    std::size_t epochs = 100;
    std::size_t negatives_per_positive = 1;
    std::size_t contrastive_samples = 10;  // per entity per epoch
    std::uint64_t seed = 42;
    std::size_t batch_size = 32;
    std::size_t max_ball_nodes = 500;  // per-endpoint subgraph cap
    std::size_t d_att = 8;             // attention embedding width
    std::size_t workers = 0;  // 0 = one per available core
    bool direction_aware = false;
    bool disable_semantic_score = false;   // drop the relation-profile score
    bool disable_contrastive = false;      // train without the contrastive loss
    bool disable_improved_labeling = false;  // plain double-radius labeling

    bool operator==(const TrainConfig&) const = default;
};

// Applies `key=value`. Throws ConfigError for unknown keys or unparseable
// values; `origin` prefixes the message.
void set_config_field(TrainConfig& cfg, const std::string& key,
                      const std::string& value, const std::string& origin);

// Flat key=value text, one pair per line, '#' comments, blank lines ignored.
TrainConfig parse_config_text(const std::string& text, TrainConfig base,
                              const std::string& origin);
TrainConfig load_config_file(const std::string& path, TrainConfig base);

// DEKG_<UPPERCASED FIELD> environment variables; `get` defaults to ::getenv.
void apply_env_overrides(
    TrainConfig& cfg,
    const std::function<std::optional<std::string>(const std::string&)>& get = {});

// Range checks; throws ConfigError with the offending field named.
void validate(const TrainConfig& cfg);

// One key=value line per field, fixed order, doubles at full precision so a
// dump parses back to an identical config.
std::string dump_config(const TrainConfig& cfg);

}  // namespace dekg
