#pragma once

#include <string>
#include <vector>

#include "dekg/model.hpp"

namespace dekg {

// On-disk model format: a text header (format version, embedded config,
// relation tokens, parameter names and shapes) followed by the raw parameter
// values as little-endian 64-bit floats in declaration order. Reload is
// bit-exact. The entity vocabulary is deliberately absent: no parameter is
// keyed by entity, so a checkpoint applies to any graph over the same
// relations.
void save_checkpoint(const std::string& path, const Model& m,
                     const std::vector<std::string>& relation_tokens);

struct LoadedCheckpoint {
    Model model;
    std::vector<std::string> relation_tokens;  // index = RelationId
};

// Rebuilds the model from the embedded config and overwrites every parameter
// with the stored bytes. Errors if the stored slots do not exactly match the
// slots this build creates for that config.
LoadedCheckpoint load_checkpoint(const std::string& path);

// Convenience: relation tokens of a vocabulary in id order.
std::vector<std::string> relation_tokens(const Vocabulary& vocab);

}  // namespace dekg
