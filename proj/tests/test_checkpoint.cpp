#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dekg/checkpoint.hpp"
#include "dekg/error.hpp"
#include "dekg/kg.hpp"
#include "dekg/model.hpp"
#include "doctest.h"

using namespace dekg;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("dekg-checkpoint-test-" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.is_open());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    REQUIRE(out.is_open());
    out << content;
}

TrainConfig odd_config() {
    TrainConfig cfg;
    cfg.d = 6;
    cfg.d_att = 3;
    cfg.hops = 1;
    cfg.layers = 2;
    cfg.lr = 0.3;
    cfg.sigma = 1.0 / 3.0;
    cfg.epochs = 7;
    cfg.seed = 99;
    cfg.disable_contrastive = true;
    cfg.direction_aware = true;
    return cfg;
}

Model odd_model() {
    Model m = Model::init(odd_config(), 2);
    // Values that expose rounding or byte-order slips.
    Tensor& features = m.store.mutable_value(m.feature_bank);
    features.at(0, 0) = 0.1;
    features.at(0, 1) = -0.0;
    features.at(1, 0) = 1e-300;
    features.at(1, 1) = -1.0 / 3.0;
    features.at(2, 2) = 12345.6789;
    return m;
}

const std::vector<std::string> kTokens = {"likes", "made"};

// Rewrites the first occurrence of `from` in the header text.
void tamper(const std::string& path, const std::string& from,
            const std::string& to) {
    std::string bytes = slurp(path);
    std::size_t at = bytes.find(from);
    REQUIRE(at != std::string::npos);
    bytes.replace(at, from.size(), to);
    spit(path, bytes);
}

}  // namespace

TEST_CASE("checkpoints round-trip every parameter bit and the config") {
    TempDir dir;
    Model m = odd_model();
    std::string path = dir.file("model.ckpt");
    save_checkpoint(path, m, kTokens);

    LoadedCheckpoint loaded = load_checkpoint(path);
    CHECK(loaded.relation_tokens == kTokens);
    CHECK(loaded.model.cfg == m.cfg);
    CHECK(loaded.model.n_relations == m.n_relations);
    REQUIRE(loaded.model.store.size() == m.store.size());
    for (ParameterStore::SlotId s = 0; s < m.store.size(); ++s) {
        CHECK(loaded.model.store.name(s) == m.store.name(s));
        CHECK(loaded.model.store.value(s) == m.store.value(s));
    }

    // Saving the loaded model reproduces the file byte for byte.
    std::string again = dir.file("again.ckpt");
    save_checkpoint(again, loaded.model, loaded.relation_tokens);
    CHECK(slurp(again) == slurp(path));
}

TEST_CASE("relation_tokens lists tokens in id order") {
    Vocabulary v;
    v.add_relation("likes");
    v.add_relation("made");
    CHECK(relation_tokens(v) == kTokens);
}

TEST_CASE("save rejects a token list of the wrong size") {
    TempDir dir;
    Model m = odd_model();
    CHECK_THROWS_AS(save_checkpoint(dir.file("bad.ckpt"), m, {"only-one"}),
                    DataError);
}

TEST_CASE("loading a missing or foreign file fails cleanly") {
    TempDir dir;
    CHECK_THROWS_AS(load_checkpoint(dir.file("absent.ckpt")), FileError);

    std::string garbage = dir.file("garbage.ckpt");
    spit(garbage, "not a checkpoint at all\n");
    CHECK_THROWS_WITH_AS(load_checkpoint(garbage),
                         doctest::Contains("not a checkpoint"), DataError);
}

TEST_CASE("corrupted checkpoints are refused") {
    TempDir dir;
    Model m = odd_model();
    std::string path = dir.file("model.ckpt");

    SUBCASE("truncated data") {
        save_checkpoint(path, m, kTokens);
        std::filesystem::resize_file(path,
                                     std::filesystem::file_size(path) / 2);
        CHECK_THROWS_WITH_AS(load_checkpoint(path),
                             doctest::Contains("truncated"), DataError);
    }
    SUBCASE("trailing bytes") {
        save_checkpoint(path, m, kTokens);
        std::ofstream out(path, std::ios::binary | std::ios::app);
        out << 'x';
        out.close();
        CHECK_THROWS_WITH_AS(load_checkpoint(path),
                             doctest::Contains("trailing"), DataError);
    }
    SUBCASE("unknown parameter name") {
        save_checkpoint(path, m, kTokens);
        tamper(path, "profile.rel_sem", "profile.rel_sXm");
        CHECK_THROWS_WITH_AS(load_checkpoint(path),
                             doctest::Contains("unknown parameter"), DataError);
    }
    SUBCASE("shape mismatch") {
        save_checkpoint(path, m, kTokens);
        tamper(path, "profile.rel_sem 2 6", "profile.rel_sem 2 7");
        CHECK_THROWS_WITH_AS(load_checkpoint(path),
                             doctest::Contains("shape mismatch"), DataError);
    }
    SUBCASE("duplicate declaration") {
        save_checkpoint(path, m, kTokens);
        tamper(path, "profile.rel_sem", "profile.features");
        CHECK_THROWS_WITH_AS(load_checkpoint(path),
                             doctest::Contains("declared twice"), DataError);
    }
    SUBCASE("parameter count mismatch") {
        save_checkpoint(path, m, kTokens);
        std::string decl = "params " + std::to_string(m.store.size());
        tamper(path, decl, "params " + std::to_string(m.store.size() + 1));
        CHECK_THROWS_WITH_AS(load_checkpoint(path),
                             doctest::Contains("parameters"), DataError);
    }
}
