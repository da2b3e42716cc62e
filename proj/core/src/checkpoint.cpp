#include "dekg/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "dekg/config.hpp"
#include "dekg/error.hpp"

namespace dekg {

namespace {

constexpr const char* kMagic = "dekg-checkpoint 1";

void put_u64_le(std::ostream& out, std::uint64_t v) {
    unsigned char bytes[8];
    for (int i = 0; i < 8; ++i) bytes[i] = static_cast<unsigned char>(v >> (8 * i));
    out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_u64_le(std::istream& in, const std::string& path) {
    unsigned char bytes[8];
    if (!in.read(reinterpret_cast<char*>(bytes), 8))
        throw DataError(path + ": checkpoint truncated");
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return v;
}

std::string expect_line(std::istream& in, const std::string& path) {
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": checkpoint truncated");
    return line;
}

}  // namespace

std::vector<std::string> relation_tokens(const Vocabulary& vocab) {
    std::vector<std::string> tokens;
    tokens.reserve(vocab.n_relations());
    for (RelationId r = 0; r < vocab.n_relations(); ++r)
        tokens.push_back(vocab.relation_token(r));
    return tokens;
}

void save_checkpoint(const std::string& path, const Model& m,
                     const std::vector<std::string>& tokens) {
    if (tokens.size() != m.n_relations)
        throw DataError("relation token list does not match the model");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write " + path);

    std::string config = dump_config(m.cfg);
    out << kMagic << '\n';
    out << "config " << config.size() << '\n' << config;
    out << "relations " << tokens.size() << '\n';
    for (const std::string& t : tokens) out << t << '\n';
    out << "params " << m.store.size() << '\n';
    for (ParameterStore::SlotId s = 0; s < m.store.size(); ++s) {
        const Tensor& v = m.store.value(s);
        out << m.store.name(s) << ' ' << v.rows << ' ' << v.cols << '\n';
    }
    out << "data\n";
    for (ParameterStore::SlotId s = 0; s < m.store.size(); ++s)
        for (double d : m.store.value(s).data)
            put_u64_le(out, std::bit_cast<std::uint64_t>(d));
    if (!out.flush()) throw FileError("short write to " + path);
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open checkpoint " + path);

    if (expect_line(in, path) != kMagic)
        throw DataError(path + ": not a checkpoint file");

    std::istringstream header(expect_line(in, path));
    std::string word;
    std::size_t config_bytes = 0;
    if (!(header >> word >> config_bytes) || word != "config")
        throw DataError(path + ": malformed config header");
    std::string config_text(config_bytes, '\0');
    if (!in.read(config_text.data(), static_cast<std::streamsize>(config_bytes)))
        throw DataError(path + ": checkpoint truncated");
    TrainConfig cfg = parse_config_text(config_text, TrainConfig{},
                                        path + " (embedded config)");

    header = std::istringstream(expect_line(in, path));
    std::size_t n_relations = 0;
    if (!(header >> word >> n_relations) || word != "relations")
        throw DataError(path + ": malformed relation header");
    std::vector<std::string> tokens;
    tokens.reserve(n_relations);
    for (std::size_t i = 0; i < n_relations; ++i)
        tokens.push_back(expect_line(in, path));

    header = std::istringstream(expect_line(in, path));
    std::size_t n_params = 0;
    if (!(header >> word >> n_params) || word != "params")
        throw DataError(path + ": malformed parameter header");

    LoadedCheckpoint loaded{Model::init(cfg, n_relations), std::move(tokens)};
    Model& m = loaded.model;
    if (n_params != m.store.size())
        throw DataError(path + ": checkpoint has " + std::to_string(n_params) +
                        " parameters but this build creates " +
                        std::to_string(m.store.size()));

    struct Decl {
        ParameterStore::SlotId slot;
        std::size_t rows, cols;
    };
    std::vector<Decl> decls;
    std::vector<char> declared(m.store.size(), 0);
    decls.reserve(n_params);
    for (std::size_t i = 0; i < n_params; ++i) {
        header = std::istringstream(expect_line(in, path));
        std::string name;
        std::size_t rows = 0, cols = 0;
        if (!(header >> name >> rows >> cols))
            throw DataError(path + ": malformed parameter declaration");
        if (!m.store.contains(name))
            throw DataError(path + ": unknown parameter '" + name + "'");
        ParameterStore::SlotId slot = m.store.find(name);
        if (declared[slot])
            throw DataError(path + ": parameter '" + name + "' declared twice");
        declared[slot] = 1;
        const Tensor& current = m.store.value(slot);
        if (current.rows != rows || current.cols != cols)
            throw DataError(path + ": shape mismatch for '" + name + "'");
        decls.push_back({slot, rows, cols});
    }

    if (expect_line(in, path) != "data")
        throw DataError(path + ": missing data section");
    for (const Decl& d : decls) {
        Tensor& value = m.store.mutable_value(d.slot);
        for (double& v : value.data)
            v = std::bit_cast<double>(get_u64_le(in, path));
    }
    char extra;
    if (in.read(&extra, 1))
        throw DataError(path + ": trailing bytes after parameter data");
    return loaded;
}

}  // namespace dekg
