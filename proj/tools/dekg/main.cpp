// Command-line front end: dataset assembly, training, evaluation, ablation
// sweeps, and diagnostics over the dekg core library.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dekg/checkpoint.hpp"
#include "dekg/config.hpp"
#include "dekg/error.hpp"
#include "dekg/eval.hpp"
#include "dekg/kg.hpp"
#include "dekg/model.hpp"
#include "dekg/subgraph.hpp"
#include "dekg/training.hpp"
#include "dekg/worker_pool.hpp"

namespace {

using namespace dekg;

// Config resolution: defaults, then --config file, then DEKG_* environment
// variables, then explicit --set pairs. Later sources win.
struct ConfigArgs {
    std::string config_path;
    std::vector<std::string> sets;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;

    void attach(CLI::App& cmd) {
        cmd.add_option("--config", config_path,
                       "config file with key=value lines");
        cmd.add_option("--set", sets,
                       "override one config key, e.g. --set lr=0.05")
            ->type_name("KEY=VALUE");
        cmd.add_option("--seed", seed, "root seed for all random streams");
        cmd.add_option("--workers", workers,
                       "worker threads (0 = all available cores)");
    }

    TrainConfig resolve() const {
        TrainConfig cfg;
        if (!config_path.empty()) cfg = load_config_file(config_path, cfg);
        apply_env_overrides(cfg);
        for (const std::string& pair : sets) {
            std::size_t eq = pair.find('=');
            if (eq == std::string::npos)
                throw ConfigError("--set expects KEY=VALUE, got '" + pair + "'");
            set_config_field(cfg, pair.substr(0, eq), pair.substr(eq + 1),
                             "--set");
        }
        if (seed) cfg.seed = *seed;
        if (workers) cfg.workers = *workers;
        validate(cfg);
        return cfg;
    }
};

void print_resolved(const TrainConfig& cfg) {
    std::cout << "# resolved config\n" << dump_config(cfg) << std::flush;
}

struct Corpus {
    KnowledgeGraph train;        // original graph, own vocabulary
    KnowledgeGraph combined;     // train + emerging support edges
    std::vector<Triple> enclosing;
    std::vector<Triple> bridging;
};

std::vector<Triple> load_pool(const std::string& path, Vocabulary& vocab,
                              const char* what) {
    std::size_t before = vocab.n_entities();
    KnowledgeGraph g = load_triples(path, vocab);
    if (g.vocab.n_entities() != before)
        throw DataError(path + ": " + what +
                        " links reference entities that have no support edges");
    vocab = g.vocab;
    return g.triples;
}

Corpus load_corpus(const std::string& train_path,
                   const std::string& emerging_path,
                   const std::string& enclosing_path,
                   const std::string& bridging_path) {
    Corpus c;
    c.train = load_triples(train_path, std::nullopt);
    KnowledgeGraph emerging = load_triples(emerging_path, c.train.vocab);
    c.combined = union_graph(c.train, emerging);
    Vocabulary vocab = c.combined.vocab;
    c.enclosing = load_pool(enclosing_path, vocab, "enclosing");
    c.bridging = load_pool(bridging_path, vocab, "bridging");
    for (const Triple& t : c.enclosing)
        if (classify_link(c.combined, t) != LinkClass::Enclosing)
            throw DataError(enclosing_path +
                            ": link is not enclosing (an endpoint is seen)");
    for (const Triple& t : c.bridging)
        if (classify_link(c.combined, t) != LinkClass::Bridging)
            throw DataError(bridging_path +
                            ": link is not bridging (needs exactly one seen "
                            "endpoint)");
    return c;
}

TripleSet known_triples(const Corpus& c) {
    TripleSet known(c.combined.triples.begin(), c.combined.triples.end());
    known.insert(c.enclosing.begin(), c.enclosing.end());
    known.insert(c.bridging.begin(), c.bridging.end());
    return known;
}

std::vector<std::uint64_t> derive_eval_seeds(std::uint64_t base,
                                             std::size_t count) {
    std::vector<std::uint64_t> seeds;
    seeds.reserve(count);
    Rng mix = Rng(base).stream("eval-mix");
    for (std::size_t i = 0; i < count; ++i) seeds.push_back(mix.stream(i).seed());
    return seeds;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FileError("cannot write " + path);
    out << text;
    if (!out.flush()) throw FileError("short write to " + path);
}

// --- subcommand payloads -------------------------------------------------

struct BuildDatasetArgs {
    std::string train, emerging, enclosing, bridging, ratio = "EQ", out_dir;
    std::uint64_t seed = 42;
};

void run_build_dataset(const BuildDatasetArgs& a) {
    std::cout << "# resolved options\nratio=" << a.ratio << "\nseed=" << a.seed
              << "\n";
    Corpus c = load_corpus(a.train, a.emerging, a.enclosing, a.bridging);
    EvalSet set = build_eval_set(c.enclosing, c.bridging, parse_ratio(a.ratio),
                                 a.seed);
    std::filesystem::create_directories(a.out_dir);
    auto in_dir = [&](const std::string& name) {
        return (std::filesystem::path(a.out_dir) / name).string();
    };
    save_triples(build_graph(c.combined.vocab, set.enclosing),
                 in_dir("eval-enclosing.tsv"));
    save_triples(build_graph(c.combined.vocab, set.bridging),
                 in_dir("eval-bridging.tsv"));
    save_entity_vocab(c.combined.vocab, in_dir("entities.tsv"));
    save_relation_vocab(c.combined.vocab, in_dir("relations.tsv"));
    save_eval_manifest(set, in_dir("manifest.txt"));
    std::cout << "wrote " << set.enclosing.size() << " enclosing and "
              << set.bridging.size() << " bridging links to " << a.out_dir
              << '\n';
}

struct TrainArgs {
    ConfigArgs config;
    std::string train, out, loss_csv;
};

void run_train(const TrainArgs& a) {
    TrainConfig cfg = a.config.resolve();
    print_resolved(cfg);
    KnowledgeGraph g = load_triples(a.train, std::nullopt);
    Model m = Model::init(cfg, g.n_relations());
    TrainResult result = train(m, g, [](std::size_t epoch, const EpochLoss& l) {
        std::cout << "epoch " << epoch << " loss " << l.total << " (rank "
                  << l.rank << ", contrastive " << l.contrastive << ")\n";
    });
    save_checkpoint(a.out, m, relation_tokens(g.vocab));
    std::string loss_path =
        a.loss_csv.empty() ? a.out + ".loss.csv" : a.loss_csv;
    write_loss_csv(result.losses, loss_path);
    std::cout << "wrote " << a.out << " and " << loss_path << '\n';
}

struct EvaluateArgs {
    std::string ckpt, train, emerging, enclosing, bridging, ratio = "EQ";
    std::string report, tie = "average";
    std::size_t n_seeds = 5;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> workers;
};

TieMode parse_tie(const std::string& s) {
    if (s == "average") return TieMode::Average;
    if (s == "pessimistic") return TieMode::Pessimistic;
    if (s == "optimistic") return TieMode::Optimistic;
    throw ConfigError("unknown tie mode '" + s +
                      "' (average|pessimistic|optimistic)");
}

EvalReport evaluate_corpus(Model& m, const Corpus& c, MixRatio ratio,
                           const std::vector<std::uint64_t>& seeds,
                           TieMode tie, std::size_t workers) {
    ScoringContext ctx(c.combined, m.cfg.direction_aware);
    EvalOptions opts;
    opts.seeds = seeds;
    opts.ratio = ratio;
    opts.tie = tie;
    opts.workers = workers;
    return evaluate(m, ctx, c.enclosing, c.bridging, known_triples(c), opts);
}

void run_evaluate(const EvaluateArgs& a) {
    LoadedCheckpoint loaded = load_checkpoint(a.ckpt);
    Model& m = loaded.model;
    if (a.seed) m.cfg.seed = *a.seed;
    if (a.workers) m.cfg.workers = *a.workers;
    print_resolved(m.cfg);
    Corpus c = load_corpus(a.train, a.emerging, a.enclosing, a.bridging);
    if (relation_tokens(c.combined.vocab) != loaded.relation_tokens)
        throw DataError(
            "checkpoint was trained on a different relation vocabulary");
    EvalReport report = evaluate_corpus(
        m, c, parse_ratio(a.ratio), derive_eval_seeds(m.cfg.seed, a.n_seeds),
        parse_tie(a.tie), resolve_workers(m.cfg.workers));
    print_report(report, std::cout);
    if (!a.report.empty()) write_text(a.report, report_csv(report));
}

struct AblateArgs {
    ConfigArgs config;
    std::string train, emerging, enclosing, bridging, ratio = "EQ";
    std::string report, tie = "average";
    std::size_t n_seeds = 5;
};

void run_ablate(const AblateArgs& a) {
    TrainConfig base = a.config.resolve();
    print_resolved(base);
    Corpus c = load_corpus(a.train, a.emerging, a.enclosing, a.bridging);

    struct Variant {
        const char* name;
        std::function<void(TrainConfig&)> tweak;
    };
    const Variant variants[] = {
        {"full", [](TrainConfig&) {}},
        {"no-semantic-score",
         [](TrainConfig& cfg) { cfg.disable_semantic_score = true; }},
        {"no-contrastive",
         [](TrainConfig& cfg) { cfg.disable_contrastive = true; }},
        {"basic-labeling",
         [](TrainConfig& cfg) { cfg.disable_improved_labeling = true; }},
    };

    std::ostringstream csv;
    csv << "variant,split,pattern,MRR,Hits@1,Hits@5,Hits@10,n_queries,seeds\n";
    std::cout << "variant             overall-H@10  enclosing-H@10  "
                 "bridging-H@10  overall-MRR\n";
    for (const Variant& v : variants) {
        TrainConfig cfg = base;
        v.tweak(cfg);
        Model m = Model::init(cfg, c.train.n_relations());
        train(m, c.train);
        EvalReport report = evaluate_corpus(
            m, c, parse_ratio(a.ratio), derive_eval_seeds(cfg.seed, a.n_seeds),
            parse_tie(a.tie), resolve_workers(cfg.workers));
        std::string body = report_csv(report);
        std::istringstream lines(body);
        std::string line;
        std::getline(lines, line);  // skip header
        while (std::getline(lines, line)) csv << v.name << ',' << line << '\n';
        std::ostringstream row;
        row.setf(std::ios::fixed);
        row.precision(4);
        row << v.name;
        for (std::size_t pad = row.str().size(); pad < 20; ++pad) row << ' ';
        row << report.row("all", "all").hits10 << "        "
            << report.row("enclosing", "all").hits10 << "          "
            << report.row("bridging", "all").hits10 << "         "
            << report.row("all", "all").mrr;
        std::cout << row.str() << '\n';
    }
    if (!a.report.empty()) write_text(a.report, csv.str());
}

struct InspectArgs {
    std::string train, emerging, head, rel, tail;
    int hops = 2;
    std::size_t cap = 500;
    std::string labeling = "improved";
};

void run_inspect(const InspectArgs& a) {
    KnowledgeGraph g = load_triples(a.train, std::nullopt);
    if (!a.emerging.empty()) {
        KnowledgeGraph em = load_triples(a.emerging, g.vocab);
        g = union_graph(g, em);
    }
    auto head = g.vocab.entity(a.head);
    auto tail = g.vocab.entity(a.tail);
    auto rel = g.vocab.relation(a.rel);
    if (!head) throw DataError("unknown entity '" + a.head + "'");
    if (!tail) throw DataError("unknown entity '" + a.tail + "'");
    if (!rel) throw DataError("unknown relation '" + a.rel + "'");
    ExtractOptions opts;
    opts.hops = a.hops;
    opts.max_ball_nodes = a.cap;
    LabeledSubgraph sg = extract_subgraph(g, *head, *tail, *rel, opts);
    LabelingMode mode;
    if (a.labeling == "improved")
        mode = LabelingMode::Improved;
    else if (a.labeling == "pruned")
        mode = LabelingMode::Pruned;
    else
        throw ConfigError("unknown labeling mode '" + a.labeling +
                          "' (improved|pruned)");
    label_nodes(sg, a.hops, mode);
    export_subgraph(sg, g.vocab, std::cout);
}

struct ExportArgs {
    std::string ckpt, train, emerging, links, out;
};

void run_export(const ExportArgs& a) {
    LoadedCheckpoint loaded = load_checkpoint(a.ckpt);
    Model& m = loaded.model;
    print_resolved(m.cfg);
    KnowledgeGraph g = load_triples(a.train, std::nullopt);
    if (!a.emerging.empty()) {
        KnowledgeGraph em = load_triples(a.emerging, g.vocab);
        g = union_graph(g, em);
    }
    if (relation_tokens(g.vocab) != loaded.relation_tokens)
        throw DataError(
            "checkpoint was trained on a different relation vocabulary");
    std::size_t known_entities = g.vocab.n_entities();
    KnowledgeGraph links_graph = load_triples(a.links, g.vocab);
    if (links_graph.vocab.n_entities() != known_entities)
        throw DataError(a.links +
                        ": links reference entities that have no support edges");
    ScoringContext ctx(g, m.cfg.direction_aware);

    std::ostringstream out;
    out << "link,role,token";
    for (std::size_t i = 0; i < m.cfg.d; ++i) out << ",v" << i;
    out << '\n';
    out.precision(17);
    auto emit = [&](std::size_t link, const char* role,
                    const std::string& token, const Tensor& v) {
        out << link << ',' << role << ',' << token;
        for (double x : v.data) out << ',' << x;
        out << '\n';
    };
    for (std::size_t i = 0; i < links_graph.triples.size(); ++i) {
        const Triple& t = links_graph.triples[i];
        emit(i, "profile_head", g.vocab.entity_token(t.head),
             fused_embedding(m, ctx, t.head));
        emit(i, "profile_tail", g.vocab.entity_token(t.tail),
             fused_embedding(m, ctx, t.tail));
        Graph tape(&m.store);
        LabeledSubgraph sg = make_subgraph(g, t, m.cfg);
        Graph::Value features = tape.constant(encode_labels(sg, m.cfg.hops));
        GnnOutput gnn = gnn_forward(tape, sg, features, m.gnn, t.rel,
                                    m.cfg.beta, false, nullptr);
        emit(i, "message_head", g.vocab.entity_token(t.head),
             tape.value(gnn.head));
        emit(i, "message_tail", g.vocab.entity_token(t.tail),
             tape.value(gnn.tail));
        emit(i, "message_graph", "-", tape.value(gnn.pooled));
    }
    write_text(a.out, out.str());
    std::cout << "wrote " << a.out << '\n';
}

int guarded(const std::function<void()>& body) {
    try {
        body();
        return 0;
    } catch (const FileError& e) {
        std::cerr << "file error: " << e.what() << '\n';
        return 3;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 4;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 5;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "link prediction for emerging, possibly disconnected knowledge "
        "graphs"};
    app.require_subcommand(1);

    BuildDatasetArgs bd;
    CLI::App* build = app.add_subcommand(
        "build-dataset", "mix held-out links into an evaluation set");
    build->add_option("--train", bd.train, "original-graph triples (TSV)")
        ->required();
    build->add_option("--emerging", bd.emerging, "emerging-graph support triples")
        ->required();
    build->add_option("--enclosing", bd.enclosing, "enclosing link pool")
        ->required();
    build->add_option("--bridging", bd.bridging, "bridging link pool")
        ->required();
    build->add_option("--ratio", bd.ratio, "EQ, MB, or ME");
    build->add_option("--seed", bd.seed, "subsampling seed");
    build->add_option("--out-dir", bd.out_dir, "output directory")->required();

    TrainArgs tr;
    CLI::App* train_cmd = app.add_subcommand("train", "fit a model");
    tr.config.attach(*train_cmd);
    train_cmd->add_option("--train", tr.train, "training triples (TSV)")
        ->required();
    train_cmd->add_option("--out", tr.out, "checkpoint path")->required();
    train_cmd->add_option("--loss-csv", tr.loss_csv,
                          "per-epoch loss CSV (default: <out>.loss.csv)");

    EvaluateArgs ev;
    CLI::App* eval_cmd =
        app.add_subcommand("evaluate", "rank held-out links with a checkpoint");
    eval_cmd->add_option("--ckpt", ev.ckpt, "checkpoint path")->required();
    eval_cmd->add_option("--train", ev.train, "original-graph triples")
        ->required();
    eval_cmd->add_option("--emerging", ev.emerging, "emerging support triples")
        ->required();
    eval_cmd->add_option("--enclosing", ev.enclosing, "enclosing link pool")
        ->required();
    eval_cmd->add_option("--bridging", ev.bridging, "bridging link pool")
        ->required();
    eval_cmd->add_option("--ratio", ev.ratio, "EQ, MB, or ME");
    eval_cmd->add_option("--seeds", ev.n_seeds, "number of evaluation seeds");
    eval_cmd->add_option("--seed", ev.seed,
                         "root seed (default: the checkpoint's)");
    eval_cmd->add_option("--tie", ev.tie, "average, pessimistic, or optimistic");
    eval_cmd->add_option("--workers", ev.workers, "worker threads (0 = cores)");
    eval_cmd->add_option("--report", ev.report, "write the report CSV here");

    AblateArgs ab;
    CLI::App* ablate_cmd = app.add_subcommand(
        "ablate", "train and evaluate the full model and each ablation");
    ab.config.attach(*ablate_cmd);
    ablate_cmd->add_option("--train", ab.train, "training triples")->required();
    ablate_cmd->add_option("--emerging", ab.emerging, "emerging support triples")
        ->required();
    ablate_cmd->add_option("--enclosing", ab.enclosing, "enclosing link pool")
        ->required();
    ablate_cmd->add_option("--bridging", ab.bridging, "bridging link pool")
        ->required();
    ablate_cmd->add_option("--ratio", ab.ratio, "EQ, MB, or ME");
    ablate_cmd->add_option("--seeds", ab.n_seeds, "number of evaluation seeds");
    ablate_cmd->add_option("--tie", ab.tie,
                           "average, pessimistic, or optimistic");
    ablate_cmd->add_option("--report", ab.report, "write the combined CSV here");

    InspectArgs in;
    CLI::App* inspect_cmd = app.add_subcommand(
        "inspect-subgraph", "print the labeled subgraph of a candidate link");
    inspect_cmd->add_option("--train", in.train, "original-graph triples")
        ->required();
    inspect_cmd->add_option("--emerging", in.emerging,
                            "emerging support triples (optional)");
    inspect_cmd->add_option("--head", in.head, "head entity token")->required();
    inspect_cmd->add_option("--rel", in.rel, "relation token")->required();
    inspect_cmd->add_option("--tail", in.tail, "tail entity token")->required();
    inspect_cmd->add_option("--hops", in.hops, "hop budget");
    inspect_cmd->add_option("--cap", in.cap, "per-endpoint node cap");
    inspect_cmd->add_option("--labeling", in.labeling, "improved or pruned");

    ExportArgs ex;
    CLI::App* export_cmd = app.add_subcommand(
        "export-embeddings",
        "dump profile and message-passing embeddings for chosen links");
    export_cmd->add_option("--ckpt", ex.ckpt, "checkpoint path")->required();
    export_cmd->add_option("--train", ex.train, "original-graph triples")
        ->required();
    export_cmd->add_option("--emerging", ex.emerging,
                           "emerging support triples (optional)");
    export_cmd->add_option("--links", ex.links, "links to embed (TSV)")
        ->required();
    export_cmd->add_option("--out", ex.out, "output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    if (build->parsed()) return guarded([&] { run_build_dataset(bd); });
    if (train_cmd->parsed()) return guarded([&] { run_train(tr); });
    if (eval_cmd->parsed()) return guarded([&] { run_evaluate(ev); });
    if (ablate_cmd->parsed()) return guarded([&] { run_ablate(ab); });
    if (inspect_cmd->parsed()) return guarded([&] { run_inspect(in); });
    if (export_cmd->parsed()) return guarded([&] { run_export(ex); });
    return 2;
}
