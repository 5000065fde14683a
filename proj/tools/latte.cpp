// Command-line front end: synthetic data generation, PubTator import,
// training, evaluation, and single-mention prediction.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>

#include "latte/latte.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

latte::RunConfig load_config(const std::string& config_path) {
    if (config_path.empty()) return {};
    std::ifstream in(config_path);
    if (!in) throw latte::ConfigError("cannot open config: " + config_path);
    try {
        return latte::RunConfig::from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::exception& e) {
        throw latte::ConfigError("config " + config_path + ": " + e.what());
    }
}

void print_stats_block(const latte::Dataset& ds) {
    std::map<std::string, std::size_t> mentions, docs_seen;
    std::map<std::string, std::set<std::string>> docs, entities;
    for (const auto& m : ds.mentions) {
        ++mentions[m.split];
        docs[m.split].insert(m.doc_id);
        entities[m.split].insert(m.gold_entity_id);
    }
    std::cout << "statistics train dev test\n";
    auto row = [&](const std::string& name, auto get) {
        std::cout << name;
        for (const std::string& s : {"train", "dev", "test"})
            std::cout << " " << get(s);
        std::cout << "\n";
    };
    row("documents", [&](const std::string& s) { return docs[s].size(); });
    row("mentions", [&](const std::string& s) { return mentions[s]; });
    row("entities", [&](const std::string& s) { return entities[s].size(); });
    std::cout << "kb_entities " << ds.kb.entities.size() << "\n";
}

int run(int argc, char** argv) {
    CLI::App app{"LATTE latent-type entity linking"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic corpus");
    latte::SynthSpec spec;
    std::string gen_out = "data";
    gen->add_option("--seed", spec.seed, "generator seed");
    gen->add_option("--entities", spec.n_entities, "KB size");
    gen->add_option("--train", spec.n_train, "train mentions");
    gen->add_option("--dev", spec.n_dev, "dev mentions");
    gen->add_option("--test", spec.n_test, "test mentions");
    gen->add_option("--known-types", spec.known_types, "known type count");
    gen->add_option("--out", gen_out, "output directory")->required();

    // import-pubtator
    auto* imp = app.add_subcommand("import-pubtator",
                                   "convert a PubTator corpus");
    std::string imp_in, imp_out = "data";
    std::string pmids_train, pmids_dev, pmids_test;
    imp->add_option("--input", imp_in, "PubTator file")->required();
    imp->add_option("--out", imp_out, "output directory")->required();
    imp->add_option("--train-pmids", pmids_train, "train PMID list");
    imp->add_option("--dev-pmids", pmids_dev, "dev PMID list");
    imp->add_option("--test-pmids", pmids_test, "test PMID list");

    // shared train/eval/predict options
    std::string data_dir, config_path, ckpt_path, embeddings_path;
    latte::RunConfig flags;

    auto* tr = app.add_subcommand("train", "train a model");
    tr->add_option("--data", data_dir, "dataset directory")->required();
    tr->add_option("--config", config_path, "JSON config file");
    tr->add_option("--checkpoint", ckpt_path, "checkpoint output path")
        ->required();
    tr->add_option("--embeddings", embeddings_path,
                   "pretrained word embedding file");
    std::string variant_flag;
    tr->add_option("--seed", flags.seed, "RNG seed");
    tr->add_option("--epochs", flags.epochs, "training epochs");
    tr->add_option("--batch-size", flags.batch_size, "batch size");
    tr->add_option("--lr", flags.learning_rate, "learning rate");
    tr->add_option("--margin", flags.margin, "ranking margin M");
    tr->add_option("--lambda", flags.type_weight, "type loss weight");
    tr->add_option("--max-len", flags.max_len, "sequence length L");
    tr->add_option("--hidden", flags.hidden, "LSTM hidden size per direction");
    tr->add_option("--layers", flags.lstm_layers, "BiLSTM layers");
    tr->add_option("--latent-types", flags.latent_count, "latent type count k");
    tr->add_option("--known-types", flags.known_count, "known type count K");
    tr->add_option("--d-word", flags.d_word, "word embedding dim");
    tr->add_option("--d-char", flags.d_char, "char embedding dim");
    tr->add_option("--d-cnn", flags.d_cnn, "char CNN output dim");
    tr->add_option("--negatives", flags.n_negatives, "negatives per mention");
    tr->add_option("--patience", flags.patience, "early stopping patience");
    tr->add_option("--variant", variant_flag, "base|lt|kt|full|nkt");

    auto* ev = app.add_subcommand("eval", "evaluate a checkpoint");
    std::string split = "test";
    bool dump_rankings = false;
    ev->add_option("--checkpoint", ckpt_path, "checkpoint path")->required();
    ev->add_option("--data", data_dir, "dataset directory")->required();
    ev->add_option("--split", split, "train|dev|test");
    ev->add_flag("--dump-rankings", dump_rankings,
                 "print the gold rank per mention");

    auto* pr = app.add_subcommand("predict", "rank candidates for a mention");
    std::string mention_text, left_ctx, right_ctx;
    std::size_t top_k = 10;
    pr->add_option("--checkpoint", ckpt_path, "checkpoint path")->required();
    pr->add_option("--data", data_dir, "dataset directory (for the KB)")
        ->required();
    pr->add_option("--mention", mention_text, "mention text")->required();
    pr->add_option("--left", left_ctx, "left context text");
    pr->add_option("--right", right_ctx, "right context text");
    pr->add_option("--top-k", top_k, "candidates to print");

    CLI11_PARSE(app, argc, argv);

    if (gen->parsed()) {
        std::filesystem::create_directories(gen_out);
        latte::SynthOutput data = latte::synth_generate(spec);
        latte::synth_write(data, gen_out);
        latte::Dataset ds = latte::load_dataset(gen_out);
        print_stats_block(ds);
        return 0;
    }

    if (imp->parsed()) {
        std::filesystem::create_directories(imp_out);
        latte::PubtatorImport result = latte::import_pubtator(
            imp_in, pmids_train, pmids_dev, pmids_test);
        latte::save_kb(result.dataset.kb, imp_out + "/kb.jsonl");
        latte::save_mentions(result.dataset.mentions,
                             imp_out + "/mentions.jsonl");
        latte::save_types(result.dataset.type_names, imp_out + "/types.jsonl");
        std::cout << "documents " << result.documents << "\n";
        for (const std::string& s : {"train", "dev", "test"}) {
            auto d = result.documents_per_split.count(s)
                         ? result.documents_per_split.at(s)
                         : 0;
            auto m = result.mentions_per_split.count(s)
                         ? result.mentions_per_split.at(s)
                         : 0;
            std::cout << s << "_documents " << d << "\n"
                      << s << "_mentions " << m << "\n";
        }
        std::cout << "entities " << result.dataset.kb.entities.size() << "\n";
        return 0;
    }

    if (tr->parsed()) {
        latte::RunConfig cfg = load_config(config_path);
        auto over = [&](const char* name, auto& dst, const auto& src) {
            if (tr->count(name) > 0) dst = src;
        };
        over("--seed", cfg.seed, flags.seed);
        over("--epochs", cfg.epochs, flags.epochs);
        over("--batch-size", cfg.batch_size, flags.batch_size);
        over("--lr", cfg.learning_rate, flags.learning_rate);
        over("--margin", cfg.margin, flags.margin);
        over("--lambda", cfg.type_weight, flags.type_weight);
        over("--max-len", cfg.max_len, flags.max_len);
        over("--hidden", cfg.hidden, flags.hidden);
        over("--layers", cfg.lstm_layers, flags.lstm_layers);
        over("--latent-types", cfg.latent_count, flags.latent_count);
        over("--known-types", cfg.known_count, flags.known_count);
        over("--d-word", cfg.d_word, flags.d_word);
        over("--d-char", cfg.d_char, flags.d_char);
        over("--d-cnn", cfg.d_cnn, flags.d_cnn);
        over("--negatives", cfg.n_negatives, flags.n_negatives);
        over("--patience", cfg.patience, flags.patience);
        if (tr->count("--variant") > 0)
            cfg.variant = latte::variant_from_name(variant_flag);
        cfg.validate();

        latte::Dataset ds = latte::load_dataset(data_dir);
        std::cout << "seed " << cfg.seed << " variant "
                  << latte::variant_name(cfg.variant) << "\n";
        latte::TrainResult result =
            latte::train(ds, cfg, embeddings_path, &std::cout);
        latte::save_checkpoint(result.best, ckpt_path);
        std::cout << "best_dev_p1 " << std::fixed << std::setprecision(4)
                  << result.best_dev_p1 << "\n";
        return 0;
    }

    if (ev->parsed()) {
        latte::Checkpoint ckpt = latte::load_checkpoint(ckpt_path);
        latte::Dataset ds = latte::load_dataset(data_dir);
        latte::TfIdfIndex index(ds.kb);
        auto instances =
            latte::prepare_split(ds, split, index, ckpt.config);
        if (instances.empty())
            throw latte::ConfigError("split '" + split +
                                     "' has no mentions in " + data_dir);
        latte::EvalResult res =
            latte::evaluate(ckpt.model, instances, ckpt.config);
        std::cout << latte::metrics_report(split, res.p1, res.map);
        if (dump_rankings)
            for (const auto& r : res.results)
                std::cout << "rank " << r.mention_id << " " << r.rank_of_gold
                          << "\n";
        return 0;
    }

    if (pr->parsed()) {
        if (mention_text.empty())
            throw latte::ConfigError("predict: mention text is empty");
        latte::Checkpoint ckpt = latte::load_checkpoint(ckpt_path);
        latte::Dataset ds = latte::load_dataset(data_dir);
        latte::TfIdfIndex index(ds.kb);
        const auto& cfg = ckpt.config;

        latte::MentionRecord m;
        m.mention = mention_text;
        m.left_context = latte::tokenize(left_ctx);
        m.right_context = latte::tokenize(right_ctx);
        if (m.left_context.size() > 5)
            m.left_context.erase(m.left_context.begin(),
                                 m.left_context.end() - 5);
        if (m.right_context.size() > 5) m.right_context.resize(5);

        // retrieval pool: same size as a training candidate set
        auto scores = index.score_all(mention_text);
        std::vector<std::size_t> order(ds.kb.entities.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (scores[a] != scores[b]) return scores[a] > scores[b];
            return ds.kb.entities[a].entity_id < ds.kb.entities[b].entity_id;
        });
        const std::size_t pool =
            std::min(order.size(), cfg.n_negatives + 1);

        latte::Graph g;
        g.recording = false;
        latte::EncodedSequence menc = latte::encode_sequence(
            g, ckpt.model, m.phrase_tokens(), cfg);
        struct Row {
            std::string id, name, type_name;
            double f, gs, r;
        };
        std::vector<Row> rows;
        for (std::size_t i = 0; i < pool; ++i) {
            const auto& e = ds.kb.entities[order[i]];
            latte::EncodedSequence cenc = latte::encode_sequence(
                g, ckpt.model, latte::tokenize(e.name), cfg);
            latte::PairScore ps =
                latte::score_encoded(g, ckpt.model, menc, cenc, cfg);
            // predicted known type = argmax of the type head
            std::size_t best_t = 0;
            for (std::size_t t = 1; t < cenc.known_scores->size(); ++t)
                if (cenc.known_scores->value[t] >
                    cenc.known_scores->value[best_t])
                    best_t = t;
            std::string tname = ds.type_names.count(best_t)
                                    ? ds.type_names.at(best_t)
                                    : ("type-" + std::to_string(best_t));
            rows.push_back({e.entity_id, e.name, tname, ps.f->value[0],
                            ps.g->value[0], ps.r->value[0]});
        }
        std::stable_sort(rows.begin(), rows.end(),
                         [](const Row& a, const Row& b) {
                             if (a.r != b.r) return a.r > b.r;
                             return a.id < b.id;
                         });
        std::cout << std::fixed << std::setprecision(4);
        for (std::size_t i = 0; i < std::min<std::size_t>(top_k, rows.size());
             ++i) {
            const auto& r = rows[i];
            std::cout << (i + 1) << " " << r.id << " f=" << r.f
                      << " g=" << r.gs << " r=" << r.r << " type=" << r.type_name
                      << " name=" << r.name << "\n";
        }
        return 0;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const latte::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const latte::IntegrityError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const latte::FormatError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const latte::NumericError& e) {
        std::cerr << "numerical divergence: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
