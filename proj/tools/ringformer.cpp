// ringformer: validate -> preprocess -> train -> embed -> eval pipeline over
// heterogeneous information networks, plus the synthetic benchmark generator.
// Exit codes: 0 ok, 2 usage error, 3 validation/parse/io error, 4 numerical
// failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <iostream>
#include <thread>

#include "CLI11.hpp"
#include "ringformer/config.hpp"
#include "ringformer/serialize.hpp"

namespace fs = std::filesystem;
using namespace ringformer;

namespace {

std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

std::uint64_t file_fingerprint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char buf[1 << 16];
    std::uint64_t h = 1469598103934665603ull;
    while (in) {
        in.read(buf, sizeof(buf));
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return h;
}

std::optional<std::uint64_t> env_seed() {
    if (const char* s = std::getenv("RINGFORMER_SEED")) {
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            throw ValidationError("RINGFORMER_SEED is not an integer");
        }
    }
    return std::nullopt;
}

struct CommonArgs {
    int threads = static_cast<int>(std::thread::hardware_concurrency());
    bool allow_self_loops = false;
};

// -------------------------------------------------------------------------
// train
// -------------------------------------------------------------------------

struct TrainArgs {
    std::string graph_dir, cache_path, out_dir, config_path;
    std::string precision = "f32";
    // flag overrides; only applied when the user passed them
    CLI::Option* opt_seed = nullptr;
};

template <typename Real>
void run_train(const HinGraph& g, const TokenCache& cache, const ModelConfig& mcfg,
               const TrainConfig& tcfg, const TrainArgs& args, const json& manifest_base) {
    VariantTokenSource tokens(g, cache, mcfg.variant);
    fs::create_directories(args.out_dir);

    std::ofstream history_csv(fs::path(args.out_dir) / "history.csv");
    history_csv << "epoch,train_loss,val_loss,val_micro_f1\n";
    history_csv.precision(9);
    auto on_epoch = [&](const HistoryRow& row) {
        history_csv << row.epoch << "," << row.train_loss << "," << row.val_loss << ","
                    << row.val_micro_f1 << "\n";
    };

    auto result = train_model<Real>(g, tokens, mcfg, tcfg, &std::cout, on_epoch);

    const std::string best_path = (fs::path(args.out_dir) / "checkpoint_best.rfcp").string();
    const std::string final_path = (fs::path(args.out_dir) / "checkpoint_final.rfcp").string();
    save_checkpoint(result.best_params, best_path);
    save_checkpoint(result.final_params, final_path);

    json sidecar = {{"model", to_json(mcfg)},
                    {"d_in", g.feat_dim},
                    {"num_classes", g.num_classes},
                    {"precision", args.precision}};
    write_json_file(sidecar, (fs::path(args.out_dir) / "model_config.json").string());

    json manifest = manifest_base;
    manifest["best_epoch"] = result.best_epoch;
    manifest["best_val_micro_f1"] = result.best_val_f1;
    manifest["epochs_run"] = result.epochs_run;
    manifest["artifacts"] = {"history.csv", "checkpoint_best.rfcp", "checkpoint_final.rfcp",
                             "model_config.json"};
    manifest["finished_utc"] = utc_now();
    write_json_file(manifest, (fs::path(args.out_dir) / "manifest.json").string());

    std::cout << "best epoch " << result.best_epoch << " (val micro-F1 "
              << result.best_val_f1 << "); artifacts in " << args.out_dir << "\n";
}

// -------------------------------------------------------------------------
// eval helpers
// -------------------------------------------------------------------------

// Joins an embedding matrix with a labels CSV. Label node ids are either the
// dense numeric ids used in exports, or original string ids resolved through
// --graph.
void join_labels(const EmbeddingMatrix& emb, const std::string& labels_path,
                 const std::string& graph_dir, bool allow_self_loops,
                 std::vector<double>& x, std::vector<int>& y) {
    std::unordered_map<std::int64_t, int> label_of;
    std::unordered_map<std::string, std::int64_t> id_map;
    if (!graph_dir.empty()) {
        HinGraph g = load_graph_dir(graph_dir, {allow_self_loops});
        for (std::int64_t u = 0; u < g.num_nodes; ++u) id_map[g.node_ids[u]] = u;
    }
    std::ifstream in(labels_path);
    if (!in) throw IoError("cannot open " + labels_path);
    std::string line;
    bool header = true;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#') continue;
        if (header) {
            header = false;
            continue;
        }
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ParseError(labels_path + ":" + std::to_string(line_no) +
                             ": expected node_id,class_id");
        std::string id_str = line.substr(0, comma);
        int cls;
        try {
            cls = std::stoi(line.substr(comma + 1));
        } catch (const std::exception&) {
            throw ParseError(labels_path + ":" + std::to_string(line_no) +
                             ": class id is not an integer");
        }
        std::int64_t id;
        if (!id_map.empty()) {
            auto it = id_map.find(id_str);
            if (it == id_map.end())
                throw ValidationError(labels_path + ": unknown node id '" + id_str + "'");
            id = it->second;
        } else {
            try {
                id = std::stoll(id_str);
            } catch (const std::exception&) {
                throw ValidationError(labels_path + ": node id '" + id_str +
                                      "' is not numeric; pass --graph to resolve ids");
            }
        }
        label_of[id] = cls;
    }

    x.clear();
    y.clear();
    for (std::size_t i = 0; i < emb.count(); ++i) {
        auto it = label_of.find(emb.node_ids[i]);
        if (it == label_of.end()) continue;
        for (int j = 0; j < emb.dim; ++j) x.push_back(emb.row(i)[j]);
        y.push_back(it->second);
    }
    if (y.empty()) throw ValidationError("no labeled nodes among the embeddings");
}

void print_classification_row(const std::string& method, const EvalReport& rep) {
    std::printf("%-12s %9s %9s\n", "Method", "Macro-F1", "Micro-F1");
    std::printf("%-12s %9.2f %9.2f\n", method.c_str(), 100.0 * rep.mean_macro_f1,
                100.0 * rep.mean_micro_f1);
}

void print_clustering_row(const std::string& method, const EvalReport& rep) {
    std::printf("%-12s %9s %9s\n", "Method", "NMI", "ARI");
    std::printf("%-12s %9.2f %9.2f\n", method.c_str(), 100.0 * rep.mean_nmi,
                100.0 * rep.mean_ari);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ringformer: hierarchical ring/type transformer embeddings for "
                 "heterogeneous information networks"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand name
    CommonArgs common;
    app.add_option("--threads", common.threads, "worker threads for preprocess/eval");

    // ---- validate ----
    auto* cmd_validate = app.add_subcommand("validate", "check a graph directory and print counts");
    std::string v_graph;
    cmd_validate->add_option("--graph", v_graph, "graph directory")->required();
    cmd_validate->add_flag("--allow-self-loops", common.allow_self_loops,
                           "accept self-loop edges");

    // ---- preprocess ----
    auto* cmd_pre = app.add_subcommand("preprocess", "extract (k,t)-ring tokens into a cache");
    std::string p_graph, p_out;
    int p_K = 2;
    bool p_all_nodes = false;
    cmd_pre->add_option("--graph", p_graph, "graph directory")->required();
    cmd_pre->add_option("--K", p_K, "ring count")->required();
    cmd_pre->add_option("--out", p_out, "cache output path")->required();
    cmd_pre->add_flag("--all-nodes", p_all_nodes, "cache every node, not just the target type");
    cmd_pre->add_flag("--allow-self-loops", common.allow_self_loops, "accept self-loop edges");

    // ---- generate ----
    auto* cmd_gen = app.add_subcommand("generate", "write a synthetic benchmark HIN");
    std::string g_out, g_mode = "ring-distance";
    SyntheticSpec g_spec;
    cmd_gen->add_option("--out", g_out, "output graph directory")->required();
    cmd_gen->add_option("--mode", g_mode, "ring-distance | type-mix")
        ->check(CLI::IsMember({"ring-distance", "type-mix"}));
    cmd_gen->add_option("--classes", g_spec.classes, "label classes");
    cmd_gen->add_option("--nodes-per-class", g_spec.nodes_per_class, "targets per class");
    cmd_gen->add_option("--d-in", g_spec.d_in, "feature dimension");
    cmd_gen->add_option("--noise", g_spec.noise, "feature jitter std-dev");
    auto* g_seed_opt = cmd_gen->add_option("--seed", g_spec.seed, "generator seed");
    cmd_gen->add_option("--ring1-noise-nodes", g_spec.ring1_noise_nodes,
                        "ring-distance: uninformative 1-ring nodes per target");
    cmd_gen->add_option("--ring2-signal-nodes", g_spec.ring2_signal_nodes,
                        "ring-distance: signal 2-ring nodes per target");
    cmd_gen->add_option("--signal-type-nodes", g_spec.signal_type_nodes,
                        "type-mix: designated-type neighbors per target");
    cmd_gen->add_option("--anti-type-nodes", g_spec.anti_type_nodes,
                        "type-mix: anti-correlated neighbors per target");

    // ---- train ----
    auto* cmd_train = app.add_subcommand("train", "train HHGT on labeled target nodes");
    TrainArgs t_args;
    ModelConfig t_mcfg_flags;
    TrainConfig t_tcfg_flags;
    std::string t_variant = "full";
    cmd_train->add_option("--graph", t_args.graph_dir, "graph directory")->required();
    cmd_train->add_option("--cache", t_args.cache_path, "token cache from preprocess")->required();
    cmd_train->add_option("--out", t_args.out_dir, "run directory")->required();
    cmd_train->add_option("--config", t_args.config_path, "JSON config file");
    cmd_train->add_option("--precision", t_args.precision, "f32 | f64")
        ->check(CLI::IsMember({"f32", "f64"}));
    cmd_train->add_flag("--allow-self-loops", common.allow_self_loops, "accept self-loop edges");
    auto* o_d = cmd_train->add_option("--d", t_mcfg_flags.d, "hidden dimension");
    auto* o_heads = cmd_train->add_option("--heads", t_mcfg_flags.heads, "attention heads");
    auto* o_lt = cmd_train->add_option("--L-t", t_mcfg_flags.L_t, "type-level layers");
    auto* o_lr_layers = cmd_train->add_option("--L-r", t_mcfg_flags.L_r, "ring-level layers");
    auto* o_dropout = cmd_train->add_option("--dropout", t_mcfg_flags.dropout, "hidden dropout");
    auto* o_attn_dropout =
        cmd_train->add_option("--attn-dropout", t_mcfg_flags.attn_dropout, "attention dropout");
    auto* o_variant = cmd_train->add_option("--variant", t_variant,
                                            "full | no_ring | no_type | no_att");
    auto* o_mask_empty = cmd_train->add_flag("--mask-empty", t_mcfg_flags.mask_empty,
                                             "mask empty (k,t) tokens in attention");
    auto* o_lr = cmd_train->add_option("--lr", t_tcfg_flags.lr, "learning rate");
    auto* o_wd = cmd_train->add_option("--weight-decay", t_tcfg_flags.weight_decay, "weight decay");
    auto* o_epochs = cmd_train->add_option("--epochs", t_tcfg_flags.epochs, "max epochs");
    auto* o_batch = cmd_train->add_option("--batch-size", t_tcfg_flags.batch_size, "batch size");
    auto* o_patience = cmd_train->add_option("--patience", t_tcfg_flags.patience,
                                             "early-stop patience (epochs)");
    auto* o_val_frac = cmd_train->add_option("--val-frac", t_tcfg_flags.val_frac,
                                             "validation fraction of labeled nodes");
    auto* o_eval_every = cmd_train->add_option("--eval-every", t_tcfg_flags.eval_every,
                                               "validation interval (epochs)");
    auto* o_seed = cmd_train->add_option("--seed", t_tcfg_flags.seed, "training seed");

    // ---- embed ----
    auto* cmd_embed = app.add_subcommand("embed", "export embeddings with a trained checkpoint");
    std::string e_graph, e_cache, e_run, e_checkpoint, e_model_config, e_out;
    bool e_csv = false;
    cmd_embed->add_option("--graph", e_graph, "graph directory")->required();
    cmd_embed->add_option("--cache", e_cache, "token cache")->required();
    cmd_embed->add_option("--run", e_run, "run directory (uses its best checkpoint)");
    cmd_embed->add_option("--checkpoint", e_checkpoint, "explicit checkpoint file");
    cmd_embed->add_option("--model-config", e_model_config, "model config sidecar JSON");
    cmd_embed->add_option("--out", e_out, "embedding output path")->required();
    cmd_embed->add_flag("--csv", e_csv, "also write a CSV copy next to the binary");
    cmd_embed->add_flag("--allow-self-loops", common.allow_self_loops, "accept self-loop edges");

    // ---- eval ----
    auto* cmd_eval = app.add_subcommand("eval", "evaluate exported embeddings");
    cmd_eval->require_subcommand(1);
    std::string ev_embeddings, ev_labels, ev_graph, ev_json, ev_method = "HHGT";
    int ev_repeats = 10;
    std::uint64_t ev_seed = 0;
    double ev_train_frac = 0.8;
    std::string ev_probe = "svm";
    int ev_k = 0;
    auto add_eval_common = [&](CLI::App* c) {
        c->add_option("--embeddings", ev_embeddings, "embedding matrix file")->required();
        c->add_option("--labels", ev_labels, "labels CSV (node_id,class_id)")->required();
        c->add_option("--graph", ev_graph, "graph directory to resolve string node ids");
        c->add_option("--repeats", ev_repeats, "independent repeats");
        c->add_option("--json", ev_json, "write the JSON report to a file instead of stdout");
        c->add_option("--method-name", ev_method, "row label for the report table");
        c->add_flag("--allow-self-loops", common.allow_self_loops, "accept self-loop edges");
        return c->add_option("--seed", ev_seed, "evaluation seed");
    };
    auto* cmd_eval_cls = cmd_eval->add_subcommand("classify", "linear-probe Macro/Micro-F1");
    auto* ev_cls_seed = add_eval_common(cmd_eval_cls);
    cmd_eval_cls->add_option("--train-frac", ev_train_frac, "probe train fraction");
    cmd_eval_cls->add_option("--probe", ev_probe, "svm | logreg")
        ->check(CLI::IsMember({"svm", "logreg"}));
    auto* cmd_eval_clu = cmd_eval->add_subcommand("cluster", "k-means NMI/ARI");
    auto* ev_clu_seed = add_eval_common(cmd_eval_clu);
    cmd_eval_clu->add_option("--k", ev_k, "cluster count (default: number of classes)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        LoadOptions load_opts{common.allow_self_loops};

        if (cmd_validate->parsed()) {
            HinGraph g = load_graph_dir(v_graph, load_opts, &std::cout);
            std::cout << "graph fingerprint: " << std::hex << g.fingerprint() << std::dec
                      << "\nvalidation OK\n";
            return 0;
        }

        if (cmd_pre->parsed()) {
            HinGraph g = load_graph_dir(p_graph, load_opts, &std::cout);
            PrecomputeOptions opts;
            opts.all_nodes = p_all_nodes;
            opts.threads = common.threads;
            auto t0 = std::chrono::steady_clock::now();
            TokenCache cache = precompute_all(g, p_K, p_out, opts);
            auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
            json manifest = {{"tool_version", kToolVersion},
                             {"created_utc", utc_now()},
                             {"command", "preprocess"},
                             {"graph", p_graph},
                             {"graph_fingerprint", g.fingerprint()},
                             {"K", p_K},
                             {"all_nodes", p_all_nodes},
                             {"entries", cache.header.count},
                             {"seconds", dt.count()}};
            write_json_file(manifest, p_out + ".manifest.json");
            std::cout << "wrote " << cache.header.count << " token tensors (K=" << p_K
                      << ", T=" << cache.header.T << ", d_in=" << cache.header.d_in
                      << ") to " << p_out << " in " << dt.count() << "s\n";
            return 0;
        }

        if (cmd_gen->parsed()) {
            g_spec.signal = g_mode == "type-mix" ? SyntheticSignal::type_mix
                                                 : SyntheticSignal::ring_distance;
            if (!*g_seed_opt)
                if (auto s = env_seed()) g_spec.seed = *s;
            HinGraph g = generate_synthetic_hin(g_spec);
            save_graph(g, g_out);
            const int bad = synthetic_self_check(g, g_spec);
            json manifest = {{"tool_version", kToolVersion},
                             {"created_utc", utc_now()},
                             {"command", "generate"},
                             {"spec", to_json(g_spec)},
                             {"graph_fingerprint", g.fingerprint()},
                             {"self_check_mismatches", bad}};
            write_json_file(manifest, (fs::path(g_out) / "manifest.json").string());
            std::cout << "generated " << g.num_nodes << " nodes ("
                      << synthetic_signal_name(g_spec.signal) << " signal) in " << g_out
                      << "; self-check mismatches: " << bad << "\n";
            return bad == 0 ? 0 : 3;
        }

        if (cmd_train->parsed()) {
            HinGraph g = load_graph_dir(t_args.graph_dir, load_opts, &std::cout);
            TokenCache cache = load_token_cache(t_args.cache_path);

            ModelConfig mcfg;
            TrainConfig tcfg;
            if (!t_args.config_path.empty()) {
                json cfg = load_json_file(t_args.config_path);
                if (cfg.contains("model")) mcfg = model_config_from_json(cfg["model"]);
                if (cfg.contains("train")) tcfg = train_config_from_json(cfg["train"]);
            }
            if (*o_d) mcfg.d = t_mcfg_flags.d;
            if (*o_heads) mcfg.heads = t_mcfg_flags.heads;
            if (*o_lt) mcfg.L_t = t_mcfg_flags.L_t;
            if (*o_lr_layers) mcfg.L_r = t_mcfg_flags.L_r;
            if (*o_dropout) mcfg.dropout = t_mcfg_flags.dropout;
            if (*o_attn_dropout) mcfg.attn_dropout = t_mcfg_flags.attn_dropout;
            if (*o_variant) mcfg.variant = parse_variant(t_variant);
            if (*o_mask_empty) mcfg.mask_empty = t_mcfg_flags.mask_empty;
            if (*o_lr) tcfg.lr = t_tcfg_flags.lr;
            if (*o_wd) tcfg.weight_decay = t_tcfg_flags.weight_decay;
            if (*o_epochs) tcfg.epochs = t_tcfg_flags.epochs;
            if (*o_batch) tcfg.batch_size = t_tcfg_flags.batch_size;
            if (*o_patience) tcfg.patience = t_tcfg_flags.patience;
            if (*o_val_frac) tcfg.val_frac = t_tcfg_flags.val_frac;
            if (*o_eval_every) tcfg.eval_every = t_tcfg_flags.eval_every;
            if (*o_seed) {
                tcfg.seed = t_tcfg_flags.seed;
            } else if (t_args.config_path.empty() ||
                       !load_json_file(t_args.config_path).contains("/train/seed"_json_pointer)) {
                if (auto s = env_seed()) tcfg.seed = *s;
            }
            mcfg.seed = tcfg.seed;  // one seed drives init, shuffling and dropout
            mcfg.K = static_cast<int>(cache.header.K);
            mcfg.T = static_cast<int>(cache.header.T);

            check_cache_matches(cache, g, mcfg.K);

            json manifest = {{"tool_version", kToolVersion},
                             {"created_utc", utc_now()},
                             {"command", "train"},
                             {"paths",
                              {{"graph", t_args.graph_dir},
                               {"cache", t_args.cache_path},
                               {"out", t_args.out_dir},
                               {"config", t_args.config_path}}},
                             {"graph_fingerprint", g.fingerprint()},
                             {"cache_fingerprint", file_fingerprint(t_args.cache_path)},
                             {"seed", tcfg.seed},
                             {"precision", t_args.precision},
                             {"model", to_json(mcfg)},
                             {"train", to_json(tcfg)}};

            if (t_args.precision == "f64")
                run_train<double>(g, cache, mcfg, tcfg, t_args, manifest);
            else
                run_train<float>(g, cache, mcfg, tcfg, t_args, manifest);
            return 0;
        }

        if (cmd_embed->parsed()) {
            if (e_run.empty() && (e_checkpoint.empty() || e_model_config.empty()))
                throw ValidationError("embed: pass --run, or both --checkpoint and --model-config");
            if (!e_run.empty()) {
                if (e_checkpoint.empty())
                    e_checkpoint = (fs::path(e_run) / "checkpoint_best.rfcp").string();
                if (e_model_config.empty())
                    e_model_config = (fs::path(e_run) / "model_config.json").string();
            }
            HinGraph g = load_graph_dir(e_graph, load_opts, &std::cout);
            TokenCache cache = load_token_cache(e_cache);
            json sidecar = load_json_file(e_model_config);
            ModelConfig mcfg = model_config_from_json(sidecar.at("model"));
            const int d_in = sidecar.at("d_in").get<int>();
            const int num_classes = sidecar.at("num_classes").get<int>();
            if (d_in != g.feat_dim)
                throw ValidationError("embed: model d_in does not match the graph");
            check_cache_matches(cache, g, static_cast<int>(cache.header.K));
            if (static_cast<int>(cache.header.K) != mcfg.K)
                throw ValidationError("embed: cache K=" + std::to_string(cache.header.K) +
                                      " differs from model K=" + std::to_string(mcfg.K));

            auto params = ModelParams<float>::init(mcfg, d_in, num_classes);
            load_checkpoint(params, e_checkpoint);
            VariantTokenSource tokens(g, cache, mcfg.variant);
            auto m = embed_nodes<float>(tokens, tokens.available_nodes(), params, mcfg);
            write_embeddings(m, e_out);
            if (e_csv) write_embeddings_csv(m, e_out + ".csv");
            std::cout << "wrote " << m.count() << " x " << m.dim << " embeddings to "
                      << e_out << "\n";
            return 0;
        }

        if (cmd_eval->parsed()) {
            EmbeddingMatrix emb = read_embeddings(ev_embeddings);
            std::vector<double> x;
            std::vector<int> y;
            join_labels(emb, ev_labels, ev_graph, common.allow_self_loops, x, y);
            const std::size_t n = y.size();

            EvalReport rep;
            if (cmd_eval_cls->parsed()) {
                if (!*ev_cls_seed)
                    if (auto s = env_seed()) ev_seed = *s;
                ProbeOptions opts;
                opts.train_frac = ev_train_frac;
                opts.repeats = ev_repeats;
                opts.seed = ev_seed;
                opts.kind = ev_probe == "logreg" ? ProbeKind::logreg : ProbeKind::svm;
                opts.threads = common.threads;
                rep = classify_embeddings(x, n, emb.dim, y, opts);
                print_classification_row(ev_method, rep);
            } else {
                if (!*ev_clu_seed)
                    if (auto s = env_seed()) ev_seed = *s;
                ClusterOptions opts;
                opts.k = ev_k;
                opts.repeats = ev_repeats;
                opts.seed = ev_seed;
                opts.threads = common.threads;
                rep = cluster_embeddings(x, n, emb.dim, y, opts);
                print_clustering_row(ev_method, rep);
            }
            json j = to_json(rep);
            j["tool_version"] = kToolVersion;
            j["created_utc"] = utc_now();
            j["embeddings"] = ev_embeddings;
            j["labels"] = ev_labels;
            j["method"] = ev_method;
            if (!ev_json.empty())
                write_json_file(j, ev_json);
            else
                std::cout << j.dump(2) << "\n";
            return 0;
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
