// Acceptance suite: runs every gate criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exits non-zero if any fail.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "oracle_hhgt.hpp"
#include "ringformer/eval.hpp"
#include "ringformer/ring2token.hpp"
#include "ringformer/synthetic.hpp"
#include "ringformer/trainer.hpp"

using namespace ringformer;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

void report(int id, const char* name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s (%s)\n", pass ? "PASS" : "FAIL", id, name,
                detail.c_str());
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

// ---------------------------------------------------------------------------
// 1. ring-partition oracle equivalence
// ---------------------------------------------------------------------------
void criterion1() {
    Timer timer;
    bool pass = true;
    std::string detail;
    std::mt19937_64 seeder(1001);
    for (int trial = 0; trial < 100 && pass; ++trial) {
        const int n = 20 + static_cast<int>(seeder() % 181);   // <= 200
        const int T = 2 + static_cast<int>(seeder() % 3);      // {2,3,4}
        const int K = 1 + static_cast<int>(seeder() % 5);      // {1..5}
        const double p = 1.5 / n + 0.02;
        auto rg = testutil::make_random_typed_graph(n, T, p, seeder());
        for (int u = 0; u < n && pass; ++u) {
            auto dist = testutil::oracle_bfs_distances(n, rg.edges, u);
            auto part = bfs_rings(rg.g, u, K);
            // oracle buckets
            std::vector<std::vector<std::set<int>>> want(
                K + 1, std::vector<std::set<int>>(T));
            for (int v = 0; v < n; ++v)
                if (dist[v] >= 0 && dist[v] <= K)
                    want[dist[v]][rg.g.node_type[v]].insert(v);
            for (int k = 0; k <= K && pass; ++k)
                for (int t = 0; t < T && pass; ++t) {
                    std::set<int> got(part.bucket(k, t).begin(), part.bucket(k, t).end());
                    if (got != want[k][t]) {
                        pass = false;
                        detail = "mismatch at trial " + std::to_string(trial) + " node " +
                                 std::to_string(u) + " ring " + std::to_string(k);
                    }
                }
        }
    }
    const double sec = timer.seconds();
    if (pass && sec >= 10.0) {
        pass = false;
        detail = "exceeded 10 s budget";
    }
    if (pass) detail = "100 graphs, all (k,t) buckets exact, " + fmt(sec) + " s";
    report(1, "ring-partition oracle equivalence", pass, detail);
}

// ---------------------------------------------------------------------------
// 2. gradient correctness (6 nodes, K=2, T=3, d=8, heads=2, L_t=L_r=1, f64)
// ---------------------------------------------------------------------------
void criterion2() {
    Timer timer;
    // six-node graph with all three types and a genuine second ring
    GraphBuilder b({"paper", "author", "subject"}, {"link"});
    std::mt19937_64 frng(77);
    std::normal_distribution<double> fn(0.0, 1.0);
    int next_id = 0;
    auto node = [&](int type) {
        std::vector<float> f(5);
        for (auto& v : f) v = static_cast<float>(fn(frng));
        return b.add_node(std::to_string(next_id++), type, std::move(f));
    };
    std::vector<std::int32_t> ids;
    ids.push_back(node(0));  // target paper
    ids.push_back(node(1));
    ids.push_back(node(2));
    ids.push_back(node(0));
    ids.push_back(node(1));
    ids.push_back(node(2));
    b.add_edge(ids[0], ids[1], 0);
    b.add_edge(ids[0], ids[2], 0);
    b.add_edge(ids[0], ids[3], 0);
    b.add_edge(ids[1], ids[4], 0);
    b.add_edge(ids[2], ids[5], 0);
    b.set_label(ids[0], 1);
    b.set_label(ids[3], 0);
    auto g = b.build();

    ModelConfig cfg;
    cfg.K = 2;
    cfg.T = 3;
    cfg.d = 8;
    cfg.heads = 2;
    cfg.L_t = 1;
    cfg.L_r = 1;
    cfg.dropout = 0;
    cfg.attn_dropout = 0;
    cfg.seed = 12;
    auto params = ModelParams<double>::init(cfg, g.feat_dim, g.num_classes);

    std::vector<TokenTensor> blocks;
    std::vector<int> labels;
    for (auto u : g.labeled_nodes()) {
        blocks.push_back(pool_tokens(g, bfs_rings(g, u, cfg.K)));
        labels.push_back(g.labels[u]);
    }

    auto forward = [&](Tape<double>* tape) {
        std::mt19937_64 rng(0);
        Tensor<double> total = Tensor<double>::zeros(1, 1);
        std::vector<Tensor<double>> rows;
        for (auto& blk : blocks)
            rows.push_back(hhgt_forward<double>(tape, blk, params, cfg, false, rng).logits);
        auto stacked = concat_rows<double>(tape, rows);
        return cross_entropy_with_logits(tape, stacked, labels);
    };
    auto loss = [&]() { return forward(nullptr).at(0, 0); };

    bool pass = true;
    std::string detail;
    double worst_overall = 0;
    std::string worst_name;
    std::vector<std::pair<std::string, Tensor<double>*>> all;
    params.for_each([&](const std::string& n, Tensor<double>& t) { all.emplace_back(n, &t); });
    for (auto& [name, t] : all) {
        params.set_requires_grad(false);
        auto grad = testutil::analytic_grad(*t, forward);
        const double worst = testutil::fd_check_tensor(*t, grad, loss);
        if (worst > worst_overall) {
            worst_overall = worst;
            worst_name = name;
        }
        if (worst >= 1e-4) {
            pass = false;
            detail = "tensor " + name + " rel err " + fmt(worst);
        }
    }
    const double sec = timer.seconds();
    if (pass && sec >= 30.0) {
        pass = false;
        detail = "exceeded 30 s budget";
    }
    if (pass)
        detail = std::to_string(all.size()) + " tensors, worst rel err " + fmt(worst_overall) +
                 " (" + worst_name + "), " + fmt(sec) + " s";
    report(2, "end-to-end gradient correctness", pass, detail);
}

// ---------------------------------------------------------------------------
// 3. attention normalization over 1,000 random forward passes
// ---------------------------------------------------------------------------
void criterion3() {
    Timer timer;
    bool pass = true;
    std::string detail;
    std::mt19937_64 seeder(3003);
    for (int trial = 0; trial < 1000 && pass; ++trial) {
        ModelConfig cfg;
        cfg.K = 1 + static_cast<int>(seeder() % 4);
        cfg.T = 1 + static_cast<int>(seeder() % 4);
        cfg.d = 8;
        cfg.heads = 2;
        cfg.L_t = 1;
        cfg.L_r = 1;
        cfg.dropout = 0;
        cfg.attn_dropout = 0;
        cfg.seed = seeder();
        auto params = ModelParams<double>::init(cfg, 4, 3);

        TokenTensor tok;
        tok.K = cfg.K;
        tok.T = cfg.T;
        tok.d_in = 4;
        tok.tokens.assign(static_cast<std::size_t>(cfg.K + 1) * cfg.T * 4, 0.0f);
        tok.occupancy.assign(static_cast<std::size_t>(cfg.K + 1) * cfg.T, 1);
        std::normal_distribution<double> n(0.0, 2.0);
        for (auto& v : tok.tokens) v = static_cast<float>(n(seeder));
        for (int t = 1; t < cfg.T; ++t) tok.occupancy[t] = 0;  // single 0-ring row
        for (int j = 0; j < 4; ++j)
            for (int t = 1; t < cfg.T; ++t) tok.token(0, t)[j] = 0.0f;

        std::mt19937_64 rng(0);
        auto out = hhgt_forward<double>(nullptr, tok, params, cfg, false, rng);
        auto check_sum = [&](const std::vector<double>& alpha, const char* what) {
            double sum = 0;
            for (double a : alpha) {
                if (a < 0) {
                    pass = false;
                    detail = std::string(what) + " negative weight at trial " +
                             std::to_string(trial);
                }
                sum += a;
            }
            if (std::abs(sum - 1.0) > 1e-6) {
                pass = false;
                detail = std::string(what) + " sum " + fmt(sum) + " at trial " +
                         std::to_string(trial);
            }
        };
        for (const auto& alpha : out.type_alphas) check_sum(alpha, "type alpha");
        check_sum(out.ring_alphas, "ring alpha");
    }
    if (pass) detail = "1000 passes, all alpha rows sum to 1 +/- 1e-6, " + fmt(timer.seconds()) + " s";
    report(3, "attention normalization", pass, detail);
}

// ---------------------------------------------------------------------------
// 4. equation-fidelity against the straight-line oracle
// ---------------------------------------------------------------------------
void criterion4() {
    Timer timer;
    bool pass = true;
    std::string detail;
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 20 && pass; ++seed) {
        ModelConfig cfg;
        cfg.K = 1 + static_cast<int>(seed % 3);
        cfg.T = 1 + static_cast<int>((seed / 3) % 3);
        cfg.d = 8;
        cfg.heads = 2;
        cfg.L_t = 1 + static_cast<int>(seed % 2);
        cfg.L_r = 1 + static_cast<int>((seed / 2) % 2);
        cfg.dropout = 0;
        cfg.attn_dropout = 0;
        cfg.seed = 4000 + seed;
        auto params = ModelParams<double>::init(cfg, 5, 3);

        TokenTensor tok;
        tok.K = cfg.K;
        tok.T = cfg.T;
        tok.d_in = 5;
        tok.tokens.assign(static_cast<std::size_t>(cfg.K + 1) * cfg.T * 5, 0.0f);
        tok.occupancy.assign(static_cast<std::size_t>(cfg.K + 1) * cfg.T, 1);
        std::mt19937_64 rng(9000 + seed);
        std::normal_distribution<double> n(0.0, 1.0);
        for (auto& v : tok.tokens) v = static_cast<float>(n(rng));
        for (int t = 1; t < cfg.T; ++t) {
            tok.occupancy[t] = 0;
            for (int j = 0; j < 5; ++j) tok.token(0, t)[j] = 0.0f;
        }

        std::mt19937_64 drop(0);
        auto out = hhgt_forward<double>(nullptr, tok, params, cfg, false, drop);
        auto p = oracle::export_params(params);
        auto ref = oracle::run_hhgt(p, tok, cfg.heads, cfg.L_t, cfg.L_r, cfg.ln_eps, false);
        for (int j = 0; j < cfg.d; ++j)
            worst = std::max(worst, std::abs(out.embedding.at(0, j) - ref.z[j]));
        if (worst > 1e-6) {
            pass = false;
            detail = "seed " + std::to_string(seed) + " max |dz| " + fmt(worst);
        }
    }
    if (pass)
        detail = "20 instances, max |z - oracle| " + fmt(worst) + ", " + fmt(timer.seconds()) + " s";
    report(4, "equation-fidelity oracle", pass, detail);
}

// ---------------------------------------------------------------------------
// 5. metric golden tests
// ---------------------------------------------------------------------------
void criterion5() {
    bool pass = true;
    std::string detail;
    auto expect = [&](bool cond, const std::string& what) {
        if (!cond && pass) {
            pass = false;
            detail = what;
        }
    };

    std::vector<int> y_true{0, 0, 0, 1, 1, 1, 2, 2, 2, 0};
    std::vector<int> y_pred{0, 1, 0, 1, 1, 2, 2, 2, 0, 0};
    expect(std::abs(macro_f1(y_true, y_pred) - 25.0 / 36.0) < 1e-9, "macro-F1 fixture");
    expect(std::abs(micro_f1(y_true, y_pred) - 0.7) < 1e-9, "micro-F1 fixture");

    std::vector<int> a{0, 0, 1, 1, 2, 2};
    std::vector<int> b{0, 0, 0, 1, 1, 1};
    expect(std::abs(nmi(a, b) - 4.0 * std::log(2.0) / (3.0 * std::log(6.0))) < 1e-9,
           "NMI fixture");
    expect(std::abs(ari(a, b) - 8.0 / 33.0) < 1e-9, "ARI fixture");
    expect(std::abs(nmi(a, a) - 1.0) < 1e-12, "NMI identity");
    expect(std::abs(ari(a, a) - 1.0) < 1e-12, "ARI identity");
    std::vector<int> relabeled{2, 2, 0, 0, 1, 1};
    expect(std::abs(ari(relabeled, a) - 1.0) < 1e-12, "ARI label permutation");
    expect(std::abs(nmi(relabeled, a) - 1.0) < 1e-12, "NMI label permutation");

    if (pass) detail = "all fixtures at 1e-9, identities and permutation invariance hold";
    report(5, "metric golden tests", pass, detail);
}

// ---------------------------------------------------------------------------
// 6 & 7. controlled synthetic ablation tasks
// ---------------------------------------------------------------------------
struct AblationOutcome {
    double full_f1 = 0;
    double ablated_f1 = 0;
    double seconds = 0;
};

AblationOutcome run_ablation_task(SyntheticSignal signal, Variant ablated_variant) {
    Timer timer;
    SyntheticSpec spec;
    spec.signal = signal;
    spec.classes = 3;
    spec.nodes_per_class = 200;
    spec.seed = 606;
    auto g = generate_synthetic_hin(spec);

    auto cache_path = (fs::temp_directory_path() / "ringformer_accept_cache.r2t").string();
    PrecomputeOptions popts;
    popts.threads = 2;
    auto cache = precompute_all(g, 2, cache_path, popts);

    ModelConfig mcfg;
    mcfg.K = 2;
    mcfg.T = g.num_types;
    mcfg.d = 32;
    mcfg.heads = 4;
    mcfg.L_t = 1;
    mcfg.L_r = 1;
    mcfg.seed = 13;
    TrainConfig tcfg;
    tcfg.lr = 1e-2;
    tcfg.epochs = 200;
    tcfg.batch_size = 64;
    tcfg.patience = 30;
    tcfg.seed = 13;

    auto run_variant = [&](Variant v) {
        ModelConfig m = mcfg;
        m.variant = v;
        VariantTokenSource tokens(g, cache, v);
        auto result = train_model<float>(g, tokens, m, tcfg);
        auto emb = embed_nodes<float>(tokens, tokens.available_nodes(), result.best_params, m);
        std::vector<double> x(emb.data.begin(), emb.data.end());
        std::vector<int> y;
        for (auto id : emb.node_ids) y.push_back(g.labels[id]);
        ProbeOptions popt;
        popt.repeats = 10;
        popt.seed = 99;
        popt.threads = 2;
        auto rep = classify_embeddings(x, emb.count(), emb.dim, y, popt);
        return rep.mean_micro_f1;
    };

    AblationOutcome out;
    out.full_f1 = run_variant(Variant::full);
    out.ablated_f1 = run_variant(ablated_variant);
    out.seconds = timer.seconds();
    return out;
}

void criterion6() {
    auto out = run_ablation_task(SyntheticSignal::ring_distance, Variant::no_ring);
    const bool pass = out.full_f1 >= 0.95 && out.full_f1 - out.ablated_f1 >= 0.10 &&
                      out.seconds < 300.0;
    report(6, "synthetic ring-distance task",
           pass,
           "full micro-F1 " + fmt(out.full_f1) + ", no_ring " + fmt(out.ablated_f1) +
               ", gap " + fmt(out.full_f1 - out.ablated_f1) + ", " + fmt(out.seconds) + " s");
}

void criterion7() {
    auto out = run_ablation_task(SyntheticSignal::type_mix, Variant::no_type);
    const bool pass = out.full_f1 >= 0.95 && out.full_f1 - out.ablated_f1 >= 0.10 &&
                      out.seconds < 300.0;
    report(7, "synthetic type-mix task",
           pass,
           "full micro-F1 " + fmt(out.full_f1) + ", no_type " + fmt(out.ablated_f1) +
               ", gap " + fmt(out.full_f1 - out.ablated_f1) + ", " + fmt(out.seconds) + " s");
}

// ---------------------------------------------------------------------------
// 8. determinism
// ---------------------------------------------------------------------------
void criterion8() {
    Timer timer;
    SyntheticSpec spec;
    spec.signal = SyntheticSignal::type_mix;
    spec.nodes_per_class = 30;
    spec.seed = 88;
    auto g = generate_synthetic_hin(spec);
    auto cache_path = (fs::temp_directory_path() / "ringformer_accept_det.r2t").string();
    auto cache = precompute_all(g, 2, cache_path);

    ModelConfig mcfg;
    mcfg.K = 2;
    mcfg.T = g.num_types;
    mcfg.d = 16;
    mcfg.heads = 2;
    mcfg.seed = 5;
    TrainConfig tcfg;
    tcfg.lr = 5e-3;
    tcfg.epochs = 15;
    tcfg.patience = 0;
    tcfg.seed = 5;

    VariantTokenSource tokens(g, cache, Variant::full);
    auto eval_metrics = [&](TrainResult<float>& result) {
        auto emb = embed_nodes<float>(tokens, tokens.available_nodes(), result.best_params, mcfg);
        std::vector<double> x(emb.data.begin(), emb.data.end());
        std::vector<int> y;
        for (auto id : emb.node_ids) y.push_back(g.labels[id]);
        ProbeOptions popt;
        popt.repeats = 5;
        popt.seed = 7;
        auto rep = classify_embeddings(x, emb.count(), emb.dim, y, popt);
        return std::make_pair(rep.mean_micro_f1, rep.mean_macro_f1);
    };

    auto r1 = train_model<float>(g, tokens, mcfg, tcfg);
    auto r2 = train_model<float>(g, tokens, mcfg, tcfg);
    bool pass = r1.history.size() == r2.history.size();
    std::string detail;
    double max_dev = 0;
    for (std::size_t i = 0; pass && i < r1.history.size(); ++i) {
        max_dev = std::max(max_dev, std::abs(r1.history[i].train_loss - r2.history[i].train_loss));
        max_dev = std::max(max_dev, std::abs(r1.history[i].val_loss - r2.history[i].val_loss));
        if (max_dev > 1e-6) {
            pass = false;
            detail = "trajectory deviates by " + fmt(max_dev) + " at epoch " + std::to_string(i + 1);
        }
    }
    auto m1 = eval_metrics(r1);
    auto m2 = eval_metrics(r2);
    if (pass && m1 != m2) {
        pass = false;
        detail = "final eval metrics differ";
    }
    if (pass)
        detail = "trajectories agree to " + fmt(max_dev) + ", identical eval metrics, " +
                 fmt(timer.seconds()) + " s";
    report(8, "determinism", pass, detail);
}

// ---------------------------------------------------------------------------
// 9. end-to-end pipeline on the documented dataset format (d=128, heads=8)
// ---------------------------------------------------------------------------
void criterion9() {
    Timer timer;
    const std::string bin = RINGFORMER_BIN;
    fs::path dir = fs::temp_directory_path() / "ringformer_accept_pipeline";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string graph = (dir / "graph").string();
    const std::string cache = (dir / "cache.r2t").string();
    const std::string run_dir = (dir / "run").string();
    const std::string emb = (dir / "emb.rfeb").string();
    const std::string table = (dir / "table.txt").string();

    auto sh = [&](const std::string& args, const std::string& redirect = "> /dev/null 2>&1") {
        const std::string cmd = bin + " " + args + " " + redirect;
        int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    };

    bool pass = true;
    std::string detail;
    auto step = [&](const std::string& args, const std::string& what,
                    const std::string& redirect = "> /dev/null 2>&1") {
        if (!pass) return;
        if (sh(args, redirect) != 0) {
            pass = false;
            detail = what + " failed";
        }
    };

    // a dataset written in the documented on-disk format; model defaults
    // d=128, heads=8 are exercised by not overriding them
    step("generate --out " + graph + " --mode type-mix --classes 3 --nodes-per-class 50 --seed 9",
         "generate");
    step("validate --graph " + graph, "validate");
    step("preprocess --graph " + graph + " --K 2 --out " + cache + " --threads 2", "preprocess");
    step("train --graph " + graph + " --cache " + cache + " --out " + run_dir +
             " --epochs 3 --lr 1e-3 --seed 2 --patience 0",
         "train (d=128, heads=8 defaults)");
    step("embed --graph " + graph + " --cache " + cache + " --run " + run_dir + " --out " + emb,
         "embed");
    step("eval classify --embeddings " + emb + " --labels " + graph +
             "/labels.csv --repeats 3 --seed 1",
         "eval classify", "> " + table + " 2>&1");
    step("eval cluster --embeddings " + emb + " --labels " + graph +
             "/labels.csv --repeats 3 --seed 1",
         "eval cluster", ">> " + table + " 2>&1");

    if (pass) {
        std::ifstream in(table);
        std::string contents((std::istreambuf_iterator<char>(in)), {});
        if (contents.find("Macro-F1") == std::string::npos ||
            contents.find("Micro-F1") == std::string::npos ||
            contents.find("NMI") == std::string::npos ||
            contents.find("ARI") == std::string::npos) {
            pass = false;
            detail = "report table rows missing";
        }
        // the trained config must have used the defaults
        std::ifstream mc(fs::path(run_dir) / "model_config.json");
        std::string mcs((std::istreambuf_iterator<char>(mc)), {});
        if (mcs.find("\"d\": 128") == std::string::npos ||
            mcs.find("\"heads\": 8") == std::string::npos) {
            pass = false;
            detail = "model defaults d=128/heads=8 not in effect";
        }
    }
    if (pass)
        detail = "pipeline ran end-to-end and emitted the report row format, " +
                 fmt(timer.seconds()) +
                 " s; reproducing the published table values needs the original "
                 "dataset and is a stretch goal, not asserted";
    report(9, "documented-format pipeline (paper numbers not guaranteed)", pass, detail);
}

}  // namespace

int main() {
    std::printf("ringformer acceptance suite\n");
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    if (g_failures == 0) {
        std::printf("all acceptance criteria passed\n");
        return 0;
    }
    std::printf("%d acceptance criteria FAILED\n", g_failures);
    return 1;
}
