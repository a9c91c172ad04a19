#pragma once

// JSON (de)serialization for configs, run manifests and eval reports.
// Config files carry {"model": {...}, "train": {...}}; CLI flags override
// file values and the effective config is snapshotted in the run manifest.

#include <fstream>

#include "json.hpp"
#include "ringformer/eval.hpp"
#include "ringformer/model.hpp"
#include "ringformer/synthetic.hpp"
#include "ringformer/trainer.hpp"

namespace ringformer {

using json = nlohmann::json;

inline json to_json(const ModelConfig& c) {
    return json{{"K", c.K},
                {"T", c.T},
                {"d", c.d},
                {"heads", c.heads},
                {"L_t", c.L_t},
                {"L_r", c.L_r},
                {"dropout", c.dropout},
                {"attn_dropout", c.attn_dropout},
                {"d_ff_mult", c.d_ff_mult},
                {"variant", variant_name(c.variant)},
                {"mask_empty", c.mask_empty},
                {"per_ring_type_encoder", c.per_ring_type_encoder},
                {"seed", c.seed},
                {"ln_eps", c.ln_eps}};
}

inline ModelConfig model_config_from_json(const json& j) {
    ModelConfig c;
    c.K = j.value("K", c.K);
    c.T = j.value("T", c.T);
    c.d = j.value("d", c.d);
    c.heads = j.value("heads", c.heads);
    c.L_t = j.value("L_t", c.L_t);
    c.L_r = j.value("L_r", c.L_r);
    c.dropout = j.value("dropout", c.dropout);
    c.attn_dropout = j.value("attn_dropout", c.attn_dropout);
    c.d_ff_mult = j.value("d_ff_mult", c.d_ff_mult);
    c.variant = parse_variant(j.value("variant", std::string("full")));
    c.mask_empty = j.value("mask_empty", c.mask_empty);
    c.per_ring_type_encoder = j.value("per_ring_type_encoder", c.per_ring_type_encoder);
    c.seed = j.value("seed", c.seed);
    c.ln_eps = j.value("ln_eps", c.ln_eps);
    return c;
}

inline json to_json(const TrainConfig& c) {
    return json{{"lr", c.lr},
                {"weight_decay", c.weight_decay},
                {"beta1", c.beta1},
                {"beta2", c.beta2},
                {"eps", c.eps},
                {"epochs", c.epochs},
                {"batch_size", c.batch_size},
                {"eval_every", c.eval_every},
                {"patience", c.patience},
                {"seed", c.seed},
                {"val_frac", c.val_frac}};
}

inline TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    c.lr = j.value("lr", c.lr);
    c.weight_decay = j.value("weight_decay", c.weight_decay);
    c.beta1 = j.value("beta1", c.beta1);
    c.beta2 = j.value("beta2", c.beta2);
    c.eps = j.value("eps", c.eps);
    c.epochs = j.value("epochs", c.epochs);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.eval_every = j.value("eval_every", c.eval_every);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    c.val_frac = j.value("val_frac", c.val_frac);
    return c;
}

inline json to_json(const EvalReport& r) {
    json j{{"task", r.task},
           {"split", r.split},
           {"repeats", r.repeats},
           {"seed", r.seed},
           {"repeat_seeds", r.repeat_seeds}};
    if (r.task == "classification") {
        j["macro_f1"] = r.macro_f1;
        j["micro_f1"] = r.micro_f1;
        j["mean_macro_f1"] = r.mean_macro_f1;
        j["mean_micro_f1"] = r.mean_micro_f1;
    } else {
        j["nmi"] = r.nmi;
        j["ari"] = r.ari;
        j["mean_nmi"] = r.mean_nmi;
        j["mean_ari"] = r.mean_ari;
    }
    return j;
}

inline json to_json(const SyntheticSpec& s) {
    return json{{"signal", synthetic_signal_name(s.signal)},
                {"classes", s.classes},
                {"nodes_per_class", s.nodes_per_class},
                {"d_in", s.d_in},
                {"noise", s.noise},
                {"seed", s.seed},
                {"ring1_noise_nodes", s.ring1_noise_nodes},
                {"ring2_signal_nodes", s.ring2_signal_nodes},
                {"signal_type_nodes", s.signal_type_nodes},
                {"anti_type_nodes", s.anti_type_nodes},
                {"pattern_scale", s.pattern_scale}};
}

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path + ": " + e.what());
    }
}

inline void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(2) << "\n";
}

}  // namespace ringformer
