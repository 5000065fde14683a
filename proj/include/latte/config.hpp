#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "latte/errors.hpp"
#include "latte/losses.hpp"

namespace latte {

// Table-3-style model variants. `base` scores by attention only; `lt` adds
// the latent-type similarity to the fused score; `kt` adds the known-type
// loss; `full` has both; `nkt` is the full scorer without known-type
// supervision.
enum class Variant { Base, LT, KT, Full, NKT };

inline std::string variant_name(Variant v) {
    switch (v) {
        case Variant::Base: return "base";
        case Variant::LT: return "lt";
        case Variant::KT: return "kt";
        case Variant::Full: return "full";
        case Variant::NKT: return "nkt";
    }
    return "full";
}

inline Variant variant_from_name(const std::string& s) {
    if (s == "base") return Variant::Base;
    if (s == "lt") return Variant::LT;
    if (s == "kt") return Variant::KT;
    if (s == "full") return Variant::Full;
    if (s == "nkt") return Variant::NKT;
    throw ConfigError("unknown variant '" + s +
                      "' (expected base|lt|kt|full|nkt)");
}

inline bool variant_uses_latent(Variant v) {
    return v == Variant::LT || v == Variant::Full || v == Variant::NKT;
}
inline bool variant_uses_known_type(Variant v) {
    return v == Variant::KT || v == Variant::Full;
}

struct RunConfig {
    std::uint64_t seed = 7;
    std::size_t max_len = 16;       // L
    std::size_t d_word = 24;
    std::size_t d_char = 12;
    std::size_t d_cnn = 24;
    std::size_t lstm_layers = 1;
    std::size_t hidden = 32;        // h per direction
    std::size_t ff_hidden = 128;
    std::size_t latent_count = 64;  // k
    std::size_t known_count = 8;    // K
    std::size_t n_negatives = 9;
    std::size_t min_count = 1;
    double margin = 1.0;
    double type_weight = 1.0;       // lambda
    double learning_rate = 1e-4;
    std::size_t batch_size = 16;
    std::size_t epochs = 30;
    std::size_t patience = 10;
    Variant variant = Variant::Full;

    void validate() const {
        if (max_len == 0 || d_word == 0 || d_char == 0 || d_cnn == 0 ||
            lstm_layers == 0 || hidden == 0 || ff_hidden == 0 ||
            latent_count == 0 || known_count == 0 || n_negatives == 0 ||
            batch_size == 0)
            throw ConfigError("all model dimensions must be positive");
        if (margin <= 0.0) throw ConfigError("margin must be positive");
        if (type_weight < 0.0)
            throw ConfigError("type loss weight must be >= 0");
        if (learning_rate <= 0.0)
            throw ConfigError("learning rate must be positive");
    }

    JointLossConfig loss_config() const {
        JointLossConfig c;
        c.margin = margin;
        c.type_weight = type_weight;
        c.enable_latent = variant_uses_latent(variant);
        c.enable_known_type = variant_uses_known_type(variant);
        return c;
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["seed"] = seed;
        j["max_len"] = max_len;
        j["d_word"] = d_word;
        j["d_char"] = d_char;
        j["d_cnn"] = d_cnn;
        j["lstm_layers"] = lstm_layers;
        j["hidden"] = hidden;
        j["ff_hidden"] = ff_hidden;
        j["latent_count"] = latent_count;
        j["known_count"] = known_count;
        j["n_negatives"] = n_negatives;
        j["min_count"] = min_count;
        j["margin"] = margin;
        j["type_weight"] = type_weight;
        j["learning_rate"] = learning_rate;
        j["batch_size"] = batch_size;
        j["epochs"] = epochs;
        j["patience"] = patience;
        j["variant"] = variant_name(variant);
        return j;
    }

    static RunConfig from_json(const nlohmann::json& j) {
        RunConfig c;
        try {
            auto get = [&](const char* key, auto& field) {
                if (j.contains(key))
                    field = j.at(key)
                                .get<std::remove_reference_t<decltype(field)>>();
            };
            get("seed", c.seed);
            get("max_len", c.max_len);
            get("d_word", c.d_word);
            get("d_char", c.d_char);
            get("d_cnn", c.d_cnn);
            get("lstm_layers", c.lstm_layers);
            get("hidden", c.hidden);
            get("ff_hidden", c.ff_hidden);
            get("latent_count", c.latent_count);
            get("known_count", c.known_count);
            get("n_negatives", c.n_negatives);
            get("min_count", c.min_count);
            get("margin", c.margin);
            get("type_weight", c.type_weight);
            get("learning_rate", c.learning_rate);
            get("batch_size", c.batch_size);
            get("epochs", c.epochs);
            get("patience", c.patience);
            if (j.contains("variant"))
                c.variant = variant_from_name(j.at("variant").get<std::string>());
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError(std::string("bad config: ") + e.what());
        }
        c.validate();
        return c;
    }

    // hyperparameters from the published LATTE setup; desk defaults elsewhere
    static RunConfig published_scale() {
        RunConfig c;
        c.d_word = 300;
        c.d_cnn = 512;
        c.lstm_layers = 2;
        c.hidden = 512;
        c.latent_count = 2048;
        c.known_count = 127;
        c.learning_rate = 1e-4;
        return c;
    }
};

}  // namespace latte
