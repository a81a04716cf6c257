#include "bsce/config.hpp"

#include <fstream>
#include <initializer_list>

#include "json.hpp"

namespace bsce {

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& obj, const char* section,
                         std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw ConfigError("unknown key \"" + item.key() + "\" in " +
                              section);
    }
}

const json* find(const json& obj, const char* key) {
    const auto it = obj.find(key);
    return it == obj.end() ? nullptr : &*it;
}

double get_number(const json& v, const std::string& where) {
    if (!v.is_number())
        throw ConfigError(where + " must be a number");
    return v.get<double>();
}

std::uint64_t get_uint(const json& v, const std::string& where) {
    if (!v.is_number_unsigned())
        throw ConfigError(where + " must be a nonnegative integer");
    return v.get<std::uint64_t>();
}

std::string get_string(const json& v, const std::string& where) {
    if (!v.is_string())
        throw ConfigError(where + " must be a string");
    return v.get<std::string>();
}

DatasetSpec parse_dataset(const json& obj) {
    reject_unknown_keys(obj, "dataset",
                        {"classes", "head_count", "imbalance_ratio",
                         "noise_rate", "noise_model", "image_side",
                         "pixel_noise", "val_per_class", "test_per_class",
                         "seed"});
    DatasetSpec spec;
    if (const json* v = find(obj, "classes"))
        spec.classes = get_uint(*v, "dataset.classes");
    if (const json* v = find(obj, "head_count"))
        spec.head_count = get_uint(*v, "dataset.head_count");
    if (const json* v = find(obj, "imbalance_ratio"))
        spec.imbalance_ratio = get_number(*v, "dataset.imbalance_ratio");
    if (const json* v = find(obj, "noise_rate"))
        spec.noise_rate = get_number(*v, "dataset.noise_rate");
    if (const json* v = find(obj, "noise_model")) {
        const std::string name = get_string(*v, "dataset.noise_model");
        if (name == "symmetric")
            spec.noise_model = NoiseModel::Symmetric;
        else if (name == "pairwise")
            spec.noise_model = NoiseModel::Pairwise;
        else
            throw ConfigError(
                "dataset.noise_model must be \"symmetric\" or \"pairwise\"");
    }
    if (const json* v = find(obj, "image_side"))
        spec.image_side = get_uint(*v, "dataset.image_side");
    if (const json* v = find(obj, "pixel_noise"))
        spec.pixel_noise = get_number(*v, "dataset.pixel_noise");
    if (const json* v = find(obj, "val_per_class"))
        spec.val_per_class = get_uint(*v, "dataset.val_per_class");
    if (const json* v = find(obj, "test_per_class"))
        spec.test_per_class = get_uint(*v, "dataset.test_per_class");
    if (const json* v = find(obj, "seed"))
        spec.seed = get_uint(*v, "dataset.seed");
    spec.validate();
    return spec;
}

LossConfig parse_loss(const json& obj) {
    reject_unknown_keys(obj, "train.loss",
                        {"kind", "alpha", "beta", "clamp_floor"});
    LossConfig loss;
    if (const json* v = find(obj, "kind"))
        loss.kind = loss_kind_from_string(get_string(*v, "train.loss.kind"));
    if (const json* v = find(obj, "alpha"))
        loss.alpha = get_number(*v, "train.loss.alpha");
    if (const json* v = find(obj, "beta"))
        loss.beta = get_number(*v, "train.loss.beta");
    if (const json* v = find(obj, "clamp_floor"))
        loss.clamp_floor = get_number(*v, "train.loss.clamp_floor");
    loss.validate();
    return loss;
}

TrainSection parse_train(const json& obj) {
    reject_unknown_keys(obj, "train",
                        {"loss", "initial_lr", "lr_factor", "patience",
                         "min_delta", "epochs", "batch_size", "seed",
                         "input_side", "hidden_dim"});
    TrainSection t;
    if (const json* v = find(obj, "loss")) t.config.loss = parse_loss(*v);
    if (const json* v = find(obj, "initial_lr"))
        t.config.initial_lr = get_number(*v, "train.initial_lr");
    if (const json* v = find(obj, "lr_factor"))
        t.config.lr_factor = get_number(*v, "train.lr_factor");
    if (const json* v = find(obj, "patience"))
        t.config.patience = get_uint(*v, "train.patience");
    if (const json* v = find(obj, "min_delta"))
        t.config.min_delta = get_number(*v, "train.min_delta");
    if (const json* v = find(obj, "epochs"))
        t.config.epochs = get_uint(*v, "train.epochs");
    if (const json* v = find(obj, "batch_size"))
        t.config.batch_size = get_uint(*v, "train.batch_size");
    if (const json* v = find(obj, "seed"))
        t.config.seed = get_uint(*v, "train.seed");
    if (const json* v = find(obj, "input_side"))
        t.model.input_side = get_uint(*v, "train.input_side");
    if (const json* v = find(obj, "hidden_dim"))
        t.model.hidden_dim = get_uint(*v, "train.hidden_dim");
    t.config.validate();
    if (t.model.input_side < 1)
        throw ConfigError("train.input_side must be >= 1");
    return t;
}

TtaConfig parse_tta(const json& obj) {
    reject_unknown_keys(obj, "tta", {"resize_sides", "crop_side", "mode"});
    TtaConfig cfg;
    cfg.resize_sides.clear();
    if (const json* v = find(obj, "resize_sides")) {
        if (!v->is_array())
            throw ConfigError("tta.resize_sides must be an array");
        for (const json& s : *v)
            cfg.resize_sides.push_back(get_uint(s, "tta.resize_sides entry"));
    }
    if (const json* v = find(obj, "crop_side"))
        cfg.crop_side = get_uint(*v, "tta.crop_side");
    if (const json* v = find(obj, "mode")) {
        const std::string name = get_string(*v, "tta.mode");
        if (name == "average_features")
            cfg.mode = TtaMode::AverageFeatures;
        else if (name == "average_probs")
            cfg.mode = TtaMode::AverageProbs;
        else
            throw ConfigError(
                "tta.mode must be \"average_features\" or \"average_probs\"");
    }
    cfg.validate();
    return cfg;
}

SweepSection parse_sweep(const json& obj) {
    reject_unknown_keys(obj, "sweep", {"loss_kinds", "seeds"});
    SweepSection s;
    const json* kinds = find(obj, "loss_kinds");
    if (kinds == nullptr || !kinds->is_array() || kinds->empty())
        throw ConfigError("sweep.loss_kinds must be a non-empty array");
    for (const json& k : *kinds)
        s.kinds.push_back(
            loss_kind_from_string(get_string(k, "sweep.loss_kinds entry")));
    const json* seeds = find(obj, "seeds");
    if (seeds == nullptr || !seeds->is_array() || seeds->empty())
        throw ConfigError("sweep.seeds must be a non-empty array");
    for (const json& v : *seeds)
        s.seeds.push_back(get_uint(v, "sweep.seeds entry"));
    return s;
}

IoSection parse_io(const json& obj) {
    reject_unknown_keys(obj, "io",
                        {"dataset", "checkpoint", "checkpoints", "history",
                         "report", "split"});
    IoSection io;
    if (const json* v = find(obj, "dataset"))
        io.dataset = get_string(*v, "io.dataset");
    if (const json* v = find(obj, "checkpoint"))
        io.checkpoint = get_string(*v, "io.checkpoint");
    if (const json* v = find(obj, "checkpoints")) {
        if (!v->is_array())
            throw ConfigError("io.checkpoints must be an array");
        for (const json& p : *v)
            io.checkpoints.emplace_back(
                get_string(p, "io.checkpoints entry"));
    }
    if (const json* v = find(obj, "history"))
        io.history = get_string(*v, "io.history");
    if (const json* v = find(obj, "report"))
        io.report = get_string(*v, "io.report");
    if (const json* v = find(obj, "split")) {
        io.split = get_string(*v, "io.split");
        if (io.split != "train" && io.split != "val" && io.split != "test")
            throw ConfigError("io.split must be train, val, or test");
    }
    return io;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open config " + path.string());

    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::exception& e) {
        throw ConfigError("config " + path.string() + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config root must be an object");

    reject_unknown_keys(doc, "config root",
                        {"dataset", "train", "tta", "sweep", "io"});
    RunConfig cfg;
    if (const json* v = find(doc, "dataset")) cfg.dataset = parse_dataset(*v);
    if (const json* v = find(doc, "train")) cfg.train = parse_train(*v);
    if (const json* v = find(doc, "tta")) cfg.tta = parse_tta(*v);
    if (const json* v = find(doc, "sweep")) cfg.sweep = parse_sweep(*v);
    if (const json* v = find(doc, "io")) cfg.io = parse_io(*v);
    return cfg;
}

}  // namespace bsce
