#include "bsce/eval.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <map>

namespace bsce {

namespace {

std::string format_real(Real v, const char* fmt) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

ProbabilityVector predict_one(const ModelParams& m, const Grid& image,
                              const TtaConfig* tta) {
    if (tta != nullptr) return tta_predict(m, image, *tta);
    return softmax(forward(m, center_crop(image, m.input_side)).logits);
}

}  // namespace

std::string SweepReport::to_csv() const {
    std::string out = "label,split,mean_top1_error,n,seed\n";
    for (const SweepRow& r : rows) {
        out += r.label + "," + r.split + "," +
               format_real(r.mean_top1_error, "%.17g") + "," +
               std::to_string(r.n) + "," + r.seed + "\n";
    }
    for (const std::string& f : footnotes) out += "# " + f + "\n";
    return out;
}

std::string SweepReport::to_text() const {
    const char* headers[5] = {"label", "split", "mean_top1_error", "n", "seed"};
    std::vector<std::array<std::string, 5>> cells;
    cells.reserve(rows.size());
    for (const SweepRow& r : rows)
        cells.push_back({r.label, r.split,
                         format_real(r.mean_top1_error, "%.4f"),
                         std::to_string(r.n), r.seed});

    std::size_t width[5];
    for (int c = 0; c < 5; ++c) {
        width[c] = std::string(headers[c]).size();
        for (const auto& row : cells) width[c] = std::max(width[c], row[c].size());
    }

    auto pad = [](const std::string& s, std::size_t w) {
        return s + std::string(w - s.size(), ' ');
    };
    std::string out;
    for (int c = 0; c < 5; ++c)
        out += pad(headers[c], width[c]) + (c == 4 ? "\n" : "  ");
    for (const auto& row : cells)
        for (int c = 0; c < 5; ++c)
            out += pad(row[c], width[c]) + (c == 4 ? "\n" : "  ");
    for (const std::string& f : footnotes) out += f + "\n";
    return out;
}

Real mean_top1_error(const std::vector<ClassIndex>& predictions,
                     const std::vector<ClassIndex>& labels) {
    if (predictions.empty())
        throw InvalidInputError("mean_top1_error: empty prediction list");
    if (predictions.size() != labels.size())
        throw InvalidInputError(
            "mean_top1_error: prediction/label length mismatch");
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] != labels[i]) ++wrong;
    return static_cast<Real>(wrong) / static_cast<Real>(predictions.size());
}

ClassIndex top1_vote(const std::vector<ProbabilityVector>& model_probs) {
    if (model_probs.empty())
        throw InvalidInputError("top1_vote: need at least one model");
    const std::size_t k = model_probs.front().size();
    for (const ProbabilityVector& p : model_probs)
        if (p.size() != k)
            throw InvalidInputError("top1_vote: models disagree on class count");

    std::vector<std::size_t> votes(k, 0);
    std::vector<Real> mass(k, 0.0);
    for (const ProbabilityVector& p : model_probs) {
        ++votes[top1(p)];
        for (std::size_t c = 0; c < k; ++c) mass[c] += p[c];
    }

    ClassIndex best = 0;
    for (std::size_t c = 1; c < k; ++c) {
        if (votes[c] > votes[best] ||
            (votes[c] == votes[best] && mass[c] > mass[best]))
            best = c;
    }
    return best;
}

Real evaluate_ensemble(const std::vector<ModelParams>& models,
                       const std::vector<LabeledImage>& split,
                       const TtaConfig* tta) {
    if (models.empty())
        throw ConfigError("evaluate_ensemble: empty model list");
    if (split.empty())
        throw InvalidInputError("evaluate_ensemble: empty split");
    const std::size_t k = models.front().num_classes();
    for (const ModelParams& m : models)
        if (m.num_classes() != k)
            throw InvalidInputError(
                "evaluate_ensemble: models disagree on class count");

    std::vector<ClassIndex> preds;
    std::vector<ClassIndex> labels;
    preds.reserve(split.size());
    labels.reserve(split.size());
    std::vector<ProbabilityVector> probs;
    for (const LabeledImage& img : split) {
        probs.clear();
        for (const ModelParams& m : models)
            probs.push_back(predict_one(m, img.pixels, tta));
        preds.push_back(top1_vote(probs));
        labels.push_back(img.observed_label);
    }
    return mean_top1_error(preds, labels);
}

namespace {

// Rethrows a sweep-cell failure with the cell named, preserving the type.
[[noreturn]] void rethrow_labeled(const std::string& label) {
    try {
        throw;
    } catch (const DivergenceError& e) {
        throw DivergenceError(label + ": " + e.what(), e.epoch());
    } catch (const ConfigError& e) {
        throw ConfigError(label + ": " + e.what());
    } catch (const IoError& e) {
        throw IoError(label + ": " + e.what());
    } catch (const InvalidInputError& e) {
        throw InvalidInputError(label + ": " + e.what());
    } catch (const Error& e) {
        throw Error(label + ": " + e.what());
    }
}

}  // namespace

SweepReport loss_sweep(const Dataset& data, const ModelSpec& model,
                       const TrainConfig& base,
                       const std::vector<LossKind>& kinds,
                       const std::vector<std::uint64_t>& seeds) {
    if (kinds.empty() || seeds.empty())
        throw ConfigError("loss_sweep: kinds and seeds must not be empty");

    SweepReport report;
    for (LossKind kind : kinds) {
        const std::string kind_name{to_string(kind)};
        Real val_sum = 0.0;
        Real test_sum = 0.0;
        for (std::uint64_t seed : seeds) {
            TrainConfig cfg = base;
            cfg.loss.kind = kind;
            cfg.seed = seed;
            try {
                ModelParams init = init_model(model.input_side, model.hidden_dim,
                                              data.classes, seed);
                const TrainState st = train(data, std::move(init), cfg);
                const Real val_err = evaluate_ensemble({st.params}, data.val);
                const Real test_err = evaluate_ensemble({st.params}, data.test);
                val_sum += val_err;
                test_sum += test_err;
                report.rows.push_back(SweepRow{kind_name, "val", val_err,
                                               data.val.size(),
                                               std::to_string(seed)});
                report.rows.push_back(SweepRow{kind_name, "test", test_err,
                                               data.test.size(),
                                               std::to_string(seed)});
            } catch (...) {
                rethrow_labeled("loss sweep [" + kind_name + ", seed " +
                                std::to_string(seed) + "]");
            }
        }
        const Real n_seeds = static_cast<Real>(seeds.size());
        report.rows.push_back(SweepRow{kind_name, "val", val_sum / n_seeds,
                                       data.val.size(), "mean"});
        report.rows.push_back(SweepRow{kind_name, "test", test_sum / n_seeds,
                                       data.test.size(), "mean"});
    }
    report.footnotes.push_back(
        "full-scale reference (PNASNet on Aliproducts validation): ce 0.1530  "
        "bce 0.1430  sce 0.1492  bsce 0.1407");
    return report;
}

SweepReport tta_sweep(const ModelParams& model,
                      const std::vector<LabeledImage>& split,
                      const std::string& split_name, const TtaConfig& cfg) {
    cfg.validate();
    SweepReport report;
    for (std::size_t side : cfg.resize_sides) {
        TtaConfig single = cfg;
        single.resize_sides = {side};
        const Real err = evaluate_ensemble({model}, split, &single);
        report.rows.push_back(
            SweepRow{std::to_string(side), split_name, err, split.size(), "-"});
    }
    const Real err = evaluate_ensemble({model}, split, &cfg);
    report.rows.push_back(SweepRow{"tta", split_name, err, split.size(), "-"});
    report.footnotes.push_back(
        "full-scale reference (PNASNet on Aliproducts validation): 384 0.1407  "
        "412 0.1386  424 0.1384  436 0.1383  464 0.1425  tta 0.1354");
    return report;
}

std::string loss_summary_table(const SweepReport& report,
                               const std::vector<LossKind>& kinds) {
    std::map<std::string, Real> mean_test;
    for (const SweepRow& r : report.rows)
        if (r.seed == "mean" && r.split == "test")
            mean_test[r.label] = r.mean_top1_error;

    std::string head = "loss            ";
    std::string body = "mean top-1 error";
    for (LossKind kind : kinds) {
        const std::string name{to_string(kind)};
        const auto it = mean_test.find(name);
        if (it == mean_test.end()) continue;
        head += "  " + std::string(8 - std::min<std::size_t>(8, name.size()), ' ') + name;
        body += "  " + format_real(it->second, "%8.4f");
    }
    return head + "\n" + body + "\n";
}

}  // namespace bsce
