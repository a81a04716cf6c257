#include "bsce/trainer.hpp"

#include <cmath>
#include <fstream>
#include <optional>
#include <string>

#include "bsce/binio.hpp"
#include "bsce/rng.hpp"
#include "bsce/tta.hpp"

namespace bsce {

namespace {

constexpr std::string_view kCheckpointMagic = "BSCECKPT1";
constexpr std::uint64_t kShuffleStreamBase = 0x1000;

void fisher_yates(std::vector<std::size_t>& idx, Rng& rng) {
    for (std::size_t i = idx.size(); i > 1; --i) {
        const std::size_t j = rng.below(i);
        std::swap(idx[i - 1], idx[j]);
    }
}

// Gradient buffers shaped like the trainable parameters.
struct GradBuffers {
    std::vector<Real> feature_w, feature_b, head_w, head_b;

    explicit GradBuffers(const ModelParams& m)
        : feature_w(m.feature_w.a.size(), 0.0),
          feature_b(m.feature_b.size(), 0.0),
          head_w(m.head_w.a.size(), 0.0),
          head_b(m.head_b.size(), 0.0) {}

    void zero() {
        std::fill(feature_w.begin(), feature_w.end(), 0.0);
        std::fill(feature_b.begin(), feature_b.end(), 0.0);
        std::fill(head_w.begin(), head_w.end(), 0.0);
        std::fill(head_b.begin(), head_b.end(), 0.0);
    }
};

void backprop_sample(const ModelParams& m, const Activations& act,
                     const std::vector<Real>& grad_logits, GradBuffers& g) {
    const std::size_t k = m.num_classes();
    const std::size_t d_feat = m.feature_dim();

    for (std::size_t c = 0; c < k; ++c) g.head_b[c] += grad_logits[c];
    for (std::size_t j = 0; j < d_feat; ++j) {
        const Real fj = act.features[j];
        if (fj == 0.0) continue;
        Real* row = &g.head_w[j * k];
        for (std::size_t c = 0; c < k; ++c) row[c] += fj * grad_logits[c];
    }

    if (m.hidden_dim == 0) return;

    // d loss / d pre_hidden through the head and the relu mask.
    std::vector<Real> d_pre(m.hidden_dim, 0.0);
    for (std::size_t j = 0; j < m.hidden_dim; ++j) {
        if (act.pre_hidden[j] <= 0.0) continue;
        const Real* row = &m.head_w.a[j * k];
        Real acc = 0.0;
        for (std::size_t c = 0; c < k; ++c) acc += row[c] * grad_logits[c];
        d_pre[j] = acc;
    }
    for (std::size_t j = 0; j < m.hidden_dim; ++j) g.feature_b[j] += d_pre[j];
    for (std::size_t i = 0; i < act.input.size(); ++i) {
        const Real xi = act.input[i];
        if (xi == 0.0) continue;
        Real* row = &g.feature_w[i * m.hidden_dim];
        for (std::size_t j = 0; j < m.hidden_dim; ++j) row[j] += xi * d_pre[j];
    }
}

void apply_update(ModelParams& m, const GradBuffers& g, Real scale) {
    for (std::size_t i = 0; i < g.feature_w.size(); ++i)
        m.feature_w.a[i] -= scale * g.feature_w[i];
    for (std::size_t i = 0; i < g.feature_b.size(); ++i)
        m.feature_b[i] -= scale * g.feature_b[i];
    for (std::size_t i = 0; i < g.head_w.size(); ++i)
        m.head_w.a[i] -= scale * g.head_w[i];
    for (std::size_t i = 0; i < g.head_b.size(); ++i)
        m.head_b[i] -= scale * g.head_b[i];
}

Real eval_error(const ModelParams& m, const std::vector<TrainExample>& examples) {
    std::size_t wrong = 0;
    for (const TrainExample& ex : examples) {
        Activations act = forward_activations(m, ex.x);
        const ClassIndex pred = top1(softmax(LogitVector(std::move(act.logits))));
        if (pred != ex.label) ++wrong;
    }
    return static_cast<Real>(wrong) / static_cast<Real>(examples.size());
}

void run_epochs(const Dataset& data, TrainState& st, const TrainConfig& cfg,
                std::size_t first_epoch) {
    const std::size_t k = st.params.num_classes();
    const std::vector<TrainExample> train_set =
        make_examples(data.train, st.params.input_side, true);
    const std::vector<TrainExample> val_set =
        make_examples(data.val, st.params.input_side, true);
    if (val_set.empty())
        throw InvalidInputError("train: dataset has no val split");

    const bool needs_weights = cfg.loss.kind == LossKind::BCE ||
                               cfg.loss.kind == LossKind::BSCE;
    std::optional<ClassWeights> weights;
    if (needs_weights) weights = class_weights(class_counts(data));
    const ClassWeights* wptr = needs_weights ? &*weights : nullptr;

    std::vector<ProbabilityVector> targets;
    targets.reserve(k);
    for (ClassIndex c = 0; c < k; ++c) targets.push_back(one_hot(c, k));

    std::vector<std::size_t> order(train_set.size());
    GradBuffers grads(st.params);

    for (std::size_t epoch = first_epoch; epoch <= cfg.epochs; ++epoch) {
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        Rng shuffle_rng(mix_seed(cfg.seed, kShuffleStreamBase + epoch));
        fisher_yates(order, shuffle_rng);

        Real epoch_loss = 0.0;
        std::size_t cursor = 0;
        while (cursor < order.size()) {
            const std::size_t batch_n =
                std::min(cfg.batch_size, order.size() - cursor);
            grads.zero();
            Real batch_loss = 0.0;
            try {
                for (std::size_t b = 0; b < batch_n; ++b) {
                    const TrainExample& ex = train_set[order[cursor + b]];
                    Activations act = forward_activations(st.params, ex.x);
                    const LossResult res =
                        loss_with_grad(cfg.loss, LogitVector(act.logits),
                                       targets[ex.label], wptr);
                    batch_loss += res.value;
                    backprop_sample(st.params, act, res.grad_logits, grads);
                }
            } catch (const InvalidInputError& e) {
                // The only numeric failure the loss path raises mid-training
                // is an infinite cross entropy from an underflowed softmax.
                throw DivergenceError("training diverged at epoch " +
                                          std::to_string(epoch) + ": " +
                                          e.what(),
                                      epoch);
            }
            if (!std::isfinite(batch_loss))
                throw DivergenceError("training diverged at epoch " +
                                          std::to_string(epoch) +
                                          ": non-finite batch loss",
                                      epoch);
            epoch_loss += batch_loss;
            apply_update(st.params, grads,
                         st.current_lr / static_cast<Real>(batch_n));
            cursor += batch_n;
        }

        const Real train_loss =
            epoch_loss / static_cast<Real>(train_set.size());
        const Real val_error = eval_error(st.params, val_set);
        plateau_step(st, val_error, cfg);
        st.history.push_back(
            EpochStats{epoch, train_loss, val_error, st.current_lr});
    }
}

}  // namespace

void TrainConfig::validate() const {
    loss.validate();
    if (!(std::isfinite(initial_lr) && initial_lr >= 0.0))
        throw ConfigError("train config: initial_lr must be finite and >= 0");
    if (!(std::isfinite(lr_factor) && lr_factor > 0.0 && lr_factor < 1.0))
        throw ConfigError("train config: lr_factor must lie in (0, 1)");
    if (patience < 1) throw ConfigError("train config: patience must be >= 1");
    if (!(std::isfinite(min_delta) && min_delta >= 0.0))
        throw ConfigError("train config: min_delta must be >= 0");
    if (batch_size < 1)
        throw ConfigError("train config: batch_size must be >= 1");
}

std::vector<TrainExample> make_examples(const std::vector<LabeledImage>& split,
                                        std::size_t input_side,
                                        bool use_observed_labels) {
    std::vector<TrainExample> out;
    out.reserve(split.size());
    for (const LabeledImage& img : split) {
        TrainExample ex;
        ex.x = flatten(center_crop(img.pixels, input_side));
        ex.label = use_observed_labels ? img.observed_label : img.true_label;
        out.push_back(std::move(ex));
    }
    return out;
}

Real batch_mean_loss(const ModelParams& m,
                     const std::vector<TrainExample>& batch,
                     const LossConfig& loss, const ClassWeights* weights) {
    if (batch.empty()) throw InvalidInputError("batch_mean_loss: empty batch");
    Real acc = 0.0;
    for (const TrainExample& ex : batch) {
        Activations act = forward_activations(m, ex.x);
        const ProbabilityVector target = one_hot(ex.label, m.num_classes());
        acc += loss_with_grad(loss, LogitVector(std::move(act.logits)), target,
                              weights)
                   .value;
    }
    return acc / static_cast<Real>(batch.size());
}

TrainState train(const Dataset& data, ModelParams init, const TrainConfig& cfg) {
    cfg.validate();
    if (data.classes != init.num_classes())
        throw InvalidInputError("train: dataset and model class counts differ");

    TrainState st;
    st.params = std::move(init);
    st.current_lr = cfg.initial_lr;
    run_epochs(data, st, cfg, 1);
    return st;
}

TrainState resume_train(const Dataset& data, TrainState state,
                        const TrainConfig& cfg) {
    cfg.validate();
    if (data.classes != state.params.num_classes())
        throw InvalidInputError("train: dataset and model class counts differ");

    const std::size_t first = state.history.size() + 1;
    if (first > cfg.epochs) return state;
    run_epochs(data, state, cfg, first);
    return state;
}

void plateau_step(TrainState& state, Real new_val_error,
                  const TrainConfig& cfg) {
    if (!(std::isfinite(new_val_error) && new_val_error >= 0.0 &&
          new_val_error <= 1.0))
        throw InvalidInputError("plateau_step: val error must lie in [0, 1]");

    if (new_val_error < state.best_val_error - cfg.min_delta) {
        state.best_val_error = new_val_error;
        state.epochs_since_improvement = 0;
        return;
    }
    ++state.epochs_since_improvement;
    if (state.epochs_since_improvement >= cfg.patience) {
        state.current_lr *= cfg.lr_factor;
        state.epochs_since_improvement = 0;
    }
}

namespace {

void write_real_block(std::ostream& os, const std::vector<Real>& v) {
    for (Real x : v) binio::write_f64(os, x);
}

void read_real_block(std::istream& is, std::vector<Real>& v,
                     bool allow_nonfinite = false) {
    for (Real& x : v) {
        x = binio::read_f64(is);
        if (!allow_nonfinite && !std::isfinite(x))
            throw CorruptDataError("checkpoint weight is not finite");
    }
}

}  // namespace

void save_checkpoint(const TrainState& state, const TrainConfig& cfg,
                     const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open " + path.string() + " for writing");

    binio::write_magic(os, kCheckpointMagic);
    binio::write_u32(os, static_cast<std::uint32_t>(cfg.loss.kind));
    binio::write_f64(os, cfg.loss.alpha);
    binio::write_f64(os, cfg.loss.beta);
    binio::write_f64(os, cfg.loss.clamp_floor);
    binio::write_f64(os, cfg.initial_lr);
    binio::write_f64(os, cfg.lr_factor);
    binio::write_u32(os, static_cast<std::uint32_t>(cfg.patience));
    binio::write_f64(os, cfg.min_delta);
    binio::write_u32(os, static_cast<std::uint32_t>(cfg.epochs));
    binio::write_u32(os, static_cast<std::uint32_t>(cfg.batch_size));
    binio::write_u64(os, cfg.seed);

    const ModelParams& m = state.params;
    binio::write_u32(os, static_cast<std::uint32_t>(m.input_side));
    binio::write_u32(os, static_cast<std::uint32_t>(m.hidden_dim));
    binio::write_u32(os, static_cast<std::uint32_t>(m.num_classes()));
    write_real_block(os, m.feature_w.a);
    write_real_block(os, m.feature_b);
    write_real_block(os, m.head_w.a);
    write_real_block(os, m.head_b);

    binio::write_f64(os, state.current_lr);
    binio::write_f64(os, state.best_val_error);
    binio::write_u32(os, static_cast<std::uint32_t>(state.epochs_since_improvement));

    binio::write_u32(os, static_cast<std::uint32_t>(state.history.size()));
    for (const EpochStats& e : state.history) {
        binio::write_u32(os, static_cast<std::uint32_t>(e.epoch));
        binio::write_f64(os, e.train_loss);
        binio::write_f64(os, e.val_error);
        binio::write_f64(os, e.lr);
    }
    if (!os) throw IoError("write failure on " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open " + path.string() + " for reading");

    binio::expect_magic(is, kCheckpointMagic);

    Checkpoint ck;
    const std::uint32_t kind = binio::read_u32(is);
    if (kind > static_cast<std::uint32_t>(LossKind::BSCE))
        throw CorruptDataError("checkpoint has unknown loss kind");
    ck.config.loss.kind = static_cast<LossKind>(kind);
    ck.config.loss.alpha = binio::read_f64(is);
    ck.config.loss.beta = binio::read_f64(is);
    ck.config.loss.clamp_floor = binio::read_f64(is);
    ck.config.initial_lr = binio::read_f64(is);
    ck.config.lr_factor = binio::read_f64(is);
    ck.config.patience = binio::read_u32(is);
    ck.config.min_delta = binio::read_f64(is);
    ck.config.epochs = binio::read_u32(is);
    ck.config.batch_size = binio::read_u32(is);
    ck.config.seed = binio::read_u64(is);

    ModelParams& m = ck.state.params;
    m.input_side = binio::read_u32(is);
    m.hidden_dim = binio::read_u32(is);
    const std::uint32_t classes = binio::read_u32(is);
    if (m.input_side < 1 || classes < 2)
        throw CorruptDataError("checkpoint shapes out of range");
    if (m.hidden_dim > 0) {
        m.feature_w = Matrix(m.input_dim(), m.hidden_dim);
        m.feature_b.resize(m.hidden_dim);
    }
    m.head_b.resize(classes);
    m.head_w = Matrix(m.feature_dim(), classes);
    read_real_block(is, m.feature_w.a);
    read_real_block(is, m.feature_b);
    read_real_block(is, m.head_w.a);
    read_real_block(is, m.head_b);

    ck.state.current_lr = binio::read_f64(is);
    if (!(std::isfinite(ck.state.current_lr) && ck.state.current_lr >= 0.0))
        throw CorruptDataError("checkpoint learning rate out of range");
    ck.state.best_val_error = binio::read_f64(is);
    if (std::isnan(ck.state.best_val_error))
        throw CorruptDataError("checkpoint best val error is NaN");
    ck.state.epochs_since_improvement = binio::read_u32(is);

    const std::uint32_t rows = binio::read_u32(is);
    ck.state.history.resize(rows);
    std::size_t prev_epoch = 0;
    for (EpochStats& e : ck.state.history) {
        e.epoch = binio::read_u32(is);
        e.train_loss = binio::read_f64(is);
        e.val_error = binio::read_f64(is);
        e.lr = binio::read_f64(is);
        if (e.epoch <= prev_epoch)
            throw CorruptDataError("checkpoint history epochs not increasing");
        prev_epoch = e.epoch;
    }
    binio::expect_eof(is);
    return ck;
}

}  // namespace bsce
