#include "bsce/model.hpp"

#include <cmath>

#include "bsce/rng.hpp"

namespace bsce {

namespace {

constexpr std::uint64_t kModelStream = 11;

void fill_scaled_uniform(Rng& rng, Matrix& m, std::size_t fan_in) {
    const Real scale = 1.0 / std::sqrt(static_cast<Real>(fan_in));
    for (Real& v : m.a) v = rng.uniform(-scale, scale);
}

std::vector<Real> head_raw(const ModelParams& m, const std::vector<Real>& f) {
    const std::size_t k = m.num_classes();
    std::vector<Real> z(m.head_b);
    for (std::size_t j = 0; j < f.size(); ++j) {
        const Real fj = f[j];
        const Real* row = &m.head_w.a[j * k];
        for (std::size_t c = 0; c < k; ++c) z[c] += fj * row[c];
    }
    return z;
}

}  // namespace

ModelParams init_model(std::size_t input_side, std::size_t hidden_dim,
                       std::size_t k_classes, std::uint64_t seed) {
    if (input_side < 1)
        throw InvalidInputError("init_model: input_side must be >= 1");
    if (k_classes < 2)
        throw InvalidInputError("init_model: need at least 2 classes");

    Rng rng(mix_seed(seed, kModelStream));
    ModelParams m;
    m.input_side = input_side;
    m.hidden_dim = hidden_dim;
    const std::size_t d_in = m.input_dim();
    if (hidden_dim > 0) {
        m.feature_w = Matrix(d_in, hidden_dim);
        fill_scaled_uniform(rng, m.feature_w, d_in);
        m.feature_b.assign(hidden_dim, 0.0);
    }
    m.head_w = Matrix(m.feature_dim(), k_classes);
    fill_scaled_uniform(rng, m.head_w, m.feature_dim());
    m.head_b.assign(k_classes, 0.0);
    return m;
}

std::vector<Real> flatten(const Grid& g) {
    std::vector<Real> x(g.pix.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = static_cast<Real>(g.pix[i]);
    return x;
}

Activations forward_activations(const ModelParams& m, std::vector<Real> x) {
    if (x.size() != m.input_dim())
        throw InvalidInputError("forward: input size does not match model");

    Activations act;
    act.input = std::move(x);
    if (m.hidden_dim > 0) {
        act.pre_hidden.assign(m.feature_b.begin(), m.feature_b.end());
        for (std::size_t i = 0; i < act.input.size(); ++i) {
            const Real xi = act.input[i];
            const Real* row = &m.feature_w.a[i * m.hidden_dim];
            for (std::size_t j = 0; j < m.hidden_dim; ++j)
                act.pre_hidden[j] += xi * row[j];
        }
        act.features.resize(m.hidden_dim);
        for (std::size_t j = 0; j < m.hidden_dim; ++j)
            act.features[j] = act.pre_hidden[j] > 0.0 ? act.pre_hidden[j] : 0.0;
    } else {
        act.features = act.input;
    }
    act.logits = head_raw(m, act.features);
    return act;
}

LogitVector head_logits(const ModelParams& m, const std::vector<Real>& features) {
    if (features.size() != m.feature_dim())
        throw InvalidInputError("head_logits: feature size does not match model");
    return LogitVector(head_raw(m, features));
}

ForwardResult forward(const ModelParams& m, const Grid& crop) {
    if (!crop.is_square() || crop.side() != m.input_side)
        throw InvalidInputError("forward: crop side must equal model input side");
    Activations act = forward_activations(m, flatten(crop));
    return ForwardResult{std::move(act.features),
                         LogitVector(std::move(act.logits))};
}

}  // namespace bsce
