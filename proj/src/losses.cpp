#include "bsce/losses.hpp"

#include <cmath>
#include <string>

namespace bsce {

namespace {

void check_same_size(std::size_t a, std::size_t b, const char* what) {
    if (a != b)
        throw InvalidInputError(std::string("shape mismatch: ") + what);
}

}  // namespace

ClassWeights class_weights(const std::vector<Count>& counts) {
    if (counts.size() < 2)
        throw InvalidInputError("class_weights: need at least 2 classes");
    Count total = 0;
    for (Count n : counts) {
        if (n == 0)
            throw InvalidInputError(
                "class_weights: zero class count, weight undefined");
        total += n;
    }
    ClassWeights w;
    w.counts_ = counts;
    w.total_ = total;
    w.weights_.resize(counts.size());
    const Real num = static_cast<Real>(total);
    const Real k = static_cast<Real>(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
        w.weights_[i] = num / (k * static_cast<Real>(counts[i]));
    return w;
}

std::string_view to_string(LossKind kind) {
    switch (kind) {
        case LossKind::CE: return "ce";
        case LossKind::BCE: return "bce";
        case LossKind::RCE: return "rce";
        case LossKind::SCE: return "sce";
        case LossKind::BSCE: return "bsce";
    }
    throw ConfigError("unknown loss kind");
}

LossKind loss_kind_from_string(std::string_view name) {
    if (name == "ce") return LossKind::CE;
    if (name == "bce") return LossKind::BCE;
    if (name == "rce") return LossKind::RCE;
    if (name == "sce") return LossKind::SCE;
    if (name == "bsce") return LossKind::BSCE;
    throw ConfigError("unknown loss kind \"" + std::string(name) + "\"");
}

void LossConfig::validate() const {
    if (!(std::isfinite(alpha) && alpha >= 0.0))
        throw ConfigError("loss config: alpha must be finite and >= 0");
    if (!(std::isfinite(beta) && beta >= 0.0))
        throw ConfigError("loss config: beta must be finite and >= 0");
    if (!(std::isfinite(clamp_floor) && clamp_floor < 0.0))
        throw ConfigError("loss config: clamp_floor must be negative");
    if ((kind == LossKind::SCE || kind == LossKind::BSCE) &&
        !(alpha + beta > 0.0))
        throw ConfigError("loss config: alpha + beta must be positive");
    to_string(kind);
}

Real ce(const ProbabilityVector& p, const ProbabilityVector& q) {
    check_same_size(p.size(), q.size(), "ce expects matching class counts");
    Real acc = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (q[k] == 0.0) continue;
        if (p[k] <= 0.0)
            throw InvalidInputError(
                "infinite cross entropy: target mass on a zero-probability "
                "class");
        acc -= q[k] * std::log(p[k]);
    }
    return acc;
}

Real bce(const ProbabilityVector& p, const ProbabilityVector& q,
         std::span<const Real> weights) {
    check_same_size(p.size(), q.size(), "bce expects matching class counts");
    check_same_size(weights.size(), q.size(),
                    "bce weights must match class count");
    Real acc = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (q[k] == 0.0) continue;
        if (p[k] <= 0.0)
            throw InvalidInputError(
                "infinite cross entropy: target mass on a zero-probability "
                "class");
        acc -= weights[k] * q[k] * std::log(p[k]);
    }
    return acc;
}

Real bce(const ProbabilityVector& p, const ProbabilityVector& q,
         const ClassWeights& w) {
    return bce(p, q, std::span<const Real>(w.weights()));
}

Real rce(const ProbabilityVector& p, const ProbabilityVector& q,
         Real clamp_floor) {
    check_same_size(p.size(), q.size(), "rce expects matching class counts");
    Real acc = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k)
        acc -= p[k] * clamped_log(q[k], clamp_floor);
    return acc;
}

Real sce(const ProbabilityVector& p, const ProbabilityVector& q, Real alpha,
         Real beta, Real clamp_floor) {
    return alpha * ce(p, q) + beta * rce(p, q, clamp_floor);
}

Real bsce(const ProbabilityVector& p, const ProbabilityVector& q,
          std::span<const Real> weights, Real alpha, Real beta,
          Real clamp_floor) {
    return alpha * bce(p, q, weights) + beta * rce(p, q, clamp_floor);
}

Real bsce(const ProbabilityVector& p, const ProbabilityVector& q,
          const ClassWeights& w, Real alpha, Real beta, Real clamp_floor) {
    return bsce(p, q, std::span<const Real>(w.weights()), alpha, beta,
                clamp_floor);
}

namespace {

// d ce / d z_j = (sum_k q_k) p_j - q_j; the general form keeps soft targets
// whose mass is not exactly 1 consistent with the value path.
void add_ce_grad(const ProbabilityVector& p, const ProbabilityVector& q,
                 Real scale, std::vector<Real>& grad) {
    Real mass = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) mass += q[k];
    for (std::size_t j = 0; j < p.size(); ++j)
        grad[j] += scale * (mass * p[j] - q[j]);
}

// d bce / d z_j = (sum_k w_k q_k) p_j - w_j q_j.
void add_bce_grad(const ProbabilityVector& p, const ProbabilityVector& q,
                  std::span<const Real> w, Real scale,
                  std::vector<Real>& grad) {
    Real mass = 0.0;
    for (std::size_t k = 0; k < q.size(); ++k) mass += w[k] * q[k];
    for (std::size_t j = 0; j < p.size(); ++j)
        grad[j] += scale * (mass * p[j] - w[j] * q[j]);
}

// With c_k = clamped_log(q_k, A) constant in q:
// d rce / d z_j = p_j (sum_k p_k c_k - c_j) = p_j (-value - c_j).
void add_rce_grad(const ProbabilityVector& p, const ProbabilityVector& q,
                  Real clamp_floor, Real value, Real scale,
                  std::vector<Real>& grad) {
    for (std::size_t j = 0; j < p.size(); ++j)
        grad[j] += scale * p[j] * (-value - clamped_log(q[j], clamp_floor));
}

}  // namespace

LossResult loss_with_grad(const LossConfig& cfg, const LogitVector& z,
                          const ProbabilityVector& target,
                          const ClassWeights* weights) {
    cfg.validate();
    check_same_size(z.size(), target.size(),
                    "logits and target must share class count");
    const bool needs_weights =
        cfg.kind == LossKind::BCE || cfg.kind == LossKind::BSCE;
    if (needs_weights) {
        if (weights == nullptr)
            throw ConfigError("balanced loss requires class weights");
        check_same_size(weights->size(), target.size(),
                        "class weights must match class count");
    }

    const ProbabilityVector p = softmax(z);
    LossResult out;
    out.grad_logits.assign(z.size(), 0.0);

    switch (cfg.kind) {
        case LossKind::CE: {
            out.value = ce(p, target);
            add_ce_grad(p, target, 1.0, out.grad_logits);
            break;
        }
        case LossKind::BCE: {
            out.value = bce(p, target, *weights);
            add_bce_grad(p, target, weights->weights(), 1.0, out.grad_logits);
            break;
        }
        case LossKind::RCE: {
            const Real r = rce(p, target, cfg.clamp_floor);
            out.value = r;
            add_rce_grad(p, target, cfg.clamp_floor, r, 1.0, out.grad_logits);
            break;
        }
        case LossKind::SCE: {
            const Real c = ce(p, target);
            const Real r = rce(p, target, cfg.clamp_floor);
            out.value = cfg.alpha * c + cfg.beta * r;
            add_ce_grad(p, target, cfg.alpha, out.grad_logits);
            add_rce_grad(p, target, cfg.clamp_floor, r, cfg.beta,
                         out.grad_logits);
            break;
        }
        case LossKind::BSCE: {
            const Real b = bce(p, target, *weights);
            const Real r = rce(p, target, cfg.clamp_floor);
            out.value = cfg.alpha * b + cfg.beta * r;
            add_bce_grad(p, target, weights->weights(), cfg.alpha,
                         out.grad_logits);
            add_rce_grad(p, target, cfg.clamp_floor, r, cfg.beta,
                         out.grad_logits);
            break;
        }
        default:
            throw ConfigError("unknown loss kind");
    }
    return out;
}

}  // namespace bsce
