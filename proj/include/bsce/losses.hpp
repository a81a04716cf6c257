#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "bsce/prob.hpp"

namespace bsce {

// Per-class balancing factors w(k) = N / (K * n(k)) derived from training
// counts. Build through class_weights(); the stored counts always satisfy
// sum(n) == N.
class ClassWeights {
public:
    std::size_t size() const { return weights_.size(); }
    const std::vector<Real>& weights() const { return weights_; }
    const std::vector<Count>& counts() const { return counts_; }
    Count total() const { return total_; }

    friend ClassWeights class_weights(const std::vector<Count>& counts);

private:
    ClassWeights() = default;
    std::vector<Real> weights_;
    std::vector<Count> counts_;
    Count total_ = 0;
};

// Requires K >= 2 and every count >= 1.
ClassWeights class_weights(const std::vector<Count>& counts);

enum class LossKind { CE, BCE, RCE, SCE, BSCE };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

struct LossConfig {
    LossKind kind = LossKind::BSCE;
    Real alpha = 0.4;
    Real beta = 0.7;
    Real clamp_floor = -4.0;

    void validate() const;  // throws ConfigError
};

struct LossResult {
    Real value = 0.0;
    std::vector<Real> grad_logits;
};

// Cross entropy -sum_k q(k) ln p(k). Throws if q places mass where p is zero.
Real ce(const ProbabilityVector& p, const ProbabilityVector& q);

// Balanced cross entropy -sum_k w(k) q(k) ln p(k).
Real bce(const ProbabilityVector& p, const ProbabilityVector& q,
         std::span<const Real> weights);
Real bce(const ProbabilityVector& p, const ProbabilityVector& q,
         const ClassWeights& w);

// Reverse cross entropy -sum_k p(k) clamped_log(q(k), clamp_floor).
Real rce(const ProbabilityVector& p, const ProbabilityVector& q,
         Real clamp_floor);

// alpha * ce + beta * rce.
Real sce(const ProbabilityVector& p, const ProbabilityVector& q, Real alpha,
         Real beta, Real clamp_floor);

// alpha * bce + beta * rce.
Real bsce(const ProbabilityVector& p, const ProbabilityVector& q,
          std::span<const Real> weights, Real alpha, Real beta,
          Real clamp_floor);
Real bsce(const ProbabilityVector& p, const ProbabilityVector& q,
          const ClassWeights& w, Real alpha, Real beta, Real clamp_floor);

// Loss value at p = softmax(z) together with the exact analytic gradient with
// respect to the logits. Targets are treated as constants. BCE/BSCE require
// weights; the other kinds ignore them.
LossResult loss_with_grad(const LossConfig& cfg, const LogitVector& z,
                          const ProbabilityVector& target,
                          const ClassWeights* weights = nullptr);

}  // namespace bsce
