#pragma once

#include <vector>

#include "voco/errors.hpp"

namespace voco {

// Cosine similarity is undefined below this norm; collapsed embeddings
// raise DegenerateEmbeddingError instead of silently reading as zero.
constexpr double kNormEps = 1e-8;

// Guard for the log singularity at distance 1.
constexpr double kLogEps = 1e-6;

using Vec = std::vector<double>;
using VecList = std::vector<Vec>;

struct LossReport {
    Vec logits;               // l, clamped cosine similarities in [0,1]
    Vec dist;                 // d_i = |y_i - l_i|, clamped to <= 1 - kLogEps
    std::vector<Vec> s;       // n x n pairwise basis similarities (diagonal unused)
    double l_pred = 0.0;
    double l_reg = 0.0;
    double l_total = 0.0;
    double lambda = 1.0;

    double mean_abs_s() const;
};

struct LossGrads {
    Vec d_p;             // dL_total/dp  (prediction branch only; q detached there)
    VecList d_q;         // dL_total/dq_i (regularization branch only, scaled by lambda)
};

// l_i = max(0, cos(p, q_i)). Gradients flow to p only; q is detached here.
Vec similarity_logits(const Vec& p, const VecList& q);

// d_i = min(|y_i - l_i|, 1 - kLogEps); L_pred = -(1/n) sum log(1 - d_i).
double prediction_loss(const Vec& l, const Vec& y);

// Raw (unclamped) pairwise cosines; symmetric, diagonal set to 1.
std::vector<Vec> basis_similarity(const VecList& q);

// L_reg = 2/(n(n-1)) * sum_{i<j} |s_ij|, in [0,1]. Requires n >= 2.
double regularization_loss(const std::vector<Vec>& s);

// Full objective with gradients. The prediction branch treats q as a
// constant (stop-gradient); d_q carries lambda * dL_reg/dq only.
LossReport total_loss(const Vec& p, const VecList& q, const Vec& y, double lambda,
                      LossGrads* grads = nullptr);

} // namespace voco
