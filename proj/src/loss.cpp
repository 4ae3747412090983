#include "voco/loss.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace voco {

namespace {

double norm(const Vec& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double dot(const Vec& a, const Vec& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double checked_norm(const Vec& v, const char* what) {
    double n = norm(v);
    if (!(n > kNormEps))
        throw DegenerateEmbeddingError(std::string(what) + " has near-zero norm (collapsed features?)");
    return n;
}

double cosine(const Vec& a, const Vec& b, const char* wa, const char* wb) {
    return dot(a, b) / (checked_norm(a, wa) * checked_norm(b, wb));
}

// d cos(a,b) / da = b/(|a||b|) - cos * a/|a|^2
void add_cosine_grad_a(const Vec& a, const Vec& b, double coeff, Vec& out) {
    double na = norm(a), nb = norm(b);
    double c = dot(a, b) / (na * nb);
    for (std::size_t k = 0; k < a.size(); ++k)
        out[k] += coeff * (b[k] / (na * nb) - c * a[k] / (na * na));
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

} // namespace

double LossReport::mean_abs_s() const {
    const std::size_t n = s.size();
    if (n < 2) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j) sum += std::abs(s[i][j]);
    return sum / static_cast<double>(n * (n - 1));
}

Vec similarity_logits(const Vec& p, const VecList& q) {
    Vec l(q.size());
    for (std::size_t i = 0; i < q.size(); ++i)
        l[i] = std::max(cosine(p, q[i], "p", "q"), 0.0);
    return l;
}

double prediction_loss(const Vec& l, const Vec& y) {
    if (l.size() != y.size()) throw ConfigError("prediction_loss: l and y length mismatch");
    if (l.empty()) throw ConfigError("prediction_loss: empty inputs");
    double sum = 0.0;
    for (std::size_t i = 0; i < l.size(); ++i) {
        double d = std::min(std::abs(y[i] - l[i]), 1.0 - kLogEps);
        sum += std::log(1.0 - d);
    }
    return -sum / static_cast<double>(l.size());
}

std::vector<Vec> basis_similarity(const VecList& q) {
    const std::size_t n = q.size();
    std::vector<Vec> s(n, Vec(n, 1.0));
    for (std::size_t i = 0; i < n; ++i) checked_norm(q[i], "q");
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            s[i][j] = s[j][i] = cosine(q[i], q[j], "q", "q");
    return s;
}

double regularization_loss(const std::vector<Vec>& s) {
    const std::size_t n = s.size();
    if (n < 2) throw ConfigError("regularization_loss: needs at least 2 bases");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            sum += std::abs(s[i][j]);
    return 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

LossReport total_loss(const Vec& p, const VecList& q, const Vec& y, double lambda,
                      LossGrads* grads) {
    const std::size_t n = q.size();
    if (n < 2) throw ConfigError("total_loss: needs at least 2 bases");
    if (y.size() != n) throw ConfigError("total_loss: label length mismatch");

    LossReport r;
    r.lambda = lambda;
    r.logits = similarity_logits(p, q);
    r.dist.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        r.dist[i] = std::min(std::abs(y[i] - r.logits[i]), 1.0 - kLogEps);
    r.l_pred = prediction_loss(r.logits, y);
    r.s = basis_similarity(q);
    r.l_reg = regularization_loss(r.s);
    r.l_total = r.l_pred + lambda * r.l_reg;

    if (grads) {
        grads->d_p.assign(p.size(), 0.0);
        grads->d_q.assign(n, Vec(q[0].size(), 0.0));
        // prediction branch: q detached, gradient reaches p only
        for (std::size_t i = 0; i < n; ++i) {
            double raw_d = std::abs(y[i] - r.logits[i]);
            if (raw_d >= 1.0 - kLogEps) continue; // clamp region, zero slope
            double dl = sign(r.logits[i] - y[i]) / (static_cast<double>(n) * (1.0 - raw_d));
            if (dl == 0.0) continue;
            double c = cosine(p, q[i], "p", "q");
            if (c <= 0.0) continue; // clamp at zero, zero slope
            add_cosine_grad_a(p, q[i], dl, grads->d_p);
        }
        // regularization branch: gradient reaches every q_i
        const double w = lambda * 2.0 / (static_cast<double>(n) * static_cast<double>(n - 1));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                double g = w * sign(r.s[i][j]);
                if (g == 0.0) continue;
                add_cosine_grad_a(q[i], q[j], g, grads->d_q[i]);
                add_cosine_grad_a(q[j], q[i], g, grads->d_q[j]);
            }
    }
    return r;
}

} // namespace voco
