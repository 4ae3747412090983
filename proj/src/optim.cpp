#include "voco/optim.hpp"

#include <cmath>

#include "voco/errors.hpp"

namespace voco {

void AdamW::init(const std::vector<Param>& params) {
    t_ = 0;
    m_.clear();
    v_.clear();
    for (const auto& p : params) {
        m_.emplace_back(p.value.shape);
        v_.emplace_back(p.value.shape);
    }
}

void AdamW::step(std::vector<Param>& params, double lr) {
    if (m_.size() != params.size()) throw ConfigError("AdamW::step: not initialized for these params");
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t_));
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& val = params[i].value.data;
        const auto& g = params[i].grad.data;
        auto& m = m_[i].data;
        auto& v = v_[i].data;
        for (std::size_t k = 0; k < val.size(); ++k) {
            m[k] = beta1 * m[k] + (1.0 - beta1) * g[k];
            v[k] = beta2 * v[k] + (1.0 - beta2) * g[k] * g[k];
            const double mhat = m[k] / bc1;
            const double vhat = v[k] / bc2;
            val[k] -= lr * (mhat / (std::sqrt(vhat) + eps) + weight_decay * val[k]);
        }
    }
}

void AdamW::add_to_archive(Archive& a, const std::vector<Param>& params) const {
    a.meta["adam"] = {{"t", t_}, {"beta1", beta1}, {"beta2", beta2},
                      {"eps", eps}, {"weight_decay", weight_decay}};
    for (std::size_t i = 0; i < params.size(); ++i) {
        a.add("opt.m." + params[i].name, m_[i]);
        a.add("opt.v." + params[i].name, v_[i]);
    }
}

void AdamW::load_from_archive(const Archive& a, const std::vector<Param>& params) {
    if (!a.meta.contains("adam")) throw CheckpointError("AdamW: missing optimizer state");
    const auto& j = a.meta["adam"];
    t_ = j.at("t").get<std::int64_t>();
    beta1 = j.at("beta1").get<double>();
    beta2 = j.at("beta2").get<double>();
    eps = j.at("eps").get<double>();
    weight_decay = j.at("weight_decay").get<double>();
    m_.clear();
    v_.clear();
    for (const auto& p : params) {
        const Tensor* m = a.find("opt.m." + p.name);
        const Tensor* v = a.find("opt.v." + p.name);
        if (!m || !v || m->shape != p.value.shape || v->shape != p.value.shape)
            throw CheckpointError("AdamW: missing or mismatched moment tensors for " + p.name);
        m_.push_back(*m);
        v_.push_back(*v);
    }
}

} // namespace voco
