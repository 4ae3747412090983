#pragma once

#include <cstdint>
#include <vector>

#include "voco/archive.hpp"
#include "voco/model.hpp"

namespace voco {

// Adam with decoupled weight decay. Update equations documented in
// docs/TRAINING.md; biases and weights are treated uniformly.
class AdamW {
public:
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;

    void init(const std::vector<Param>& params);
    void step(std::vector<Param>& params, double lr);

    std::int64_t t() const { return t_; }

    void add_to_archive(Archive& a, const std::vector<Param>& params) const;
    void load_from_archive(const Archive& a, const std::vector<Param>& params);

private:
    std::int64_t t_ = 0;
    std::vector<Tensor> m_, v_;
};

} // namespace voco
