#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace voco {

// Dense double tensor; channel-first with x-fastest spatial layout,
// matching Volume's storage order.
struct Tensor {
    std::vector<int> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int> s) : shape(std::move(s)) {
        data.assign(numel_of(shape), 0.0);
    }

    static std::size_t numel_of(const std::vector<int>& s) {
        std::size_t n = 1;
        for (int d : s) n *= static_cast<std::size_t>(d);
        return n;
    }
    std::size_t numel() const { return data.size(); }

    double& operator[](std::size_t i) { return data[i]; }
    double operator[](std::size_t i) const { return data[i]; }

    void zero() { std::fill(data.begin(), data.end(), 0.0); }
};

} // namespace voco
