#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "voco/tensor.hpp"

namespace voco {

// Named-tensor archive backing checkpoints.
//
// Layout: 4-byte magic "VCK1"; uint64le header length; JSON header
// { "meta": {...}, "tensors": [{"name","shape","offset"}...], "dtype": "f64" };
// then the raw float64 little-endian blobs. Offsets are byte offsets from
// the start of the blob section. Writes are atomic (temp file + rename).
struct Archive {
    nlohmann::json meta;
    std::vector<std::pair<std::string, Tensor>> tensors;

    void add(const std::string& name, const Tensor& t) { tensors.emplace_back(name, t); }
    const Tensor* find(const std::string& name) const;

    void save(const std::string& path) const;
    static Archive load(const std::string& path);
};

} // namespace voco
