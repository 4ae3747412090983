#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "voco/errors.hpp"

namespace voco {

using Shape3 = std::array<int, 3>;

// 3D scalar intensity grid, x-fastest storage, intensities in [0,1].
struct Volume {
    Shape3 shape{0, 0, 0};                    // (nx, ny, nz)
    std::array<float, 3> spacing{1.f, 1.f, 1.f};
    std::string id;
    std::vector<float> data;                  // size nx*ny*nz, index x + nx*(y + ny*z)

    Volume() = default;
    Volume(Shape3 s, std::array<float, 3> sp, std::string vid);

    std::size_t numel() const { return data.size(); }
    std::size_t index(int x, int y, int z) const {
        return static_cast<std::size_t>(x) +
               static_cast<std::size_t>(shape[0]) *
                   (static_cast<std::size_t>(y) + static_cast<std::size_t>(shape[1]) * z);
    }
    float at(int x, int y, int z) const { return data[index(x, y, z)]; }
    float& at(int x, int y, int z) { return data[index(x, y, z)]; }
};

// Synthetic phantom: soft blobs ("organs") at consistent nominal positions.
struct PhantomSpec {
    int num_organs = 0;
    std::vector<std::array<double, 3>> organ_centers; // fractional, in [0,1]^3
    std::vector<double> organ_radii;                  // fractional
    double jitter = 0.0;                              // max per-axis center perturbation
    double noise_level = 0.0;                         // additive Gaussian std
    std::uint64_t seed = 0;

    // Throws ConfigError (naming the organ index) if any jittered center
    // could leave the unit cube, or sizes are inconsistent.
    void validate() const;
};

Volume generate_phantom(const PhantomSpec& spec, std::uint64_t sample_seed, Shape3 shape);

// "VOL1" format: magic, 3x uint32le dims, 3x float32le spacing, float32le payload.
void write_volume(const Volume& v, const std::string& path);
Volume read_volume(const std::string& path);

// Trilinear resampling with half-pixel coordinate mapping; exact identity
// when target_shape == shape, output extrema bounded by input extrema.
Volume resize_volume(const Volume& v, Shape3 target_shape);

} // namespace voco
