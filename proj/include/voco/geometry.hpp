#pragma once

#include <random>
#include <vector>

#include "voco/volume.hpp"

namespace voco {

// Axis-aligned box in voxel coordinates, origin inclusive.
struct CropRegion {
    Shape3 origin{0, 0, 0};
    Shape3 size{0, 0, 0};

    long long voxels() const {
        return static_cast<long long>(size[0]) * size[1] * size[2];
    }
    bool operator==(const CropRegion&) const = default;
};

// Non-overlapping equal cells tiling a volume; row-major order, x fastest.
struct BaseGrid {
    Shape3 volume_shape{0, 0, 0};
    Shape3 grid{0, 0, 0};
    Shape3 cell_size{0, 0, 0};
    std::vector<CropRegion> cells;

    int num_cells() const { return grid[0] * grid[1] * grid[2]; }
    int cell_index(int ix, int iy, int iz) const { return ix + grid[0] * (iy + grid[1] * iz); }
};

// Throws ConfigError naming the offending axis when shape is not divisible.
BaseGrid make_base_grid(Shape3 volume_shape, Shape3 grid);

// Uniform over all origins keeping the crop fully inside the volume.
CropRegion sample_random_crop(Shape3 volume_shape, Shape3 crop_size, std::mt19937_64& rng);

// Overlap proportions between the crop and each grid cell; sums to 1.
// Computed from exact integer voxel overlaps.
std::vector<double> position_label(const CropRegion& crop, const BaseGrid& grid);

// Exact integer voxel overlap between two regions.
long long overlap_voxels(const CropRegion& a, const CropRegion& b);

Volume extract_crop(const Volume& v, const CropRegion& region);
Volume crop_and_resize(const Volume& v, const CropRegion& region, Shape3 out_shape);

// Whole-volume augmentations applied before tiling so labels stay valid.
Volume flip_volume(const Volume& v, int axis);
Volume rotate90_z(const Volume& v, int quarter_turns); // requires nx == ny

} // namespace voco
