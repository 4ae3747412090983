#include "voco/geometry.hpp"

#include <algorithm>
#include <string>

namespace voco {

BaseGrid make_base_grid(Shape3 volume_shape, Shape3 grid) {
    static const char* axis_name[3] = {"x", "y", "z"};
    for (int a = 0; a < 3; ++a) {
        if (grid[a] < 1) throw ConfigError("make_base_grid: grid count must be >= 1 on axis " + std::string(axis_name[a]));
        if (volume_shape[a] % grid[a] != 0)
            throw ConfigError("make_base_grid: volume dim " + std::to_string(volume_shape[a]) +
                              " not divisible by grid " + std::to_string(grid[a]) +
                              " on axis " + std::string(axis_name[a]));
    }
    BaseGrid g;
    g.volume_shape = volume_shape;
    g.grid = grid;
    for (int a = 0; a < 3; ++a) g.cell_size[a] = volume_shape[a] / grid[a];
    g.cells.reserve(static_cast<std::size_t>(g.num_cells()));
    for (int iz = 0; iz < grid[2]; ++iz)
        for (int iy = 0; iy < grid[1]; ++iy)
            for (int ix = 0; ix < grid[0]; ++ix)
                g.cells.push_back({{ix * g.cell_size[0], iy * g.cell_size[1], iz * g.cell_size[2]}, g.cell_size});
    return g;
}

CropRegion sample_random_crop(Shape3 volume_shape, Shape3 crop_size, std::mt19937_64& rng) {
    CropRegion r;
    r.size = crop_size;
    for (int a = 0; a < 3; ++a) {
        if (crop_size[a] < 1 || crop_size[a] > volume_shape[a])
            throw ConfigError("sample_random_crop: crop size " + std::to_string(crop_size[a]) +
                              " invalid for volume dim " + std::to_string(volume_shape[a]));
        std::uniform_int_distribution<int> dist(0, volume_shape[a] - crop_size[a]);
        r.origin[a] = dist(rng);
    }
    return r;
}

long long overlap_voxels(const CropRegion& a, const CropRegion& b) {
    long long ov = 1;
    for (int ax = 0; ax < 3; ++ax) {
        int lo = std::max(a.origin[ax], b.origin[ax]);
        int hi = std::min(a.origin[ax] + a.size[ax], b.origin[ax] + b.size[ax]);
        if (hi <= lo) return 0;
        ov *= hi - lo;
    }
    return ov;
}

std::vector<double> position_label(const CropRegion& crop, const BaseGrid& grid) {
    for (int a = 0; a < 3; ++a) {
        if (crop.origin[a] < 0 || crop.size[a] < 1 ||
            crop.origin[a] + crop.size[a] > grid.volume_shape[a])
            throw ConfigError("position_label: crop outside the tiled region");
    }
    const long long total = crop.voxels();
    std::vector<double> y(grid.cells.size(), 0.0);
    for (std::size_t i = 0; i < grid.cells.size(); ++i)
        y[i] = static_cast<double>(overlap_voxels(crop, grid.cells[i])) / static_cast<double>(total);
    return y;
}

Volume extract_crop(const Volume& v, const CropRegion& region) {
    for (int a = 0; a < 3; ++a) {
        if (region.origin[a] < 0 || region.size[a] < 1 ||
            region.origin[a] + region.size[a] > v.shape[a])
            throw ConfigError("extract_crop: region outside volume");
    }
    Volume out(region.size, v.spacing, v.id);
    for (int z = 0; z < region.size[2]; ++z)
        for (int y = 0; y < region.size[1]; ++y)
            for (int x = 0; x < region.size[0]; ++x)
                out.at(x, y, z) = v.at(region.origin[0] + x, region.origin[1] + y, region.origin[2] + z);
    return out;
}

Volume crop_and_resize(const Volume& v, const CropRegion& region, Shape3 out_shape) {
    return resize_volume(extract_crop(v, region), out_shape);
}

Volume flip_volume(const Volume& v, int axis) {
    Volume out(v.shape, v.spacing, v.id);
    for (int z = 0; z < v.shape[2]; ++z)
        for (int y = 0; y < v.shape[1]; ++y)
            for (int x = 0; x < v.shape[0]; ++x) {
                int s[3] = {x, y, z};
                s[axis] = v.shape[axis] - 1 - s[axis];
                out.at(x, y, z) = v.at(s[0], s[1], s[2]);
            }
    return out;
}

Volume rotate90_z(const Volume& v, int quarter_turns) {
    int k = ((quarter_turns % 4) + 4) % 4;
    if (k == 0) return v;
    if (v.shape[0] != v.shape[1])
        throw ConfigError("rotate90_z: requires nx == ny");
    Volume out(v.shape, v.spacing, v.id);
    const int n = v.shape[0];
    for (int z = 0; z < v.shape[2]; ++z)
        for (int y = 0; y < n; ++y)
            for (int x = 0; x < n; ++x) {
                // (x,y) -> (y, n-1-x) applied k times
                int sx = x, sy = y;
                for (int t = 0; t < k; ++t) {
                    int nx = sy, ny = n - 1 - sx;
                    sx = nx; sy = ny;
                }
                out.at(x, y, z) = v.at(sx, sy, z);
            }
    return out;
}

} // namespace voco
