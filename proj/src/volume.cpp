#include "voco/volume.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace voco {

Volume::Volume(Shape3 s, std::array<float, 3> sp, std::string vid)
    : shape(s), spacing(sp), id(std::move(vid)) {
    for (int a = 0; a < 3; ++a) {
        if (shape[a] < 1) throw ConfigError("Volume: dimension " + std::to_string(a) + " must be >= 1");
    }
    data.assign(static_cast<std::size_t>(shape[0]) * shape[1] * shape[2], 0.f);
}

void PhantomSpec::validate() const {
    if (num_organs <= 0) throw ConfigError("PhantomSpec: num_organs must be positive");
    if (static_cast<int>(organ_centers.size()) != num_organs ||
        static_cast<int>(organ_radii.size()) != num_organs)
        throw ConfigError("PhantomSpec: organ_centers/organ_radii size must equal num_organs");
    if (jitter < 0.0 || noise_level < 0.0)
        throw ConfigError("PhantomSpec: jitter and noise_level must be non-negative");
    for (int k = 0; k < num_organs; ++k) {
        if (organ_radii[k] <= 0.0)
            throw ConfigError("PhantomSpec: organ " + std::to_string(k) + " has non-positive radius");
        for (int a = 0; a < 3; ++a) {
            double c = organ_centers[k][a];
            if (c - jitter < 0.0 || c + jitter > 1.0)
                throw ConfigError("PhantomSpec: organ " + std::to_string(k) +
                                  " may leave the unit cube under jitter (axis " + std::to_string(a) + ")");
        }
    }
}

Volume generate_phantom(const PhantomSpec& spec, std::uint64_t sample_seed, Shape3 shape) {
    spec.validate();
    for (int a = 0; a < 3; ++a) {
        if (shape[a] < 8) throw ConfigError("generate_phantom: shape dims must be >= 8");
    }

    std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                      static_cast<std::uint32_t>(sample_seed), static_cast<std::uint32_t>(sample_seed >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);

    std::vector<std::array<double, 3>> centers(spec.num_organs);
    for (int k = 0; k < spec.num_organs; ++k) {
        for (int a = 0; a < 3; ++a) centers[k][a] = spec.organ_centers[k][a] + spec.jitter * uni(rng);
    }

    Volume v(shape, {1.f, 1.f, 1.f}, "phantom-" + std::to_string(spec.seed) + "-" + std::to_string(sample_seed));

    // Organs get distinct peak intensities so their appearance, not just
    // their location, identifies them.
    auto amplitude = [&](int k) {
        return spec.num_organs == 1 ? 0.9 : 0.5 + 0.4 * static_cast<double>(k) / (spec.num_organs - 1);
    };

    std::normal_distribution<double> noise(0.0, 1.0);
    for (int z = 0; z < shape[2]; ++z) {
        double fz = shape[2] > 1 ? static_cast<double>(z) / (shape[2] - 1) : 0.5;
        for (int y = 0; y < shape[1]; ++y) {
            double fy = shape[1] > 1 ? static_cast<double>(y) / (shape[1] - 1) : 0.5;
            for (int x = 0; x < shape[0]; ++x) {
                double fx = shape[0] > 1 ? static_cast<double>(x) / (shape[0] - 1) : 0.5;
                double val = 0.0;
                for (int k = 0; k < spec.num_organs; ++k) {
                    double dx = fx - centers[k][0], dy = fy - centers[k][1], dz = fz - centers[k][2];
                    double r2 = dx * dx + dy * dy + dz * dz;
                    double s2 = spec.organ_radii[k] * spec.organ_radii[k];
                    val += amplitude(k) * std::exp(-0.5 * r2 / s2);
                }
                if (spec.noise_level > 0.0) val += spec.noise_level * noise(rng);
                v.at(x, y, z) = static_cast<float>(std::clamp(val, 0.0, 1.0));
            }
        }
    }
    return v;
}

namespace {

constexpr char kMagic[4] = {'V', 'O', 'L', '1'};

void put_u32(std::ostream& os, std::uint32_t x) {
    unsigned char b[4] = {static_cast<unsigned char>(x), static_cast<unsigned char>(x >> 8),
                          static_cast<unsigned char>(x >> 16), static_cast<unsigned char>(x >> 24)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t get_u32(std::istream& is) {
    unsigned char b[4];
    is.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

} // namespace

void write_volume(const Volume& v, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("write_volume: cannot open " + path);
    os.write(kMagic, 4);
    for (int a = 0; a < 3; ++a) put_u32(os, static_cast<std::uint32_t>(v.shape[a]));
    os.write(reinterpret_cast<const char*>(v.spacing.data()), 3 * sizeof(float));
    os.write(reinterpret_cast<const char*>(v.data.data()),
             static_cast<std::streamsize>(v.data.size() * sizeof(float)));
    if (!os) throw IoError("write_volume: write failed for " + path);
}

Volume read_volume(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("read_volume: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("read_volume: bad magic bytes in " + path);

    Shape3 shape;
    for (int a = 0; a < 3; ++a) {
        std::uint32_t d = get_u32(is);
        if (!is) throw FormatError("read_volume: header truncated in " + path);
        if (d == 0 || d > (1u << 24))
            throw FormatError("read_volume: invalid dimension " + std::to_string(d) + " in " + path);
        shape[a] = static_cast<int>(d);
    }
    std::array<float, 3> spacing;
    is.read(reinterpret_cast<char*>(spacing.data()), 3 * sizeof(float));
    if (!is) throw FormatError("read_volume: header truncated in " + path);

    Volume v(shape, spacing, path);
    is.read(reinterpret_cast<char*>(v.data.data()),
            static_cast<std::streamsize>(v.data.size() * sizeof(float)));
    if (static_cast<std::size_t>(is.gcount()) != v.data.size() * sizeof(float))
        throw TruncationError("read_volume: declared size exceeds payload in " + path);
    is.peek();
    if (!is.eof()) throw FormatError("read_volume: trailing bytes after payload in " + path);
    for (float f : v.data) {
        if (!std::isfinite(f)) throw FormatError("read_volume: non-finite intensity in " + path);
    }
    return v;
}

Volume resize_volume(const Volume& v, Shape3 target_shape) {
    for (int a = 0; a < 3; ++a) {
        if (target_shape[a] < 1) throw ConfigError("resize_volume: target dims must be >= 1");
    }
    if (target_shape == v.shape) return v;

    Volume out(target_shape, v.spacing, v.id);
    std::array<double, 3> scale;
    for (int a = 0; a < 3; ++a) scale[a] = static_cast<double>(v.shape[a]) / target_shape[a];

    auto sample_axis = [](double coord, int dim, int& i0, int& i1, double& frac) {
        coord = std::clamp(coord, 0.0, static_cast<double>(dim - 1));
        i0 = static_cast<int>(std::floor(coord));
        i1 = std::min(i0 + 1, dim - 1);
        frac = coord - i0;
    };

    for (int z = 0; z < target_shape[2]; ++z) {
        int z0, z1; double fz;
        sample_axis((z + 0.5) * scale[2] - 0.5, v.shape[2], z0, z1, fz);
        for (int y = 0; y < target_shape[1]; ++y) {
            int y0, y1; double fy;
            sample_axis((y + 0.5) * scale[1] - 0.5, v.shape[1], y0, y1, fy);
            for (int x = 0; x < target_shape[0]; ++x) {
                int x0, x1; double fx;
                sample_axis((x + 0.5) * scale[0] - 0.5, v.shape[0], x0, x1, fx);
                double c00 = v.at(x0, y0, z0) * (1 - fx) + v.at(x1, y0, z0) * fx;
                double c10 = v.at(x0, y1, z0) * (1 - fx) + v.at(x1, y1, z0) * fx;
                double c01 = v.at(x0, y0, z1) * (1 - fx) + v.at(x1, y0, z1) * fx;
                double c11 = v.at(x0, y1, z1) * (1 - fx) + v.at(x1, y1, z1) * fx;
                double c0 = c00 * (1 - fy) + c10 * fy;
                double c1 = c01 * (1 - fy) + c11 * fy;
                out.at(x, y, z) = static_cast<float>(c0 * (1 - fz) + c1 * fz);
            }
        }
    }
    return out;
}

} // namespace voco
