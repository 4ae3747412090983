#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "voco/volume.hpp"

using namespace voco;
namespace fs = std::filesystem;

namespace {

PhantomSpec single_organ_spec() {
    PhantomSpec s;
    s.num_organs = 1;
    s.organ_centers = {{0.5, 0.5, 0.5}};
    s.organ_radii = {0.2};
    s.jitter = 0.0;
    s.noise_level = 0.0;
    s.seed = 3;
    return s;
}

std::string tmp_path(const std::string& name) {
    return (fs::temp_directory_path() / name).string();
}

// Independent trilinear oracle: same half-pixel convention, written as a
// direct 8-corner weighted sum over clamped integer coordinates.
float oracle_sample(const Volume& v, Shape3 out_shape, int x, int y, int z) {
    double coords[3];
    int xi[3][2];
    double w[3];
    int q[3] = {x, y, z};
    for (int a = 0; a < 3; ++a) {
        double c = (q[a] + 0.5) * static_cast<double>(v.shape[a]) / out_shape[a] - 0.5;
        if (c < 0) c = 0;
        if (c > v.shape[a] - 1) c = v.shape[a] - 1;
        coords[a] = c;
        xi[a][0] = static_cast<int>(std::floor(c));
        xi[a][1] = xi[a][0] + 1 < v.shape[a] ? xi[a][0] + 1 : v.shape[a] - 1;
        w[a] = c - xi[a][0];
    }
    double acc = 0.0;
    for (int cz = 0; cz < 2; ++cz)
        for (int cy = 0; cy < 2; ++cy)
            for (int cx = 0; cx < 2; ++cx) {
                double weight = (cx ? w[0] : 1 - w[0]) * (cy ? w[1] : 1 - w[1]) * (cz ? w[2] : 1 - w[2]);
                acc += weight * v.at(xi[0][cx], xi[1][cy], xi[2][cz]);
            }
    return static_cast<float>(acc);
}

} // namespace

TEST_CASE("phantom: single centered organ peaks at the center voxel") {
    Volume v = generate_phantom(single_organ_spec(), 0, {9, 9, 9});
    std::size_t best = 0;
    for (std::size_t i = 0; i < v.data.size(); ++i)
        if (v.data[i] > v.data[best]) best = i;
    CHECK(best == v.index(4, 4, 4));
}

TEST_CASE("phantom: deterministic for fixed spec and sample seed") {
    PhantomSpec s = single_organ_spec();
    s.num_organs = 2;
    s.organ_centers = {{0.3, 0.4, 0.5}, {0.7, 0.6, 0.5}};
    s.organ_radii = {0.1, 0.15};
    s.jitter = 0.05;
    s.noise_level = 0.05;
    Volume a = generate_phantom(s, 42, {16, 16, 16});
    Volume b = generate_phantom(s, 42, {16, 16, 16});
    CHECK(a.data == b.data);
    Volume c = generate_phantom(s, 43, {16, 16, 16});
    CHECK(a.data != c.data);
}

TEST_CASE("phantom: intensities stay within [0,1] and finite") {
    PhantomSpec s = single_organ_spec();
    s.noise_level = 0.3;
    Volume v = generate_phantom(s, 5, {12, 12, 12});
    for (float f : v.data) {
        CHECK(std::isfinite(f));
        CHECK(f >= 0.f);
        CHECK(f <= 1.f);
    }
}

TEST_CASE("phantom: per-organ mean center stays within jitter of nominal") {
    PhantomSpec s;
    s.num_organs = 4;
    s.organ_centers = {{0.25, 0.25, 0.5}, {0.75, 0.25, 0.5}, {0.25, 0.75, 0.5}, {0.75, 0.75, 0.5}};
    s.organ_radii = {0.08, 0.08, 0.08, 0.08};
    s.jitter = 0.04;
    s.noise_level = 0.0;
    s.seed = 11;

    const Shape3 shape{33, 33, 33};
    std::vector<std::array<double, 3>> mean(4, {0, 0, 0});
    const int samples = 100;
    for (int t = 0; t < samples; ++t) {
        Volume v = generate_phantom(s, static_cast<std::uint64_t>(t), shape);
        // local argmax inside a box around each nominal center
        for (int k = 0; k < 4; ++k) {
            int bx = 0, by = 0, bz = 0;
            float best = -1.f;
            for (int z = 0; z < shape[2]; ++z)
                for (int y = 0; y < shape[1]; ++y)
                    for (int x = 0; x < shape[0]; ++x) {
                        double fx = x / 32.0, fy = y / 32.0, fz = z / 32.0;
                        if (std::abs(fx - s.organ_centers[k][0]) > 0.12 ||
                            std::abs(fy - s.organ_centers[k][1]) > 0.12 ||
                            std::abs(fz - s.organ_centers[k][2]) > 0.12)
                            continue;
                        if (v.at(x, y, z) > best) {
                            best = v.at(x, y, z);
                            bx = x; by = y; bz = z;
                        }
                    }
            mean[k][0] += bx / 32.0;
            mean[k][1] += by / 32.0;
            mean[k][2] += bz / 32.0;
        }
    }
    for (int k = 0; k < 4; ++k)
        for (int a = 0; a < 3; ++a) {
            double m = mean[k][a] / samples;
            // Monte Carlo mean of U(-j,+j) jitter plus half-voxel quantization.
            CHECK(std::abs(m - s.organ_centers[k][a]) <= s.jitter);
        }
}

TEST_CASE("phantom: spec validation rejects out-of-cube organs") {
    PhantomSpec s = single_organ_spec();
    s.organ_centers = {{0.02, 0.5, 0.5}};
    s.jitter = 0.05;
    CHECK_THROWS_AS(generate_phantom(s, 0, {16, 16, 16}), ConfigError);
    CHECK_THROWS_WITH_AS(generate_phantom(s, 0, {16, 16, 16}),
                         doctest::Contains("organ 0"), ConfigError);
}

TEST_CASE("phantom: rejects tiny shapes") {
    CHECK_THROWS_AS(generate_phantom(single_organ_spec(), 0, {4, 16, 16}), ConfigError);
}

TEST_CASE("VOL1: write/read round trip is the identity") {
    PhantomSpec s = single_organ_spec();
    s.noise_level = 0.1;
    Volume v = generate_phantom(s, 9, {11, 13, 10});
    v.spacing = {1.5f, 1.5f, 2.f};
    const std::string path = tmp_path("voco_rt.vol1");
    write_volume(v, path);
    Volume r = read_volume(path);
    CHECK(r.shape == v.shape);
    CHECK(r.spacing == v.spacing);
    CHECK(r.data == v.data);
    fs::remove(path);
}

TEST_CASE("VOL1: wrong magic bytes is a format error") {
    const std::string path = tmp_path("voco_badmagic.vol1");
    std::ofstream os(path, std::ios::binary);
    os << "NOPE" << std::string(64, '\0');
    os.close();
    CHECK_THROWS_AS(read_volume(path), FormatError);
    fs::remove(path);
}

TEST_CASE("VOL1: declared size exceeding payload is a truncation error") {
    Volume v = generate_phantom(single_organ_spec(), 1, {10, 10, 10});
    const std::string path = tmp_path("voco_trunc.vol1");
    write_volume(v, path);
    fs::resize_file(path, fs::file_size(path) - 100);
    CHECK_THROWS_AS(read_volume(path), TruncationError);
    fs::remove(path);
}

TEST_CASE("VOL1: zero dimension is a format error") {
    const std::string path = tmp_path("voco_dim.vol1");
    std::ofstream os(path, std::ios::binary);
    os << "VOL1";
    std::uint32_t dims[3] = {0, 4, 4};
    float spacing[3] = {1, 1, 1};
    os.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    os.write(reinterpret_cast<const char*>(spacing), sizeof(spacing));
    os.close();
    CHECK_THROWS_AS(read_volume(path), FormatError);
    fs::remove(path);
}

TEST_CASE("resize: identical shape returns an identical grid") {
    Volume v = generate_phantom(single_organ_spec(), 2, {12, 10, 8});
    Volume r = resize_volume(v, v.shape);
    CHECK(r.data == v.data);
}

TEST_CASE("resize: constant volume stays constant at any shape") {
    Volume v({6, 7, 8}, {1, 1, 1}, "const");
    std::fill(v.data.begin(), v.data.end(), 0.37f);
    for (Shape3 target : {Shape3{3, 3, 3}, Shape3{13, 5, 16}, Shape3{1, 1, 1}}) {
        Volume r = resize_volume(v, target);
        for (float f : r.data) CHECK(f == doctest::Approx(0.37f).epsilon(1e-7));
    }
}

TEST_CASE("resize: agrees with an independent trilinear oracle") {
    Volume v({17, 9, 7}, {1, 1, 1}, "ramp");
    for (int z = 0; z < 7; ++z)
        for (int y = 0; y < 9; ++y)
            for (int x = 0; x < 17; ++x)
                v.at(x, y, z) = 0.01f * x + 0.03f * y + 0.05f * z;
    Shape3 target{23, 6, 11};
    Volume r = resize_volume(v, target);
    std::mt19937_64 rng(5);
    for (int t = 0; t < 10; ++t) {
        int x = static_cast<int>(rng() % 23), y = static_cast<int>(rng() % 6), z = static_cast<int>(rng() % 11);
        CHECK(r.at(x, y, z) == doctest::Approx(oracle_sample(v, target, x, y, z)).epsilon(1e-5));
    }
}

TEST_CASE("resize: output never exceeds input extrema") {
    PhantomSpec s = single_organ_spec();
    s.noise_level = 0.2;
    Volume v = generate_phantom(s, 17, {14, 12, 10});
    float lo = 1e9f, hi = -1e9f;
    for (float f : v.data) { lo = std::min(lo, f); hi = std::max(hi, f); }
    for (Shape3 target : {Shape3{28, 24, 20}, Shape3{5, 5, 5}, Shape3{31, 3, 9}}) {
        Volume r = resize_volume(v, target);
        for (float f : r.data) {
            CHECK(f >= lo - 1e-6f);
            CHECK(f <= hi + 1e-6f);
        }
    }
}
