#include "voco/archive.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>

#include "voco/errors.hpp"

namespace voco {

namespace {
constexpr char kMagic[4] = {'V', 'C', 'K', '1'};
}

const Tensor* Archive::find(const std::string& name) const {
    for (const auto& [n, t] : tensors)
        if (n == name) return &t;
    return nullptr;
}

void Archive::save(const std::string& path) const {
    nlohmann::json header;
    header["dtype"] = "f64";
    header["meta"] = meta;
    header["tensors"] = nlohmann::json::array();
    std::uint64_t offset = 0;
    for (const auto& [name, t] : tensors) {
        header["tensors"].push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}});
        offset += t.numel() * sizeof(double);
    }
    const std::string hs = header.dump();

    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw IoError("Archive::save: cannot open " + tmp);
        os.write(kMagic, 4);
        std::uint64_t hlen = hs.size();
        unsigned char b[8];
        for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(hlen >> (8 * i));
        os.write(reinterpret_cast<const char*>(b), 8);
        os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
        for (const auto& [name, t] : tensors)
            os.write(reinterpret_cast<const char*>(t.data.data()),
                     static_cast<std::streamsize>(t.numel() * sizeof(double)));
        if (!os) throw IoError("Archive::save: write failed for " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw IoError("Archive::save: rename to " + path + " failed");
}

Archive Archive::load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("Archive::load: cannot open " + path);
    char magic[4];
    is.read(magic, 4);
    if (!is || std::memcmp(magic, kMagic, 4) != 0)
        throw CheckpointError("Archive::load: bad magic in " + path);
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    if (!is) throw CheckpointError("Archive::load: truncated header length in " + path);
    std::uint64_t hlen = 0;
    for (int i = 0; i < 8; ++i) hlen |= static_cast<std::uint64_t>(b[i]) << (8 * i);
    if (hlen > (1ull << 30)) throw CheckpointError("Archive::load: implausible header size in " + path);

    std::string hs(hlen, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(hlen));
    if (!is) throw CheckpointError("Archive::load: truncated header in " + path);

    nlohmann::json header = nlohmann::json::parse(hs, nullptr, false);
    if (header.is_discarded() || !header.contains("tensors") || !header.contains("meta") ||
        header.value("dtype", "") != "f64")
        throw CheckpointError("Archive::load: corrupted manifest in " + path);

    Archive a;
    a.meta = header["meta"];
    std::uint64_t expected_offset = 0;
    for (const auto& e : header["tensors"]) {
        if (!e.contains("name") || !e.contains("shape") || !e.contains("offset"))
            throw CheckpointError("Archive::load: corrupted tensor entry in " + path);
        if (e["offset"].get<std::uint64_t>() != expected_offset)
            throw CheckpointError("Archive::load: inconsistent tensor offsets in " + path);
        Tensor t(e["shape"].get<std::vector<int>>());
        is.read(reinterpret_cast<char*>(t.data.data()),
                static_cast<std::streamsize>(t.numel() * sizeof(double)));
        if (static_cast<std::size_t>(is.gcount()) != t.numel() * sizeof(double))
            throw CheckpointError("Archive::load: truncated tensor data in " + path);
        expected_offset += t.numel() * sizeof(double);
        a.tensors.emplace_back(e["name"].get<std::string>(), std::move(t));
    }
    return a;
}

} // namespace voco
