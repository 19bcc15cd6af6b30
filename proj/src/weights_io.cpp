// SPDX-License-Identifier: Apache-2.0
#include "lipt/weights_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <unordered_set>

namespace lipt {

static constexpr char kMagic[6] = {'L', 'I', 'P', 'T', 'W', '1'};
static constexpr std::uint16_t kVersion = 1;

static void put_u16(std::string& out, std::uint16_t v) {
    out.push_back(static_cast<char>(v & 0xff));
    out.push_back(static_cast<char>(v >> 8));
}

static void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void write_weight_file(const std::string& path, const std::vector<WeightEntry>& entries) {
    std::string buf;
    buf.append(kMagic, sizeof(kMagic));
    put_u16(buf, kVersion);
    if (entries.size() > std::numeric_limits<std::uint32_t>::max())
        throw std::invalid_argument("weight file: too many entries");
    put_u32(buf, static_cast<std::uint32_t>(entries.size()));

    std::unordered_set<std::string> seen;
    for (const WeightEntry& e : entries) {
        if (!seen.insert(e.name).second)
            throw std::invalid_argument("weight file: duplicate entry name \"" + e.name + "\"");
        if (e.name.size() > std::numeric_limits<std::uint16_t>::max() || e.dims.size() > 255)
            throw std::invalid_argument("weight file: entry \"" + e.name + "\" out of format range");
        std::uint64_t n = 1;
        for (std::uint32_t d : e.dims)
            n *= d;
        if (n != e.data.size())
            throw std::invalid_argument("weight file: entry \"" + e.name +
                                        "\" payload does not match dims");
        put_u16(buf, static_cast<std::uint16_t>(e.name.size()));
        buf.append(e.name);
        buf.push_back(static_cast<char>(e.dims.size()));
        for (std::uint32_t d : e.dims)
            put_u32(buf, d);
        for (float f : e.data)
            put_u32(buf, std::bit_cast<std::uint32_t>(f));
    }

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out)
        throw std::runtime_error("short write to " + path);
}

namespace {
struct Reader {
    const std::string& buf;
    std::size_t pos = 0;

    void need(std::size_t n) const {
        if (pos + n > buf.size())
            throw std::runtime_error("weight file truncated");
    }
    std::uint16_t u16() {
        need(2);
        const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
        pos += 2;
        return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
    }
    std::uint32_t u32() {
        need(4);
        const auto* p = reinterpret_cast<const unsigned char*>(buf.data() + pos);
        pos += 4;
        return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
               (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
    }
};
} // namespace

std::vector<WeightEntry> read_weight_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::string buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    Reader r{buf};
    r.need(sizeof(kMagic));
    if (std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error(path + " is not a LIPTW1 weight file");
    r.pos = sizeof(kMagic);
    const std::uint16_t version = r.u16();
    if (version != kVersion)
        throw std::runtime_error(path + ": unsupported weight file version " +
                                 std::to_string(version));
    const std::uint32_t count = r.u32();

    std::vector<WeightEntry> entries;
    entries.reserve(count);
    std::unordered_set<std::string> seen;
    for (std::uint32_t i = 0; i < count; ++i) {
        WeightEntry e;
        const std::uint16_t name_len = r.u16();
        r.need(name_len);
        e.name.assign(buf, r.pos, name_len);
        r.pos += name_len;
        if (!seen.insert(e.name).second)
            throw std::runtime_error(path + ": duplicate entry name \"" + e.name + "\"");
        r.need(1);
        const int rank = static_cast<unsigned char>(buf[r.pos++]);
        std::uint64_t n = 1;
        e.dims.resize(static_cast<std::size_t>(rank));
        for (int d = 0; d < rank; ++d) {
            e.dims[static_cast<std::size_t>(d)] = r.u32();
            n *= e.dims[static_cast<std::size_t>(d)];
        }
        if (n > (1ULL << 31))
            throw std::runtime_error(path + ": entry \"" + e.name + "\" is implausibly large");
        e.data.resize(static_cast<std::size_t>(n));
        for (std::uint64_t k = 0; k < n; ++k)
            e.data[static_cast<std::size_t>(k)] = std::bit_cast<float>(r.u32());
        entries.push_back(std::move(e));
    }
    if (r.pos != buf.size())
        throw std::runtime_error(path + ": trailing bytes after last entry");
    return entries;
}

} // namespace lipt
