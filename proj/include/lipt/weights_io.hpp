// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace lipt {

// One named f32 tensor inside a weight file.
struct WeightEntry {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    bool operator==(const WeightEntry&) const = default;
};

// Binary container: magic "LIPTW1", version u16, entry count u32, then per
// entry: name length u16, name bytes, rank u8, dims u32 each, raw f32
// payload. All multi-byte values little-endian. Round-trips bitwise.
void write_weight_file(const std::string& path, const std::vector<WeightEntry>& entries);
std::vector<WeightEntry> read_weight_file(const std::string& path);

} // namespace lipt
