// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lipt/attention.hpp"
#include "lipt/hrm.hpp"
#include "lipt/tensor.hpp"
#include "lipt/weights_io.hpp"

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace lipt {

struct LIPTConfig {
    int blocks = 8;       // L
    int channels = 24;    // C, even
    int window = 8;       // p, even
    int expansion = 2;    // s
    int scale = 2;        // r, 1 for same-size restoration
    int in_channels = 3;
    int cb_per_msa = 3;   // conv blocks per attention inside one block
    int heads = 0;        // 0 = auto: 2 when path width >= 32, else 1
    bool enable_slwa = true;
    bool enable_dlwa = true;
    bool enable_sobel = true;
    bool hrm_off = false; // plain two-conv blocks instead of HRM branches

    void validate() const;
};

// tiny: L=8 C=24 p=8; small: L=10 C=64 p=8; base: L=22 C=144 p=16; all s=2.
LIPTConfig preset_config(const std::string& name);
// Accepts a preset name or a path to a JSON config file.
LIPTConfig load_config(const std::string& name_or_path);

using HRMSlot = std::variant<HRMWeights, FusedHRM>;

// One LIPT block: slots run in order hrms[0..k-2], attention, hrms[k-1].
struct BlockWeights {
    std::vector<HRMSlot> hrms;
    NVSMWeights attn;
};

struct LIPTWeights {
    LIPTConfig config;
    ConvWeights shallow; // 3x3, in -> C
    std::vector<BlockWeights> blocks;
    ConvWeights recon;   // 3x3, C -> in * r^2
    bool fused = false;
};

// Deterministic init: conv kernels uniform in +-1/sqrt(3*fan_in) (fan-in
// init damped so the preset-depth residual stacks keep O(1) activations),
// zero biases, Sobel scales 0.1. Per-tensor streams keyed by parameter name,
// so the same (config, seed) rebuilds identical weights in any traversal or
// thread order.
LIPTWeights build(const LIPTConfig& config, std::uint64_t seed);

// Reflect-pad to multiples of p, shallow conv, L blocks, recon on the global
// residual sum, pixel shuffle for r > 1, crop to r x input size.
Tensor forward(const Tensor& x, const LIPTWeights& w);

// Replace every HRM slot by its fused pair. Throws on already-fused input.
LIPTWeights fuse_model(const LIPTWeights& w);

double l1_loss(const Tensor& pred, const Tensor& target);
double charbonnier_loss(const Tensor& pred, const Tensor& target, double eps = 1e-3);
// d/dpred of the elementwise-mean Charbonnier at one element.
double charbonnier_grad(double pred, double target, double eps = 1e-3);

struct ModelCounts {
    std::uint64_t params = 0;
    std::uint64_t macs = 0;
};

// Exact enumeration of every conv/attention op the forward executes at the
// given input resolution. MACs use the dense zero-padding convention
// (borders count full taps); biases are params, not MACs.
ModelCounts count_params_and_macs(const LIPTConfig& config, int h, int w, bool fused);

// Flat named-tensor view for serialization. Kernels are rank 4, per-channel
// vectors rank 1; a "__config__" pseudo-entry carries the architecture so
// weight files are self-describing.
std::vector<WeightEntry> export_weights(const LIPTWeights& w);
LIPTWeights import_weights(const std::vector<WeightEntry>& entries);

} // namespace lipt
