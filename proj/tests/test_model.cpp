// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"

#include "helpers.hpp"
#include "lipt/kernels.hpp"
#include "lipt/model.hpp"
#include "lipt/tensor.hpp"
#include "lipt/weights_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <variant>

using lipt::LIPTConfig;
using lipt::LIPTWeights;
using lipt::Shape;
using lipt::Tensor;

namespace {

LIPTConfig toy_config() {
    LIPTConfig c;
    c.blocks = 1;
    c.channels = 2;
    c.window = 2;
    c.expansion = 2;
    c.scale = 1;
    c.in_channels = 3;
    c.cb_per_msa = 1;
    return c;
}

LIPTConfig toy2_config() {
    LIPTConfig c;
    c.blocks = 2;
    c.channels = 8;
    c.window = 4;
    c.expansion = 2;
    c.scale = 2;
    c.in_channels = 3;
    c.cb_per_msa = 2;
    return c;
}

} // namespace

TEST_CASE("presets carry the published depths, widths and windows") {
    const LIPTConfig tiny = lipt::preset_config("tiny");
    CHECK(tiny.blocks == 8);
    CHECK(tiny.channels == 24);
    CHECK(tiny.window == 8);
    const LIPTConfig small = lipt::preset_config("small");
    CHECK(small.blocks == 10);
    CHECK(small.channels == 64);
    CHECK(small.window == 8);
    const LIPTConfig base = lipt::preset_config("base");
    CHECK(base.blocks == 22);
    CHECK(base.channels == 144);
    CHECK(base.window == 16);
    CHECK(tiny.expansion == 2);
    CHECK(small.expansion == 2);
    CHECK(base.expansion == 2);
    CHECK_THROWS_AS((void)lipt::preset_config("huge"), std::invalid_argument);
}

TEST_CASE("config validation rejects broken settings") {
    LIPTConfig c = toy_config();
    c.channels = 3; // odd
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = toy_config();
    c.window = 3;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = toy_config();
    c.scale = 5;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = toy_config();
    c.enable_slwa = false;
    c.enable_dlwa = false;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c = toy_config();
    c.channels = 6;
    c.heads = 4; // path width 3 not divisible
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("load_config reads JSON files and rejects unknown keys") {
    {
        std::ofstream out("cfg_ok.json");
        out << "{\"blocks\":2,\"channels\":8,\"window\":4,\"scale\":3,\"cb_per_msa\":2}\n";
    }
    const LIPTConfig c = lipt::load_config("cfg_ok.json");
    CHECK(c.blocks == 2);
    CHECK(c.channels == 8);
    CHECK(c.window == 4);
    CHECK(c.scale == 3);
    CHECK(c.expansion == 2); // default kept
    std::remove("cfg_ok.json");

    {
        std::ofstream out("cfg_bad.json");
        out << "{\"blocks\":2,\"chanels\":8}\n"; // typo must not pass silently
    }
    CHECK_THROWS_WITH_AS((void)lipt::load_config("cfg_bad.json"), doctest::Contains("chanels"),
                         std::runtime_error);
    std::remove("cfg_bad.json");

    CHECK_THROWS_AS((void)lipt::load_config("no_such_file.json"), std::runtime_error);
}

TEST_CASE("build is deterministic and respects the init bounds") {
    const LIPTConfig cfg = toy2_config();
    const LIPTWeights a = lipt::build(cfg, 7);
    const LIPTWeights b = lipt::build(cfg, 7);
    const auto ea = lipt::export_weights(a);
    const auto eb = lipt::export_weights(b);
    REQUIRE(ea.size() == eb.size());
    for (std::size_t i = 0; i < ea.size(); ++i)
        CHECK(ea[i] == eb[i]);

    // different seed must differ somewhere
    const auto ec = lipt::export_weights(lipt::build(cfg, 8));
    bool any_diff = false;
    for (std::size_t i = 0; i < ea.size(); ++i)
        any_diff = any_diff || !(ea[i] == ec[i]);
    CHECK(any_diff);

    // damped fan-in init: shallow kernel bound 1/sqrt(3 * 3*9)
    const float bound = 1.0f / std::sqrt(81.0f);
    for (float v : a.shallow.kernel.data) {
        CHECK(v >= -bound);
        CHECK(v <= bound);
    }
    for (float v : a.shallow.bias)
        CHECK(v == 0.0f);
}

TEST_CASE("toy parameter and MAC counts match the closed form") {
    const LIPTConfig cfg = toy_config(); // L=1 C=2 p=2 cb=1 in=3 r=1
    const lipt::ModelCounts unfused = lipt::count_params_and_macs(cfg, 4, 4, false);
    const lipt::ModelCounts fused = lipt::count_params_and_macs(cfg, 4, 4, true);

    // params: shallow 2*3*9+2; per gb: conv3 38 + conv1 6 + pre3 6 +
    // conv3_after 38 + sobel (6+6+8) + avg_pre 6 = 114, HRM = 228;
    // attention: 2 paths * 3 QKV convs (1->1: 2 each) + proj 6 = 18;
    // recon 3*2*9+3 = 57
    CHECK(unfused.params == 56 + 228 + 18 + 57);
    CHECK(fused.params == 56 + 2 * 38 + 18 + 57);

    // macs at 4x4 (16 px, padded field 36 px): shallow 864; per gb:
    // conv3 576 + conv1 64 + pre3 144 + conv3_after 576 + sobel 2*(144+288)
    // + avg_pre 144 + mean 288 = 2656, HRM = 5312; attention: per path
    // 3*1*4*4 + 2*1*16*4 = 176 -> 352, proj 4*16 = 64; recon 864
    CHECK(unfused.macs == 864 + 5312 + 352 + 64 + 864);
    CHECK(fused.macs == 864 + 2 * 576 + 352 + 64 + 864);
}

TEST_CASE("MAC count is linear in depth") {
    LIPTConfig c1 = toy2_config();
    LIPTConfig c2 = toy2_config();
    LIPTConfig c3 = toy2_config();
    c1.blocks = 1;
    c2.blocks = 2;
    c3.blocks = 3;
    const auto m1 = lipt::count_params_and_macs(c1, 32, 32, false);
    const auto m2 = lipt::count_params_and_macs(c2, 32, 32, false);
    const auto m3 = lipt::count_params_and_macs(c3, 32, 32, false);
    CHECK(m2.macs - m1.macs == m3.macs - m2.macs);
    CHECK(m2.params - m1.params == m3.params - m2.params);
}

TEST_CASE("MAC count rounds resolution up to the window size") {
    const LIPTConfig cfg = toy2_config();
    const auto exact = lipt::count_params_and_macs(cfg, 32, 32, false);
    const auto ragged = lipt::count_params_and_macs(cfg, 30, 29, false);
    CHECK(exact.macs == ragged.macs);
}

TEST_CASE("forward obeys the shape law on a toy model") {
    const LIPTConfig cfg = toy2_config(); // r = 2
    const LIPTWeights w = lipt::build(cfg, 1);
    const Tensor x = lipt::rng_uniform(2, {1, 3, 12, 16}, 0.0f, 1.0f);
    const Tensor y = lipt::forward(x, w);
    REQUIRE(y.shape == Shape{1, 3, 24, 32});
    CHECK(lipt::all_finite(y));
}

TEST_CASE("forward pads ragged inputs exactly like a manual reflect pad") {
    LIPTConfig cfg = toy2_config();
    const LIPTWeights w = lipt::build(cfg, 3);
    const Tensor x = lipt::rng_uniform(4, {1, 3, 30, 30}, 0.0f, 1.0f);
    const Tensor direct = lipt::forward(x, w);
    REQUIRE(direct.shape == Shape{1, 3, 60, 60});

    const Tensor padded = lipt::pad_reflect(x, 2, 2);
    const Tensor via_pad = lipt::crop(lipt::forward(padded, w), 60, 60);
    CHECK(lipt::bit_equal(direct, via_pad));
}

TEST_CASE("fuse_model preserves the forward map and shrinks MACs") {
    const LIPTConfig cfg = toy2_config();
    const LIPTWeights w = lipt::build(cfg, 5);
    const LIPTWeights f = lipt::fuse_model(w);
    CHECK(f.fused);
    CHECK(std::holds_alternative<lipt::FusedHRM>(f.blocks[0].hrms[0]));
    const Tensor x = lipt::rng_uniform(6, {1, 3, 16, 16}, 0.0f, 1.0f);
    CHECK(lipt::max_abs_diff(lipt::forward(x, w), lipt::forward(x, f)) <= 1e-4f);
    CHECK_THROWS_AS((void)lipt::fuse_model(f), std::invalid_argument);

    const auto mu = lipt::count_params_and_macs(cfg, 16, 16, false);
    const auto mf = lipt::count_params_and_macs(cfg, 16, 16, true);
    CHECK(mf.macs < mu.macs);
    CHECK(mf.params < mu.params);
}

TEST_CASE("every preset agrees between fused and training forms at 32x32") {
    for (const char* name : {"tiny", "small", "base"}) {
        const LIPTConfig cfg = lipt::preset_config(name);
        const LIPTWeights w = lipt::build(cfg, 11);
        const LIPTWeights f = lipt::fuse_model(w);
        const Tensor x = lipt::rng_uniform(12, {1, 3, 32, 32}, 0.0f, 1.0f);
        const Tensor yu = lipt::forward(x, w);
        const Tensor yf = lipt::forward(x, f);
        REQUIRE(yu.shape == Shape{1, 3, 64, 64});
        CHECK(lipt::all_finite(yu));
        CHECK(lipt::max_abs_diff(yu, yf) <= 1e-4f);
    }
}

TEST_CASE("ablation flags reshape the attention but keep the contract") {
    LIPTConfig cfg = toy2_config();
    cfg.enable_dlwa = false; // single sparse path over all channels
    const LIPTWeights w = lipt::build(cfg, 21);
    const Tensor x = lipt::rng_uniform(22, {1, 3, 16, 16}, 0.0f, 1.0f);
    const Tensor y = lipt::forward(x, w);
    REQUIRE(y.shape == Shape{1, 3, 32, 32});
    CHECK(lipt::all_finite(y));

    cfg = toy2_config();
    cfg.enable_slwa = false;
    const Tensor y2 = lipt::forward(x, lipt::build(cfg, 23));
    CHECK(lipt::all_finite(y2));
}

TEST_CASE("hrm_off with silenced attention reduces to shallow + recon") {
    LIPTConfig cfg = toy_config();
    cfg.hrm_off = true;
    LIPTWeights w = lipt::build(cfg, 31);
    // zero the plain conv stacks and the attention projection: every block
    // becomes the identity, so the model is recon(2 * shallow(x)) upscaled
    for (auto& blk : w.blocks) {
        for (auto& slot : blk.hrms) {
            auto& hrm = std::get<lipt::HRMWeights>(slot);
            for (auto* gb : {&hrm.gb1, &hrm.gb2}) {
                std::fill(gb->conv3.kernel.data.begin(), gb->conv3.kernel.data.end(), 0.0f);
                std::fill(gb->conv3.bias.begin(), gb->conv3.bias.end(), 0.0f);
            }
        }
        std::fill(blk.attn.proj.kernel.data.begin(), blk.attn.proj.kernel.data.end(), 0.0f);
        std::fill(blk.attn.proj.bias.begin(), blk.attn.proj.bias.end(), 0.0f);
    }
    const Tensor x = lipt::rng_uniform(32, {1, 3, 4, 4}, 0.0f, 1.0f);
    const Tensor y = lipt::forward(x, w);
    const Tensor fs = lipt::conv2d(x, w.shallow, 1, 1);
    const Tensor want = lipt::conv2d(lipt::add(fs, fs), w.recon, 1, 1);
    CHECK(lipt::bit_equal(y, want));
}

TEST_CASE("losses match their definitions") {
    Tensor a({1, 1, 2, 2});
    a.data = {0.0f, 1.0f, 2.0f, 3.0f};
    Tensor b({1, 1, 2, 2});
    b.data = {1.0f, 2.0f, 0.0f, 7.0f};
    // |diffs| = 1, 1, 2, 4 -> mean 2.0
    CHECK(lipt::l1_loss(a, b) == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(lipt::l1_loss(a, a) == 0.0);

    CHECK(lipt::charbonnier_loss(a, a) == doctest::Approx(1e-3).epsilon(1e-9));
    // far from the corner the Charbonnier approaches L1: gap <= eps^2/(2|d|)
    const double gap = lipt::charbonnier_loss(a, b) - lipt::l1_loss(a, b);
    CHECK(gap > 0.0);
    CHECK(gap <= 1e-6 / (2.0 * 1.0) + 1e-12);
}

TEST_CASE("charbonnier analytic derivative matches finite differences") {
    const double eps = 1e-3, h = 1e-4;
    for (int i = 0; i < 100; ++i) {
        // offsets in +-[0.05, 1.5], kept away from the non-smooth origin
        const std::uint64_t bits = lipt::splitmix64_at(77, static_cast<std::uint64_t>(i));
        const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
        double d = 0.05 + 1.45 * u;
        if (bits & 1)
            d = -d;
        const double t = 0.25;
        const double p = t + d;
        const auto f = [&](double v) { return std::sqrt((v - t) * (v - t) + eps * eps); };
        const double fd = (f(p + h) - f(p - h)) / (2.0 * h);
        const double an = lipt::charbonnier_grad(p, t, eps);
        CHECK(std::fabs(an - fd) / std::max(1e-12, std::fabs(fd)) <= 1e-3);
    }
}

TEST_CASE("weight export/import round-trips bitwise") {
    const LIPTConfig cfg = toy2_config();
    const LIPTWeights w = lipt::build(cfg, 41);
    const auto entries = lipt::export_weights(w);
    CHECK(entries[0].name == "__config__");
    const LIPTWeights back = lipt::import_weights(entries);
    const auto entries2 = lipt::export_weights(back);
    REQUIRE(entries.size() == entries2.size());
    for (std::size_t i = 0; i < entries.size(); ++i)
        CHECK(entries[i] == entries2[i]);
    CHECK(back.config.blocks == cfg.blocks);
    CHECK(back.config.scale == cfg.scale);
    CHECK_FALSE(back.fused);

    // fused weights round-trip too
    const auto fentries = lipt::export_weights(lipt::fuse_model(w));
    const LIPTWeights fback = lipt::import_weights(fentries);
    CHECK(fback.fused);
    const Tensor x = lipt::rng_uniform(42, {1, 3, 8, 8}, 0.0f, 1.0f);
    CHECK(lipt::bit_equal(lipt::forward(x, lipt::import_weights(fentries)),
                          lipt::forward(x, lipt::fuse_model(w))));
}

TEST_CASE("import_weights rejects malformed entry sets") {
    const LIPTWeights w = lipt::build(toy_config(), 51);
    auto entries = lipt::export_weights(w);

    auto missing = entries;
    missing.pop_back();
    CHECK_THROWS_WITH_AS((void)lipt::import_weights(missing), doctest::Contains("missing"),
                         std::runtime_error);

    auto unknown = entries;
    unknown.push_back({"block9.bogus", {1u}, {0.0f}});
    CHECK_THROWS_WITH_AS((void)lipt::import_weights(unknown), doctest::Contains("bogus"),
                         std::runtime_error);

    auto bad_shape = entries;
    bad_shape[1].dims.back() += 1;
    bad_shape[1].data.push_back(0.0f);
    CHECK_THROWS_AS((void)lipt::import_weights(bad_shape), std::runtime_error);

    auto no_config = entries;
    no_config.erase(no_config.begin());
    CHECK_THROWS_AS((void)lipt::import_weights(no_config), std::runtime_error);
}
