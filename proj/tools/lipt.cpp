// SPDX-License-Identifier: Apache-2.0
// Command-line front end: inference, fusion, mask tooling, benchmarks,
// metrics, and random-weight generation.
#include "lipt/image_io.hpp"
#include "lipt/mask.hpp"
#include "lipt/metrics.hpp"
#include "lipt/model.hpp"
#include "lipt/weights_io.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

namespace {

using lipt::Tensor;

lipt::LIPTWeights load_weights(const std::string& path) {
    return lipt::import_weights(lipt::read_weight_file(path));
}

void check_config_match(const lipt::LIPTConfig& a, const lipt::LIPTConfig& b) {
    if (a.blocks != b.blocks || a.channels != b.channels || a.window != b.window ||
        a.expansion != b.expansion || a.in_channels != b.in_channels ||
        a.cb_per_msa != b.cb_per_msa || a.heads != b.heads || a.enable_slwa != b.enable_slwa ||
        a.enable_dlwa != b.enable_dlwa || a.enable_sobel != b.enable_sobel ||
        a.hrm_off != b.hrm_off)
        throw std::runtime_error("--config does not match the architecture in the weight file");
}

Tensor image_to_input(const lipt::ImageRGB8& img, int in_channels) {
    if (in_channels == 3)
        return lipt::image_to_tensor(img);
    if (in_channels == 1) {
        Tensor y = lipt::rgb_to_y(img);
        for (float& v : y.data)
            v /= 255.0f;
        return y;
    }
    throw std::runtime_error("CLI supports in_channels 1 or 3, weights use " +
                             std::to_string(in_channels));
}

lipt::ImageRGB8 output_to_image(const Tensor& t) {
    if (t.shape.c == 3)
        return lipt::tensor_to_image(t);
    Tensor rgb({1, 3, t.shape.h, t.shape.w});
    for (int c = 0; c < 3; ++c)
        std::copy(t.data.begin(), t.data.end(),
                  rgb.data.begin() + static_cast<std::ptrdiff_t>(c) * t.shape.h * t.shape.w);
    return lipt::tensor_to_image(rgb);
}

int cmd_infer(const std::string& config, const std::string& weights, int scale,
              const std::string& input, const std::string& output, bool fused) {
    lipt::LIPTWeights w = load_weights(weights);
    if (!config.empty())
        check_config_match(lipt::load_config(config), w.config);
    if (scale != 0 && scale != w.config.scale)
        throw std::runtime_error("--scale " + std::to_string(scale) +
                                 " does not match the weight file (scale " +
                                 std::to_string(w.config.scale) + ")");
    if (fused && !w.fused)
        w = lipt::fuse_model(w);
    const lipt::ImageRGB8 img = lipt::load_ppm(input);
    const Tensor out = lipt::forward(image_to_input(img, w.config.in_channels), w);
    lipt::save_ppm(output, output_to_image(out));
    std::printf("wrote %s (%dx%d)\n", output.c_str(), out.shape.w, out.shape.h);
    return 0;
}

int cmd_fuse(const std::string& in_path, const std::string& out_path) {
    const lipt::LIPTWeights w = load_weights(in_path);
    lipt::write_weight_file(out_path, lipt::export_weights(lipt::fuse_model(w)));
    std::printf("wrote fused weights to %s\n", out_path.c_str());
    return 0;
}

int cmd_mask_verify(const std::string& path) {
    const lipt::Mask m = lipt::load_mask(path);
    std::printf("beta=%.4f %s\n", lipt::beta(m),
                lipt::is_non_volatile(m) ? "non-volatile" : "volatile");
    const std::vector<int> cov = lipt::coverage_map(m);
    std::printf("coverage (how many sub-blocks sample each local coordinate):\n");
    for (int x = 0; x < m.p; ++x) {
        for (int y = 0; y < m.p; ++y)
            std::printf("%s%d", y ? " " : "", cov[static_cast<std::size_t>(x) * m.p + y]);
        std::printf("\n");
    }
    return 0;
}

int cmd_mask_gen(const std::string& kind, int p, int s, const std::string& out) {
    lipt::Mask m;
    if (kind == "sparse")
        m = lipt::sparse_mask(p, s);
    else if (kind == "dense")
        m = lipt::dense_block_mask(p, s);
    else if (kind == "stride")
        m = lipt::global_stride_mask(p, s);
    else
        throw std::runtime_error("unknown mask kind \"" + kind + "\" (sparse|dense|stride)");
    lipt::save_mask(out, m);
    std::printf("wrote %s mask p=%d s=%d to %s\n", kind.c_str(), p, s, out.c_str());
    return 0;
}

int cmd_bench(const std::string& config, int width, int height, int runs, bool fused) {
    const lipt::LIPTConfig cfg = lipt::load_config(config);
    lipt::LIPTWeights w = lipt::build(cfg, 0);
    if (fused)
        w = lipt::fuse_model(w);
    const lipt::ModelCounts counts = lipt::count_params_and_macs(cfg, height, width, fused);
    std::printf("config=%s input=%dx%d scale=%d fused=%d runs=%d\n", config.c_str(), width,
                height, cfg.scale, fused ? 1 : 0, runs);
    std::printf("params=%llu macs=%llu\n", static_cast<unsigned long long>(counts.params),
                static_cast<unsigned long long>(counts.macs));

    const Tensor x = lipt::rng_uniform(7, {1, cfg.in_channels, height, width}, 0.0f, 1.0f);
    const auto once = [&] {
        const auto t0 = std::chrono::steady_clock::now();
        const Tensor y = lipt::forward(x, w);
        const auto t1 = std::chrono::steady_clock::now();
        if (!lipt::all_finite(y))
            throw std::runtime_error("bench: non-finite forward output");
        return std::chrono::duration<double, std::milli>(t1 - t0).count();
    };
    std::printf("warmup %.3f ms\n", once());
    std::vector<double> ms(static_cast<std::size_t>(runs));
    for (int i = 0; i < runs; ++i) {
        ms[static_cast<std::size_t>(i)] = once();
        std::printf("run %d: %.3f ms\n", i + 1, ms[static_cast<std::size_t>(i)]);
    }
    std::vector<double> sorted = ms;
    std::sort(sorted.begin(), sorted.end());
    const double median = runs % 2 ? sorted[static_cast<std::size_t>(runs / 2)]
                                   : 0.5 * (sorted[static_cast<std::size_t>(runs / 2 - 1)] +
                                            sorted[static_cast<std::size_t>(runs / 2)]);
    double mean = 0.0;
    for (double v : ms)
        mean += v;
    mean /= runs;
    std::printf("min=%.3f ms median=%.3f ms mean=%.3f ms\n", sorted.front(), median, mean);
    return 0;
}

int cmd_metrics(const std::string& ref_path, const std::string& test_path, int crop) {
    const lipt::ImageRGB8 a = lipt::load_ppm(ref_path);
    const lipt::ImageRGB8 b = lipt::load_ppm(test_path);
    if (a.width != b.width || a.height != b.height)
        throw std::runtime_error("image sizes differ: " + std::to_string(a.width) + "x" +
                                 std::to_string(a.height) + " vs " + std::to_string(b.width) +
                                 "x" + std::to_string(b.height));
    Tensor ya = lipt::rgb_to_y(a);
    Tensor yb = lipt::rgb_to_y(b);
    if (crop > 0) {
        ya = lipt::crop_border(ya, crop);
        yb = lipt::crop_border(yb, crop);
    }
    const double p = lipt::psnr(ya, yb);
    if (std::isinf(p))
        std::printf("psnr=inf dB\n");
    else
        std::printf("psnr=%.4f dB\n", p);
    std::printf("ssim=%.6f\n", lipt::ssim(ya, yb));
    return 0;
}

int cmd_init(const std::string& config, std::uint64_t seed, int scale, const std::string& out) {
    lipt::LIPTConfig cfg = lipt::load_config(config);
    if (scale != 0)
        cfg.scale = scale;
    cfg.validate();
    lipt::write_weight_file(out, lipt::export_weights(lipt::build(cfg, seed)));
    std::printf("wrote weights (%s, seed %llu, x%d) to %s\n", config.c_str(),
                static_cast<unsigned long long>(seed), cfg.scale, out.c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LIPT inference engine"};
    app.require_subcommand(1);

    std::string config, weights, input, output, out_path, mask_path, kind, ref_path, test_path;
    int scale = 0, p = 8, s = 2, width = 64, height = 64, runs = 5, crop = 0;
    bool fused = false;
    std::uint64_t seed = 0;

    CLI::App* infer = app.add_subcommand("infer", "Run the network on a PPM image");
    infer->add_option("--config", config, "Preset name or JSON config (cross-checked)");
    infer->add_option("--weights", weights, "Weight file")->required();
    infer->add_option("--scale", scale, "Expected upscale factor (cross-checked)");
    infer->add_option("--input", input, "Input PPM (P6)")->required();
    infer->add_option("--output", output, "Output PPM (P6)")->required();
    infer->add_flag("--fused", fused, "Run the reparameterized form");

    CLI::App* fuse = app.add_subcommand("fuse", "Collapse HRM branches into single 3x3 convs");
    fuse->add_option("--weights", weights, "Input weight file")->required();
    fuse->add_option("--out", out_path, "Output weight file")->required();

    CLI::App* mask = app.add_subcommand("mask", "Sampling-mask tools");
    mask->require_subcommand(1);
    CLI::App* mverify = mask->add_subcommand("verify", "Report drop rate and coverage");
    mverify->add_option("--mask", mask_path, "Mask text file")->required();
    CLI::App* mgen = mask->add_subcommand("gen", "Write a canonical mask");
    mgen->add_option("--kind", kind, "sparse|dense|stride")->required();
    mgen->add_option("--p", p, "Window size")->required();
    mgen->add_option("--s", s, "Expansion factor")->required();
    mgen->add_option("--out", mask_path, "Output text file")->required();

    CLI::App* bench = app.add_subcommand("bench", "Time the forward pass");
    bench->add_option("--config", config, "Preset name or JSON config")->required();
    bench->add_option("--width", width, "Input width")->required();
    bench->add_option("--height", height, "Input height")->required();
    bench->add_option("--runs", runs, "Timed repetitions")->check(CLI::PositiveNumber);
    bench->add_flag("--fused", fused, "Benchmark the reparameterized form");

    CLI::App* metrics = app.add_subcommand("metrics", "Y-channel PSNR/SSIM between two PPMs");
    metrics->add_option("--ref", ref_path, "Reference image")->required();
    metrics->add_option("--test", test_path, "Test image")->required();
    metrics->add_option("--crop-border", crop, "Pixels to crop from every side first");

    CLI::App* init = app.add_subcommand("init", "Write deterministic random weights");
    init->add_option("--config", config, "Preset name or JSON config")->required();
    init->add_option("--seed", seed, "RNG seed");
    init->add_option("--scale", scale, "Upscale factor (default from config, presets 2)");
    init->add_option("--out", out_path, "Output weight file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (infer->parsed())
            return cmd_infer(config, weights, scale, input, output, fused);
        if (fuse->parsed())
            return cmd_fuse(weights, out_path);
        if (mask->parsed()) {
            if (mverify->parsed())
                return cmd_mask_verify(mask_path);
            return cmd_mask_gen(kind, p, s, mask_path);
        }
        if (bench->parsed())
            return cmd_bench(config, width, height, runs, fused);
        if (metrics->parsed())
            return cmd_metrics(ref_path, test_path, crop);
        if (init->parsed())
            return cmd_init(config, seed, scale, out_path);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
