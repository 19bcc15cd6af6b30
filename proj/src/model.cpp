// SPDX-License-Identifier: Apache-2.0
#include "lipt/model.hpp"

#include "lipt/mask.hpp"

#include <json.hpp>

#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace lipt {

void LIPTConfig::validate() const {
    if (blocks < 1)
        throw std::invalid_argument("config: blocks must be >= 1");
    if (channels < 2 || channels % 2 != 0)
        throw std::invalid_argument("config: channels must be even and >= 2");
    if (window < 2 || window % 2 != 0)
        throw std::invalid_argument("config: window must be even and >= 2");
    if (expansion < 1)
        throw std::invalid_argument("config: expansion must be >= 1");
    if (scale < 1 || scale > 4)
        throw std::invalid_argument("config: scale must be in [1, 4]");
    if (in_channels < 1)
        throw std::invalid_argument("config: in_channels must be >= 1");
    if (cb_per_msa < 1)
        throw std::invalid_argument("config: cb_per_msa must be >= 1");
    if (heads < 0)
        throw std::invalid_argument("config: heads must be >= 0");
    if (!enable_slwa && !enable_dlwa)
        throw std::invalid_argument("config: at least one attention path must be enabled");
    const int width = (enable_slwa && enable_dlwa) ? channels / 2 : channels;
    const int h = heads > 0 ? heads : (width >= 32 ? 2 : 1);
    if (width % h != 0)
        throw std::invalid_argument("config: attention path width " + std::to_string(width) +
                                    " not divisible by heads " + std::to_string(h));
}

static int resolved_heads(const LIPTConfig& c, int width) {
    return c.heads > 0 ? c.heads : (width >= 32 ? 2 : 1);
}

LIPTConfig preset_config(const std::string& name) {
    LIPTConfig c;
    if (name == "tiny") {
        c.blocks = 8;
        c.channels = 24;
        c.window = 8;
    } else if (name == "small") {
        c.blocks = 10;
        c.channels = 64;
        c.window = 8;
    } else if (name == "base") {
        c.blocks = 22;
        c.channels = 144;
        c.window = 16;
    } else {
        throw std::invalid_argument("unknown preset \"" + name + "\" (tiny|small|base)");
    }
    c.expansion = 2;
    return c;
}

LIPTConfig load_config(const std::string& name_or_path) {
    if (name_or_path == "tiny" || name_or_path == "small" || name_or_path == "base")
        return preset_config(name_or_path);
    std::ifstream in(name_or_path);
    if (!in)
        throw std::runtime_error("cannot open config " + name_or_path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::runtime_error("config parse error in " + name_or_path + ": " + e.what());
    }
    LIPTConfig c;
    const auto geti = [&](const char* key, int& dst) {
        if (j.contains(key))
            dst = j.at(key).get<int>();
    };
    const auto getb = [&](const char* key, bool& dst) {
        if (j.contains(key))
            dst = j.at(key).get<bool>();
    };
    geti("blocks", c.blocks);
    geti("channels", c.channels);
    geti("window", c.window);
    geti("expansion", c.expansion);
    geti("scale", c.scale);
    geti("in_channels", c.in_channels);
    geti("cb_per_msa", c.cb_per_msa);
    geti("heads", c.heads);
    getb("enable_slwa", c.enable_slwa);
    getb("enable_dlwa", c.enable_dlwa);
    getb("enable_sobel", c.enable_sobel);
    getb("hrm_off", c.hrm_off);
    static const char* known[] = {"blocks",      "channels",    "window",      "expansion",
                                  "scale",       "in_channels", "cb_per_msa",  "heads",
                                  "enable_slwa", "enable_dlwa", "enable_sobel", "hrm_off"};
    for (const auto& [key, value] : j.items()) {
        bool ok = false;
        for (const char* k : known)
            ok = ok || key == k;
        if (!ok)
            throw std::runtime_error("config: unknown key \"" + key + "\" in " + name_or_path);
    }
    c.validate();
    return c;
}

// ---- skeleton construction and the named-parameter registry ----

static ConvWeights make_conv(int c_out, int c_in, int k) {
    ConvWeights w;
    w.kernel = Tensor({c_out, c_in, k, k});
    w.bias.assign(static_cast<std::size_t>(c_out), 0.0f);
    w.groups = 1;
    return w;
}

static GbWeights make_gb(int c, bool extras, bool sobel_on) {
    GbWeights g;
    g.with_extras = extras;
    g.with_sobel = extras && sobel_on;
    g.conv3 = make_conv(c, c, 3);
    if (extras) {
        g.conv1 = make_conv(c, c, 1);
        g.pre3 = make_conv(c, c, 1);
        g.conv3_after = make_conv(c, c, 3);
        g.avg_pre = make_conv(c, c, 1);
        if (g.with_sobel) {
            g.sobel.k_x = make_conv(c, c, 1);
            g.sobel.k_y = make_conv(c, c, 1);
            g.sobel.s_x.assign(static_cast<std::size_t>(c), 0.0f);
            g.sobel.s_y.assign(static_cast<std::size_t>(c), 0.0f);
            g.sobel.b_dx.assign(static_cast<std::size_t>(c), 0.0f);
            g.sobel.b_dy.assign(static_cast<std::size_t>(c), 0.0f);
        }
    }
    return g;
}

static LIPTWeights make_skeleton(const LIPTConfig& cfg, bool fused) {
    cfg.validate();
    LIPTWeights w;
    w.config = cfg;
    w.fused = fused;
    const int C = cfg.channels;
    w.shallow = make_conv(C, cfg.in_channels, 3);
    const bool both = cfg.enable_slwa && cfg.enable_dlwa;
    const int width = both ? C / 2 : C;
    const int heads = resolved_heads(cfg, width);
    w.blocks.resize(static_cast<std::size_t>(cfg.blocks));
    for (BlockWeights& blk : w.blocks) {
        blk.hrms.reserve(static_cast<std::size_t>(cfg.cb_per_msa));
        for (int j = 0; j < cfg.cb_per_msa; ++j) {
            if (fused) {
                FusedHRM f;
                f.f1.conv = make_conv(C, C, 3);
                f.f2.conv = make_conv(C, C, 3);
                blk.hrms.emplace_back(std::move(f));
            } else {
                HRMWeights h;
                h.gb1 = make_gb(C, !cfg.hrm_off, cfg.enable_sobel);
                h.gb2 = make_gb(C, !cfg.hrm_off, cfg.enable_sobel);
                blk.hrms.emplace_back(std::move(h));
            }
        }
        const auto make_msa = [&](WindowMSAWeights& m) {
            m.Wq = make_conv(width, width, 1);
            m.Wk = make_conv(width, width, 1);
            m.Wv = make_conv(width, width, 1);
            m.heads = heads;
        };
        if (cfg.enable_slwa)
            make_msa(blk.attn.slwa);
        if (cfg.enable_dlwa)
            make_msa(blk.attn.dlwa);
        blk.attn.proj = make_conv(C, C, 1);
        blk.attn.m_sl = sparse_mask(cfg.window, cfg.expansion);
        blk.attn.m_dl = dense_block_mask(cfg.window, cfg.expansion);
    }
    w.recon = make_conv(cfg.in_channels * cfg.scale * cfg.scale, C, 3);
    return w;
}

struct ParamRef {
    std::string name;
    std::vector<std::uint32_t> dims;
    float* data = nullptr;
    std::size_t size = 0;
};

static void add_vec(std::vector<ParamRef>& out, const std::string& name, std::vector<float>& v) {
    out.push_back({name, {static_cast<std::uint32_t>(v.size())}, v.data(), v.size()});
}

static void add_conv(std::vector<ParamRef>& out, const std::string& prefix, ConvWeights& w) {
    const Shape& s = w.kernel.shape;
    out.push_back({prefix + ".kernel",
                   {static_cast<std::uint32_t>(s.n), static_cast<std::uint32_t>(s.c),
                    static_cast<std::uint32_t>(s.h), static_cast<std::uint32_t>(s.w)},
                   w.kernel.data.data(), w.kernel.data.size()});
    add_vec(out, prefix + ".bias", w.bias);
}

static void add_gb(std::vector<ParamRef>& out, const std::string& prefix, GbWeights& g) {
    add_conv(out, prefix + ".conv3", g.conv3);
    if (!g.with_extras)
        return;
    add_conv(out, prefix + ".conv1", g.conv1);
    add_conv(out, prefix + ".pre3", g.pre3);
    add_conv(out, prefix + ".conv3_after", g.conv3_after);
    if (g.with_sobel) {
        add_conv(out, prefix + ".sobel.k_x", g.sobel.k_x);
        add_conv(out, prefix + ".sobel.k_y", g.sobel.k_y);
        add_vec(out, prefix + ".sobel.s_x", g.sobel.s_x);
        add_vec(out, prefix + ".sobel.s_y", g.sobel.s_y);
        add_vec(out, prefix + ".sobel.b_dx", g.sobel.b_dx);
        add_vec(out, prefix + ".sobel.b_dy", g.sobel.b_dy);
    }
    add_conv(out, prefix + ".avg_pre", g.avg_pre);
}

static std::vector<ParamRef> collect(LIPTWeights& w) {
    std::vector<ParamRef> out;
    add_conv(out, "shallow", w.shallow);
    for (std::size_t i = 0; i < w.blocks.size(); ++i) {
        BlockWeights& blk = w.blocks[i];
        const std::string bp = "block" + std::to_string(i);
        for (std::size_t j = 0; j < blk.hrms.size(); ++j) {
            const std::string hp = bp + ".hrm" + std::to_string(j);
            if (HRMWeights* h = std::get_if<HRMWeights>(&blk.hrms[j])) {
                add_gb(out, hp + ".gb1", h->gb1);
                add_gb(out, hp + ".gb2", h->gb2);
            } else {
                FusedHRM& f = std::get<FusedHRM>(blk.hrms[j]);
                add_conv(out, hp + ".fused1", f.f1.conv);
                add_conv(out, hp + ".fused2", f.f2.conv);
            }
        }
        const auto add_msa = [&](const std::string& mp, WindowMSAWeights& m) {
            add_conv(out, mp + ".wq", m.Wq);
            add_conv(out, mp + ".wk", m.Wk);
            add_conv(out, mp + ".wv", m.Wv);
        };
        if (w.config.enable_slwa)
            add_msa(bp + ".attn.slwa", blk.attn.slwa);
        if (w.config.enable_dlwa)
            add_msa(bp + ".attn.dlwa", blk.attn.dlwa);
        add_conv(out, bp + ".attn.proj", blk.attn.proj);
    }
    add_conv(out, "recon", w.recon);
    return out;
}

static std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    return h;
}

static bool ends_with(const std::string& s, const char* suffix) {
    const std::size_t n = std::strlen(suffix);
    return s.size() >= n && s.compare(s.size() - n, n, suffix) == 0;
}

LIPTWeights build(const LIPTConfig& config, std::uint64_t seed) {
    LIPTWeights w = make_skeleton(config, false);
    for (ParamRef& p : collect(w)) {
        if (ends_with(p.name, ".kernel")) {
            // fan_in from (c_in, k, k). Bound 1/sqrt(3*fan_in): the classical
            // 1/sqrt(fan_in) puts the per-block variance multiplier of this
            // residual stack above 1 and the preset depths then overflow f32;
            // this damping keeps activations O(1) at any preset depth.
            const std::uint64_t fan_in = static_cast<std::uint64_t>(p.dims[1]) * p.dims[2] * p.dims[3];
            const float bound = 1.0f / std::sqrt(3.0f * static_cast<float>(fan_in));
            const Tensor r = rng_uniform(splitmix64_at(seed, fnv1a64(p.name)),
                                         {1, 1, 1, static_cast<int>(p.size)}, -bound, bound);
            std::memcpy(p.data, r.data.data(), p.size * sizeof(float));
        } else if (ends_with(p.name, ".s_x") || ends_with(p.name, ".s_y")) {
            // modest fixed scale keeps deep random stacks finite
            std::fill(p.data, p.data + p.size, 0.1f);
        }
        // biases stay zero
    }
    return w;
}

static Tensor hrm_slot_forward(const Tensor& x, const HRMSlot& slot) {
    if (const HRMWeights* h = std::get_if<HRMWeights>(&slot))
        return hrm_forward(x, *h);
    return hrm_forward(x, std::get<FusedHRM>(slot));
}

static Tensor single_path_attention(const Tensor& x, const WindowMSAWeights& msa, const Mask& m,
                                    const ConvWeights& proj, const WindowGrid& grid) {
    const IndexPlan plan = selection_indices(m, grid);
    const Tensor y =
        scatter_windows(window_self_attention(gather_windows(x, plan), msa), plan, x.shape.n);
    return add(conv2d(y, proj, 0, 1), x);
}

static Tensor block_attention(const Tensor& x, const NVSMWeights& attn, const LIPTConfig& cfg,
                              const WindowGrid& grid) {
    if (cfg.enable_slwa && cfg.enable_dlwa)
        return nvsm_sa(x, attn, grid);
    if (cfg.enable_slwa)
        return single_path_attention(x, attn.slwa, attn.m_sl, attn.proj, grid);
    return single_path_attention(x, attn.dlwa, attn.m_dl, attn.proj, grid);
}

Tensor forward(const Tensor& x, const LIPTWeights& w) {
    const LIPTConfig& cfg = w.config;
    cfg.validate();
    if (x.shape.c != cfg.in_channels)
        throw std::invalid_argument("forward: input has " + std::to_string(x.shape.c) +
                                    " channels, config expects " + std::to_string(cfg.in_channels));
    const int h0 = x.shape.h, w0 = x.shape.w;
    const int p = cfg.window;
    const int hp = (h0 + p - 1) / p * p;
    const int wp = (w0 + p - 1) / p * p;
    const Tensor padded = (hp != h0 || wp != w0) ? pad_reflect(x, wp - w0, hp - h0) : x;
    const WindowGrid grid = WindowGrid::make(hp, wp, p, cfg.expansion);

    const Tensor fs = conv2d(padded, w.shallow, 1, 1);
    Tensor fd = fs;
    for (const BlockWeights& blk : w.blocks) {
        const int k = static_cast<int>(blk.hrms.size());
        for (int j = 0; j + 1 < k; ++j)
            fd = hrm_slot_forward(fd, blk.hrms[static_cast<std::size_t>(j)]);
        fd = block_attention(fd, blk.attn, cfg, grid);
        fd = hrm_slot_forward(fd, blk.hrms[static_cast<std::size_t>(k - 1)]);
    }

    Tensor rec = conv2d(add(fs, fd), w.recon, 1, 1);
    if (cfg.scale > 1)
        rec = pixel_shuffle(rec, cfg.scale);
    return crop(rec, cfg.scale * h0, cfg.scale * w0);
}

LIPTWeights fuse_model(const LIPTWeights& w) {
    if (w.fused)
        throw std::invalid_argument("fuse_model: weights are already fused");
    LIPTWeights out;
    out.config = w.config;
    out.fused = true;
    out.shallow = w.shallow;
    out.recon = w.recon;
    out.blocks.reserve(w.blocks.size());
    for (const BlockWeights& blk : w.blocks) {
        BlockWeights nb;
        nb.attn = blk.attn;
        nb.hrms.reserve(blk.hrms.size());
        for (const HRMSlot& slot : blk.hrms) {
            const HRMWeights* h = std::get_if<HRMWeights>(&slot);
            if (!h)
                throw std::invalid_argument("fuse_model: weights are already fused");
            nb.hrms.emplace_back(fuse_hrm(*h));
        }
        out.blocks.emplace_back(std::move(nb));
    }
    return out;
}

// ---- losses ----

static void check_same_shape(const Tensor& a, const Tensor& b, const char* who) {
    if (!(a.shape == b.shape))
        throw std::invalid_argument(std::string(who) + ": shape mismatch " + a.shape.str() +
                                    " vs " + b.shape.str());
}

double l1_loss(const Tensor& pred, const Tensor& target) {
    check_same_shape(pred, target, "l1_loss");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i)
        acc += std::abs(static_cast<double>(pred.data[i]) - target.data[i]);
    return acc / static_cast<double>(pred.size());
}

double charbonnier_loss(const Tensor& pred, const Tensor& target, double eps) {
    check_same_shape(pred, target, "charbonnier_loss");
    if (!(eps > 0.0))
        throw std::invalid_argument("charbonnier_loss: eps must be > 0");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = static_cast<double>(pred.data[i]) - target.data[i];
        acc += std::sqrt(d * d + eps * eps);
    }
    return acc / static_cast<double>(pred.size());
}

double charbonnier_grad(double pred, double target, double eps) {
    const double d = pred - target;
    return d / std::sqrt(d * d + eps * eps);
}

// ---- parameter / MAC accounting ----

namespace {
struct CountAcc {
    std::uint64_t params = 0;
    std::uint64_t macs = 0;

    void conv(int c_out, int c_in, int k, int oh, int ow, bool trainable = true) {
        if (trainable)
            params += static_cast<std::uint64_t>(c_out) * c_in * k * k + c_out;
        macs += static_cast<std::uint64_t>(c_out) * c_in * k * k * oh * ow;
    }
    // fixed-filter depthwise: kernel not trainable, bias counted by caller
    void depthwise_fixed(int c, int k, int oh, int ow) {
        macs += static_cast<std::uint64_t>(c) * k * k * oh * ow;
    }
};
} // namespace

ModelCounts count_params_and_macs(const LIPTConfig& cfg, int h, int w, bool fused) {
    cfg.validate();
    if (h < 1 || w < 1)
        throw std::invalid_argument("count_params_and_macs: resolution must be positive");
    const int p = cfg.window;
    const int hp = (h + p - 1) / p * p;
    const int wp = (w + p - 1) / p * p;
    const int C = cfg.channels;
    CountAcc a;

    a.conv(C, cfg.in_channels, 3, hp, wp); // shallow

    const auto count_gb = [&]() {
        a.conv(C, C, 3, hp, wp); // conv3
        if (cfg.hrm_off)
            return;
        a.conv(C, C, 1, hp, wp);              // conv1
        a.conv(C, C, 1, hp + 2, wp + 2);      // pre3 on the padded field
        a.conv(C, C, 3, hp, wp);              // conv3_after
        if (cfg.enable_sobel) {
            for (int dir = 0; dir < 2; ++dir) {
                a.conv(C, C, 1, hp + 2, wp + 2); // k_x / k_y
                a.depthwise_fixed(C, 3, hp, wp); // fixed d_x / d_y, scaled
                a.params += 2ULL * C;            // scale + post bias per direction
            }
        }
        a.conv(C, C, 1, hp + 2, wp + 2); // avg_pre
        a.depthwise_fixed(C, 3, hp, wp); // fixed mean kernel
    };

    const bool both = cfg.enable_slwa && cfg.enable_dlwa;
    const int width = both ? C / 2 : C;
    const int win = (hp / p) * (wp / p);
    const int t = p * p;
    const int paths = both ? 2 : 1;

    for (int b = 0; b < cfg.blocks; ++b) {
        for (int j = 0; j < cfg.cb_per_msa; ++j) {
            if (fused) {
                a.conv(C, C, 3, hp, wp);
                a.conv(C, C, 3, hp, wp);
            } else {
                count_gb();
                count_gb();
            }
        }
        for (int path = 0; path < paths; ++path) {
            for (int qkv = 0; qkv < 3; ++qkv)
                a.conv(width, width, 1, t, win); // per-token projections
            a.macs += 2ULL * width * t * t * win; // scores + value mixing
        }
        a.conv(C, C, 1, hp, wp); // proj
    }

    a.conv(cfg.in_channels * cfg.scale * cfg.scale, C, 3, hp, wp); // recon
    return ModelCounts{a.params, a.macs};
}

// ---- serialization ----

static constexpr const char* kConfigEntry = "__config__";

std::vector<WeightEntry> export_weights(const LIPTWeights& w) {
    std::vector<WeightEntry> out;
    const LIPTConfig& c = w.config;
    const float flags = static_cast<float>((c.enable_slwa ? 1 : 0) | (c.enable_dlwa ? 2 : 0) |
                                           (c.enable_sobel ? 4 : 0) | (c.hrm_off ? 8 : 0));
    out.push_back({kConfigEntry,
                   {10u},
                   {static_cast<float>(c.blocks), static_cast<float>(c.channels),
                    static_cast<float>(c.window), static_cast<float>(c.expansion),
                    static_cast<float>(c.scale), static_cast<float>(c.in_channels),
                    static_cast<float>(c.cb_per_msa), static_cast<float>(c.heads), flags,
                    w.fused ? 1.0f : 0.0f}});
    // collect() does not mutate; the const_cast only feeds the copy below
    for (const ParamRef& p : collect(const_cast<LIPTWeights&>(w)))
        out.push_back({p.name, p.dims, std::vector<float>(p.data, p.data + p.size)});
    return out;
}

LIPTWeights import_weights(const std::vector<WeightEntry>& entries) {
    const WeightEntry* cfg_entry = nullptr;
    for (const WeightEntry& e : entries)
        if (e.name == kConfigEntry)
            cfg_entry = &e;
    if (!cfg_entry || cfg_entry->data.size() != 10)
        throw std::runtime_error("weight file carries no valid " + std::string(kConfigEntry) +
                                 " entry");
    const std::vector<float>& v = cfg_entry->data;
    LIPTConfig c;
    c.blocks = static_cast<int>(v[0]);
    c.channels = static_cast<int>(v[1]);
    c.window = static_cast<int>(v[2]);
    c.expansion = static_cast<int>(v[3]);
    c.scale = static_cast<int>(v[4]);
    c.in_channels = static_cast<int>(v[5]);
    c.cb_per_msa = static_cast<int>(v[6]);
    c.heads = static_cast<int>(v[7]);
    const int flags = static_cast<int>(v[8]);
    c.enable_slwa = (flags & 1) != 0;
    c.enable_dlwa = (flags & 2) != 0;
    c.enable_sobel = (flags & 4) != 0;
    c.hrm_off = (flags & 8) != 0;
    const bool fused = v[9] != 0.0f;
    c.validate();

    LIPTWeights w = make_skeleton(c, fused);
    std::unordered_map<std::string, ParamRef> by_name;
    for (ParamRef& p : collect(w))
        by_name.emplace(p.name, p);

    for (const WeightEntry& e : entries) {
        if (e.name == kConfigEntry)
            continue;
        const auto it = by_name.find(e.name);
        if (it == by_name.end())
            throw std::runtime_error("weight file entry \"" + e.name +
                                     "\" does not belong to this architecture (or repeats)");
        const ParamRef p = it->second;
        by_name.erase(it);
        if (e.dims != p.dims || e.data.size() != p.size)
            throw std::runtime_error("weight file entry \"" + e.name + "\" has wrong shape");
        std::memcpy(p.data, e.data.data(), p.size * sizeof(float));
    }
    if (!by_name.empty())
        throw std::runtime_error("weight file is missing " + std::to_string(by_name.size()) +
                                 " parameter tensors (first: " + by_name.begin()->first + ")");
    return w;
}

} // namespace lipt
