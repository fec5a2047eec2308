#ifndef OISA_INFERENCE_HPP
#define OISA_INFERENCE_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <thread>
#include <vector>

#include "oisa/common.hpp"
#include "oisa/core_config.hpp"
#include "oisa/fixture.hpp"
#include "oisa/mapper.hpp"
#include "oisa/opc.hpp"
#include "oisa/pixel_frontend.hpp"

namespace oisa {

// ---------------------------------------------------------------------------
// Feature maps
// ---------------------------------------------------------------------------

struct FeatureMaps {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data; // [c][y][x]

    double at(int c, int y, int x) const {
        return data[(std::size_t(c) * height + y) * width + x];
    }
    double& at(int c, int y, int x) {
        return data[(std::size_t(c) * height + y) * width + x];
    }
    std::size_t size() const { return data.size(); }
};

struct IntMaps {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<long long> data;

    long long at(int c, int y, int x) const {
        return data[(std::size_t(c) * height + y) * width + x];
    }
    long long& at(int c, int y, int x) {
        return data[(std::size_t(c) * height + y) * width + x];
    }
};

// ---------------------------------------------------------------------------
// Independent integer convolution oracle (no device model involved)
// ---------------------------------------------------------------------------

/// Exact cross-correlation of ternary code planes with signed integer
/// kernels. kernels[o*in_channels + i] is the 2-D kernel applied to input
/// channel i for output channel o, flattened row-major.
inline IntMaps oracle_conv(const std::vector<CodePlane>& codes,
                           const std::vector<KernelWeights>& kernels, const LayerSpec& layer) {
    layer.validate();
    require(layer.kind == LayerKind::conv, errc::invalid_argument, "oracle_conv: conv layers only");
    require(int(codes.size()) == layer.in_channels, errc::invalid_argument,
            "oracle_conv: channel count mismatch");
    require(int(kernels.size()) == layer.kernel_instances(), errc::invalid_argument,
            "oracle_conv: kernel count mismatch");
    for (const CodePlane& p : codes)
        require(p.width == layer.in_width && p.height == layer.in_height, errc::invalid_argument,
                "oracle_conv: plane shape mismatch");

    IntMaps out;
    out.channels = layer.out_channels;
    out.height = layer.out_height();
    out.width = layer.out_width();
    out.data.assign(std::size_t(out.channels) * out.height * out.width, 0);

    int K = layer.kernel;
    for (int o = 0; o < layer.out_channels; ++o) {
        for (int ic = 0; ic < layer.in_channels; ++ic) {
            const KernelWeights& w = kernels[std::size_t(o) * layer.in_channels + ic];
            require(int(w.size()) == K * K, errc::invalid_argument,
                    "oracle_conv: kernel size mismatch");
            const CodePlane& plane = codes[ic];
            for (int oy = 0; oy < out.height; ++oy) {
                for (int ox = 0; ox < out.width; ++ox) {
                    long long acc = 0;
                    int x0 = ox * layer.stride - layer.padding;
                    int y0 = oy * layer.stride - layer.padding;
                    for (int ky = 0; ky < K; ++ky) {
                        for (int kx = 0; kx < K; ++kx) {
                            int x = x0 + kx;
                            int y = y0 + ky;
                            if (x < 0 || x >= plane.width || y < 0 || y >= plane.height) continue;
                            acc += (long long)plane.at(x, y) * w[std::size_t(ky) * K + kx].value();
                        }
                    }
                    out.at(o, oy, ox) += acc;
                }
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Quantized model + reference engine for the remaining layers
// ---------------------------------------------------------------------------

enum class RestKind { conv, linear, relu, maxpool, avgpool };

struct RestLayer {
    RestKind kind = RestKind::relu;
    // conv / linear
    int out_channels = 0;
    int in_channels = 0;
    int kernel = 0; // conv kernel size; pool window
    int stride = 1;
    int padding = 0;
    std::vector<double> weights; // conv: [o][i][k][k]; linear: [o][in_features]
    std::vector<double> bias;    // [o]
    int in_features = 0;         // linear
};

struct QuantModel {
    LayerSpec first_layer;
    int weight_bits = 4;
    double weight_scale = 1.0; // dequantization scale of the first-layer weights
    std::vector<KernelWeights> first_kernels; // [out_ch*in_ch] flattened 2-D kernels
    std::vector<RestLayer> rest;

    void validate() const {
        first_layer.validate();
        require(weight_bits >= 1 && weight_bits <= 4, errc::fixture,
                "model: weight bit-width in [1,4]");
        int fs = (1 << weight_bits) - 1;
        require(int(first_kernels.size()) == first_layer.kernel_instances(), errc::fixture,
                "model: first-layer kernel count mismatch");
        for (const KernelWeights& k : first_kernels) {
            require(int(k.size()) == first_layer.macs_per_instance_position(), errc::fixture,
                    "model: first-layer kernel size mismatch");
            for (const QuantWeight& w : k)
                require(w.magnitude <= fs, errc::fixture,
                        "model: weight magnitude overflows declared bit-width");
        }
    }
};

inline FeatureMaps run_rest_layer(const FeatureMaps& in, const RestLayer& l) {
    FeatureMaps out;
    switch (l.kind) {
    case RestKind::relu: {
        out = in;
        for (double& v : out.data) v = std::max(0.0, v);
        return out;
    }
    case RestKind::maxpool:
    case RestKind::avgpool: {
        require(l.kernel >= 1 && l.stride >= 1, errc::fixture, "pool: bad geometry");
        out.channels = in.channels;
        out.height = (in.height - l.kernel) / l.stride + 1;
        out.width = (in.width - l.kernel) / l.stride + 1;
        require(out.height >= 1 && out.width >= 1, errc::fixture, "pool: empty output");
        out.data.resize(std::size_t(out.channels) * out.height * out.width);
        for (int c = 0; c < out.channels; ++c)
            for (int oy = 0; oy < out.height; ++oy)
                for (int ox = 0; ox < out.width; ++ox) {
                    double acc = l.kind == RestKind::maxpool
                                     ? -std::numeric_limits<double>::infinity()
                                     : 0.0;
                    for (int ky = 0; ky < l.kernel; ++ky)
                        for (int kx = 0; kx < l.kernel; ++kx) {
                            double v = in.at(c, oy * l.stride + ky, ox * l.stride + kx);
                            if (l.kind == RestKind::maxpool)
                                acc = std::max(acc, v);
                            else
                                acc += v;
                        }
                    if (l.kind == RestKind::avgpool) acc /= double(l.kernel) * l.kernel;
                    out.at(c, oy, ox) = acc;
                }
        return out;
    }
    case RestKind::conv: {
        require(in.channels == l.in_channels, errc::fixture, "conv: channel mismatch");
        out.channels = l.out_channels;
        out.height = (in.height + 2 * l.padding - l.kernel) / l.stride + 1;
        out.width = (in.width + 2 * l.padding - l.kernel) / l.stride + 1;
        require(out.height >= 1 && out.width >= 1, errc::fixture, "conv: empty output");
        out.data.resize(std::size_t(out.channels) * out.height * out.width);
        for (int o = 0; o < l.out_channels; ++o)
            for (int oy = 0; oy < out.height; ++oy)
                for (int ox = 0; ox < out.width; ++ox) {
                    double acc = l.bias.empty() ? 0.0 : l.bias[std::size_t(o)];
                    int x0 = ox * l.stride - l.padding;
                    int y0 = oy * l.stride - l.padding;
                    for (int ic = 0; ic < l.in_channels; ++ic)
                        for (int ky = 0; ky < l.kernel; ++ky)
                            for (int kx = 0; kx < l.kernel; ++kx) {
                                int x = x0 + kx;
                                int y = y0 + ky;
                                if (x < 0 || x >= in.width || y < 0 || y >= in.height) continue;
                                double wv = l.weights[((std::size_t(o) * l.in_channels + ic) *
                                                           l.kernel +
                                                       ky) *
                                                          l.kernel +
                                                      kx];
                                acc += wv * in.at(ic, y, x);
                            }
                    out.at(o, oy, ox) = acc;
                }
        return out;
    }
    case RestKind::linear: {
        int features = int(in.size());
        require(features == l.in_features, errc::fixture, "linear: feature count mismatch");
        out.channels = l.out_channels;
        out.height = 1;
        out.width = 1;
        out.data.resize(std::size_t(l.out_channels));
        for (int o = 0; o < l.out_channels; ++o) {
            double acc = l.bias.empty() ? 0.0 : l.bias[std::size_t(o)];
            for (int i = 0; i < features; ++i)
                acc += l.weights[std::size_t(o) * features + i] * in.data[std::size_t(i)];
            out.data[std::size_t(o)] = acc;
        }
        return out;
    }
    }
    fail(errc::fixture, "run_rest: unsupported layer kind");
}

/// Exact reference evaluation of every layer after the first. An empty
/// descriptor flattens the features into logits.
inline std::vector<double> run_rest(const FeatureMaps& features, const QuantModel& model) {
    FeatureMaps x = features;
    for (const RestLayer& l : model.rest) x = run_rest_layer(x, l);
    return x.data;
}

// ---------------------------------------------------------------------------
// First layer on the optical core
// ---------------------------------------------------------------------------

/// Run the first layer through the functional core model. Output values are
/// in integer a*w units: each stride result is divided by the calibration
/// scale and digitized (nearest integer) at readout, then per-channel partial
/// sums accumulate digitally across cycles.
inline FeatureMaps run_first_layer_codes(const std::vector<CodePlane>& codes,
                                         const QuantModel& model, const CoreConfig& cfg,
                                         RunMode mode, std::uint64_t seed) {
    model.validate();
    const LayerSpec& layer = model.first_layer;
    require(int(codes.size()) == layer.in_channels, errc::invalid_argument,
            "run_first_layer: channel count mismatch");

    Schedule sched = plan_layer(layer, cfg);
    double scale = cfg.calibration_scale();

    FeatureMaps out;
    out.channels = layer.out_channels;
    out.height = layer.out_height();
    out.width = layer.out_width();
    out.data.assign(std::size_t(out.channels) * out.height * out.width, 0.0);

    for (int r = 0; r < sched.remap_count; ++r) {
        for (long long p = 0; p < sched.cycles_per_round; ++p) {
            CycleStep step = make_cycle_step(sched, r, int(p), model.first_kernels);
            std::uint64_t cycle_seed =
                splitmix64(seed ^ splitmix64(std::uint64_t(r) * 0x10001 + std::uint64_t(p)));
            for (const KernelJob& job : step.jobs) {
                int ic = instance_in_channel(layer, job.kernel_instance);
                int oc = instance_out_channel(layer, job.kernel_instance);
                double v = core_eval_job(job, codes[std::size_t(ic)], cfg, mode, cycle_seed);
                out.at(oc, job.out_y, job.out_x) += double(std::llround(v / scale));
            }
        }
    }
    return out;
}

inline FeatureMaps run_first_layer(const Frame& frame, const QuantModel& model,
                                   const CoreConfig& cfg, RunMode mode, std::uint64_t seed) {
    require(model.first_layer.in_channels == 1, errc::invalid_argument,
            "run_first_layer: frames are single-channel");
    std::vector<CodePlane> codes{capture_codes(frame, cfg.pixel, cfg.vam)};
    return run_first_layer_codes(codes, model, cfg, mode, seed);
}

/// Software baseline path: pixel frontend + integer oracle, no core model.
inline FeatureMaps baseline_first_layer(const Frame& frame, const QuantModel& model,
                                        const CoreConfig& cfg) {
    std::vector<CodePlane> codes{capture_codes(frame, cfg.pixel, cfg.vam)};
    IntMaps m = oracle_conv(codes, model.first_kernels, model.first_layer);
    FeatureMaps out;
    out.channels = m.channels;
    out.height = m.height;
    out.width = m.width;
    out.data.assign(m.data.begin(), m.data.end());
    return out;
}

// ---------------------------------------------------------------------------
// Dataset evaluation
// ---------------------------------------------------------------------------

struct DatasetFixture {
    int image_height = 0;
    int image_width = 0;
    std::vector<std::uint8_t> images; // [n][h][w], 8-bit grayscale
    std::vector<int> labels;
    int num_classes = 10;

    std::size_t size() const { return labels.size(); }

    Frame frame(std::size_t i) const {
        Frame f;
        f.width = image_width;
        f.height = image_height;
        std::size_t n = std::size_t(image_width) * image_height;
        f.intensities.resize(n);
        for (std::size_t j = 0; j < n; ++j)
            f.intensities[j] = double(images[i * n + j]) / 255.0;
        return f;
    }
};

struct EvalResult {
    double accuracy = 0.0;
    std::vector<long long> per_class_total;
    std::vector<long long> per_class_correct;
    std::string config_id;    // "[W:A]"
    std::string noise_hash;   // hash of the non-ideality knobs
    std::vector<int> predictions;
};

inline std::string noise_config_hash(const CoreConfig& cfg) {
    double knobs[] = {cfg.awc.gain_error_per_bit[0], cfg.awc.gain_error_per_bit[1],
                      cfg.awc.gain_error_per_bit[2], cfg.awc.gain_error_per_bit[3],
                      cfg.awc.noise_sigma, cfg.noise.vom_sigma, cfg.noise.detect_sigma};
    return hex64(fnv1a64(knobs, sizeof knobs));
}

inline int argmax(const std::vector<double>& v) {
    require(!v.empty(), errc::internal, "argmax: empty");
    return int(std::max_element(v.begin(), v.end()) - v.begin());
}

inline int classify(const Frame& frame, const QuantModel& model, const CoreConfig& cfg,
                    RunMode mode, std::uint64_t seed, bool baseline = false) {
    FeatureMaps f = baseline ? baseline_first_layer(frame, model, cfg)
                             : run_first_layer(frame, model, cfg, mode, seed);
    for (double& v : f.data) v *= model.weight_scale;
    return argmax(run_rest(f, model));
}

/// Top-1 accuracy over a dataset fixture. Samples evaluate independently with
/// per-sample derived seeds, so the result does not depend on thread count.
inline EvalResult evaluate(const DatasetFixture& ds, const QuantModel& model,
                           const CoreConfig& cfg, RunMode mode, std::uint64_t seed,
                           int num_threads = 0, bool baseline = false) {
    require(ds.size() > 0, errc::invalid_argument, "evaluate: empty dataset");
    model.validate();

    std::vector<int> preds(ds.size(), -1);
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            std::uint64_t sample_seed = splitmix64(seed ^ splitmix64(0x5eed0000ULL + i));
            preds[i] = classify(ds.frame(i), model, cfg, mode, sample_seed, baseline);
        }
    };

    if (num_threads <= 0) num_threads = int(std::thread::hardware_concurrency());
    if (num_threads <= 1 || ds.size() < 2) {
        worker(0, ds.size());
    } else {
        std::vector<std::thread> pool;
        std::size_t chunk = (ds.size() + num_threads - 1) / std::size_t(num_threads);
        for (std::size_t b = 0; b < ds.size(); b += chunk)
            pool.emplace_back(worker, b, std::min(b + chunk, ds.size()));
        for (auto& t : pool) t.join();
    }

    EvalResult r;
    r.per_class_total.assign(std::size_t(ds.num_classes), 0);
    r.per_class_correct.assign(std::size_t(ds.num_classes), 0);
    long long correct = 0;
    for (std::size_t i = 0; i < ds.size(); ++i) {
        int label = ds.labels[i];
        require(label >= 0 && label < ds.num_classes, errc::fixture, "evaluate: bad label");
        r.per_class_total[std::size_t(label)]++;
        if (preds[i] == label) {
            r.per_class_correct[std::size_t(label)]++;
            correct++;
        }
    }
    r.accuracy = double(correct) / double(ds.size());
    r.config_id = "[" + std::to_string(model.weight_bits) + ":2]";
    r.noise_hash = noise_config_hash(cfg);
    r.predictions = std::move(preds);
    return r;
}

// ---------------------------------------------------------------------------
// Fixture loading
// ---------------------------------------------------------------------------

inline QuantModel load_model(const FixtureContainer& fc) {
    QuantModel m;
    const nlohmann::json& meta = fc.metadata;
    require(meta.contains("first_layer"), errc::fixture, "model fixture: missing first_layer");
    const auto& fl = meta["first_layer"];
    m.first_layer.kind = LayerKind::conv;
    m.first_layer.in_height = fl.at("in_height");
    m.first_layer.in_width = fl.at("in_width");
    m.first_layer.in_channels = fl.at("in_channels");
    m.first_layer.kernel = fl.at("kernel");
    m.first_layer.out_channels = fl.at("out_channels");
    m.first_layer.stride = fl.at("stride");
    m.first_layer.padding = fl.at("padding");
    m.weight_bits = meta.at("weight_bits");
    m.weight_scale = meta.at("weight_scale");

    const Tensor& cw = fc.get("conv1_weights");
    auto w = cw.as_i32();
    int per_kernel = m.first_layer.kernel * m.first_layer.kernel;
    require(int(w.size()) == m.first_layer.kernel_instances() * per_kernel, errc::fixture,
            "model fixture: conv1 weight tensor size mismatch");
    m.first_kernels.resize(std::size_t(m.first_layer.kernel_instances()));
    for (std::size_t k = 0; k < m.first_kernels.size(); ++k) {
        m.first_kernels[k].resize(std::size_t(per_kernel));
        for (int j = 0; j < per_kernel; ++j)
            m.first_kernels[k][std::size_t(j)] = make_weight(w[k * per_kernel + j]);
    }

    if (meta.contains("rest")) {
        for (const auto& le : meta["rest"]) {
            RestLayer l;
            std::string kind = le.at("kind");
            if (kind == "relu") {
                l.kind = RestKind::relu;
            } else if (kind == "maxpool" || kind == "avgpool") {
                l.kind = kind == "maxpool" ? RestKind::maxpool : RestKind::avgpool;
                l.kernel = le.at("kernel");
                l.stride = le.at("stride");
            } else if (kind == "conv") {
                l.kind = RestKind::conv;
                l.out_channels = le.at("out_channels");
                l.in_channels = le.at("in_channels");
                l.kernel = le.at("kernel");
                l.stride = le.at("stride");
                l.padding = le.at("padding");
                std::string name = le.at("name");
                l.weights = fc.get(name + "_weights").as_f64();
                if (fc.has(name + "_bias")) l.bias = fc.get(name + "_bias").as_f64();
            } else if (kind == "linear") {
                l.kind = RestKind::linear;
                l.out_channels = le.at("out_features");
                l.in_features = le.at("in_features");
                std::string name = le.at("name");
                l.weights = fc.get(name + "_weights").as_f64();
                if (fc.has(name + "_bias")) l.bias = fc.get(name + "_bias").as_f64();
            } else {
                fail(errc::fixture, "model fixture: unsupported layer kind " + kind);
            }
            m.rest.push_back(std::move(l));
        }
    }
    m.validate();
    return m;
}

inline DatasetFixture load_dataset(const FixtureContainer& fc) {
    DatasetFixture ds;
    const Tensor& imgs = fc.get("images");
    require(imgs.shape.size() == 3, errc::fixture, "dataset fixture: images must be [n][h][w]");
    ds.image_height = int(imgs.shape[1]);
    ds.image_width = int(imgs.shape[2]);
    ds.images = imgs.as_u8();
    auto labels = fc.get("labels").as_u8();
    ds.labels.assign(labels.begin(), labels.end());
    require(std::size_t(imgs.shape[0]) == ds.labels.size(), errc::fixture,
            "dataset fixture: image/label count mismatch");
    if (fc.metadata.contains("num_classes")) ds.num_classes = fc.metadata["num_classes"];
    return ds;
}

} // namespace oisa

#endif
