#include <doctest.h>

#include <random>

#include "oisa/inference.hpp"
#include "oisa/quantize.hpp"

using namespace oisa;

namespace {

CodePlane random_plane(int w, int h, std::mt19937_64& rng) {
    CodePlane p;
    p.width = w;
    p.height = h;
    p.codes.resize(std::size_t(w) * h);
    std::uniform_int_distribution<int> act(0, 2);
    for (int& c : p.codes) c = act(rng);
    return p;
}

std::vector<KernelWeights> random_kernels(int count, int elems, int max_mag,
                                          std::mt19937_64& rng) {
    std::uniform_int_distribution<int> wt(-max_mag, max_mag);
    std::vector<KernelWeights> ks(static_cast<std::size_t>(count));
    for (auto& k : ks) {
        k.resize(std::size_t(elems));
        for (auto& w : k) w = make_weight(wt(rng));
    }
    return ks;
}

// Second, independently structured conv implementation: patch-gather then
// per-patch dot product (im2col style), used to cross-check oracle_conv.
IntMaps conv_by_patches(const std::vector<CodePlane>& codes,
                        const std::vector<KernelWeights>& kernels, const LayerSpec& l) {
    IntMaps out;
    out.channels = l.out_channels;
    out.height = l.out_height();
    out.width = l.out_width();
    out.data.assign(std::size_t(out.channels) * out.height * out.width, 0);
    int K = l.kernel;
    for (int oy = 0; oy < out.height; ++oy)
        for (int ox = 0; ox < out.width; ++ox) {
            std::vector<std::vector<int>> patches(std::size_t(l.in_channels),
                                                  std::vector<int>(std::size_t(K) * K, 0));
            for (int ic = 0; ic < l.in_channels; ++ic)
                for (int j = 0; j < K * K; ++j) {
                    int x = ox * l.stride - l.padding + j % K;
                    int y = oy * l.stride - l.padding + j / K;
                    if (x >= 0 && x < l.in_width && y >= 0 && y < l.in_height)
                        patches[std::size_t(ic)][std::size_t(j)] = codes[std::size_t(ic)].at(x, y);
                }
            for (int o = 0; o < l.out_channels; ++o) {
                long long acc = 0;
                for (int ic = 0; ic < l.in_channels; ++ic) {
                    const auto& w = kernels[std::size_t(o) * l.in_channels + ic];
                    for (int j = 0; j < K * K; ++j)
                        acc += (long long)patches[std::size_t(ic)][std::size_t(j)] *
                               w[std::size_t(j)].value();
                }
                out.at(o, oy, ox) = acc;
            }
        }
    return out;
}

QuantModel tiny_model(const LayerSpec& layer, std::vector<KernelWeights> kernels,
                      int bits = 4) {
    QuantModel m;
    m.first_layer = layer;
    m.weight_bits = bits;
    m.first_kernels = std::move(kernels);
    return m;
}

} // namespace

TEST_CASE("oracle_conv: all-zero frame gives all-zero maps") {
    LayerSpec l;
    l.kernel = 3;
    l.in_height = 8;
    l.in_width = 8;
    l.out_channels = 4;
    CodePlane zero;
    zero.width = 8;
    zero.height = 8;
    zero.codes.assign(64, 0);
    std::mt19937_64 rng(3);
    auto ks = random_kernels(4, 9, 15, rng);
    auto m = oracle_conv({zero}, ks, l);
    for (long long v : m.data) CHECK(v == 0);
}

TEST_CASE("oracle_conv: delta response picks the center tap") {
    LayerSpec l;
    l.kernel = 3;
    l.in_height = 3;
    l.in_width = 3;
    CodePlane p;
    p.width = 3;
    p.height = 3;
    p.codes.assign(9, 0);
    p.at(1, 1) = 2;
    KernelWeights k;
    for (int v : {1, 2, 3, 4, -5, 6, 7, 8, 9}) k.push_back(make_weight(v));
    auto m = oracle_conv({p}, {k}, l);
    REQUIRE(m.data.size() == 1);
    CHECK(m.data[0] == 2 * -5); // 2 * w_center
}

TEST_CASE("oracle_conv: matches an independently coded implementation") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 50; ++trial) {
        LayerSpec l;
        l.kernel = 3;
        l.in_height = 8;
        l.in_width = 8;
        l.in_channels = 2;
        l.out_channels = 3;
        l.padding = trial % 2;
        std::vector<CodePlane> planes;
        for (int c = 0; c < l.in_channels; ++c) planes.push_back(random_plane(8, 8, rng));
        auto ks = random_kernels(l.kernel_instances(), 9, 15, rng);
        auto a = oracle_conv(planes, ks, l);
        auto b = conv_by_patches(planes, ks, l);
        REQUIRE(a.data == b.data);
    }
}

TEST_CASE("oracle_conv: shape mismatch errors") {
    LayerSpec l;
    l.kernel = 3;
    l.in_height = 8;
    l.in_width = 8;
    CodePlane small;
    small.width = 4;
    small.height = 4;
    small.codes.assign(16, 0);
    std::mt19937_64 rng(1);
    CHECK_THROWS_AS(oracle_conv({small}, random_kernels(1, 9, 15, rng), l), sim_error);
}

TEST_CASE("run_first_layer: ideal mode equals the oracle exactly") {
    CoreConfig cfg;
    std::mt19937_64 rng(23);
    for (int K : {3, 5, 7}) {
        LayerSpec l;
        l.kernel = K;
        l.in_height = 16;
        l.in_width = 16;
        l.in_channels = 1;
        l.out_channels = 6;
        l.padding = K / 2;
        auto ks = random_kernels(l.kernel_instances(), K * K, 15, rng);
        QuantModel m = tiny_model(l, ks);
        for (int t = 0; t < 5; ++t) {
            std::vector<CodePlane> codes{random_plane(16, 16, rng)};
            FeatureMaps got = run_first_layer_codes(codes, m, cfg, RunMode::ideal, 0);
            IntMaps want = oracle_conv(codes, ks, l);
            REQUIRE(got.data.size() == want.data.size());
            for (std::size_t i = 0; i < got.data.size(); ++i)
                REQUIRE(got.data[i] == double(want.data[i]));
        }
    }
}

TEST_CASE("run_first_layer: noisy mode converges to the oracle as noise vanishes") {
    CoreConfig cfg;
    cfg.awc.gain_error_per_bit = {1e-7, -1e-7, 1e-7, -1e-7};
    cfg.awc.noise_sigma = 1e-7;
    std::mt19937_64 rng(29);
    LayerSpec l;
    l.kernel = 3;
    l.in_height = 12;
    l.in_width = 12;
    l.out_channels = 4;
    auto ks = random_kernels(4, 9, 15, rng);
    QuantModel m = tiny_model(l, ks);
    std::vector<CodePlane> codes{random_plane(12, 12, rng)};
    FeatureMaps got = run_first_layer_codes(codes, m, cfg, RunMode::noisy, 77);
    IntMaps want = oracle_conv(codes, ks, l);
    for (std::size_t i = 0; i < got.data.size(); ++i)
        CHECK(got.data[i] == double(want.data[i])); // readout digitization absorbs tiny noise
}

TEST_CASE("run_first_layer: noisy mode is reproducible per seed") {
    CoreConfig cfg;
    cfg.awc.gain_error_per_bit = {0.0, 0.0, 0.0, 0.05};
    cfg.awc.noise_sigma = 0.05;
    std::mt19937_64 rng(31);
    LayerSpec l;
    l.kernel = 3;
    l.in_height = 10;
    l.in_width = 10;
    l.out_channels = 3;
    auto ks = random_kernels(3, 9, 15, rng);
    QuantModel m = tiny_model(l, ks);
    std::vector<CodePlane> codes{random_plane(10, 10, rng)};
    auto a = run_first_layer_codes(codes, m, cfg, RunMode::noisy, 42);
    auto b = run_first_layer_codes(codes, m, cfg, RunMode::noisy, 42);
    CHECK(a.data == b.data);
}

TEST_CASE("run_rest: empty descriptor flattens features into logits") {
    QuantModel m;
    FeatureMaps f;
    f.channels = 2;
    f.height = 2;
    f.width = 1;
    f.data = {1.0, 2.0, 3.0, 4.0};
    auto logits = run_rest(f, m);
    CHECK(logits == f.data);
}

TEST_CASE("run_rest: identity linear layer passes features through") {
    QuantModel m;
    RestLayer lin;
    lin.kind = RestKind::linear;
    lin.out_channels = 4;
    lin.in_features = 4;
    lin.weights.assign(16, 0.0);
    for (int i = 0; i < 4; ++i) lin.weights[std::size_t(i) * 4 + i] = 1.0;
    m.rest.push_back(lin);
    FeatureMaps f;
    f.channels = 4;
    f.height = 1;
    f.width = 1;
    f.data = {0.5, -1.0, 2.0, 0.0};
    CHECK(run_rest(f, m) == f.data);
}

TEST_CASE("run_rest: relu and pooling behave") {
    QuantModel m;
    RestLayer relu;
    relu.kind = RestKind::relu;
    RestLayer pool;
    pool.kind = RestKind::maxpool;
    pool.kernel = 2;
    pool.stride = 2;
    m.rest = {relu, pool};
    FeatureMaps f;
    f.channels = 1;
    f.height = 2;
    f.width = 2;
    f.data = {-1.0, 3.0, 2.0, -5.0};
    auto out = run_rest(f, m);
    REQUIRE(out.size() == 1);
    CHECK(out[0] == 3.0);
}

TEST_CASE("evaluate: single correct sample scores 1.0") {
    CoreConfig cfg;
    LayerSpec l;
    l.kernel = 3;
    l.in_height = 8;
    l.in_width = 8;
    l.out_channels = 2;
    // kernel 0 responds to brightness, kernel 1 is inhibitory: a bright frame
    // must classify as class 0
    std::vector<KernelWeights> ks{KernelWeights(9, make_weight(5)),
                                  KernelWeights(9, make_weight(-5))};
    QuantModel m = tiny_model(l, ks);
    RestLayer lin;
    lin.kind = RestKind::linear;
    lin.out_channels = 2;
    lin.in_features = 2 * 6 * 6;
    lin.weights.assign(std::size_t(2) * 2 * 36, 0.0);
    for (int i = 0; i < 36; ++i) {
        lin.weights[std::size_t(i)] = 1.0;             // class 0 reads channel 0
        lin.weights[std::size_t(36 * 2 + 36 + i)] = 1.0; // class 1 reads channel 1
    }
    m.rest.push_back(lin);

    DatasetFixture ds;
    ds.image_height = 8;
    ds.image_width = 8;
    ds.images.assign(64, 255);
    ds.labels = {0};
    ds.num_classes = 2;

    EvalResult r = evaluate(ds, m, cfg, RunMode::ideal, 1);
    CHECK(r.accuracy == 1.0);
    CHECK(r.per_class_total[0] == 1);
    CHECK(r.per_class_correct[0] == 1);
}

TEST_CASE("evaluate: deterministic across thread counts") {
    CoreConfig cfg;
    cfg.awc.gain_error_per_bit = {0.0, 0.0, 0.0, 0.05};
    cfg.awc.noise_sigma = 0.05;
    std::mt19937_64 rng(41);
    LayerSpec l;
    l.kernel = 3;
    l.in_height = 8;
    l.in_width = 8;
    l.out_channels = 3;
    QuantModel m = tiny_model(l, random_kernels(3, 9, 15, rng));

    DatasetFixture ds;
    ds.image_height = 8;
    ds.image_width = 8;
    std::uniform_int_distribution<int> pix(0, 255);
    for (int i = 0; i < 24; ++i) {
        for (int j = 0; j < 64; ++j) ds.images.push_back(std::uint8_t(pix(rng)));
        ds.labels.push_back(i % 3);
    }
    ds.num_classes = 3;

    auto r1 = evaluate(ds, m, cfg, RunMode::noisy, 7, 1);
    auto r4 = evaluate(ds, m, cfg, RunMode::noisy, 7, 4);
    auto r8 = evaluate(ds, m, cfg, RunMode::noisy, 7, 8);
    CHECK(r1.predictions == r4.predictions);
    CHECK(r1.predictions == r8.predictions);
    CHECK(r1.accuracy == r4.accuracy);
}

TEST_CASE("evaluate: rejects empty dataset") {
    CoreConfig cfg;
    LayerSpec l;
    l.kernel = 3;
    l.in_height = 8;
    l.in_width = 8;
    std::mt19937_64 rng(1);
    QuantModel m = tiny_model(l, random_kernels(1, 9, 15, rng));
    DatasetFixture ds;
    CHECK_THROWS_AS(evaluate(ds, m, cfg, RunMode::ideal, 0), sim_error);
}

TEST_CASE("quantize_kernels: codes stay inside the sign-magnitude range") {
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> wr(-2.5, 2.5);
    for (int bits = 1; bits <= 4; ++bits) {
        std::vector<std::vector<double>> real(8, std::vector<double>(9));
        for (auto& k : real)
            for (auto& w : k) w = wr(rng);
        auto q = quantize_kernels(real, bits);
        int fs = (1 << bits) - 1;
        for (const auto& k : q.kernels)
            for (const auto& w : k) CHECK(w.magnitude <= fs);
    }
}

TEST_CASE("quantize_kernels: round half away from zero") {
    // max|w| = 7.5 at 4 bits -> scale 0.5; 0.25/0.5 = 0.5 rounds to 1,
    // -0.25/0.5 = -0.5 rounds to -1
    std::vector<std::vector<double>> real{{7.5, 0.25, -0.25, 0.0}};
    auto q = quantize_kernels(real, 4);
    CHECK(q.scale == doctest::Approx(0.5));
    CHECK(q.kernels[0][0].value() == 15);
    CHECK(q.kernels[0][1].value() == 1);
    CHECK(q.kernels[0][2].value() == -1);
    CHECK(q.kernels[0][3].value() == 0);
}
