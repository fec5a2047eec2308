// Regenerates every committed fixture under fixtures/: the procedural digit
// dataset, the tiny quantized CNN, the calibrated timing/energy constants,
// example run configs, and the frozen evaluation goldens.
//
// Usage: make_fixtures [output_root]   (default: fixtures)

#include <filesystem>
#include <fstream>
#include <iostream>

#include "oisa/config_io.hpp"
#include "oisa/fixture.hpp"
#include "oisa/inference.hpp"
#include "oisa/quantize.hpp"

namespace fs = std::filesystem;
using namespace oisa;

namespace {

// ---------------------------------------------------------------------------
// Procedural 10-class digit dataset: seven-segment glyphs on a 16x16 canvas
// with shift jitter, amplitude variation, and sensor noise.
// ---------------------------------------------------------------------------

constexpr int IMG = 16;

struct Proto {
    double pix[IMG][IMG] = {};
    void fill(int r0, int r1, int c0, int c1) {
        for (int r = r0; r <= r1; ++r)
            for (int c = c0; c <= c1; ++c) pix[r][c] = 1.0;
    }
};

Proto digit_proto(int digit) {
    // segment bitmask per digit: t, tl, tr, m, bl, br, b
    static const int seg[10] = {
        0b1110111, // 0
        0b0010010, // 1
        0b1011101, // 2
        0b1011011, // 3
        0b0111010, // 4
        0b1101011, // 5
        0b1101111, // 6
        0b1010010, // 7
        0b1111111, // 8
        0b1111011, // 9
    };
    int s = seg[digit];
    Proto p;
    if (s & 0b1000000) p.fill(2, 3, 4, 12);    // top
    if (s & 0b0100000) p.fill(2, 9, 3, 4);     // top-left
    if (s & 0b0010000) p.fill(2, 9, 11, 12);   // top-right
    if (s & 0b0001000) p.fill(7, 8, 4, 12);    // middle
    if (s & 0b0000100) p.fill(7, 14, 3, 4);    // bottom-left
    if (s & 0b0000010) p.fill(7, 14, 11, 12);  // bottom-right
    if (s & 0b0000001) p.fill(13, 14, 4, 12);  // bottom
    return p;
}

double uniform01(std::uint64_t& state) {
    state = splitmix64(state);
    return double(state >> 11) * 0x1.0p-53;
}

// one jittered, noisy sample of a digit glyph, quantized to u8
std::vector<std::uint8_t> render_sample(int digit, std::uint64_t seed) {
    Proto p = digit_proto(digit);
    std::uint64_t st = seed;
    int dx = int(uniform01(st) * 3.0) - 1; // shift in {-1,0,1}
    int dy = int(uniform01(st) * 3.0) - 1;
    double amp = 0.6 + 0.4 * uniform01(st);
    gaussian_stream g(splitmix64(seed ^ 0xA0A0A0A0ULL));

    std::vector<std::uint8_t> img(IMG * IMG);
    for (int y = 0; y < IMG; ++y)
        for (int x = 0; x < IMG; ++x) {
            int sy = y - dy;
            int sx = x - dx;
            double v = 0.0;
            if (sy >= 0 && sy < IMG && sx >= 0 && sx < IMG) v = amp * p.pix[sy][sx];
            v += 0.08 * g.next();
            v = std::clamp(v, 0.0, 1.0);
            img[std::size_t(y) * IMG + x] = std::uint8_t(std::lround(v * 255.0));
        }
    return img;
}

DatasetFixture make_dataset(int n, std::uint64_t tag) {
    DatasetFixture ds;
    ds.image_height = IMG;
    ds.image_width = IMG;
    ds.num_classes = 10;
    ds.images.reserve(std::size_t(n) * IMG * IMG);
    for (int i = 0; i < n; ++i) {
        int label = i % 10;
        auto img = render_sample(label, splitmix64(splitmix64(tag) ^ std::uint64_t(i + 1)));
        ds.images.insert(ds.images.end(), img.begin(), img.end());
        ds.labels.push_back(label);
    }
    return ds;
}

void save_dataset(const fs::path& dir, const DatasetFixture& ds, const std::string& note) {
    FixtureContainer fc;
    fc.tensors["images"] =
        Tensor::u8({std::int64_t(ds.labels.size()), IMG, IMG}, ds.images);
    std::vector<std::uint8_t> labels(ds.labels.begin(), ds.labels.end());
    fc.tensors["labels"] = Tensor::u8({std::int64_t(labels.size())}, labels);
    fc.metadata["num_classes"] = 10;
    fc.metadata["note"] = note;
    save_fixture(dir, fc);
}

// ---------------------------------------------------------------------------
// Tiny CNN: 3x3 conv (1->8, pad 1) -> relu -> 2x2 avgpool -> linear 512->10
// ---------------------------------------------------------------------------

std::vector<std::vector<double>> conv1_filters() {
    return {
        {0, 1, 0, 1, 2, 1, 0, 1, 0},          // center blob
        {1, 1, 1, 0, 0, 0, -1, -1, -1},       // horizontal edge
        {1, 0, -1, 1, 0, -1, 1, 0, -1},       // vertical edge
        {2, 1, 0, 1, 0, -1, 0, -1, -2},       // diagonal edge \.
        {0, 1, 2, -1, 0, 1, -2, -1, 0},       // diagonal edge /
        {-1, -1, -1, -1, 8, -1, -1, -1, -1},  // center-surround
        {1, 1, 0, 1, -1, -1, 0, -1, -1},      // top-left corner
        {0, -1, -1, 1, 1, -1, 1, 1, 0},       // bottom-left corner
    };
}

std::vector<double> features_for(const Frame& frame, const QuantModel& model,
                                 const CoreConfig& cfg) {
    FeatureMaps f = baseline_first_layer(frame, model, cfg);
    for (double& v : f.data) v *= model.weight_scale;
    RestLayer relu;
    relu.kind = RestKind::relu;
    RestLayer pool;
    pool.kind = RestKind::avgpool;
    pool.kernel = 2;
    pool.stride = 2;
    return run_rest_layer(run_rest_layer(f, relu), pool).data;
}

QuantModel build_model(const DatasetFixture& train, const CoreConfig& cfg) {
    QuantModel m;
    m.first_layer.kind = LayerKind::conv;
    m.first_layer.in_height = IMG;
    m.first_layer.in_width = IMG;
    m.first_layer.in_channels = 1;
    m.first_layer.kernel = 3;
    m.first_layer.out_channels = 8;
    m.first_layer.stride = 1;
    m.first_layer.padding = 1;
    m.weight_bits = 4;

    QuantizedKernels q = quantize_kernels(conv1_filters(), m.weight_bits);
    m.first_kernels = q.kernels;
    m.weight_scale = q.scale;

    // ridge-regression readout on the pooled conv features: closed-form least
    // squares of one-hot targets with a bias column
    const int feat = 8 * 8 * 8;
    const int dim = feat + 1; // trailing bias input
    const int n = int(train.size());
    std::vector<std::vector<double>> X(std::size_t(n),
                                       std::vector<double>(std::size_t(dim), 0.0));
    for (int i = 0; i < n; ++i) {
        auto f = features_for(train.frame(std::size_t(i)), m, cfg);
        require(int(f.size()) == feat, errc::internal, "unexpected feature size");
        std::copy(f.begin(), f.end(), X[std::size_t(i)].begin());
        X[std::size_t(i)][std::size_t(feat)] = 1.0;
    }

    // A = X^T X + lambda I,  B = X^T Y
    const double lambda = 1.0;
    std::vector<std::vector<double>> A(std::size_t(dim), std::vector<double>(std::size_t(dim), 0.0));
    std::vector<std::vector<double>> B(std::size_t(dim), std::vector<double>(10, 0.0));
    for (int i = 0; i < n; ++i) {
        const auto& x = X[std::size_t(i)];
        for (int r = 0; r < dim; ++r) {
            if (x[std::size_t(r)] == 0.0) continue;
            for (int c = r; c < dim; ++c) A[std::size_t(r)][std::size_t(c)] += x[std::size_t(r)] * x[std::size_t(c)];
            B[std::size_t(r)][std::size_t(train.labels[std::size_t(i)])] += x[std::size_t(r)];
        }
    }
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < r; ++c) A[std::size_t(r)][std::size_t(c)] = A[std::size_t(c)][std::size_t(r)];
        A[std::size_t(r)][std::size_t(r)] += lambda;
    }

    // Gaussian elimination with partial pivoting, solving for all 10 targets
    for (int col = 0; col < dim; ++col) {
        int piv = col;
        for (int r = col + 1; r < dim; ++r)
            if (std::abs(A[std::size_t(r)][std::size_t(col)]) >
                std::abs(A[std::size_t(piv)][std::size_t(col)]))
                piv = r;
        std::swap(A[std::size_t(col)], A[std::size_t(piv)]);
        std::swap(B[std::size_t(col)], B[std::size_t(piv)]);
        double d = A[std::size_t(col)][std::size_t(col)];
        require(std::abs(d) > 1e-12, errc::internal, "singular normal equations");
        for (int r = 0; r < dim; ++r) {
            if (r == col) continue;
            double factor = A[std::size_t(r)][std::size_t(col)] / d;
            if (factor == 0.0) continue;
            for (int c = col; c < dim; ++c)
                A[std::size_t(r)][std::size_t(c)] -= factor * A[std::size_t(col)][std::size_t(c)];
            for (int t = 0; t < 10; ++t)
                B[std::size_t(r)][std::size_t(t)] -= factor * B[std::size_t(col)][std::size_t(t)];
        }
    }

    RestLayer relu;
    relu.kind = RestKind::relu;
    RestLayer pool;
    pool.kind = RestKind::avgpool;
    pool.kernel = 2;
    pool.stride = 2;
    RestLayer fc;
    fc.kind = RestKind::linear;
    fc.out_channels = 10;
    fc.in_features = feat;
    fc.weights.resize(std::size_t(10) * feat);
    fc.bias.resize(10);
    for (int c = 0; c < 10; ++c) {
        for (int j = 0; j < feat; ++j)
            fc.weights[std::size_t(c) * feat + j] =
                B[std::size_t(j)][std::size_t(c)] / A[std::size_t(j)][std::size_t(j)];
        fc.bias[std::size_t(c)] = B[std::size_t(feat)][std::size_t(c)] /
                                  A[std::size_t(feat)][std::size_t(feat)];
    }
    m.rest = {relu, pool, fc};
    m.validate();
    return m;
}

void save_model(const fs::path& dir, const QuantModel& m) {
    FixtureContainer fc;
    std::vector<std::int32_t> w;
    for (const KernelWeights& k : m.first_kernels)
        for (const QuantWeight& qw : k) w.push_back(qw.value());
    fc.tensors["conv1_weights"] =
        Tensor::i32({m.first_layer.out_channels, m.first_layer.in_channels,
                     m.first_layer.kernel, m.first_layer.kernel},
                    w);
    const RestLayer& fcl = m.rest.back();
    fc.tensors["fc_weights"] =
        Tensor::f64({fcl.out_channels, fcl.in_features}, fcl.weights);
    fc.tensors["fc_bias"] = Tensor::f64({fcl.out_channels}, fcl.bias);

    fc.metadata["first_layer"] = {
        {"in_height", m.first_layer.in_height},   {"in_width", m.first_layer.in_width},
        {"in_channels", m.first_layer.in_channels}, {"kernel", m.first_layer.kernel},
        {"out_channels", m.first_layer.out_channels}, {"stride", m.first_layer.stride},
        {"padding", m.first_layer.padding},
    };
    fc.metadata["weight_bits"] = m.weight_bits;
    fc.metadata["weight_scale"] = m.weight_scale;
    fc.metadata["rest"] = json::array({
        json{{"kind", "relu"}},
        json{{"kind", "avgpool"}, {"kernel", 2}, {"stride", 2}},
        json{{"kind", "linear"}, {"name", "fc"}, {"out_features", 10}, {"in_features", 512}},
    });
    save_fixture(dir, fc);
}

// ---------------------------------------------------------------------------
// Calibrated timing/energy constants: solve the VCSEL emission energy so the
// reference first-layer workload lands on the target efficiency.
// ---------------------------------------------------------------------------

json make_paper_cal(const CoreConfig& cfg) {
    LayerSpec ref;
    ref.kind = LayerKind::conv;
    ref.in_height = 128;
    ref.in_width = 128;
    ref.in_channels = 3;
    ref.kernel = 7;
    ref.out_channels = 64;
    ref.stride = 2;
    ref.padding = 3;

    TimingEnergyConstants c;
    c.t_mac = 55.8e-12;
    c.e_bpd_detect = 50e-15;
    c.e_awc_convert = 1e-12;
    c.e_kernel_read = 1e-12;
    c.e_vom = 100e-15;
    c.e_mr_to_step = 30e-12;
    c.e_mr_eo_step = 1e-15;
    c.p_static = 0.5;
    c.t_exposure = 100e-6;
    c.t_readout = 50e-6;
    c.ops_per_mac = 2;
    c.e_vcsel_emission = 0.0;

    Schedule s = plan_layer(ref, cfg);
    std::vector<KernelWeights> zeros(std::size_t(ref.kernel_instances()),
                                     KernelWeights(std::size_t(ref.macs_per_instance_position())));
    std::vector<WeightMap> maps;
    for (int r = 0; r < s.remap_count; ++r) maps.push_back(map_weights(s, r, zeros, cfg));

    EventCounts ev = count_events(s, cfg);
    PerfReport base = estimate(s, maps, c, cfg);

    const double target_efficiency = 6.68e12; // Op/s/W
    double target_energy = double(s.total_macs) * c.ops_per_mac / target_efficiency;
    require(target_energy > base.total_energy, errc::internal,
            "paper_cal: fixed energies already exceed the target budget");
    c.e_vcsel_emission = (target_energy - base.total_energy) / double(ev.vcsel_emissions);

    PerfReport check = estimate(s, maps, c, cfg);
    check.frame_rate = frame_rate(check, c);
    std::cout << "paper_cal: e_vcsel=" << c.e_vcsel_emission
              << " J, efficiency=" << check.efficiency << " Op/s/W, frame_rate="
              << check.frame_rate << " fps\n";
    require(std::abs(check.efficiency - target_efficiency) / target_efficiency < 1e-9,
            errc::internal, "paper_cal: efficiency fit failed");
    require(check.frame_rate >= 1000.0, errc::internal, "paper_cal: frame rate below target");

    json j;
    j["t_mac"] = c.t_mac;
    j["e_vcsel_emission"] = c.e_vcsel_emission;
    j["e_bpd_detect"] = c.e_bpd_detect;
    j["e_awc_convert"] = c.e_awc_convert;
    j["e_kernel_read"] = c.e_kernel_read;
    j["e_vom"] = c.e_vom;
    j["e_mr_to_step"] = c.e_mr_to_step;
    j["e_mr_eo_step"] = c.e_mr_eo_step;
    j["p_static"] = c.p_static;
    j["t_exposure"] = c.t_exposure;
    j["t_readout"] = c.t_readout;
    j["ops_per_mac"] = c.ops_per_mac;
    return j;
}

json reference_layer_json() {
    return {{"kind", "conv"},    {"in_height", 128}, {"in_width", 128}, {"in_channels", 3},
            {"kernel", 7},       {"out_channels", 64}, {"stride", 2},   {"padding", 3}};
}

json core_default_json(const CoreConfig& cfg) {
    json j;
    j["num_banks"] = cfg.num_banks;
    j["bank_columns"] = cfg.bank_columns;
    j["arms_per_bank"] = cfg.arms_per_bank;
    j["mrs_per_arm"] = cfg.mrs_per_arm;
    j["awc_units_per_row"] = cfg.awc_units_per_row;
    j["pixel"] = {{"v_reset", cfg.pixel.v_reset},
                  {"discharge_gain", cfg.pixel.discharge_gain},
                  {"exposure", cfg.pixel.exposure}};
    j["vam"] = {{"v_ref_low", cfg.vam.v_ref_low},
                {"v_ref_high", cfg.vam.v_ref_high},
                {"supply", cfg.vam.supply},
                {"bias_current", cfg.vam.bias_current},
                {"intensity_per_level", cfg.vam.intensity_per_level}};
    j["awc"] = {{"bit_width", cfg.awc.bit_width},
                {"unit_current", cfg.awc.unit_current},
                {"gain_error_per_bit", cfg.awc.gain_error_per_bit},
                {"noise_sigma", cfg.awc.noise_sigma}};
    j["mr"] = {{"lambda_res", cfg.mr.lambda_res},
               {"q_factor", cfg.mr.q_factor},
               {"extinction_floor", cfg.mr.extinction_floor},
               {"insertion_loss", cfg.mr.insertion_loss},
               {"channel_spacing", cfg.mr.channel_spacing}};
    j["mr_tuning"] = {{"to_step_energy", cfg.mr_tuning.to_step_energy},
                      {"to_step_latency", cfg.mr_tuning.to_step_latency},
                      {"eo_step_energy", cfg.mr_tuning.eo_step_energy},
                      {"eo_step_latency", cfg.mr_tuning.eo_step_latency}};
    j["bpd"] = {{"responsivity", cfg.bpd.responsivity}};
    j["noise"] = {{"vom_sigma", cfg.noise.vom_sigma}, {"detect_sigma", cfg.noise.detect_sigma}};
    return j;
}

void write_json(const fs::path& path, const json& j) {
    std::ofstream os(path);
    require(os.good(), errc::fixture, "cannot write " + path.string());
    os << j.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    try {
        fs::path root = argc > 1 ? argv[1] : "fixtures";
        fs::create_directories(root);
        fs::create_directories(root / "goldens");

        CoreConfig cfg; // defaults = the reference core

        std::cout << "generating datasets...\n";
        DatasetFixture train = make_dataset(200, 2);
        DatasetFixture eval = make_dataset(1000, 1);
        DatasetFixture small = make_dataset(120, 3);
        save_dataset(root / "digits10_train", train, "training split for the linear readout");
        save_dataset(root / "digits10", eval, "evaluation split");
        save_dataset(root / "digits10_small", small, "small split for quick sweeps");

        std::cout << "fitting model...\n";
        QuantModel model = build_model(train, cfg);
        save_model(root / "tiny_cnn", model);

        std::cout << "evaluating goldens...\n";
        EvalResult ideal = evaluate(eval, model, cfg, RunMode::ideal, 1, 0);
        EvalResult baseline = evaluate(eval, model, cfg, RunMode::ideal, 1, 0, true);
        require(ideal.accuracy == baseline.accuracy, errc::internal,
                "ideal core path should match the software baseline exactly");
        std::cout << "  ideal accuracy " << ideal.accuracy << "\n";

        CoreConfig noisy_cfg = cfg;
        noisy_cfg.awc.gain_error_per_bit = {0.02, 0.02, 0.02, 0.05};
        noisy_cfg.awc.noise_sigma = 0.02;
        noisy_cfg.noise.detect_sigma = 0.1;
        EvalResult noisy = evaluate(eval, model, noisy_cfg, RunMode::noisy, 42, 0);
        std::cout << "  noisy accuracy (seed 42) " << noisy.accuracy << "\n";

        json golden;
        golden["ideal"] = eval_result_to_json(ideal);
        golden["noisy_seed42"] = eval_result_to_json(noisy);
        golden["noisy_seed42"]["seed"] = 42;
        golden["noisy_seed42"]["core_overrides"] = {
            {"awc",
             {{"gain_error_per_bit", {0.02, 0.02, 0.02, 0.05}}, {"noise_sigma", 0.02}}},
            {"noise", {{"detect_sigma", 0.1}}}};
        write_json(root / "goldens" / "eval_golden.json", golden);

        std::cout << "calibrating constants...\n";
        json cal = make_paper_cal(cfg);
        write_json(root / "paper_cal.json", cal);
        write_json(root / "core_default.json", core_default_json(cfg));

        // reference-workload schedule, for `inspect` and golden-file tests
        {
            Schedule s = plan_layer(layer_from_json(reference_layer_json()), cfg);
            std::ofstream os(root / "goldens" / "schedule_reference.txt");
            write_schedule(os, s);
        }

        write_json(root / "run_paper.json", json{{"constants", "paper_cal.json"},
                                                 {"core", "core_default.json"},
                                                 {"layer", reference_layer_json()}});
        write_json(root / "run_ideal.json", json{{"constants", "paper_cal.json"},
                                                 {"model", "tiny_cnn"},
                                                 {"dataset", "digits10"},
                                                 {"mode", "ideal"},
                                                 {"seed", 1}});
        write_json(root / "run_noisy.json",
                   json{{"constants", "paper_cal.json"},
                        {"model", "tiny_cnn"},
                        {"dataset", "digits10"},
                        {"mode", "noisy"},
                        {"seed", 42},
                        {"core",
                         {{"awc",
                           {{"gain_error_per_bit", {0.02, 0.02, 0.02, 0.05}},
                            {"noise_sigma", 0.02}}},
                          {"noise", {{"detect_sigma", 0.1}}}}}});
        write_json(root / "run_sweep.json",
                   json{{"constants", "paper_cal.json"},
                        {"model", "tiny_cnn"},
                        {"dataset", "digits10_small"},
                        {"mode", "noisy"},
                        {"seed", 7},
                        {"sweep",
                         json::array(
                             {json{{"param", "core.awc.gain_error_per_bit"},
                                   {"values", {{0.0, 0.0, 0.0, 0.0}, {0.05, 0.05, 0.05, 0.05}}}}})}});

        // one rendered sample, for eyeballing the dataset
        save_pgm(root / "sample_digit3.pgm", eval.frame(3));

        std::cout << "fixtures written to " << root.string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "make_fixtures failed: " << e.what() << "\n";
        return 1;
    }
}
