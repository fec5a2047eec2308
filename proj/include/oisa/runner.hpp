#ifndef OISA_RUNNER_HPP
#define OISA_RUNNER_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "oisa/config_io.hpp"
#include "oisa/fixture.hpp"
#include "oisa/inference.hpp"
#include "oisa/mapper.hpp"
#include "oisa/perf_model.hpp"

namespace oisa {

struct SweepAxis {
    std::string param; // dotted path, e.g. "core.awc.bit_width" or "layer.kernel"
    std::vector<json> values;
};

/// Resolved run description: the layered config after all file loading and
/// command-line overrides.
struct RunConfig {
    json core = json::object();      // CoreConfig overrides
    json constants = json::object(); // TimingEnergyConstants overrides
    json layer;                      // optional synthetic LayerSpec
    std::filesystem::path model_path;
    std::filesystem::path dataset_path;
    RunMode mode = RunMode::ideal;
    std::uint64_t seed = 0;
    int threads = 0;
    std::filesystem::path output_dir = "out";
    std::vector<SweepAxis> sweep;
};

/// Set a dotted-path key ("awc.bit_width") inside a json object tree.
inline void apply_override(json& root, const std::string& path, const json& value) {
    json* node = &root;
    std::size_t pos = 0;
    while (true) {
        std::size_t dot = path.find('.', pos);
        std::string key = path.substr(pos, dot == std::string::npos ? dot : dot - pos);
        require(!key.empty(), errc::config, "override: empty path segment in '" + path + "'");
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        pos = dot + 1;
    }
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
    json j = load_json_file(path, errc::config);
    RunConfig rc;
    auto base = path.parent_path();
    auto resolve = [&](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp : base / fp;
    };

    // "core"/"constants" accept either an inline object or a file path
    for (auto [key, target] : {std::pair{"core", &rc.core}, {"constants", &rc.constants}}) {
        if (!j.contains(key)) continue;
        if (j[key].is_string())
            *target = load_json_file(resolve(j[key].get<std::string>()), errc::config);
        else
            *target = j[key];
    }
    if (j.contains("layer")) rc.layer = j["layer"];
    if (j.contains("model")) {
        rc.model_path = resolve(j["model"].get<std::string>());
        require(std::filesystem::exists(rc.model_path), errc::fixture,
                "model path does not exist: " + rc.model_path.string());
    }
    if (j.contains("dataset")) {
        rc.dataset_path = resolve(j["dataset"].get<std::string>());
        require(std::filesystem::exists(rc.dataset_path), errc::fixture,
                "dataset path does not exist: " + rc.dataset_path.string());
    }
    if (j.contains("mode")) {
        std::string m = j["mode"];
        require(m == "ideal" || m == "noisy", errc::config, "mode must be ideal or noisy");
        rc.mode = m == "ideal" ? RunMode::ideal : RunMode::noisy;
    }
    if (j.contains("seed")) rc.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("threads")) rc.threads = j["threads"].get<int>();
    if (j.contains("output_dir")) rc.output_dir = resolve(j["output_dir"].get<std::string>());
    if (j.contains("sweep")) {
        for (const auto& a : j["sweep"]) {
            SweepAxis ax;
            ax.param = a.at("param").get<std::string>();
            for (const auto& v : a.at("values")) ax.values.push_back(v);
            require(!ax.values.empty(), errc::config, "sweep axis with no values: " + ax.param);
            rc.sweep.push_back(std::move(ax));
        }
    }
    return rc;
}

struct RunOutcome {
    CoreConfig cfg;
    TimingEnergyConstants constants;
    Schedule schedule;
    PerfReport perf;
    std::optional<EvalResult> eval;
    std::optional<QuantModel> model;
};

/// Execute one resolved run: plan the layer, estimate performance, and (when
/// model + dataset are present) evaluate accuracy.
inline RunOutcome execute_run(const RunConfig& rc) {
    RunOutcome out;
    core_config_from_json(rc.core, out.cfg);
    constants_from_json(rc.constants, out.constants);

    LayerSpec layer;
    std::vector<KernelWeights> kernels;
    if (!rc.model_path.empty()) {
        out.model = load_model(load_fixture(rc.model_path));
        layer = out.model->first_layer;
        kernels = out.model->first_kernels;
        // allow geometry overrides (e.g. running the model layer at another
        // input resolution)
        if (!rc.layer.is_null()) {
            json merged;
            merged["kind"] = "conv";
            merged["in_height"] = layer.in_height;
            merged["in_width"] = layer.in_width;
            merged["in_channels"] = layer.in_channels;
            merged["kernel"] = layer.kernel;
            merged["out_channels"] = layer.out_channels;
            merged["stride"] = layer.stride;
            merged["padding"] = layer.padding;
            for (auto& [k, v] : rc.layer.items()) merged[k] = v;
            layer = layer_from_json(merged);
            out.model->first_layer = layer;
        }
    } else {
        require(!rc.layer.is_null(), errc::config, "run config needs a model or a layer");
        layer = layer_from_json(rc.layer);
        kernels.assign(std::size_t(layer.kernel_instances()),
                       KernelWeights(std::size_t(layer.macs_per_instance_position())));
    }

    out.schedule = plan_layer(layer, out.cfg);
    std::vector<WeightMap> maps;
    for (int r = 0; r < out.schedule.remap_count; ++r)
        maps.push_back(map_weights(out.schedule, r, kernels, out.cfg));
    out.perf = estimate(out.schedule, maps, out.constants, out.cfg);
    out.perf.frame_rate = frame_rate(out.perf, out.constants);

    if (!rc.dataset_path.empty()) {
        require(out.model.has_value(), errc::config, "dataset evaluation needs a model");
        DatasetFixture ds = load_dataset(load_fixture(rc.dataset_path));
        require(ds.image_height == layer.in_height && ds.image_width == layer.in_width,
                errc::fixture, "dataset image size does not match the model's first layer");
        out.eval = evaluate(ds, *out.model, out.cfg, rc.mode, rc.seed, rc.threads);
    }
    return out;
}

inline json outcome_to_json(const RunConfig& rc, const RunOutcome& out) {
    json j;
    j["mode"] = rc.mode == RunMode::ideal ? "ideal" : "noisy";
    j["seed"] = rc.seed;
    j["schedule"] = schedule_to_string(out.schedule);
    j["perf"] = perf_report_to_json(out.perf);
    j["macs_per_cycle"] = out.schedule.layer.kind == LayerKind::conv
                              ? macs_per_cycle(out.cfg.num_banks, out.schedule.layer.kernel)
                              : 0;
    if (out.eval) j["eval"] = eval_result_to_json(*out.eval);
    return j;
}

} // namespace oisa

#endif
