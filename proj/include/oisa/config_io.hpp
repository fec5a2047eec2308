#ifndef OISA_CONFIG_IO_HPP
#define OISA_CONFIG_IO_HPP

#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

#include "oisa/common.hpp"
#include "oisa/core_config.hpp"
#include "oisa/inference.hpp"
#include "oisa/perf_model.hpp"

namespace oisa {

using nlohmann::json;

inline json load_json_file(const std::filesystem::path& path, errc kind) {
    std::ifstream is(path);
    require(is.good(), kind, "cannot open " + path.string());
    json j;
    try {
        is >> j;
    } catch (const json::exception& e) {
        fail(kind, "malformed JSON in " + path.string() + ": " + e.what());
    }
    return j;
}

// helper: overwrite a field only when present
template <typename T>
void get_opt(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline void core_config_from_json(const json& j, CoreConfig& cfg) {
    get_opt(j, "num_banks", cfg.num_banks);
    get_opt(j, "bank_columns", cfg.bank_columns);
    get_opt(j, "arms_per_bank", cfg.arms_per_bank);
    get_opt(j, "mrs_per_arm", cfg.mrs_per_arm);
    get_opt(j, "awc_units_per_row", cfg.awc_units_per_row);
    if (j.contains("pixel")) {
        const json& p = j["pixel"];
        get_opt(p, "v_reset", cfg.pixel.v_reset);
        get_opt(p, "discharge_gain", cfg.pixel.discharge_gain);
        get_opt(p, "exposure", cfg.pixel.exposure);
    }
    if (j.contains("vam")) {
        const json& p = j["vam"];
        get_opt(p, "v_ref_low", cfg.vam.v_ref_low);
        get_opt(p, "v_ref_high", cfg.vam.v_ref_high);
        get_opt(p, "supply", cfg.vam.supply);
        get_opt(p, "bias_current", cfg.vam.bias_current);
        get_opt(p, "intensity_per_level", cfg.vam.intensity_per_level);
    }
    if (j.contains("awc")) {
        const json& p = j["awc"];
        get_opt(p, "bit_width", cfg.awc.bit_width);
        get_opt(p, "unit_current", cfg.awc.unit_current);
        get_opt(p, "noise_sigma", cfg.awc.noise_sigma);
        if (p.contains("gain_error_per_bit")) {
            auto v = p["gain_error_per_bit"].get<std::vector<double>>();
            require(v.size() <= 4, errc::config, "awc.gain_error_per_bit: at most 4 entries");
            for (std::size_t i = 0; i < v.size(); ++i) cfg.awc.gain_error_per_bit[i] = v[i];
        }
    }
    if (j.contains("mr")) {
        const json& p = j["mr"];
        get_opt(p, "lambda_res", cfg.mr.lambda_res);
        get_opt(p, "q_factor", cfg.mr.q_factor);
        get_opt(p, "extinction_floor", cfg.mr.extinction_floor);
        get_opt(p, "insertion_loss", cfg.mr.insertion_loss);
        get_opt(p, "channel_spacing", cfg.mr.channel_spacing);
    }
    if (j.contains("mr_tuning")) {
        const json& p = j["mr_tuning"];
        get_opt(p, "to_step_energy", cfg.mr_tuning.to_step_energy);
        get_opt(p, "to_step_latency", cfg.mr_tuning.to_step_latency);
        get_opt(p, "eo_step_energy", cfg.mr_tuning.eo_step_energy);
        get_opt(p, "eo_step_latency", cfg.mr_tuning.eo_step_latency);
    }
    if (j.contains("bpd")) get_opt(j["bpd"], "responsivity", cfg.bpd.responsivity);
    if (j.contains("noise")) {
        const json& p = j["noise"];
        get_opt(p, "vom_sigma", cfg.noise.vom_sigma);
        get_opt(p, "detect_sigma", cfg.noise.detect_sigma);
    }
    cfg.validate();
}

inline void constants_from_json(const json& j, TimingEnergyConstants& c) {
    get_opt(j, "t_mac", c.t_mac);
    get_opt(j, "e_vcsel_emission", c.e_vcsel_emission);
    get_opt(j, "e_bpd_detect", c.e_bpd_detect);
    get_opt(j, "e_awc_convert", c.e_awc_convert);
    get_opt(j, "e_kernel_read", c.e_kernel_read);
    get_opt(j, "e_vom", c.e_vom);
    get_opt(j, "e_mr_to_step", c.e_mr_to_step);
    get_opt(j, "e_mr_eo_step", c.e_mr_eo_step);
    get_opt(j, "p_static", c.p_static);
    get_opt(j, "t_exposure", c.t_exposure);
    get_opt(j, "t_readout", c.t_readout);
    get_opt(j, "ops_per_mac", c.ops_per_mac);
    c.validate();
}

inline LayerSpec layer_from_json(const json& j) {
    LayerSpec l;
    std::string kind = j.value("kind", "conv");
    require(kind == "conv" || kind == "mlp", errc::config, "layer: kind must be conv or mlp");
    l.kind = kind == "conv" ? LayerKind::conv : LayerKind::mlp;
    get_opt(j, "in_height", l.in_height);
    get_opt(j, "in_width", l.in_width);
    get_opt(j, "in_channels", l.in_channels);
    get_opt(j, "kernel", l.kernel);
    get_opt(j, "out_channels", l.out_channels);
    get_opt(j, "stride", l.stride);
    get_opt(j, "padding", l.padding);
    l.validate();
    return l;
}

inline json perf_report_to_json(const PerfReport& r) {
    json j;
    j["latency_s"] = r.latency;
    j["compute_latency_s"] = r.compute_latency;
    j["tuning_latency_s"] = r.tuning_latency;
    j["total_energy_j"] = r.total_energy;
    j["energy_breakdown_j"] = r.energy_breakdown;
    j["average_power_w"] = r.average_power;
    j["throughput_ops"] = r.throughput;
    j["efficiency_ops_per_w"] = r.efficiency;
    j["frame_rate_fps"] = r.frame_rate;
    j["utilization"] = r.utilization;
    j["total_macs"] = r.total_macs;
    j["total_cycles"] = r.total_cycles;
    return j;
}

inline PerfReport perf_report_from_json(const json& j) {
    PerfReport r;
    r.latency = j.at("latency_s");
    r.compute_latency = j.at("compute_latency_s");
    r.tuning_latency = j.at("tuning_latency_s");
    r.total_energy = j.at("total_energy_j");
    r.energy_breakdown = j.at("energy_breakdown_j").get<std::map<std::string, double>>();
    r.average_power = j.at("average_power_w");
    r.throughput = j.at("throughput_ops");
    r.efficiency = j.at("efficiency_ops_per_w");
    r.frame_rate = j.at("frame_rate_fps");
    r.utilization = j.at("utilization");
    r.total_macs = j.at("total_macs");
    r.total_cycles = j.at("total_cycles");
    return r;
}

inline json eval_result_to_json(const EvalResult& r) {
    json j;
    j["accuracy"] = r.accuracy;
    j["per_class_total"] = r.per_class_total;
    j["per_class_correct"] = r.per_class_correct;
    j["config_id"] = r.config_id;
    j["noise_hash"] = r.noise_hash;
    return j;
}

} // namespace oisa

#endif
