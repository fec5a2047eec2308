#ifndef OISA_PERF_MODEL_HPP
#define OISA_PERF_MODEL_HPP

#include <map>
#include <string>
#include <vector>

#include "oisa/common.hpp"
#include "oisa/core_config.hpp"
#include "oisa/mapper.hpp"

namespace oisa {

/// Per-event energies and timings. Values are calibration data loaded from a
/// constants fixture, not derived.
struct TimingEnergyConstants {
    double t_mac = 55.8e-12; // s per architecture-wide MAC step

    double e_vcsel_emission = 0.0; // J per modulated slot
    double e_bpd_detect = 0.0;     // J per arm readout
    double e_awc_convert = 0.0;    // J per weight conversion
    double e_kernel_read = 0.0;    // J per weight fetched from the kernel banks
    double e_vom = 0.0;            // J per re-modulated partial
    double e_mr_to_step = 0.0;     // J per coarse tuning step
    double e_mr_eo_step = 0.0;     // J per fine tuning step

    double p_static = 0.0; // W, integrated over wall-clock latency

    double t_exposure = 0.0; // s, per frame
    double t_readout = 0.0;  // s, per frame

    int ops_per_mac = 2; // accounting policy: 1 or 2 Ops per MAC

    void validate() const {
        require(t_mac > 0.0, errc::config, "constants: t_mac must be > 0");
        require(ops_per_mac == 1 || ops_per_mac == 2, errc::config,
                "constants: ops_per_mac in {1,2}");
        for (double v : {e_vcsel_emission, e_bpd_detect, e_awc_convert, e_kernel_read, e_vom,
                         e_mr_to_step, e_mr_eo_step, p_static, t_exposure, t_readout})
            require(v >= 0.0, errc::config, "constants: energies/timings must be >= 0");
    }
};

struct PerfReport {
    double latency = 0.0;         // s, compute + tuning
    double tuning_latency = 0.0;  // s
    double compute_latency = 0.0; // s
    std::map<std::string, double> energy_breakdown; // J per component
    double total_energy = 0.0;    // J
    double average_power = 0.0;   // W
    double throughput = 0.0;      // Op/s
    double efficiency = 0.0;      // Op/s/W
    double frame_rate = 0.0;      // frames/s (set by frame_rate())
    double utilization = 0.0;
    long long total_macs = 0;
    long long total_cycles = 0;
};

struct EventCounts {
    long long vcsel_emissions = 0;
    long long bpd_detections = 0;
    long long awc_conversions = 0;
    long long kernel_reads = 0;
    long long vom_events = 0;
    long long mr_to_steps = 0;
    long long mr_eo_steps = 0;
};

/// Count every device event a schedule triggers, including the per-round
/// weight (re)mapping.
inline EventCounts count_events(const Schedule& s, const CoreConfig& cfg) {
    EventCounts ev;
    int slots = s.layer.macs_per_instance_position();
    int arms = s.shape.arms();
    bool uses_vom = arms > 1;

    for (const Round& r : s.rounds) {
        long long inst = r.instance_count;
        ev.vcsel_emissions += inst * slots * s.cycles_per_round;
        ev.bpd_detections += inst * arms * s.cycles_per_round;
        if (uses_vom) ev.vom_events += inst * arms * s.cycles_per_round;

        // remap at the start of the round: one AWC conversion, one kernel-bank
        // read, and the hybrid tuning steps per assigned MR
        ev.awc_conversions += inst * slots;
        ev.kernel_reads += inst * slots;
    }
    // tuning steps depend on the actual levels; callers that have the weight
    // map add them via add_tuning_events. Here we leave them at zero.
    (void)cfg;
    return ev;
}

inline void add_tuning_events(EventCounts& ev, const WeightMap& wm, const CoreConfig& cfg) {
    int fine_span = cfg.weight_bits() >= 2 ? cfg.weight_bits() - 2 : 0;
    for (const MrAssignment& a : wm.assignments) {
        ev.mr_to_steps += a.level >> fine_span;
        ev.mr_eo_steps += (a.level & ((1 << fine_span) - 1)) + 1;
    }
}

/// Analytical latency/energy/throughput for one schedule. Tuning latency is
/// the serialized AWC-row cost summed over rounds (from map_weights); the
/// caller passes the per-round weight maps so event counts reflect the actual
/// tuning levels.
inline PerfReport estimate(const Schedule& s, const std::vector<WeightMap>& round_maps,
                           const TimingEnergyConstants& c, const CoreConfig& cfg) {
    c.validate();
    require(int(round_maps.size()) == s.remap_count, errc::invalid_argument,
            "estimate: one weight map per round required");

    PerfReport r;
    r.total_macs = s.total_macs;
    r.total_cycles = s.total_cycles;
    r.utilization = s.utilization;

    EventCounts ev = count_events(s, cfg);
    for (const WeightMap& wm : round_maps) {
        add_tuning_events(ev, wm, cfg);
        r.tuning_latency += wm.tuning_latency;
    }
    r.compute_latency = double(s.total_cycles) * c.t_mac;
    r.latency = r.compute_latency + r.tuning_latency;

    auto put = [&](const std::string& name, long long count, double unit) {
        double e = double(count) * unit;
        r.energy_breakdown[name] = e;
    };
    put("vcsel", ev.vcsel_emissions, c.e_vcsel_emission);
    put("bpd", ev.bpd_detections, c.e_bpd_detect);
    put("awc", ev.awc_conversions, c.e_awc_convert);
    put("kernel_bank", ev.kernel_reads, c.e_kernel_read);
    put("vom", ev.vom_events, c.e_vom);
    r.energy_breakdown["mr_tuning"] = double(ev.mr_to_steps) * c.e_mr_to_step +
                                      double(ev.mr_eo_steps) * c.e_mr_eo_step;
    r.energy_breakdown["static"] = c.p_static * r.latency;

    r.total_energy = 0.0;
    for (const auto& [name, e] : r.energy_breakdown) r.total_energy += e;

    r.average_power = r.latency > 0.0 ? r.total_energy / r.latency : 0.0;
    double total_ops = double(s.total_macs) * c.ops_per_mac;
    r.throughput = r.latency > 0.0 ? total_ops / r.latency : 0.0;
    r.efficiency = r.total_energy > 0.0 ? total_ops / r.total_energy : 0.0;
    return r;
}

/// Frames per second when this schedule is one frame's first layer.
inline double frame_rate(const PerfReport& layer_report, const TimingEnergyConstants& c) {
    double t = layer_report.latency + c.t_exposure + c.t_readout;
    require(t > 0.0, errc::invalid_argument, "frame_rate: zero latency");
    return 1.0 / t;
}

} // namespace oisa

#endif
