#ifndef OISA_OPC_HPP
#define OISA_OPC_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "oisa/common.hpp"
#include "oisa/core_config.hpp"
#include "oisa/device_models.hpp"
#include "oisa/pixel_frontend.hpp"

namespace oisa {

/// Sign-magnitude weight: magnitude drives the converter, sign selects the
/// positive or negative waveguide.
struct QuantWeight {
    int magnitude = 0;
    int sign = +1; // +1 or -1; ignored when magnitude == 0

    int value() const { return sign * magnitude; }
};

inline QuantWeight make_weight(int v) {
    QuantWeight w;
    w.magnitude = std::abs(v);
    w.sign = v < 0 ? -1 : +1;
    return w;
}

struct ArmWorkload {
    std::vector<int> activations;     // ternary codes {0,1,2}
    std::vector<QuantWeight> weights; // same length
    bool spare_slot_reserved = true;  // slot 10 unused for 3x3 kernels
};

namespace detail {

// Detuning offset that realizes a target through-port transmission on the
// Lorentzian notch. The linewidth follows the shifted resonance
// (FWHM = lambda_res'/Q), so the solve is for d = r * h(d) with
// r = sqrt((1-floor)/(1-t) - 1), giving d = r*h0 / (1 - r/(2Q)).
inline double detune_for_transmission(double t_target, const MrModelConfig& mr) {
    double floor = mr.extinction_floor;
    double r = std::sqrt((1.0 - floor) / (1.0 - t_target) - 1.0);
    double denom = 1.0 - r / (2.0 * mr.q_factor);
    require(denom > 0.0, errc::invalid_argument,
            "detune_for_transmission: target transmission out of tuning range");
    double h0 = mr.lambda_res / mr.q_factor / 2.0;
    return r * h0 / denom;
}

// Through-port transmission realized for one weight magnitude after the AWC
// current (with its non-idealities) sets the tuning point.
inline double realized_transmission(int magnitude, const CoreConfig& cfg, std::uint64_t seed) {
    double full_scale = cfg.awc.unit_current * cfg.weight_full_scale();
    double current = awc_convert(magnitude, cfg.awc, seed);
    double pass = std::clamp(current / full_scale, 0.0, 1.0);
    double floor = cfg.mr.extinction_floor;
    double t_target = floor + (1.0 - floor) * pass;
    // transmissions this close to unity need a resonance shift beyond the
    // tuning range; the ring is simply parked far off the channel
    double q2 = 2.0 * cfg.mr.q_factor;
    if (1.0 - t_target < (1.0 - floor) / (1.0 + q2 * q2 / 4.0)) return t_target;

    MRState s;
    s.q_factor = cfg.mr.q_factor;
    s.lambda_res = cfg.mr.lambda_res + detune_for_transmission(t_target, cfg.mr);
    return mr_transmission(s, cfg.mr.lambda_res, cfg.mr.extinction_floor);
}

} // namespace detail

/// One arm's signed dot product. Ideal mode evaluates the integer sum scaled
/// by the calibration constant; noisy mode runs the full VCSEL -> MR -> BPD
/// chain with the configured non-idealities and subtracts the dark (bias-only)
/// response.
inline double arm_mac(const ArmWorkload& wl, const CoreConfig& cfg, RunMode mode,
                      std::uint64_t seed = 0) {
    require(wl.activations.size() == wl.weights.size(), errc::invalid_argument,
            "arm_mac: length mismatch");
    std::size_t cap = std::size_t(cfg.usable_slots(wl.spare_slot_reserved));
    require(wl.activations.size() <= cap, errc::invalid_argument, "arm_mac: length overflow");

    if (mode == RunMode::ideal) {
        long long dot = 0;
        for (std::size_t i = 0; i < wl.weights.size(); ++i) {
            int a = wl.activations[i];
            require(a >= 0 && a <= 2, errc::invalid_argument, "arm_mac: activation not ternary");
            require(wl.weights[i].magnitude <= cfg.weight_full_scale(), errc::invalid_argument,
                    "arm_mac: weight magnitude overflows bit-width");
            dot += (long long)a * wl.weights[i].value();
        }
        return cfg.calibration_scale() * double(dot);
    }

    double pos = 0.0, neg = 0.0;
    double pos_dark = 0.0, neg_dark = 0.0;
    for (std::size_t i = 0; i < wl.weights.size(); ++i) {
        int a = wl.activations[i];
        require(a >= 0 && a <= 2, errc::invalid_argument, "arm_mac: activation not ternary");
        const QuantWeight& w = wl.weights[i];
        require(w.magnitude <= cfg.weight_full_scale(), errc::invalid_argument,
                "arm_mac: weight magnitude overflows bit-width");

        std::uint64_t slot_seed = splitmix64(seed ^ (0x517cc1b727220a95ULL + i));
        double t_signal = detail::realized_transmission(w.magnitude, cfg, slot_seed);
        double t_off = cfg.mr.extinction_floor; // opposite rail held at full extinction

        TernaryCode code;
        code.value = a;
        double light = vam_emit(code, cfg.vam) * cfg.mr.insertion_loss;
        double dark = cfg.vam.bias_current * cfg.mr.insertion_loss;

        double t_pos = (w.magnitude > 0 && w.sign > 0) ? t_signal : t_off;
        double t_neg = (w.magnitude > 0 && w.sign < 0) ? t_signal : t_off;
        pos += light * t_pos;
        neg += light * t_neg;
        pos_dark += dark * t_pos;
        neg_dark += dark * t_neg;
    }
    double v = bpd_detect(pos, neg, cfg.bpd.responsivity);
    double v_dark = bpd_detect(pos_dark, neg_dark, cfg.bpd.responsivity);
    double result = v - v_dark;
    if (cfg.noise.detect_sigma > 0.0) {
        gaussian_stream g(splitmix64(seed ^ 0xda3e39cb94b95bdbULL));
        result += cfg.noise.detect_sigma * cfg.calibration_scale() * g.next();
    }
    return result;
}

struct BankResult {
    std::vector<double> values;  // one per arm, 0.0 when idle
    std::vector<bool> idle;      // true when the arm had no workload
};

/// Evaluate up to arms_per_bank independent arm workloads.
inline BankResult bank_compute(const std::vector<std::optional<ArmWorkload>>& arms,
                               const CoreConfig& cfg, RunMode mode, std::uint64_t seed = 0) {
    require(arms.size() <= std::size_t(cfg.arms_per_bank), errc::invalid_argument,
            "bank_compute: more workloads than arms");
    BankResult r;
    r.values.resize(std::size_t(cfg.arms_per_bank), 0.0);
    r.idle.resize(std::size_t(cfg.arms_per_bank), true);
    for (std::size_t i = 0; i < arms.size(); ++i) {
        if (!arms[i]) continue;
        r.values[i] = arm_mac(*arms[i], cfg, mode, splitmix64(seed ^ (0x2545f4914f6cdd1dULL * (i + 1))));
        r.idle[i] = false;
    }
    return r;
}

/// Optical partial-sum reduction. Ideal mode is an exact sum; noisy mode
/// applies a multiplicative re-modulation error per partial.
inline double vom_reduce(const std::vector<double>& partials, const CoreConfig& cfg, RunMode mode,
                         std::uint64_t seed = 0) {
    require(!partials.empty(), errc::invalid_argument, "vom_reduce: empty input");
    if (mode == RunMode::ideal || cfg.noise.vom_sigma <= 0.0) {
        double s = 0.0;
        for (double p : partials) s += p;
        return s;
    }
    gaussian_stream g(splitmix64(seed ^ 0x9e6c63d0876a9a47ULL));
    double s = 0.0;
    for (double p : partials) s += p * (1.0 + cfg.noise.vom_sigma * g.next());
    return s;
}

// ---------------------------------------------------------------------------
// One scheduled cycle of the whole core.
// ---------------------------------------------------------------------------

/// Placement of one 2-D kernel (or one MLP fan-in chunk group) on the core for
/// a cycle, with the input coordinate of every occupied MR slot. Coordinates
/// outside the code plane read as activation 0 (zero padding).
struct KernelJob {
    int kernel_instance = 0; // (output_channel, input_channel) linear id
    int out_x = 0;
    int out_y = 0;
    int bank = 0;
    int first_arm = 0;
    bool spare_slot_reserved = true;
    // per arm, per slot: input pixel coordinate
    std::vector<std::vector<std::pair<int, int>>> arm_coords;
    // per arm, per slot: weight
    std::vector<std::vector<QuantWeight>> arm_weights;
};

struct CycleStep {
    std::vector<KernelJob> jobs;
};

struct StrideResult {
    int kernel_instance = 0;
    int out_x = 0;
    int out_y = 0;
    double value = 0.0; // electrical units; divide by calibration_scale for integer units
};

inline double core_eval_job(const KernelJob& job, const CodePlane& codes, const CoreConfig& cfg,
                            RunMode mode, std::uint64_t seed) {
    require(job.bank >= 0 && job.bank < cfg.num_banks, errc::invalid_argument,
            "core_cycle: bank out of range");
    require(job.arm_coords.size() == job.arm_weights.size() && !job.arm_coords.empty(),
            errc::invalid_argument, "core_cycle: malformed job");
    require(job.first_arm >= 0 &&
                job.first_arm + int(job.arm_coords.size()) <= cfg.arms_per_bank,
            errc::invalid_argument, "core_cycle: arms out of range");

    std::vector<double> partials;
    partials.reserve(job.arm_coords.size());
    for (std::size_t ai = 0; ai < job.arm_coords.size(); ++ai) {
        ArmWorkload wl;
        wl.spare_slot_reserved = job.spare_slot_reserved;
        wl.weights = job.arm_weights[ai];
        require(job.arm_coords[ai].size() == wl.weights.size(), errc::invalid_argument,
                "core_cycle: slot/coord mismatch");
        wl.activations.reserve(wl.weights.size());
        for (auto [x, y] : job.arm_coords[ai]) {
            int a = 0;
            if (x >= 0 && x < codes.width && y >= 0 && y < codes.height) a = codes.at(x, y);
            wl.activations.push_back(a);
        }
        std::uint64_t arm_seed =
            splitmix64(seed ^ splitmix64(std::uint64_t(job.bank) * 131 + job.first_arm + ai));
        partials.push_back(arm_mac(wl, cfg, mode, arm_seed));
    }
    if (partials.size() == 1) return partials[0];
    std::uint64_t vom_seed = splitmix64(seed ^ splitmix64(0xb5026f5aa96619e9ULL + job.bank));
    return vom_reduce(partials, cfg, mode, vom_seed);
}

/// Evaluate every mapped kernel for one cycle. Results come back ordered by
/// (bank, arm) regardless of evaluation order.
inline std::vector<StrideResult> core_cycle(const CycleStep& step, const CodePlane& codes,
                                            const CoreConfig& cfg, RunMode mode,
                                            std::uint64_t seed = 0) {
    std::vector<std::size_t> order(step.jobs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const KernelJob& ja = step.jobs[a];
        const KernelJob& jb = step.jobs[b];
        if (ja.bank != jb.bank) return ja.bank < jb.bank;
        return ja.first_arm < jb.first_arm;
    });

    std::vector<StrideResult> out;
    out.reserve(step.jobs.size());
    for (std::size_t i : order) {
        const KernelJob& job = step.jobs[i];
        StrideResult r;
        r.kernel_instance = job.kernel_instance;
        r.out_x = job.out_x;
        r.out_y = job.out_y;
        r.value = core_eval_job(job, codes, cfg, mode, seed);
        out.push_back(r);
    }
    return out;
}

} // namespace oisa

#endif
