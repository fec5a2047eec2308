#ifndef OISA_DEVICE_MODELS_HPP
#define OISA_DEVICE_MODELS_HPP

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "oisa/common.hpp"

namespace oisa {

/// One microring's resonance state. All wavelengths in nm.
struct MRState {
    double lambda_res = 1550.0;
    double q_factor = 5000.0;
    int tuning_level = 0;
    double tuned_transmission = 1.0; // through-port fraction at the assigned wavelength

    double fwhm() const { return lambda_res / q_factor; }
};

struct MrModelConfig {
    double lambda_res = 1550.0;
    double q_factor = 5000.0;
    double extinction_floor = 0.01; // T_min; not stated in the source data, configurable
    double insertion_loss = 1.0;    // lumped multiplexer/splitter/waveguide pass fraction
    double channel_spacing = 0.8;   // nm between adjacent MR channels in an arm (assumed)
};

struct MrTuningConstants {
    // hybrid tuning: coarse thermo-optic steps cover level quartiles,
    // fine electro-optic steps cover within-quartile increments
    double to_step_energy = 30e-12; // J per coarse step
    double to_step_latency = 250e-9;
    double eo_step_energy = 1e-15; // J per fine step (incl. one settle step)
    double eo_step_latency = 10e-9;
};

struct AwcConfig {
    int bit_width = 4; // n in [1,4]
    double unit_current = 1.0;
    std::array<double, 4> gain_error_per_bit{0.0, 0.0, 0.0, 0.0};
    double noise_sigma = 0.0;

    int levels() const { return 1 << bit_width; }
    int full_scale_code() const { return (1 << bit_width) - 1; }
};

struct TernaryCode {
    int value = 0; // {0,1,2}
    bool t1 = false;
    bool t2 = false;
};

struct VamConfig {
    double v_ref_low = 0.16;
    double v_ref_high = 0.32;
    double supply = 1.0;
    double bias_current = 0.05;        // always-on floor (normalized)
    double intensity_per_level = 1.0;  // optical intensity step per ternary level
};

struct BpdConfig {
    double responsivity = 1.0;
};

/// Through-port power fraction of an all-pass ring: Lorentzian notch with
/// configurable extinction floor, half-depth points FWHM apart.
inline double mr_transmission(const MRState& state, double lambda, double extinction_floor = 0.01) {
    require(state.q_factor > 0.0, errc::invalid_argument, "mr_transmission: q_factor must be > 0");
    require(state.lambda_res > 0.0, errc::invalid_argument, "mr_transmission: lambda_res must be > 0");
    require(lambda > 0.0, errc::invalid_argument, "mr_transmission: lambda must be > 0");
    double half = state.fwhm() / 2.0;
    double d = lambda - state.lambda_res;
    double notch = (1.0 - extinction_floor) * half * half / (d * d + half * half);
    return 1.0 - notch;
}

struct TuneResult {
    MRState state;
    double energy = 0.0;  // J
    double latency = 0.0; // s
};

/// Program one MR to pass level/(2^n - 1) of full scale at its channel
/// wavelength. Cost is the coarse TO steps plus fine EO steps (one extra EO
/// settle step always runs, so both totals stay positive).
inline TuneResult tune_mr(int target_level, int bit_width, const MrModelConfig& mr,
                          const MrTuningConstants& tc) {
    require(bit_width >= 1 && bit_width <= 4, errc::invalid_argument, "tune_mr: bit_width in [1,4]");
    int levels = 1 << bit_width;
    require(target_level >= 0 && target_level < levels, errc::invalid_argument,
            "tune_mr: level out of range");

    MRState s;
    s.lambda_res = mr.lambda_res;
    s.q_factor = mr.q_factor;
    s.tuning_level = target_level;
    double pass = static_cast<double>(target_level) / (levels - 1);
    s.tuned_transmission = mr.extinction_floor + (1.0 - mr.extinction_floor) * pass;

    int fine_span = bit_width >= 2 ? bit_width - 2 : 0;
    int coarse = target_level >> fine_span;
    int fine = target_level & ((1 << fine_span) - 1);

    TuneResult r;
    r.state = s;
    r.energy = coarse * tc.to_step_energy + (fine + 1) * tc.eo_step_energy;
    r.latency = coarse * tc.to_step_latency + (fine + 1) * tc.eo_step_latency;
    return r;
}

/// Binary-weighted current sum of the converter: each set weight bit turns on
/// one transistor contributing unit*2^i, perturbed by its per-bit gain error,
/// plus additive gaussian noise. Deterministic per seed.
inline double awc_convert(int weight_code, const AwcConfig& cfg, std::uint64_t seed = 0) {
    require(cfg.bit_width >= 1 && cfg.bit_width <= 4, errc::invalid_argument,
            "awc_convert: bit_width in [1,4]");
    require(weight_code >= 0 && weight_code < cfg.levels(), errc::invalid_argument,
            "awc_convert: code out of range");
    double current = 0.0;
    for (int i = 0; i < cfg.bit_width; ++i) {
        if (weight_code & (1 << i)) {
            current += cfg.unit_current * double(1 << i) * (1.0 + cfg.gain_error_per_bit[i]);
        }
    }
    if (cfg.noise_sigma > 0.0) {
        gaussian_stream g(seed);
        current += cfg.noise_sigma * g.next();
    }
    return current;
}

/// Dual sense-amplifier thresholding of the (already brightness-oriented)
/// pixel voltage. Boundary values fall to the lower code.
inline TernaryCode vam_encode(double v_pd, const VamConfig& cfg) {
    require(v_pd >= 0.0, errc::invalid_argument, "vam_encode: negative voltage");
    require(v_pd <= cfg.supply, errc::invalid_argument, "vam_encode: voltage above supply");
    TernaryCode c;
    if (v_pd > cfg.v_ref_high) {
        c.t1 = true;
        c.t2 = true;
    } else if (v_pd > cfg.v_ref_low) {
        c.t1 = true;
    }
    c.value = int(c.t1) + int(c.t2);
    return c;
}

/// Non-return-to-zero emission: bias floor plus one intensity step per code level.
inline double vam_emit(const TernaryCode& code, const VamConfig& cfg) {
    return cfg.bias_current + code.value * cfg.intensity_per_level;
}

/// Balanced photodiode pair: responsivity times the rail difference.
inline double bpd_detect(double pos_intensity, double neg_intensity, double responsivity) {
    require(pos_intensity >= 0.0 && neg_intensity >= 0.0, errc::invalid_argument,
            "bpd_detect: negative intensity");
    return responsivity * (pos_intensity - neg_intensity);
}

} // namespace oisa

#endif
