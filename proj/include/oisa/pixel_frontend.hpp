#ifndef OISA_PIXEL_FRONTEND_HPP
#define OISA_PIXEL_FRONTEND_HPP

#include <algorithm>
#include <vector>

#include "oisa/common.hpp"
#include "oisa/device_models.hpp"

namespace oisa {

/// One captured frame: normalized light intensities in [0,1], row-major.
struct Frame {
    int width = 0;
    int height = 0;
    std::vector<double> intensities;

    double at(int x, int y) const { return intensities[std::size_t(y) * width + x]; }
    double& at(int x, int y) { return intensities[std::size_t(y) * width + x]; }

    bool valid() const {
        if (width < 1 || height < 1) return false;
        if (intensities.size() != std::size_t(width) * height) return false;
        for (double v : intensities)
            if (v < 0.0 || v > 1.0) return false;
        return true;
    }
};

struct PixelConfig {
    double v_reset = 1.0;
    double discharge_gain = 1.0;
    // global-shutter scalar; default chosen so that a mid-gray pixel lands
    // between the two sense-amplifier references
    double exposure = 0.4;
};

struct VoltagePlane {
    int width = 0;
    int height = 0;
    std::vector<double> v_pd;

    double at(int x, int y) const { return v_pd[std::size_t(y) * width + x]; }
};

/// Ternary activation plane, row-major codes in {0,1,2}.
struct CodePlane {
    int width = 0;
    int height = 0;
    std::vector<int> codes;

    int at(int x, int y) const { return codes[std::size_t(y) * width + x]; }
    int& at(int x, int y) { return codes[std::size_t(y) * width + x]; }
};

/// 3T pixel discharge: the photodiode pulls V_PD down from v_reset in
/// proportion to intensity and exposure, clamped at ground.
inline VoltagePlane expose(const Frame& frame, const PixelConfig& cfg) {
    require(frame.valid(), errc::invalid_argument, "expose: invalid frame");
    require(cfg.v_reset > 0.0 && cfg.discharge_gain >= 0.0, errc::invalid_argument,
            "expose: invalid pixel config");
    VoltagePlane out;
    out.width = frame.width;
    out.height = frame.height;
    out.v_pd.resize(frame.intensities.size());
    for (std::size_t i = 0; i < frame.intensities.size(); ++i) {
        double v = cfg.v_reset - cfg.discharge_gain * cfg.exposure * frame.intensities[i];
        out.v_pd[i] = std::clamp(v, 0.0, cfg.v_reset);
    }
    return out;
}

/// Threshold every pixel voltage into a ternary code. The driver compares the
/// discharge amount (v_reset - v_pd) against the references, so brighter
/// pixels map to higher codes.
inline CodePlane ternarize(const VoltagePlane& plane, const PixelConfig& pix, const VamConfig& vam) {
    CodePlane out;
    out.width = plane.width;
    out.height = plane.height;
    out.codes.resize(plane.v_pd.size());
    for (std::size_t i = 0; i < plane.v_pd.size(); ++i) {
        double v = plane.v_pd[i];
        require(v >= 0.0 && v <= vam.supply, errc::invalid_argument,
                "ternarize: voltage outside [0, supply]");
        out.codes[i] = vam_encode(pix.v_reset - v, vam).value;
    }
    return out;
}

inline CodePlane capture_codes(const Frame& frame, const PixelConfig& pix, const VamConfig& vam) {
    return ternarize(expose(frame, pix), pix, vam);
}

} // namespace oisa

#endif
