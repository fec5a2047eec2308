#ifndef OISA_CORE_CONFIG_HPP
#define OISA_CORE_CONFIG_HPP

#include "oisa/common.hpp"
#include "oisa/device_models.hpp"
#include "oisa/pixel_frontend.hpp"

namespace oisa {

enum class RunMode { ideal, noisy };

struct NoiseConfig {
    double vom_sigma = 0.0;        // multiplicative (1+eps) error on re-modulated partials
    double detect_sigma = 0.0;     // additive noise at the BPD output, in integer units
};

/// Full core geometry plus every device constant the functional model needs.
struct CoreConfig {
    int num_banks = 80;
    int bank_columns = 4;
    int arms_per_bank = 5;
    int mrs_per_arm = 10;
    int awc_units_per_row = 40;

    PixelConfig pixel;
    VamConfig vam;
    AwcConfig awc;
    MrModelConfig mr;
    MrTuningConstants mr_tuning;
    BpdConfig bpd;
    NoiseConfig noise;

    int total_mrs() const { return num_banks * arms_per_bank * mrs_per_arm; }
    int weight_bits() const { return awc.bit_width; }
    int weight_full_scale() const { return awc.full_scale_code(); }

    // usable dot-product slots per arm: slot 10 is a calibration/spare slot
    // for 3x3 kernels; larger kernels use all 10
    int usable_slots(bool spare_reserved) const {
        return spare_reserved ? mrs_per_arm - 1 : mrs_per_arm;
    }

    void validate() const {
        require(num_banks >= 1 && arms_per_bank >= 1 && mrs_per_arm >= 2, errc::config,
                "CoreConfig: bad geometry");
        require(awc.bit_width >= 1 && awc.bit_width <= 4, errc::config,
                "CoreConfig: weight bit-width in [1,4]");
        require(awc_units_per_row >= 1, errc::config, "CoreConfig: awc_units_per_row >= 1");
        require(vam.v_ref_low > 0.0 && vam.v_ref_low < vam.v_ref_high &&
                    vam.v_ref_high < vam.supply,
                errc::config, "CoreConfig: need 0 < v_ref_low < v_ref_high < supply");
        require(mr.extinction_floor >= 0.0 && mr.extinction_floor < 1.0, errc::config,
                "CoreConfig: extinction floor in [0,1)");
    }

    /// Electrical units per integer a*w unit. Fixed by probing a=1, w=+1
    /// through the ideal device chain: one intensity step attenuated to
    /// 1/(2^n - 1) of the notch depth, detected by the BPD.
    double calibration_scale() const {
        return vam.intensity_per_level * (1.0 - mr.extinction_floor) /
               double(weight_full_scale()) * mr.insertion_loss * bpd.responsivity;
    }
};

} // namespace oisa

#endif
