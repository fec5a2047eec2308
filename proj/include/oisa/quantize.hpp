#ifndef OISA_QUANTIZE_HPP
#define OISA_QUANTIZE_HPP

#include <cmath>
#include <cstdlib>
#include <vector>

#include "oisa/common.hpp"
#include "oisa/opc.hpp"

namespace oisa {

struct QuantizedKernels {
    std::vector<KernelWeights> kernels;
    double scale = 1.0; // real weight = scale * signed code
};

/// Symmetric linear quantization: per-layer scale = max|w| / (2^n - 1),
/// round half away from zero. Codes stay within [-(2^n - 1), 2^n - 1].
inline QuantizedKernels quantize_kernels(const std::vector<std::vector<double>>& real_kernels,
                                         int bit_width) {
    require(bit_width >= 1 && bit_width <= 4, errc::invalid_argument,
            "quantize_kernels: bit_width in [1,4]");
    int fs = (1 << bit_width) - 1;
    double max_abs = 0.0;
    for (const auto& k : real_kernels)
        for (double w : k) max_abs = std::max(max_abs, std::abs(w));

    QuantizedKernels q;
    q.scale = max_abs > 0.0 ? max_abs / fs : 1.0;
    q.kernels.reserve(real_kernels.size());
    for (const auto& k : real_kernels) {
        KernelWeights qk;
        qk.reserve(k.size());
        for (double w : k) {
            double scaled = w / q.scale;
            int code = int(scaled >= 0.0 ? std::floor(scaled + 0.5) : std::ceil(scaled - 0.5));
            require(std::abs(code) <= fs, errc::internal, "quantize_kernels: code overflow");
            qk.push_back(make_weight(code));
        }
        q.kernels.push_back(std::move(qk));
    }
    return q;
}

} // namespace oisa

#endif
