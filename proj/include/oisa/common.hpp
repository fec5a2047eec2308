#ifndef OISA_COMMON_HPP
#define OISA_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace oisa {

// Error categories map onto CLI exit codes (config=2, fixture=3, internal=1).
enum class errc { invalid_argument, config, fixture, internal };

class sim_error : public std::runtime_error {
public:
    sim_error(errc kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    errc kind() const { return kind_; }

private:
    errc kind_;
};

[[noreturn]] inline void fail(errc kind, const std::string& msg) { throw sim_error(kind, msg); }

inline void require(bool ok, errc kind, const std::string& msg) {
    if (!ok) fail(kind, msg);
}

// splitmix64: cheap, portable stream splitter for deriving per-element seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic gaussian stream. Box-Muller on splitmix64 output so results
// do not depend on the standard library's distribution implementation.
class gaussian_stream {
public:
    explicit gaussian_stream(std::uint64_t seed) : state_(seed) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        double u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

private:
    double uniform01() {
        state_ = splitmix64(state_);
        // 53-bit mantissa, open interval (0,1]
        return ((state_ >> 11) + 1.0) * 0x1.0p-53;
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// FNV-1a 64-bit, used for fixture blob checksums.
inline std::uint64_t fnv1a64(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace oisa

#endif
