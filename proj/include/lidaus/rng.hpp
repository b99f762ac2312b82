#ifndef LIDAUS_RNG_HPP
#define LIDAUS_RNG_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <string_view>

namespace lidaus {

// Counter-based random stream. A stream is identified by (root seed, name);
// draw i is a pure function of (key, i), so streams never interfere and a
// run can be reproduced draw-for-draw from the seed alone. Adding a new
// stream (e.g. one more beacon) leaves every other stream untouched.
class RngStream {
public:
    RngStream() : RngStream(0, "") {}

    RngStream(std::uint64_t root_seed, std::string_view name) {
        std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the name
        for (char c : name) {
            h ^= static_cast<std::uint8_t>(c);
            h *= 1099511628211ULL;
        }
        key_ = mix64(root_seed ^ mix64(h));
    }

    // Next raw 64-bit value (splitmix64 sequence keyed by the stream).
    std::uint64_t next_u64() {
        std::uint64_t z = key_ + 0x9E3779B97F4A7C15ULL * (++counter_);
        return mix64(z);
    }

    // Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n) {
        return next_u64() % n;
    }

    // Standard normal via Box-Muller; consumes exactly two uniforms so a
    // draw is addressable by its index.
    double gaussian() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
    }

    double gaussian(double std_dev) { return gaussian() * std_dev; }

    std::uint64_t draws() const { return counter_; }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ULL;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBULL;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_ = 0;
    std::uint64_t counter_ = 0;
};

}  // namespace lidaus

#endif
