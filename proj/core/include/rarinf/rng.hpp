#pragma once

#include <array>
#include <cstdint>

namespace rarinf {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11). Every draw is
// a pure function of (key, counter), so a simulated trial depends only on
// (seed, trial index, subject index) and never on evaluation order.
namespace philox {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

inline constexpr std::uint32_t kMul0 = 0xD2511F53;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85;

constexpr Counter round(const Counter& c, const Key& k) {
    const std::uint64_t p0 = std::uint64_t{kMul0} * c[0];
    const std::uint64_t p1 = std::uint64_t{kMul1} * c[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
}

constexpr Counter generate(Counter c, Key k) {
    for (int r = 0; r < 10; ++r) {
        if (r > 0) {
            k[0] += kWeyl0;
            k[1] += kWeyl1;
        }
        c = round(c, k);
    }
    return c;
}

}  // namespace philox

// Named substreams within one (trial, subject) slot.
enum class Stream : std::uint32_t { subject = 0, block = 1 };

// Uniform draws in [0, 1) addressed by (seed, trial, subject, stream). Each
// address yields two independent 53-bit uniforms.
class CounterRng {
   public:
    explicit CounterRng(std::uint64_t seed)
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

    std::array<double, 2> uniforms(std::uint64_t trial, std::uint32_t subject,
                                   Stream stream = Stream::subject) const {
        const philox::Counter ctr{static_cast<std::uint32_t>(trial),
                                  static_cast<std::uint32_t>(trial >> 32), subject,
                                  static_cast<std::uint32_t>(stream)};
        const auto out = philox::generate(ctr, key_);
        return {to_unit(out[0], out[1]), to_unit(out[2], out[3])};
    }

   private:
    static double to_unit(std::uint32_t hi, std::uint32_t lo) {
        const std::uint64_t bits = ((std::uint64_t{hi} << 32) | lo) >> 11;
        return static_cast<double>(bits) * 0x1.0p-53;
    }

    philox::Key key_;
};

}  // namespace rarinf
