#pragma once

#include <cmath>
#include <cstdint>

namespace bandtrack {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

namespace detail {
double normal_quantile_tail(double q, double u) noexcept;

/// 128-layer ziggurat for the standard normal density (Marsaglia-Tsang
/// construction with Doornik's layer tables). x has 129 entries, ratio 128.
struct ZigguratTables {
    double x[129];
    double ratio[128];
};
extern const ZigguratTables kZiggurat;

/// Rejection branch of the ziggurat; `word` is the first 64-bit draw.
double ziggurat_slow(std::uint64_t word) noexcept;
}  // namespace detail

/// Inverse of the standard normal CDF (Wichura, AS241 PPND16).
/// Relative accuracy about 1e-16 on (0,1).
inline double standard_normal_quantile(double u) noexcept {
    const double q = u - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((r * 2509.0809287301226727 + 33430.575583588128105) * r +
                     67265.770927008700853) * r + 45921.953931549871457) * r +
                   13731.693765509461125) * r + 1971.5909503065514427) * r +
                 133.14166789178437745) * r + 3.387132872796366608) /
               (((((((r * 5226.495278852545925 + 28729.085735721942674) * r +
                     39307.89580009271061) * r + 21213.794301586595867) * r +
                   5394.1960214247511077) * r + 687.1870074920579083) * r +
                 42.313330701600911252) * r + 1.0);
    }
    return detail::normal_quantile_tail(q, u);
}

/// Counter-based generator: every draw is a pure function of
/// (master_seed, stream, counter), so draws can be produced in any order.
class CounterRng {
public:
    CounterRng(std::uint64_t master_seed, std::uint64_t stream) noexcept
        : key_(mix64(mix64(master_seed ^ 0x6A09E667F3BCC909ULL) ^
                     (stream * 0xD1B54A32D192ED03ULL + 0x3C6EF372FE94F82BULL))) {}

    std::uint64_t bits(std::uint64_t counter) const noexcept {
        return mix64(key_ + counter * 0x9E3779B97F4A7C15ULL);
    }

    /// Uniform on the open interval (0,1).
    double uniform(std::uint64_t counter) const noexcept {
        return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
    }

    /// Standard normal by ziggurat sampling. Rejections draw further words
    /// from a hash of the first, so the result is still a function of counter.
    double normal(std::uint64_t counter) const noexcept {
        const std::uint64_t w = bits(counter);
        const double u = (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-52 - 1.0;
        const unsigned layer = static_cast<unsigned>(w & 0x7F);
        if (std::fabs(u) < detail::kZiggurat.ratio[layer]) return u * detail::kZiggurat.x[layer];
        return detail::ziggurat_slow(w);
    }

    /// Standard normal by inversion of one uniform.
    double normal_by_inversion(std::uint64_t counter) const noexcept {
        return standard_normal_quantile(uniform(counter));
    }

private:
    std::uint64_t key_;
};

}  // namespace bandtrack
