#include "bandtrack/rng.hpp"

#include <cmath>

namespace bandtrack::detail {

double normal_quantile_tail(double q, double u) noexcept {
    double r = q < 0.0 ? u : 1.0 - u;
    r = std::sqrt(-std::log(r));
    double value;
    if (r <= 5.0) {
        r -= 1.6;
        value = (((((((r * 7.7454501427834140764e-4 + 0.0227238449892691845833) * r +
                      0.24178072517745061177) * r + 1.27045825245236838258) * r +
                    3.64784832476320460504) * r + 5.7694972214606914055) * r +
                  4.6303378461565452959) * r + 1.42343711074968357734) /
                (((((((r * 1.05075007164441684324e-9 + 5.475938084995344946e-4) * r +
                      0.0151986665636164571966) * r + 0.14810397642748007459) * r +
                    0.68976733498510000455) * r + 1.6763848301838038494) * r +
                  2.05319162663775882187) * r + 1.0);
    } else {
        r -= 5.0;
        value = (((((((r * 2.01033439929228813265e-7 + 2.71155556874348757815e-5) * r +
                      0.0012426609473880784386) * r + 0.026532189526576123093) * r +
                    0.29656057182850489123) * r + 1.7848265399172913358) * r +
                  5.4637849111641143699) * r + 6.6579046435011037772) /
                (((((((r * 2.04426310338993978564e-15 + 1.4215117583164458887e-7) * r +
                      1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                    0.0148753612908506148525) * r + 0.13692988092273580531) * r +
                  0.59983220655588793769) * r + 1.0);
    }
    return q < 0.0 ? -value : value;
}

namespace {

constexpr double kZigR = 3.442619855899;
constexpr double kZigV = 9.91256303526217e-3;

ZigguratTables build_tables() {
    ZigguratTables t{};
    double f = std::exp(-0.5 * kZigR * kZigR);
    t.x[0] = kZigV / f;
    t.x[1] = kZigR;
    t.x[128] = 0.0;
    for (int i = 2; i < 128; ++i) {
        t.x[i] = std::sqrt(-2.0 * std::log(kZigV / t.x[i - 1] + f));
        f = std::exp(-0.5 * t.x[i] * t.x[i]);
    }
    for (int i = 0; i < 128; ++i) t.ratio[i] = t.x[i + 1] / t.x[i];
    return t;
}

}  // namespace

const ZigguratTables kZiggurat = build_tables();

double ziggurat_slow(std::uint64_t word) noexcept {
    const auto& t = kZiggurat;
    std::uint64_t w = word;
    std::uint64_t draw = 0;
    auto next_word = [&] { return mix64(word ^ (++draw * 0xA0761D6478BD642FULL)); };
    auto open_uniform = [](std::uint64_t b) {
        return (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
    };
    for (;;) {
        const double u = (static_cast<double>(w >> 11) + 0.5) * 0x1.0p-52 - 1.0;
        const unsigned i = static_cast<unsigned>(w & 0x7F);
        if (std::fabs(u) < t.ratio[i]) return u * t.x[i];
        if (i == 0) {
            double x, y;
            do {
                x = std::log(open_uniform(next_word())) / kZigR;
                y = std::log(open_uniform(next_word()));
            } while (-2.0 * y < x * x);
            return u < 0.0 ? x - kZigR : kZigR - x;
        }
        const double x = u * t.x[i];
        const double f0 = std::exp(-0.5 * (t.x[i] * t.x[i] - x * x));
        const double f1 = std::exp(-0.5 * (t.x[i + 1] * t.x[i + 1] - x * x));
        if (f1 + open_uniform(next_word()) * (f0 - f1) < 1.0) return x;
        w = next_word();
    }
}

}  // namespace bandtrack::detail
