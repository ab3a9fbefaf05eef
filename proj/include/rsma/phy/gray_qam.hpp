#pragma once

#include "rsma/common.hpp"

namespace rsma::phy {

inline int bits_per_symbol(int order) {
    switch (order) {
        case 4: return 2;
        case 16: return 4;
        case 64: return 6;
        case 256: return 8;
    }
    throw std::invalid_argument("QAM order must be one of 4/16/64/256");
}

inline std::uint32_t gray_to_binary(std::uint32_t g) {
    for (std::uint32_t mask = g >> 1; mask; mask >>= 1) g ^= mask;
    return g;
}

/// Square Gray QAM table indexed by the symbol label (bits MSB-first; the
/// first half of the bits select the I level, the rest the Q level). Unit
/// average energy. Label 0 maps to the top-right point, e.g. (1+1i)/sqrt(2)
/// for 4-QAM.
inline std::vector<cxd> qam_gray_table(int order) {
    const int b = bits_per_symbol(order);
    const int m = b / 2;
    const int levels = 1 << m;
    const double norm = std::sqrt(2.0 * (order - 1) / 3.0);
    auto level = [&](std::uint32_t v) {
        return static_cast<double>((levels - 1) - 2 * static_cast<int>(gray_to_binary(v))) / norm;
    };
    std::vector<cxd> table(order);
    for (int label = 0; label < order; ++label) {
        const std::uint32_t vi = static_cast<std::uint32_t>(label) >> m;
        const std::uint32_t vq = static_cast<std::uint32_t>(label) & (levels - 1);
        table[label] = cxd(level(vi), level(vq));
    }
    return table;
}

/// Maps bits (MSB-first per symbol) onto Gray QAM symbols.
inline std::vector<cxd> qam_map(const std::vector<std::uint8_t>& bits, int order) {
    const int b = bits_per_symbol(order);
    if (bits.size() % b != 0) throw std::invalid_argument("qam_map: bit count not divisible by log2(order)");
    const auto table = qam_gray_table(order);
    std::vector<cxd> out(bits.size() / b);
    for (std::size_t s = 0; s < out.size(); ++s) {
        std::uint32_t label = 0;
        for (int i = 0; i < b; ++i) label = (label << 1) | bits[s * b + i];
        out[s] = table[label];
    }
    return out;
}

inline constexpr double kLlrClip = 50.0;

/// Max-log LLRs of the combined (biased) symbols: psi(a) = |z/phi - a|^2 with
/// phi = gamma/(1+gamma), lambda_i = gamma*(min over bit=1 - min over bit=0),
/// clipped to +-50. Positive LLR means bit 0 is more likely.
inline std::vector<double> qam_llrs(const std::vector<cxd>& combined, double gamma, int order) {
    const int b = bits_per_symbol(order);
    std::vector<double> llrs(combined.size() * b, 0.0);
    if (!(gamma > 0.0)) return llrs;
    const double phi = gamma / (1.0 + gamma);
    const auto table = qam_gray_table(order);
    for (std::size_t s = 0; s < combined.size(); ++s) {
        const cxd y = combined[s] / phi;
        for (int i = 0; i < b; ++i) {
            double min0 = std::numeric_limits<double>::infinity();
            double min1 = min0;
            for (int label = 0; label < order; ++label) {
                const double d = std::norm(y - table[label]);
                const bool bit = (label >> (b - 1 - i)) & 1;
                (bit ? min1 : min0) = std::min(bit ? min1 : min0, d);
            }
            llrs[s * b + i] = std::clamp(gamma * (min1 - min0), -kLlrClip, kLlrClip);
        }
    }
    return llrs;
}

}  // namespace rsma::phy
