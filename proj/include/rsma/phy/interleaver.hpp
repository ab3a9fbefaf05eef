#pragma once

#include "rsma/common.hpp"

namespace rsma::phy {

/// Seeded Fisher-Yates permutation ("rsma-rng v1" index draws).
inline std::vector<std::uint32_t> interleaver_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::uint32_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = static_cast<std::uint32_t>(i);
    std::mt19937_64 eng(seed);
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform53(eng) * static_cast<double>(i));
        std::swap(perm[i - 1], perm[std::min(j, i - 1)]);
    }
    return perm;
}

template <typename T>
std::vector<T> interleave(const std::vector<T>& in, std::uint64_t seed) {
    const auto perm = interleaver_permutation(in.size(), seed);
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[perm[i]];
    return out;
}

template <typename T>
std::vector<T> deinterleave(const std::vector<T>& in, std::uint64_t seed) {
    const auto perm = interleaver_permutation(in.size(), seed);
    std::vector<T> out(in.size());
    for (std::size_t i = 0; i < in.size(); ++i) out[perm[i]] = in[i];
    return out;
}

}  // namespace rsma::phy
