#pragma once

// Test-only polar references, independent of the library implementation path:
// a dense Kronecker-product encoder and a plain recursive SC decoder.

#include "rsma/phy/polar.hpp"

namespace testref {

inline rsma::phy::Bits polar_encode_dense(const rsma::phy::Bits& u) {
    const int n = static_cast<int>(u.size());
    std::vector<std::vector<std::uint8_t>> G{{1}};
    int size = 1;
    while (size < n) {
        std::vector<std::vector<std::uint8_t>> G2(2 * size, std::vector<std::uint8_t>(2 * size, 0));
        for (int r = 0; r < size; ++r)
            for (int c = 0; c < size; ++c) {
                G2[r][c] = G[r][c];
                G2[r + size][c] = G[r][c];
                G2[r + size][c + size] = G[r][c];
            }
        G = std::move(G2);
        size *= 2;
    }
    rsma::phy::Bits x(n, 0);
    for (int c = 0; c < n; ++c) {
        std::uint8_t acc = 0;
        for (int r = 0; r < n; ++r) acc ^= u[r] & G[r][c];
        x[c] = acc;
    }
    return x;
}

/// Plain successive cancellation; returns the re-encoded codeword of the
/// decoded block and fills u over [lo, lo+len).
inline rsma::phy::Bits sc_decode(const std::vector<double>& alpha, const std::vector<std::uint8_t>& frozen,
                                 int lo, rsma::phy::Bits& u) {
    const int len = static_cast<int>(alpha.size());
    if (len == 1) {
        u[lo] = frozen[lo] ? 0 : (alpha[0] < 0.0 ? 1 : 0);
        return {u[lo]};
    }
    const int half = len / 2;
    std::vector<double> f(half);
    for (int i = 0; i < half; ++i) f[i] = rsma::phy::detail::boxplus(alpha[i], alpha[i + half]);
    const auto cl = sc_decode(f, frozen, lo, u);
    std::vector<double> g(half);
    for (int i = 0; i < half; ++i) g[i] = alpha[i + half] + (cl[i] ? -1.0 : 1.0) * alpha[i];
    const auto cr = sc_decode(g, frozen, lo + half, u);
    rsma::phy::Bits cword(len);
    for (int i = 0; i < half; ++i) {
        cword[i] = cl[i] ^ cr[i];
        cword[i + half] = cr[i];
    }
    return cword;
}

inline rsma::phy::Bits sc_decode_info(const std::vector<double>& llrs, const rsma::phy::PolarCodeConfig& cfg) {
    rsma::phy::Bits u(cfg.code_length, 0);
    sc_decode(llrs, cfg.frozen, 0, u);
    rsma::phy::Bits info;
    for (int i = 0; i < cfg.code_length; ++i)
        if (!cfg.frozen[i]) info.push_back(u[i]);
    return info;
}

}  // namespace testref
