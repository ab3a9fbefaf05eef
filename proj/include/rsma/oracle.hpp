#pragma once

#include "rsma/sca.hpp"

// Small-instance brute-force references used by tests and the `oracle` CLI
// subcommand; deliberately independent of the SCA machinery.

namespace rsma::oracle {

struct GridResult {
    double mmf = 0.0;
    double p1 = 0.0, p2 = 0.0, g = 0.0;
};

/// Exhaustive grid over (p1, p2, shared real combiner) for the two-user SISO
/// NOMA max-min problem with real channels (h1 decoded first). SINRs use the
/// scale-invariant convention, so the combiner axis is flat by construction;
/// it is swept anyway.
inline GridResult grid_search_noma_siso(double h1, double h2, double pt, const FblParams& fbl,
                                        int grid = 200, double sigma2 = 1.0) {
    GridResult best;
    for (int ig = 1; ig <= grid; ++ig) {
        const double g = 2.0 * ig / grid;  // scale-invariant; any nonzero value
        for (int i1 = 0; i1 <= grid; ++i1) {
            const double p1 = std::sqrt(pt) * i1 / grid;
            for (int i2 = 0; i2 <= grid; ++i2) {
                const double p2 = std::sqrt(pt) * i2 / grid;
                const double s1 = g * g * h1 * h1 * p1 * p1;
                const double i_c = g * g * h2 * h2 * p2 * p2;
                const double noise = g * g * sigma2;
                const double gamma1 = noise + i_c > 0 ? s1 / (i_c + noise) : 0.0;
                const double gamma2 = noise > 0 ? g * g * h2 * h2 * p2 * p2 / noise : 0.0;
                const double mmf = std::min(stream_rate(gamma1, fbl), stream_rate(gamma2, fbl));
                if (mmf > best.mmf) best = {mmf, p1, p2, g};
            }
        }
    }
    return best;
}

struct OrderScore {
    DecodingOrder order;
    double mmf = 0.0;
};

/// Rates of a fixed design under every possible decoding order (M <= 6),
/// sorted by descending MMF. The fixed design is the MMSE-initialized state.
inline std::vector<OrderScore> score_all_orders(const ChannelRealization& ch, const SystemConfig& cfg,
                                                const FblParams& fbl) {
    std::vector<OrderScore> out;
    for (const auto& order : enumerate_decoding_orders(cfg)) {
        auto st = initialize_state(ch, order, cfg, fbl);
        auto rep = user_rates(ch, st.P, st.G, order, cfg, fbl);
        out.push_back({order, rep.mmf});
    }
    std::stable_sort(out.begin(), out.end(), [](const OrderScore& a, const OrderScore& b) {
        return a.mmf > b.mmf;
    });
    return out;
}

}  // namespace rsma::oracle
