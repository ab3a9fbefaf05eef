#pragma once

#include <json.hpp>

#include "rsma/config.hpp"

namespace rsma {

/// One draw of the K uplink channels {H_k}, each Nr x Nt.
struct ChannelRealization {
    std::vector<MatC> H;
    std::uint64_t seed = 0;

    int users() const { return static_cast<int>(H.size()); }
    const MatC& of_user(int user_1based) const { return H.at(user_1based - 1); }
};

namespace detail {
/// Standard-normal pair via Box-Muller on two uniform53 draws ("rsma-rng v1").
inline std::pair<double, double> normal_pair(std::mt19937_64& eng) {
    double u1 = (static_cast<double>(eng() >> 11) + 1.0) * 0x1.0p-53;  // (0,1]
    double u2 = uniform53(eng);
    double r = std::sqrt(-2.0 * std::log(u1));
    return {r * std::cos(2.0 * M_PI * u2), r * std::sin(2.0 * M_PI * u2)};
}
}  // namespace detail

/// i.i.d. CN(0,1) entries, deterministic for a given seed. Entries are drawn
/// user by user, column-major within each matrix.
inline ChannelRealization generate_rayleigh_channels(const SystemConfig& cfg, std::uint64_t seed) {
    std::mt19937_64 eng(seed);
    ChannelRealization out;
    out.seed = seed;
    out.H.reserve(cfg.K);
    const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
    for (int k = 0; k < cfg.K; ++k) {
        MatC h(cfg.Nr, cfg.Nt);
        for (int c = 0; c < cfg.Nt; ++c)
            for (int r = 0; r < cfg.Nr; ++r) {
                auto [x, y] = detail::normal_pair(eng);
                h(r, c) = cxd(x, y) * inv_sqrt2;
            }
        out.H.push_back(std::move(h));
    }
    return out;
}

inline nlohmann::json to_json(const ChannelRealization& ch) {
    nlohmann::json j;
    j["seed"] = ch.seed;
    auto& hs = j["H"] = nlohmann::json::array();
    for (const auto& H : ch.H) {
        nlohmann::json rows = nlohmann::json::array();
        for (int r = 0; r < H.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (int c = 0; c < H.cols(); ++c) row.push_back({H(r, c).real(), H(r, c).imag()});
            rows.push_back(std::move(row));
        }
        hs.push_back(std::move(rows));
    }
    return j;
}

inline ChannelRealization channel_from_json(const nlohmann::json& j) {
    ChannelRealization ch;
    ch.seed = j.value("seed", std::uint64_t{0});
    for (const auto& rows : j.at("H")) {
        const int nr = static_cast<int>(rows.size());
        const int nc = nr ? static_cast<int>(rows[0].size()) : 0;
        MatC H(nr, nc);
        for (int r = 0; r < nr; ++r)
            for (int c = 0; c < nc; ++c)
                H(r, c) = cxd(rows[r][c][0].get<double>(), rows[r][c][1].get<double>());
        ch.H.push_back(std::move(H));
    }
    return ch;
}

}  // namespace rsma
