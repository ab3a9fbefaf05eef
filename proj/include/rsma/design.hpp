#pragma once

#include <json.hpp>

#include "rsma/order.hpp"

namespace rsma {

/// Precoders per decoding-order position: P[m] is Nt x L, column a = p^a_{pi_m}.
struct PrecoderSet {
    std::vector<MatC> P;

    const MatC& at(int pos_1based) const { return P.at(pos_1based - 1); }
    MatC& at(int pos_1based) { return P.at(pos_1based - 1); }

    /// Power used by user k = sum of trace(P Pᴴ) over k's symbol vectors.
    double user_power(int user, const DecodingOrder& order) const {
        double p = 0.0;
        for (int m = 1; m <= order.size(); ++m)
            if (order.user_at(m) == user) p += at(m).squaredNorm();
        return p;
    }

    /// True if every user satisfies its power budget to 1e-6 relative slack.
    bool power_feasible(const DecodingOrder& order, const SystemConfig& cfg) const {
        for (int k = 1; k <= cfg.K; ++k)
            if (user_power(k, order) > cfg.Pt * (1.0 + 1e-6)) return false;
        return true;
    }
};

/// Combiners per decoding-order position: G[m] is L x Nr, row a = g^a_{pi_m}.
struct CombinerSet {
    std::vector<MatC> G;

    const MatC& at(int pos_1based) const { return G.at(pos_1based - 1); }
    MatC& at(int pos_1based) { return G.at(pos_1based - 1); }
};

namespace detail {
inline nlohmann::json cmat_to_json(const MatC& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back({m(r, c).real(), m(r, c).imag()});
        rows.push_back(std::move(row));
    }
    return rows;
}

inline MatC cmat_from_json(const nlohmann::json& rows) {
    const int nr = static_cast<int>(rows.size());
    const int nc = nr ? static_cast<int>(rows[0].size()) : 0;
    MatC m(nr, nc);
    for (int r = 0; r < nr; ++r)
        for (int c = 0; c < nc; ++c) m(r, c) = cxd(rows[r][c][0].get<double>(), rows[r][c][1].get<double>());
    return m;
}
}  // namespace detail

}  // namespace rsma
