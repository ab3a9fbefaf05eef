#pragma once

#include <sstream>

#include "rsma/design.hpp"
#include "rsma/fbl.hpp"

namespace rsma {

/// Interference partners of stream (m,a): same-vector streams i != a, plus all
/// streams of the not-yet-decoded symbol vectors (RSMA/NOMA) or of every other
/// symbol vector (SDMA, no SIC).
inline std::vector<StreamAddress> interference_set(int m, int a, int M, int L, Scheme scheme) {
    std::vector<StreamAddress> out;
    for (int i = 1; i <= L; ++i)
        if (i != a) out.push_back({m, i});
    for (int n = 1; n <= M; ++n) {
        if (n == m) continue;
        if (scheme != Scheme::SDMA && n < m) continue;
        for (int i = 1; i <= L; ++i) out.push_back({n, i});
    }
    return out;
}

/// Combined-noise term: ||g|| sigma2 as printed, or ||g||^2 sigma2 if the
/// config opts in.
inline double combiner_noise_term(const RowC& g, const SystemConfig& cfg) {
    const double n = g.norm();
    return cfg.noise_norm_squared ? n * n * cfg.sigma2 : n * cfg.sigma2;
}

/// SINR of stream a of the symbol vector at decoding position m.
inline double stream_sinr(const ChannelRealization& ch, const PrecoderSet& P, const CombinerSet& G,
                          const DecodingOrder& order, StreamAddress addr, const SystemConfig& cfg) {
    const int m = addr.position, a = addr.stream;
    const int M = order.size(), L = static_cast<int>(P.at(m).cols());
    const RowC g = G.at(m).row(a - 1);
    const MatC& Hm = ch.of_user(order.user_at(m));
    const cxd num_amp = g * Hm * P.at(m).col(a - 1);
    const double num = std::norm(num_amp);
    double denom = combiner_noise_term(g, cfg);
    for (const auto& s : interference_set(m, a, M, L, cfg.scheme)) {
        const MatC& Hn = ch.of_user(order.user_at(s.position));
        denom += std::norm((g * Hn * P.at(s.position).col(s.stream - 1)).value());
    }
    if (num == 0.0) return 0.0;
    if (denom <= 0.0) return 0.0;  // zero combiner
    return num / denom;
}

/// Per-stream SINRs, symbol-vector rates, per-user aggregates and the MMF value.
struct RateReport {
    std::vector<std::vector<double>> per_stream_sinr;  // [m][a], 0-based
    std::vector<double> per_symbol_vector;             // M rates
    std::vector<double> per_user;                      // K rates
    double mmf = 0.0;

    double sinr(int m_1based, int a_1based) const { return per_stream_sinr[m_1based - 1][a_1based - 1]; }
};

inline RateReport user_rates(const ChannelRealization& ch, const PrecoderSet& P, const CombinerSet& G,
                             const DecodingOrder& order, const SystemConfig& cfg, const FblParams& fbl) {
    const int M = order.size();
    const int L = cfg.streams_per_user();
    RateReport rep;
    rep.per_stream_sinr.assign(M, std::vector<double>(L, 0.0));
    rep.per_symbol_vector.assign(M, 0.0);
    for (int m = 1; m <= M; ++m) {
        double r = 0.0;
        for (int a = 1; a <= L; ++a) {
            const double g = stream_sinr(ch, P, G, order, {m, a}, cfg);
            rep.per_stream_sinr[m - 1][a - 1] = g;
            r += stream_rate(g, fbl);
        }
        rep.per_symbol_vector[m - 1] = r;
    }
    rep.per_user.assign(cfg.K, 0.0);
    for (int m = 1; m <= M; ++m) rep.per_user[order.user_at(m) - 1] += rep.per_symbol_vector[m - 1];
    rep.mmf = *std::min_element(rep.per_user.begin(), rep.per_user.end());
    return rep;
}

/// MMSE combiner per stream: g = (H p^a)ᴴ (sum_{i>=a} H p^i (H p^i)ᴴ + N_m)^-1,
/// where N_m collects every not-yet-decoded symbol vector's covariance plus
/// sigma2*I (all other vectors under SDMA). Singular covariance is regularized
/// with 1e-12*I and flagged.
inline CombinerSet mmse_combiner_update(const ChannelRealization& ch, const PrecoderSet& P,
                                        const DecodingOrder& order, const SystemConfig& cfg,
                                        bool* regularized = nullptr) {
    const int M = order.size();
    const int L = cfg.streams_per_user();
    if (regularized) *regularized = false;
    CombinerSet G;
    G.G.reserve(M);
    for (int m = 1; m <= M; ++m) {
        const MatC& Hm = ch.of_user(order.user_at(m));
        MatC Nm = cfg.sigma2 * MatC::Identity(cfg.Nr, cfg.Nr);
        for (int n = 1; n <= M; ++n) {
            if (n == m) continue;
            if (cfg.scheme != Scheme::SDMA && n < m) continue;
            const MatC hp = ch.of_user(order.user_at(n)) * P.at(n);
            Nm += hp * hp.adjoint();
        }
        MatC Gm(L, cfg.Nr);
        for (int a = 1; a <= L; ++a) {
            MatC cov = Nm;
            for (int i = (cfg.scheme == Scheme::SDMA ? 1 : a); i <= L; ++i) {
                const VecC hp = Hm * P.at(m).col(i - 1);
                cov += hp * hp.adjoint();
            }
            Eigen::LDLT<MatC> ldlt(cov);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
                cov += 1e-12 * MatC::Identity(cfg.Nr, cfg.Nr);
                ldlt.compute(cov);
                if (regularized) *regularized = true;
            }
            const VecC h = Hm * P.at(m).col(a - 1);
            Gm.row(a - 1) = (ldlt.solve(h)).adjoint();
        }
        G.G.push_back(std::move(Gm));
    }
    return G;
}

inline nlohmann::json to_json(const RateReport& r) {
    return nlohmann::json{{"per_stream_sinr", r.per_stream_sinr},
                          {"per_symbol_vector", r.per_symbol_vector},
                          {"per_user", r.per_user},
                          {"mmf", r.mmf}};
}

/// One CSV row (seed, scheme, N, snr_db, mmf, per_user...). No trailing newline.
inline std::string rate_report_csv_row(std::uint64_t seed, Scheme scheme, int N, double snr_db,
                                       const RateReport& rep) {
    std::ostringstream os;
    os.precision(10);
    os << seed << ',' << to_string(scheme) << ',' << N << ',' << snr_db << ',' << rep.mmf;
    for (double r : rep.per_user) os << ',' << r;
    return os.str();
}

}  // namespace rsma
