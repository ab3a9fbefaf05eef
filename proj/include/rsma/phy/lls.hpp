#pragma once

#include "rsma/phy/gray_qam.hpp"
#include "rsma/phy/interleaver.hpp"
#include "rsma/phy/mcs.hpp"
#include "rsma/phy/polar.hpp"
#include "rsma/rates.hpp"

// Link-level transceiver: per stream, info bits -> polar encode -> interleave
// -> Gray QAM over S channel uses; the BS runs MMSE combining, max-log LLR
// demapping and SCL decoding, subtracting each successfully decoded stream's
// reconstruction before the next SIC stage (no SIC under SDMA).

namespace rsma::phy {

struct LlsOptions {
    int channel_uses = 256;  // S
    int list_size = 8;
    int crc_bits = 0;
    double amc_margin = 1.0;
    std::vector<McsEntry> mcs_table = default_mcs_table();
};

/// Per-stream coding/modulation state derived from the design rates.
struct StreamCodec {
    McsEntry mcs;
    int info_bits = 0;  // K_i (0 = stream carries nothing)
    int tx_bits = 0;    // S * log2(order)
    PolarCodeConfig polar;
    std::uint64_t interleaver_seed = 0;
};

inline int next_pow2(int v) {
    int p = 1;
    while (p < v) p <<= 1;
    return p;
}

namespace detail {
inline std::uint64_t stream_seed(std::uint64_t base, int m, int a, std::uint64_t salt) {
    std::uint64_t x = base ^ (0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(m) * 64 + a + salt));
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    return x;
}
}  // namespace detail

/// AMC per stream: pick the highest MCS underneath the stream's design rate,
/// then build the (shortened) polar code. Code length is S*log2(order) rounded
/// up to a power of two; the tail input indices are frozen so the untransmitted
/// coded tail is all-zero.
inline StreamCodec build_stream_codec(double stream_rate_bits, double stream_sinr, const LlsOptions& opt,
                                      std::uint64_t seed) {
    StreamCodec sc;
    const SelectedMcs sel = select_mcs(stream_rate_bits, opt.mcs_table, opt.amc_margin);
    sc.mcs = sel.entry;
    const int b = bits_per_symbol(sc.mcs.order);
    sc.tx_bits = opt.channel_uses * b;
    const int nc = next_pow2(sc.tx_bits);
    int ki = sel.below_lowest
                 ? static_cast<int>(std::floor(opt.channel_uses * stream_rate_bits))
                 : static_cast<int>(std::floor(sc.tx_bits * sc.mcs.code_rate));
    ki = std::clamp(ki, 0, sc.tx_bits);
    sc.info_bits = ki;
    sc.interleaver_seed = seed;

    sc.polar.code_length = nc;
    sc.polar.info_length = ki;
    sc.polar.list_size = opt.list_size;
    sc.polar.crc_bits = opt.crc_bits;
    sc.polar.frozen.assign(nc, 0);
    for (int i = sc.tx_bits; i < nc; ++i) sc.polar.frozen[i] = 1;  // shortened tail
    if (ki > 0) {
        // per-bit design point; the raw symbol SINR saturates the recursion
        const double design_snr_db =
            std::clamp(linear_to_db(std::max(stream_sinr, 1e-3)) - 10.0 * std::log10(b), 0.0, 5.0);
        const auto z = bhattacharyya_parameters(nc, design_snr_db);
        std::vector<int> idx;
        for (int i = 0; i < sc.tx_bits; ++i) idx.push_back(i);
        std::stable_sort(idx.begin(), idx.end(), [&](int a, int c) {
            if (z[a] != z[c]) return z[a] > z[c];
            return a < c;
        });
        const int extra = sc.tx_bits - ki;  // worst indices among the transmitted part
        for (int i = 0; i < extra; ++i) sc.polar.frozen[idx[i]] = 1;
    } else {
        for (int i = 0; i < sc.tx_bits; ++i) sc.polar.frozen[i] = 1;
    }
    sc.polar.validate();
    return sc;
}

/// Everything the transceiver needs for one design point.
struct LlsDesign {
    SystemConfig cfg;
    DecodingOrder order;
    PrecoderSet P;
    LlsOptions options;
    std::vector<std::vector<StreamCodec>> codecs;      // [m][a]
    std::vector<std::vector<double>> stream_rates;     // theory per-stream rates
};

/// Builds codecs from the theory rates of (P, G) under the system config.
inline LlsDesign make_lls_design(const ChannelRealization& ch, const PrecoderSet& P, const CombinerSet& G,
                                 const DecodingOrder& order, const SystemConfig& cfg, const FblParams& fbl,
                                 const LlsOptions& opt, std::uint64_t base_seed) {
    LlsDesign d;
    d.cfg = cfg;
    d.order = order;
    d.P = P;
    d.options = opt;
    const auto rep = user_rates(ch, P, G, order, cfg, fbl);
    const int M = order.size(), L = cfg.streams_per_user();
    d.codecs.resize(M);
    d.stream_rates.resize(M);
    for (int m = 1; m <= M; ++m)
        for (int a = 1; a <= L; ++a) {
            const double gamma = rep.sinr(m, a);
            const double rate = stream_rate(gamma, fbl);
            d.stream_rates[m - 1].push_back(rate);
            d.codecs[m - 1].push_back(
                build_stream_codec(rate, gamma, opt, detail::stream_seed(base_seed, m, a, 1)));
        }
    return d;
}

/// One transmitted frame: S channel uses, every stream in parallel.
struct Frame {
    std::vector<std::vector<Bits>> info;               // [m][a]
    std::vector<std::vector<Bits>> coded_interleaved;  // transmitted bits per stream
    std::vector<std::vector<std::vector<cxd>>> symbols;  // [m][a][t], |.|=S
};

struct FrameResult {
    std::vector<std::vector<bool>> success;  // [m][a]
    std::vector<long long> recovered_bits;   // D_k per user (1-based users at k-1)
    int channel_uses = 0;                    // S
    int sic_abort_position = 0;              // first failed SIC stage (1-based stream count), 0 = none
};

inline Frame transmit_frame(const LlsDesign& d, std::uint64_t frame_seed) {
    const int M = d.order.size(), L = d.cfg.streams_per_user();
    Frame f;
    f.info.resize(M);
    f.coded_interleaved.resize(M);
    f.symbols.resize(M);
    for (int m = 1; m <= M; ++m)
        for (int a = 1; a <= L; ++a) {
            const auto& sc = d.codecs[m - 1][a - 1];
            std::mt19937_64 eng(detail::stream_seed(frame_seed, m, a, 2));
            Bits info(sc.info_bits);
            for (auto& bit : info) bit = (eng() >> 40) & 1;
            Bits coded = polar_encode(info, sc.polar);
            coded.resize(sc.tx_bits);  // shortened tail is all-zero by construction
            Bits tx = interleave(coded, sc.interleaver_seed);
            f.info[m - 1].push_back(std::move(info));
            f.symbols[m - 1].push_back(qam_map(tx, sc.mcs.order));
            f.coded_interleaved[m - 1].push_back(std::move(tx));
        }
    return f;
}

/// Received block Y (Nr x S) for one frame; noise_stddev 0 gives the noiseless
/// channel.
inline MatC apply_channel(const LlsDesign& d, const ChannelRealization& ch, const Frame& f,
                          double noise_stddev, std::uint64_t noise_seed) {
    const int S = d.options.channel_uses;
    const int M = d.order.size(), L = d.cfg.streams_per_user();
    MatC Y = MatC::Zero(d.cfg.Nr, S);
    for (int m = 1; m <= M; ++m) {
        const MatC& H = ch.of_user(d.order.user_at(m));
        for (int a = 1; a <= L; ++a) {
            const VecC hp = H * d.P.at(m).col(a - 1);
            const auto& s = f.symbols[m - 1][a - 1];
            for (int t = 0; t < S; ++t) Y.col(t) += hp * s[t];
        }
    }
    if (noise_stddev > 0.0) {
        std::mt19937_64 eng(noise_seed);
        const double scale = noise_stddev / std::sqrt(2.0);
        for (int t = 0; t < S; ++t)
            for (int r = 0; r < d.cfg.Nr; ++r) {
                auto [x, y] = rsma::detail::normal_pair(eng);
                Y(r, t) += cxd(x, y) * scale;
            }
    }
    return Y;
}

namespace detail {

/// Interference-plus-noise covariance seen by stream (m,a) at its SIC stage:
/// same-vector streams decoded later, all later symbol vectors, sigma2*I.
/// Under SDMA everything except the desired stream interferes.
inline MatC stage_covariance(const LlsDesign& d, const ChannelRealization& ch, int m, int a) {
    const int M = d.order.size(), L = d.cfg.streams_per_user();
    MatC R = d.cfg.sigma2 * MatC::Identity(d.cfg.Nr, d.cfg.Nr);
    for (int n = 1; n <= M; ++n) {
        const MatC& H = ch.of_user(d.order.user_at(n));
        for (int i = 1; i <= L; ++i) {
            const bool interferes = d.cfg.scheme == Scheme::SDMA
                                        ? !(n == m && i == a)
                                        : (n > m || (n == m && i > a));
            if (!interferes) continue;
            const VecC hp = H * d.P.at(n).col(i - 1);
            R += hp * hp.adjoint();
        }
    }
    return R;
}

}  // namespace detail

/// MMSE-SIC receiver. Streams are processed in decoding order (within a symbol
/// vector, in stream index order); each success is re-encoded, re-modulated,
/// re-precoded and subtracted. A failure is not subtracted and every later
/// stream in the chain is marked failed. Success is checked against the
/// transmitted bits. Under SDMA all streams are decoded independently from Y.
inline FrameResult mmse_sic_receive(const MatC& Y, const ChannelRealization& ch, const LlsDesign& d,
                                    const Frame& f) {
    const int M = d.order.size(), L = d.cfg.streams_per_user();
    const int S = d.options.channel_uses;
    const bool sic = d.cfg.scheme != Scheme::SDMA;
    FrameResult res;
    res.channel_uses = S;
    res.success.assign(M, std::vector<bool>(L, false));
    res.recovered_bits.assign(d.cfg.K, 0);

    MatC residual = Y;
    bool chain_broken = false;
    int stage = 0;
    for (int m = 1; m <= M; ++m) {
        const MatC& H = ch.of_user(d.order.user_at(m));
        for (int a = 1; a <= L; ++a) {
            ++stage;
            const auto& sc = d.codecs[m - 1][a - 1];
            if (sic && chain_broken) continue;
            if (sc.info_bits == 0) {  // known all-zero codeword: subtract directly
                res.success[m - 1][a - 1] = true;
                if (sic) {
                    const VecC hp = H * d.P.at(m).col(a - 1);
                    const auto& sym = f.symbols[m - 1][a - 1];
                    for (int t = 0; t < S; ++t) residual.col(t) -= hp * sym[t];
                }
                continue;
            }
            MatC R = detail::stage_covariance(d, ch, m, a);
            Eigen::LDLT<MatC> ldlt(R);
            if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) {
                R += 1e-12 * MatC::Identity(d.cfg.Nr, d.cfg.Nr);
                ldlt.compute(R);
            }
            const VecC h = H * d.P.at(m).col(a - 1);
            const VecC rinv_h = ldlt.solve(h);
            const double gamma = std::max(0.0, (h.adjoint() * rinv_h).value().real());
            const RowC g = rinv_h.adjoint() / (1.0 + gamma);  // g = h'(R + hh')^-1, gh = gamma/(1+gamma)

            const MatC& source = sic ? residual : Y;
            std::vector<cxd> combined(S);
            for (int t = 0; t < S; ++t) combined[t] = (g * source.col(t)).value();
            const auto bit_llrs = qam_llrs(combined, gamma, sc.mcs.order);
            auto llrs = deinterleave(bit_llrs, sc.interleaver_seed);
            llrs.resize(sc.polar.code_length, kLlrClip);  // shortened positions are known zeros
            const auto dec = polar_decode_scl(llrs, sc.polar);
            const bool ok = dec.info == f.info[m - 1][a - 1];
            res.success[m - 1][a - 1] = ok;
            if (!ok) {
                if (sic) {
                    chain_broken = true;
                    if (res.sic_abort_position == 0) res.sic_abort_position = stage;
                }
                continue;
            }
            if (sic) {  // reconstruct and subtract
                Bits coded = polar_encode(dec.info, sc.polar);
                coded.resize(sc.tx_bits);
                const auto sym = qam_map(interleave(coded, sc.interleaver_seed), sc.mcs.order);
                const VecC hp = H * d.P.at(m).col(a - 1);
                for (int t = 0; t < S; ++t) residual.col(t) -= hp * sym[t];
            }
        }
    }
    for (int m = 1; m <= M; ++m)
        for (int a = 1; a <= L; ++a)
            if (res.success[m - 1][a - 1])
                res.recovered_bits[d.order.user_at(m) - 1] += d.codecs[m - 1][a - 1].info_bits;
    return res;
}

/// Eq.-(31)-style aggregate: sum over trials of the worst user's recovered
/// bits over the total channel uses.
inline double max_min_throughput(const std::vector<FrameResult>& results) {
    if (results.empty()) throw std::invalid_argument("max_min_throughput: no results");
    long long bits = 0, uses = 0;
    for (const auto& r : results) {
        bits += *std::min_element(r.recovered_bits.begin(), r.recovered_bits.end());
        uses += r.channel_uses;
    }
    return static_cast<double>(bits) / static_cast<double>(uses);
}

}  // namespace rsma::phy
