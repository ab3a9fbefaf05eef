#pragma once

#include <cstring>

#include "rsma/common.hpp"

// Polar coding in the natural (no bit-reversal) convention: x = u * F^{(x)n}
// with kernel F = [[1,0],[1,1]], so x = [enc(u_a xor u_b), enc(u_b)] for the
// two input halves. SC/SCL decoding follows the same first-half/second-half
// recursion with exact boxplus LLR combining.

namespace rsma::phy {

using Bits = std::vector<std::uint8_t>;

struct PolarCodeConfig {
    int code_length = 0;              // N_c, power of two
    int info_length = 0;              // K_i
    std::vector<std::uint8_t> frozen;  // mask of size N_c, 1 = frozen
    int list_size = 8;
    int crc_bits = 0;  // 0 disables CRC-aided selection

    int frozen_count() const {
        int f = 0;
        for (auto v : frozen) f += v;
        return f;
    }
    void validate() const {
        if (code_length <= 0 || (code_length & (code_length - 1)) != 0)
            throw std::invalid_argument("polar code length must be a power of two");
        if (static_cast<int>(frozen.size()) != code_length)
            throw std::invalid_argument("frozen mask size mismatch");
        if (frozen_count() != code_length - info_length)
            throw std::invalid_argument("frozen count must equal N_c - K_i");
        if (list_size < 1) throw std::invalid_argument("list size >= 1");
    }
};

/// Bhattacharyya parameters of the N = 2^n synthetic channels in decode order
/// (natural indexing): Z(n, z) = [Z(n-1, 2z - z^2), Z(n-1, z^2)].
inline std::vector<double> bhattacharyya_parameters(int code_length, double design_snr_db) {
    const double z0 = std::exp(-db_to_linear(design_snr_db));
    std::vector<double> z{z0};
    while (static_cast<int>(z.size()) < code_length) {
        // outer transforms land on the higher index bits, so each element
        // expands into an adjacent (minus, plus) pair
        std::vector<double> next(z.size() * 2);
        for (std::size_t i = 0; i < z.size(); ++i) {
            next[2 * i] = std::clamp(2.0 * z[i] - z[i] * z[i], 0.0, 1.0);
            next[2 * i + 1] = z[i] * z[i];
        }
        z.swap(next);
    }
    return z;
}

/// N_c - K_i worst indices by Bhattacharyya parameter; ties freeze the lower
/// index first.
inline std::vector<int> construct_frozen_set(int code_length, int info_length, double design_snr_db) {
    if (info_length > code_length || info_length < 0) throw std::invalid_argument("K_i out of range");
    const auto z = bhattacharyya_parameters(code_length, design_snr_db);
    std::vector<int> idx(code_length);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (z[a] != z[b]) return z[a] > z[b];
        return a < b;
    });
    std::vector<int> frozen(idx.begin(), idx.begin() + (code_length - info_length));
    std::sort(frozen.begin(), frozen.end());
    return frozen;
}

inline PolarCodeConfig make_polar_config(int code_length, int info_length, double design_snr_db,
                                         int list_size = 8, int crc_bits = 0) {
    PolarCodeConfig cfg;
    cfg.code_length = code_length;
    cfg.info_length = info_length;
    cfg.list_size = list_size;
    cfg.crc_bits = crc_bits;
    cfg.frozen.assign(code_length, 0);
    for (int i : construct_frozen_set(code_length, info_length, design_snr_db)) cfg.frozen[i] = 1;
    cfg.validate();
    return cfg;
}

namespace detail {

inline void polar_transform(std::uint8_t* u, int n) {
    if (n == 1) return;
    const int half = n / 2;
    for (int i = 0; i < half; ++i) u[i] ^= u[i + half];
    polar_transform(u, half);
    polar_transform(u + half, half);
}

/// CRC over the info bits, MSB-first, polynomial fixed per width.
inline std::uint32_t crc_poly(int bits) {
    switch (bits) {
        case 8: return 0x07;
        case 16: return 0x1021;
        case 24: return 0x864CFB;
    }
    throw std::invalid_argument("supported CRC widths: 8, 16, 24");
}

inline std::uint32_t crc_compute(const Bits& payload, int crc_bits) {
    const std::uint32_t poly = crc_poly(crc_bits);
    const std::uint32_t top = 1u << (crc_bits - 1);
    const std::uint32_t mask = (crc_bits == 32) ? 0xFFFFFFFFu : ((1u << crc_bits) - 1);
    std::uint32_t reg = 0;
    for (std::uint8_t bit : payload) {
        reg ^= static_cast<std::uint32_t>(bit) << (crc_bits - 1);
        reg = (reg & top) ? ((reg << 1) ^ poly) : (reg << 1);
        reg &= mask;
    }
    return reg;
}

inline double boxplus(double a, double b) {
    const double sgn = ((a < 0) != (b < 0)) ? -1.0 : 1.0;
    const double mag = std::min(std::abs(a), std::abs(b));
    const double corr = std::log1p(std::exp(-std::abs(a + b))) - std::log1p(std::exp(-std::abs(a - b)));
    return sgn * mag + corr;
}

/// Path-metric penalty for deciding bit u against LLR lambda (exact form).
inline double pm_penalty(double lambda, int u) {
    const double q = (u ? -lambda : lambda);
    if (q > 35.0) return 0.0;
    if (q < -35.0) return -q;
    return std::log1p(std::exp(-q));
}

struct SclPath {
    std::vector<std::vector<double>> alpha;   // alpha[d]: LLRs entering depth d
    std::vector<std::vector<std::uint8_t>> cleft;  // left-child codeword per depth
    std::vector<std::vector<std::uint8_t>> cword;  // this-node codeword per depth
    Bits u;
    double pm = 0.0;
};

class SclDecoder {
  public:
    SclDecoder(const PolarCodeConfig& cfg, const std::vector<double>& llrs) : cfg_(cfg) {
        const int n = cfg.code_length;
        levels_ = 0;
        while ((1 << levels_) < n) ++levels_;
        SclPath root;
        root.alpha.resize(levels_ + 1);
        root.cleft.resize(levels_ + 1);
        root.cword.resize(levels_ + 1);
        for (int d = 0; d <= levels_; ++d) {
            root.alpha[d].resize(n >> d);
            root.cword[d].resize(n >> d);
            root.cleft[d].resize(std::max(1, n >> (d + 1)));
        }
        root.alpha[0] = llrs;
        root.u.assign(n, 0);
        paths_.push_back(std::move(root));
    }

    void run() { node(0, 0, cfg_.code_length); }

    std::vector<SclPath>& paths() { return paths_; }

  private:
    void node(int depth, int lo, int len) {
        if (len == 1) {
            leaf(lo, depth);
            return;
        }
        const int half = len / 2;
        for (auto& p : paths_)
            for (int i = 0; i < half; ++i)
                p.alpha[depth + 1][i] = boxplus(p.alpha[depth][i], p.alpha[depth][i + half]);
        node(depth + 1, lo, half);
        for (auto& p : paths_) {
            std::memcpy(p.cleft[depth].data(), p.cword[depth + 1].data(), half);
            for (int i = 0; i < half; ++i) {
                const double sign = p.cleft[depth][i] ? -1.0 : 1.0;
                p.alpha[depth + 1][i] = p.alpha[depth][i + half] + sign * p.alpha[depth][i];
            }
        }
        node(depth + 1, lo + half, half);
        for (auto& p : paths_) {
            for (int i = 0; i < half; ++i) {
                p.cword[depth][i] = p.cleft[depth][i] ^ p.cword[depth + 1][i];
                p.cword[depth][i + half] = p.cword[depth + 1][i];
            }
        }
    }

    void leaf(int idx, int depth) {
        if (cfg_.frozen[idx]) {
            for (auto& p : paths_) {
                p.pm += pm_penalty(p.alpha[depth][0], 0);
                p.u[idx] = 0;
                p.cword[depth][0] = 0;
            }
            return;
        }
        struct Cand {
            std::size_t path;
            int bit;
            double pm;
        };
        std::vector<Cand> cands;
        cands.reserve(paths_.size() * 2);
        for (std::size_t i = 0; i < paths_.size(); ++i) {
            const double a = paths_[i].alpha[depth][0];
            cands.push_back({i, 0, paths_[i].pm + pm_penalty(a, 0)});
            cands.push_back({i, 1, paths_[i].pm + pm_penalty(a, 1)});
        }
        const std::size_t keep = std::min<std::size_t>(cfg_.list_size, cands.size());
        std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.pm < b.pm; });
        cands.resize(keep);

        std::vector<SclPath> next;
        next.reserve(keep);
        std::vector<int> used(paths_.size(), 0);
        for (const auto& c : cands) used[c.path]++;
        for (const auto& c : cands) {
            SclPath p;
            if (--used[c.path] > 0)
                p = paths_[c.path];
            else
                p = std::move(paths_[c.path]);
            p.pm = c.pm;
            p.u[idx] = static_cast<std::uint8_t>(c.bit);
            p.cword[depth][0] = static_cast<std::uint8_t>(c.bit);
            next.push_back(std::move(p));
        }
        paths_.swap(next);
    }

    const PolarCodeConfig& cfg_;
    int levels_ = 0;
    std::vector<SclPath> paths_;
};

}  // namespace detail

/// Encoder: info bits fill the non-frozen slots in ascending index order,
/// frozen slots are zero, then the Kronecker-power transform is applied.
inline Bits polar_encode(const Bits& info, const PolarCodeConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(info.size()) != cfg.info_length)
        throw std::invalid_argument("polar_encode: info length mismatch");
    Bits u(cfg.code_length, 0);
    std::size_t next = 0;
    for (int i = 0; i < cfg.code_length; ++i)
        if (!cfg.frozen[i]) u[i] = info[next++];
    detail::polar_transform(u.data(), cfg.code_length);
    return u;
}

struct PolarDecodeResult {
    Bits info;
    bool ok = false;
    double path_metric = 0.0;
};

/// SCL decode. With CRC enabled the CRC selects the path; otherwise `ok`
/// reports whether the chosen codeword agrees with the LLR hard decisions.
inline PolarDecodeResult polar_decode_scl(const std::vector<double>& llrs, const PolarCodeConfig& cfg) {
    cfg.validate();
    if (static_cast<int>(llrs.size()) != cfg.code_length)
        throw std::invalid_argument("polar_decode_scl: llr length mismatch");
    detail::SclDecoder dec(cfg, llrs);
    dec.run();
    auto& paths = dec.paths();

    auto extract_info = [&](const detail::SclPath& p) {
        Bits info;
        info.reserve(cfg.info_length);
        for (int i = 0; i < cfg.code_length; ++i)
            if (!cfg.frozen[i]) info.push_back(p.u[i]);
        return info;
    };

    PolarDecodeResult res;
    const detail::SclPath* chosen = &paths.front();
    if (cfg.crc_bits > 0) {
        bool found = false;
        for (const auto& p : paths) {
            Bits info = extract_info(p);
            Bits payload(info.begin(), info.end() - cfg.crc_bits);
            std::uint32_t want = 0;
            for (int i = 0; i < cfg.crc_bits; ++i)
                want = (want << 1) | info[info.size() - cfg.crc_bits + i];
            if (detail::crc_compute(payload, cfg.crc_bits) == want) {
                chosen = &p;
                found = true;
                break;
            }
        }
        res.ok = found;
    } else {
        // consistency check: re-encoded codeword matches the hard decisions
        res.ok = true;
        for (int i = 0; i < cfg.code_length; ++i) {
            const std::uint8_t hard = llrs[i] < 0.0 ? 1 : 0;
            if (llrs[i] != 0.0 && chosen->cword[0][i] != hard) {
                res.ok = false;
                break;
            }
        }
    }
    res.info = extract_info(*chosen);
    res.path_metric = chosen->pm;
    return res;
}

/// Payload + appended CRC, sized for a CRC-aided config.
inline Bits attach_crc(const Bits& payload, int crc_bits) {
    Bits out = payload;
    const std::uint32_t crc = detail::crc_compute(payload, crc_bits);
    for (int i = crc_bits - 1; i >= 0; --i) out.push_back((crc >> i) & 1);
    return out;
}

}  // namespace rsma::phy
