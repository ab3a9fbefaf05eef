#include <catch2/catch_amalgamated.hpp>

#include "polar_oracle.hpp"
#include "rsma/phy/lls.hpp"
#include "rsma/sca.hpp"

using namespace rsma;
using namespace rsma::phy;

namespace {

// Oracle: halves-form Bhattacharyya recursion.
std::vector<double> zvec_oracle(int n, double z) {
    if (n == 0) return {z};
    auto lo = zvec_oracle(n - 1, std::clamp(2 * z - z * z, 0.0, 1.0));
    auto hi = zvec_oracle(n - 1, z * z);
    lo.insert(lo.end(), hi.begin(), hi.end());
    return lo;
}

Bits random_bits(int n, std::mt19937_64& eng) {
    Bits b(n);
    for (auto& v : b) v = (eng() >> 33) & 1;
    return b;
}

}  // namespace

TEST_CASE("polar encode kernel and linearity") {
    PolarCodeConfig cfg;
    cfg.code_length = 2;
    cfg.info_length = 2;
    cfg.frozen = {0, 0};
    CHECK(polar_encode({1, 0}, cfg) == Bits{1, 0});
    CHECK(polar_encode({0, 1}, cfg) == Bits{1, 1});
    CHECK(polar_encode({1, 1}, cfg) == Bits{0, 1});
    CHECK(polar_encode({0, 0}, cfg) == Bits{0, 0});
}

TEST_CASE("polar encode matches the dense-matrix oracle") {
    std::mt19937_64 eng(3);
    for (int nc : {8, 64, 256}) {
        PolarCodeConfig cfg;
        cfg.code_length = nc;
        cfg.info_length = nc;
        cfg.frozen.assign(nc, 0);
        for (int t = 0; t < 20; ++t) {
            const Bits u = random_bits(nc, eng);
            CHECK(polar_encode(u, cfg) == testref::polar_encode_dense(u));
        }
    }
    // spec instance: N_c=8, K_i=4, frozen={0,1,2,4}
    PolarCodeConfig cfg;
    cfg.code_length = 8;
    cfg.info_length = 4;
    cfg.frozen = {1, 1, 1, 0, 1, 0, 0, 0};
    const Bits info{1, 0, 1, 1};
    Bits u{0, 0, 0, 1, 0, 0, 1, 1};
    CHECK(polar_encode(info, cfg) == testref::polar_encode_dense(u));
}

TEST_CASE("frozen set construction") {
    CHECK(construct_frozen_set(8, 8, 0.0).empty());

    for (double snr : {-3.0, 0.0, 5.0}) {
        auto frozen = construct_frozen_set(4, 1, snr);
        REQUIRE(frozen.size() == 3);
        CHECK(std::find(frozen.begin(), frozen.end(), 3) == frozen.end());  // best channel stays
    }

    // matches the independent recursion oracle at N=8, K=4, 0 dB
    const auto z = bhattacharyya_parameters(8, 0.0);
    const auto oracle = zvec_oracle(3, std::exp(-1.0));
    for (int i = 0; i < 8; ++i) CHECK(z[i] == Catch::Approx(oracle[i]).epsilon(1e-12));
    auto frozen = construct_frozen_set(8, 4, 0.0);
    std::vector<int> idx{0, 1, 2, 3, 4, 5, 6, 7};
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        if (oracle[a] != oracle[b]) return oracle[a] > oracle[b];
        return a < b;
    });
    std::vector<int> want(idx.begin(), idx.begin() + 4);
    std::sort(want.begin(), want.end());
    CHECK(frozen == want);
}

TEST_CASE("SCL decodes noiseless llrs exactly") {
    std::mt19937_64 eng(9);
    for (int nc : {16, 64, 256}) {
        auto cfg = make_polar_config(nc, nc / 2, 1.0, 8, 0);
        for (int t = 0; t < (nc == 256 ? 100 : 25); ++t) {
            const Bits info = random_bits(cfg.info_length, eng);
            const Bits code = polar_encode(info, cfg);
            std::vector<double> llrs(nc);
            for (int i = 0; i < nc; ++i) llrs[i] = code[i] ? -kLlrClip : kLlrClip;
            auto dec = polar_decode_scl(llrs, cfg);
            REQUIRE(dec.info == info);
            CHECK(dec.ok);
        }
    }
}

TEST_CASE("SCL with list 1 equals the SC oracle bitwise") {
    std::mt19937_64 eng(17);
    auto cfg = make_polar_config(128, 64, 0.0, 1, 0);
    for (int t = 0; t < 300; ++t) {
        std::vector<double> llrs(cfg.code_length);
        for (auto& l : llrs) l = 8.0 * (uniform53(eng) - 0.5);  // arbitrary noisy llrs
        auto dec = polar_decode_scl(llrs, cfg);
        REQUIRE(dec.info == testref::sc_decode_info(llrs, cfg));
    }
}

TEST_CASE("CRC-aided SCL flags corrupted frames") {
    auto cfg = make_polar_config(128, 64, 0.0, 8, 16);
    std::mt19937_64 eng(23);
    const Bits payload = random_bits(cfg.info_length - cfg.crc_bits, eng);
    const Bits info = attach_crc(payload, cfg.crc_bits);
    const Bits code = polar_encode(info, cfg);
    std::vector<double> llrs(cfg.code_length);
    for (int i = 0; i < cfg.code_length; ++i) llrs[i] = code[i] ? -kLlrClip : kLlrClip;
    auto dec = polar_decode_scl(llrs, cfg);
    CHECK(dec.ok);
    CHECK(dec.info == info);
    for (auto& l : llrs) l = 0.1 * (uniform53(eng) - 0.5);  // garbage channel
    CHECK_FALSE(polar_decode_scl(llrs, cfg).ok);
}

TEST_CASE("polar BLER improves with SNR (BPSK quick check)") {
    auto cfg = make_polar_config(256, 128, 2.0, 8, 0);
    auto bler = [&](double esn0_db, int frames) {
        std::mt19937_64 eng(4242);
        const double sigma = std::sqrt(1.0 / db_to_linear(esn0_db));
        int errors = 0;
        for (int t = 0; t < frames; ++t) {
            const Bits info = random_bits(cfg.info_length, eng);
            const Bits code = polar_encode(info, cfg);
            std::vector<double> llrs(cfg.code_length);
            for (int i = 0; i < cfg.code_length; ++i) {
                auto [x, y] = rsma::detail::normal_pair(eng);
                (void)y;
                const double rx = (code[i] ? -1.0 : 1.0) + sigma * x;
                llrs[i] = 2.0 * rx / (sigma * sigma);
            }
            if (polar_decode_scl(llrs, cfg).info != info) ++errors;
        }
        return static_cast<double>(errors) / frames;
    };
    const double b2 = bler(2.0, 400), b4 = bler(4.0, 400);
    CHECK(b4 < b2);
    CHECK(b2 > 0.0);   // operating below threshold at 2 dB
    CHECK(b4 < 0.05);  // comfortably decodable at 4 dB
}

TEST_CASE("gray qam tables") {
    for (int order : {4, 16, 64, 256}) {
        const auto table = qam_gray_table(order);
        double energy = 0.0;
        for (auto s : table) energy += std::norm(s);
        CHECK(energy / order == Catch::Approx(1.0).margin(1e-12));

        // per-axis gray labels: physically adjacent levels differ in one bit
        const int m = bits_per_symbol(order) / 2;
        const int levels = 1 << m;
        for (int v = 0; v < levels; ++v)
            for (int w = v + 1; w < levels; ++w) {
                const int pos_v = static_cast<int>(gray_to_binary(v));
                const int pos_w = static_cast<int>(gray_to_binary(w));
                if (std::abs(pos_v - pos_w) == 1) CHECK(__builtin_popcount(v ^ w) == 1);
            }
    }
    CHECK(qam_map({0, 0}, 4)[0] == cxd(1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0)));
    CHECK_THROWS(qam_map({0, 0, 1}, 4));
    CHECK_THROWS(bits_per_symbol(32));
}

TEST_CASE("llr demapper signs and symmetry") {
    const auto table = qam_gray_table(4);
    const double gamma = 100.0;
    const double phi = gamma / (1.0 + gamma);

    // received exactly at the bits-00 symbol: both llrs strongly positive
    auto llrs = qam_llrs({phi * table[0]}, gamma, 4);
    CHECK(llrs[0] == kLlrClip);
    CHECK(llrs[1] == kLlrClip);

    // gamma = 0 gives all-zero llrs
    auto zeros = qam_llrs({table[0]}, 0.0, 4);
    CHECK(zeros[0] == 0.0);
    CHECK(zeros[1] == 0.0);

    // negating the received symbol flips both bit llrs (4-QAM symmetry)
    const cxd z = phi * cxd(0.4, -0.9);
    auto a = qam_llrs({z}, 3.0, 4);
    auto b = qam_llrs({-z}, 3.0, 4);
    CHECK(a[0] == Catch::Approx(-b[0]).margin(1e-12));
    CHECK(a[1] == Catch::Approx(-b[1]).margin(1e-12));
}

TEST_CASE("interleaver round trip and statistics") {
    std::mt19937_64 eng(31);
    for (int t = 0; t < 50; ++t) {
        const int n = 1 + static_cast<int>(eng() % 512);
        const std::uint64_t seed = eng();
        Bits data = random_bits(n, eng);
        CHECK(deinterleave(interleave(data, seed), seed) == data);
    }
    CHECK(interleaver_permutation(64, 5) == interleaver_permutation(64, 5));
    CHECK(interleaver_permutation(64, 5) != interleaver_permutation(64, 6));

    // fixed points across seeds behave like Poisson(1) per permutation
    long long fixed = 0;
    const int seeds = 1000, n = 128;
    for (int s = 0; s < seeds; ++s) {
        const auto perm = interleaver_permutation(n, 1000 + s);
        for (int i = 0; i < n; ++i) fixed += perm[i] == static_cast<std::uint32_t>(i);
    }
    CHECK(fixed > seeds - 3 * std::sqrt(static_cast<double>(seeds)));
    CHECK(fixed < seeds + 3 * std::sqrt(static_cast<double>(seeds)));
}

TEST_CASE("mcs selection") {
    const auto& table = default_mcs_table();
    auto low = select_mcs(0.0, table);
    CHECK(low.below_lowest);
    CHECK(low.entry.order == 4);
    CHECK(low.entry.code_rate == 0.25);

    std::vector<McsEntry> mini = {{4, 0.5}, {4, 0.75}, {16, 0.5}};
    auto pick = select_mcs(1.9, mini);
    CHECK_FALSE(pick.below_lowest);
    CHECK(pick.entry.order == 4);
    CHECK(pick.entry.code_rate == 0.75);

    auto top = select_mcs(10.0, table);
    CHECK(top.entry.order == 256);
    CHECK(top.entry.code_rate == 0.75);

    // the 3.0 bits/use tie resolves to the lower order
    auto tie = select_mcs(3.5, table);
    CHECK(tie.entry.order == 16);
    CHECK(tie.entry.code_rate == 0.75);

    // AMC never selects above the rate
    for (double r : {0.3, 0.9, 1.2, 2.7, 4.0, 5.0, 7.0}) {
        auto sel = select_mcs(r, table);
        if (!sel.below_lowest) CHECK(sel.entry.spectral_efficiency() <= r);
    }
}

TEST_CASE("stream codec shortening keeps the transmitted tail zero") {
    LlsOptions opt;
    opt.channel_uses = 256;
    // 64QAM: 1536 tx bits inside a 2048 code
    auto sc = build_stream_codec(4.5, db_to_linear(18.0), opt, 7);
    CHECK(sc.mcs.order == 64);
    CHECK(sc.tx_bits == 1536);
    CHECK(sc.polar.code_length == 2048);
    std::mt19937_64 eng(77);
    const Bits info = random_bits(sc.info_bits, eng);
    const Bits code = polar_encode(info, sc.polar);
    for (int i = sc.tx_bits; i < sc.polar.code_length; ++i) CHECK(code[i] == 0);
}

TEST_CASE("noiseless end-to-end identity and throughput bound") {
    SystemConfig cfg;
    cfg.K = 2;
    cfg.Nt = 2;
    cfg.Nr = 4;
    cfg.Pt = db_to_linear(20.0);
    cfg.scheme = Scheme::RSMA;
    cfg.split_set = {1};
    cfg.validate();
    auto fbl = FblParams::make(256, 1e-5);
    auto ch = generate_rayleigh_channels(cfg, 2024);
    auto res = solve_mmf(ch, cfg, fbl);
    auto order = compute_decoding_order(ch, cfg);

    LlsOptions opt;
    auto design = make_lls_design(ch, res.best_state.P, res.best_state.G, order, cfg, fbl, opt, 5);
    auto frame = transmit_frame(design, 1);
    auto Y = apply_channel(design, ch, frame, 0.0, 0);
    auto fr = mmse_sic_receive(Y, ch, design, frame);
    long long total = 0;
    for (int m = 1; m <= order.size(); ++m)
        for (int a = 1; a <= cfg.streams_per_user(); ++a) {
            INFO("stream " << m << "," << a);
            CHECK(fr.success[m - 1][a - 1]);
            total += design.codecs[m - 1][a - 1].info_bits;
        }
    CHECK(fr.sic_abort_position == 0);
    long long rec = 0;
    for (auto d : fr.recovered_bits) rec += d;
    CHECK(rec == total);

    // throughput bound: recovered bits per user never exceed S * user rate
    auto rep = user_rates(ch, res.best_state.P, res.best_state.G, order, cfg, fbl);
    for (int k = 0; k < cfg.K; ++k)
        CHECK(static_cast<double>(fr.recovered_bits[k]) <= opt.channel_uses * rep.per_user[k] + 1e-9);
}

TEST_CASE("SIC failure at stage 1 poisons the chain") {
    SystemConfig cfg;
    cfg.K = 2;
    cfg.Nt = 1;
    cfg.Nr = 1;
    cfg.Pt = db_to_linear(15.0);
    cfg.scheme = Scheme::NOMA;
    cfg.validate();
    auto fbl = FblParams::make(256, 1e-5);
    auto ch = generate_rayleigh_channels(cfg, 3);
    auto res = solve_mmf(ch, cfg, fbl);
    auto order = compute_decoding_order(ch, cfg);
    LlsOptions opt;
    auto design = make_lls_design(ch, res.best_state.P, res.best_state.G, order, cfg, fbl, opt, 5);
    auto frame = transmit_frame(design, 11);
    REQUIRE(design.codecs[0][0].info_bits > 0);
    // an all-zero received block cannot match the transmitted info bits
    MatC Y = MatC::Zero(cfg.Nr, opt.channel_uses);
    auto fr = mmse_sic_receive(Y, ch, design, frame);
    CHECK_FALSE(fr.success[0][0]);
    CHECK(fr.sic_abort_position == 1);
    for (int m = 2; m <= order.size(); ++m) CHECK_FALSE(fr.success[m - 1][0]);
    CHECK(fr.recovered_bits[order.user_at(2) - 1] == 0);
}

TEST_CASE("max_min_throughput arithmetic") {
    FrameResult a;
    a.recovered_bits = {128, 128};
    a.channel_uses = 256;
    CHECK(max_min_throughput({a}) == Catch::Approx(0.5));

    FrameResult fail = a;
    fail.recovered_bits = {128, 0};
    CHECK(max_min_throughput({fail}) == 0.0);

    FrameResult r1, r2, r3;
    r1.recovered_bits = {100, 200};
    r2.recovered_bits = {0, 50};
    r3.recovered_bits = {50, 60};
    r1.channel_uses = r2.channel_uses = r3.channel_uses = 256;
    CHECK(max_min_throughput({r1, r2, r3}) == Catch::Approx(150.0 / 768.0));
    CHECK_THROWS(max_min_throughput({}));
}
