#include <catch2/catch_amalgamated.hpp>

#include "rsma/channel.hpp"
#include "rsma/order.hpp"

using namespace rsma;

static SystemConfig make_cfg(int K, int Nt, int Nr, Scheme scheme = Scheme::NOMA,
                             std::set<int> split = {}) {
    SystemConfig cfg;
    cfg.K = K;
    cfg.Nt = Nt;
    cfg.Nr = Nr;
    cfg.scheme = scheme;
    cfg.split_set = std::move(split);
    cfg.validate();
    return cfg;
}

TEST_CASE("channel generation is deterministic and correctly shaped") {
    auto cfg = make_cfg(2, 2, 2);
    auto a = generate_rayleigh_channels(cfg, 7);
    auto b = generate_rayleigh_channels(cfg, 7);
    REQUIRE(a.H.size() == 2);
    for (int k = 0; k < 2; ++k) {
        REQUIRE(a.H[k].rows() == 2);
        REQUIRE(a.H[k].cols() == 2);
        REQUIRE(a.H[k] == b.H[k]);
    }
    auto c = generate_rayleigh_channels(cfg, 8);
    REQUIRE(a.H[0] != c.H[0]);

    auto cfg3 = make_cfg(3, 2, 4);
    auto ch3 = generate_rayleigh_channels(cfg3, 1);
    REQUIRE(ch3.H.size() == 3);
    for (const auto& H : ch3.H) {
        REQUIRE(H.rows() == 4);
        REQUIRE(H.cols() == 2);
        REQUIRE(H.allFinite());
    }
}

TEST_CASE("channel entries have unit variance (Monte Carlo)") {
    auto cfg = make_cfg(1, 1, 1);
    double acc = 0.0;
    const int n = 1000000;
    for (int s = 0; s < n; ++s) acc += std::norm(generate_rayleigh_channels(cfg, s).H[0](0, 0));
    const double mean = acc / n;
    REQUIRE(mean > 0.99);
    REQUIRE(mean < 1.01);
}

TEST_CASE("channel json round trip") {
    auto cfg = make_cfg(2, 2, 3);
    auto ch = generate_rayleigh_channels(cfg, 42);
    auto back = channel_from_json(to_json(ch));
    REQUIRE(back.seed == 42);
    for (int k = 0; k < 2; ++k) REQUIRE(back.H[k] == ch.H[k]);
}

TEST_CASE("decoding order: one splitting user sandwich") {
    auto cfg = make_cfg(2, 1, 1, Scheme::RSMA, {1});
    auto ch = generate_rayleigh_channels(cfg, 3);
    auto order = compute_decoding_order(ch, cfg);
    REQUIRE(order.size() == 3);
    CHECK(order.entries[0] == SymbolVectorId{1, SymbolPart::FirstSplit});
    CHECK(order.entries[1] == SymbolVectorId{2, SymbolPart::Whole});
    CHECK(order.entries[2] == SymbolVectorId{1, SymbolPart::SecondSplit});
    // second split sits at position l + K
    CHECK(order.position_of(1, SymbolPart::SecondSplit) == 1 + cfg.K);
}

TEST_CASE("decoding order: NOMA descending channel gain") {
    auto cfg = make_cfg(3, 2, 2);
    ChannelRealization ch;
    ch.H = {MatC::Identity(2, 2) * 3.0, MatC::Identity(2, 2) * 2.0, MatC::Identity(2, 2) * 1.0};
    auto order = compute_decoding_order(ch, cfg);
    REQUIRE(order.size() == 3);
    for (int m = 1; m <= 3; ++m) {
        CHECK(order.user_at(m) == m);
        CHECK(order.at(m).part == SymbolPart::Whole);
    }
}

TEST_CASE("decoding order: two splitting users sorted by norm") {
    auto cfg = make_cfg(2, 2, 2, Scheme::RSMA, {1, 2});
    ChannelRealization ch;
    ch.H = {MatC::Identity(2, 2) * 1.0, MatC::Identity(2, 2) * 5.0};  // ||H2|| > ||H1||
    auto order = compute_decoding_order(ch, cfg);
    REQUIRE(order.size() == 4);
    CHECK(order.entries[0] == SymbolVectorId{2, SymbolPart::FirstSplit});
    CHECK(order.entries[1] == SymbolVectorId{1, SymbolPart::FirstSplit});
    CHECK(order.entries[2] == SymbolVectorId{2, SymbolPart::SecondSplit});
    CHECK(order.entries[3] == SymbolVectorId{1, SymbolPart::SecondSplit});
}

TEST_CASE("decoding order ties break toward the lower user index") {
    auto cfg = make_cfg(2, 2, 2);
    ChannelRealization ch;
    ch.H = {MatC::Identity(2, 2), MatC::Identity(2, 2)};
    auto order = compute_decoding_order(ch, cfg);
    CHECK(order.user_at(1) == 1);
    CHECK(order.user_at(2) == 2);
}

TEST_CASE("decoding order is invariant to user relabeling up to the sort") {
    auto cfg = make_cfg(4, 2, 2);
    auto ch = generate_rayleigh_channels(cfg, 11);
    auto order = compute_decoding_order(ch, cfg);
    // permute users, recompute, map back
    ChannelRealization perm;
    perm.H = {ch.H[2], ch.H[0], ch.H[3], ch.H[1]};  // new user i+1 = old user map[i]
    const int map_to_old[4] = {3, 1, 4, 2};
    auto order2 = compute_decoding_order(perm, cfg);
    for (int m = 1; m <= 4; ++m) CHECK(map_to_old[order2.user_at(m) - 1] == order.user_at(m));
}

TEST_CASE("decoding order output is a permutation of the symbol vectors") {
    auto cfg = make_cfg(4, 2, 2, Scheme::RSMA, {2, 3});
    auto ch = generate_rayleigh_channels(cfg, 5);
    auto order = compute_decoding_order(ch, cfg);
    REQUIRE(order.size() == cfg.symbol_vector_count());
    for (int j : cfg.split_set) {
        CHECK(order.position_of(j, SymbolPart::FirstSplit) >= 1);
        CHECK(order.position_of(j, SymbolPart::SecondSplit) >= 1);
        CHECK(order.position_of(j, SymbolPart::Whole) == 0);
    }
    for (int k = 1; k <= 4; ++k)
        if (!cfg.split_set.count(k)) CHECK(order.position_of(k, SymbolPart::Whole) >= 1);
    // block structure: first splits, then wholes, then second splits
    int seen_whole = 0, seen_second = 0;
    for (const auto& e : order.entries) {
        if (e.part == SymbolPart::Whole) seen_whole++;
        if (e.part == SymbolPart::SecondSplit) seen_second++;
        if (e.part == SymbolPart::FirstSplit) {
            CHECK(seen_whole == 0);
            CHECK(seen_second == 0);
        }
        if (e.part == SymbolPart::Whole) CHECK(seen_second == 0);
    }
}

TEST_CASE("enumerate_decoding_orders") {
    auto cfg2 = make_cfg(2, 1, 1);
    CHECK(enumerate_decoding_orders(cfg2).size() == 2);

    auto cfg3 = make_cfg(3, 1, 1);
    auto orders = enumerate_decoding_orders(cfg3);
    CHECK(orders.size() == 6);
    for (std::size_t i = 0; i < orders.size(); ++i)
        for (std::size_t j = i + 1; j < orders.size(); ++j) REQUIRE(!(orders[i].entries == orders[j].entries));

    auto cfg_split = make_cfg(2, 1, 1, Scheme::RSMA, {1});
    auto os = enumerate_decoding_orders(cfg_split);
    CHECK(os.size() == 6);
    bool second_before_whole = false, whole_before_second = false;
    for (const auto& o : os) {
        int p2 = o.position_of(1, SymbolPart::SecondSplit), pw = o.position_of(2, SymbolPart::Whole);
        (p2 < pw ? second_before_whole : whole_before_second) = true;
    }
    CHECK(second_before_whole);
    CHECK(whole_before_second);

    auto big = make_cfg(7, 1, 1);
    CHECK_THROWS_AS(enumerate_decoding_orders(big), std::invalid_argument);
}

TEST_CASE("config validation") {
    SystemConfig cfg;
    cfg.K = 0;
    CHECK_THROWS(cfg.validate());
    cfg = SystemConfig{};
    cfg.epsilon = 1.5;
    CHECK_THROWS(cfg.validate());
    cfg = SystemConfig{};
    cfg.scheme = Scheme::SDMA;
    cfg.split_set = {1};
    CHECK_THROWS(cfg.validate());
    cfg.scheme = Scheme::RSMA;
    cfg.split_set = {3};  // K defaults to 2
    CHECK_THROWS(cfg.validate());
}
