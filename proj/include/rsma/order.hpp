#pragma once

#include <numeric>

#include "rsma/channel.hpp"

namespace rsma {

enum class SymbolPart { FirstSplit, SecondSplit, Whole };

inline const char* to_string(SymbolPart p) {
    switch (p) {
        case SymbolPart::FirstSplit: return "first-split";
        case SymbolPart::SecondSplit: return "second-split";
        case SymbolPart::Whole: return "whole";
    }
    return "?";
}

/// Identifies one symbol vector: which user it belongs to and which part.
struct SymbolVectorId {
    int user = 0;  // 1-based
    SymbolPart part = SymbolPart::Whole;
    bool operator==(const SymbolVectorId&) const = default;
};

/// SIC decoding order pi over the M = 2|J|+|U| symbol vectors.
struct DecodingOrder {
    std::vector<SymbolVectorId> entries;

    int size() const { return static_cast<int>(entries.size()); }
    const SymbolVectorId& at(int pos_1based) const { return entries.at(pos_1based - 1); }
    int user_at(int pos_1based) const { return at(pos_1based).user; }

    /// Position (1-based) of (user, part); 0 if absent.
    int position_of(int user, SymbolPart part) const {
        for (int m = 1; m <= size(); ++m)
            if (entries[m - 1].user == user && entries[m - 1].part == part) return m;
        return 0;
    }
};

/// Position m in the order plus the stream index a within that symbol vector.
struct StreamAddress {
    int position = 1;  // 1..M
    int stream = 1;    // 1..L
};

/// Heuristic order: split users' first parts by descending ||H||_F, then the
/// non-splitting users by descending ||H||_F, then the second parts mirroring
/// the first block. Ties break toward the lower user index.
inline DecodingOrder compute_decoding_order(const ChannelRealization& ch, const SystemConfig& cfg) {
    auto sorted_desc = [&](const std::vector<int>& users) {
        std::vector<int> v = users;
        std::stable_sort(v.begin(), v.end(), [&](int a, int b) {
            double na = ch.of_user(a).norm(), nb = ch.of_user(b).norm();
            if (na != nb) return na > nb;
            return a < b;
        });
        return v;
    };
    std::vector<int> splitters(cfg.split_set.begin(), cfg.split_set.end());
    std::vector<int> whole;
    for (int k = 1; k <= cfg.K; ++k)
        if (!cfg.split_set.count(k)) whole.push_back(k);
    splitters = sorted_desc(splitters);
    whole = sorted_desc(whole);

    DecodingOrder order;
    order.entries.reserve(cfg.symbol_vector_count());
    for (int j : splitters) order.entries.push_back({j, SymbolPart::FirstSplit});
    for (int u : whole) order.entries.push_back({u, SymbolPart::Whole});
    for (int j : splitters) order.entries.push_back({j, SymbolPart::SecondSplit});
    return order;
}

/// All M! permutations of the symbol vectors (test oracle; block structure not
/// enforced). Rejects M > 6.
inline std::vector<DecodingOrder> enumerate_decoding_orders(const SystemConfig& cfg) {
    const int m = cfg.symbol_vector_count();
    if (m > 6) throw std::invalid_argument("enumerate_decoding_orders: M > 6");
    std::vector<SymbolVectorId> base;
    for (int j : cfg.split_set) base.push_back({j, SymbolPart::FirstSplit});
    for (int k = 1; k <= cfg.K; ++k)
        if (!cfg.split_set.count(k)) base.push_back({k, SymbolPart::Whole});
    for (int j : cfg.split_set) base.push_back({j, SymbolPart::SecondSplit});

    std::vector<int> idx(base.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<DecodingOrder> out;
    do {
        DecodingOrder o;
        for (int i : idx) o.entries.push_back(base[i]);
        out.push_back(std::move(o));
    } while (std::next_permutation(idx.begin(), idx.end()));
    return out;
}

}  // namespace rsma
