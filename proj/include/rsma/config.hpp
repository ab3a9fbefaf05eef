#pragma once

#include <algorithm>
#include <set>
#include <string>

#include "rsma/common.hpp"

namespace rsma {

enum class Scheme { RSMA, NOMA, SDMA };

inline const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::RSMA: return "RSMA";
        case Scheme::NOMA: return "NOMA";
        case Scheme::SDMA: return "SDMA";
    }
    return "?";
}

inline Scheme scheme_from_string(const std::string& s) {
    if (s == "RSMA" || s == "rsma") return Scheme::RSMA;
    if (s == "NOMA" || s == "noma") return Scheme::NOMA;
    if (s == "SDMA" || s == "sdma") return Scheme::SDMA;
    throw std::invalid_argument("unknown scheme: " + s);
}

/// System dimensions and operating point. Users are indexed 1..K.
/// Pt is linear; with sigma2 = 1 it equals the transmit SNR.
struct SystemConfig {
    int K = 2;
    int Nt = 2;
    int Nr = 2;
    double Pt = 100.0;
    double sigma2 = 1.0;
    int N = 500;              // blocklength in channel uses
    double epsilon = 1e-5;    // target block error probability
    Scheme scheme = Scheme::RSMA;
    std::set<int> split_set;  // J, subset of {1..K}; RSMA only
    bool noise_norm_squared = false;  // use ||g||^2*sigma2 instead of ||g||*sigma2

    int streams_per_user() const { return std::min(Nt, Nr); }
    /// Number of symbol vectors M = 2|J| + |U|.
    int symbol_vector_count() const { return K + static_cast<int>(split_set.size()); }

    void validate() const {
        if (K < 1) throw std::invalid_argument("K >= 1 required");
        if (Nt < 1 || Nr < 1) throw std::invalid_argument("Nt,Nr >= 1 required");
        if (!(Pt > 0)) throw std::invalid_argument("Pt > 0 required");
        if (!(sigma2 > 0)) throw std::invalid_argument("sigma2 > 0 required");
        if (N < 1) throw std::invalid_argument("N >= 1 required");
        if (!(epsilon > 0 && epsilon < 1)) throw std::invalid_argument("epsilon in (0,1) required");
        for (int j : split_set)
            if (j < 1 || j > K) throw std::invalid_argument("split_set must be a subset of {1..K}");
        if (scheme != Scheme::RSMA && !split_set.empty())
            throw std::invalid_argument(std::string(to_string(scheme)) + " requires an empty split set");
    }
};

}  // namespace rsma
