#pragma once

#include "rsma/common.hpp"

namespace rsma::phy {

struct McsEntry {
    int order = 4;           // QAM order
    double code_rate = 0.5;  // r in (0, 1]
    double spectral_efficiency() const { return code_rate * std::log2(static_cast<double>(order)); }
};

/// Stand-in AMC table; thresholds equal the spectral efficiencies. 16QAM r=3/4
/// and 64QAM r=1/2 tie at 3.0 bits; the lower order shadows the higher one.
inline const std::vector<McsEntry>& default_mcs_table() {
    static const std::vector<McsEntry> table = {
        {4, 0.25}, {4, 0.5}, {4, 0.75}, {16, 0.5}, {16, 0.75}, {64, 0.5}, {64, 0.75}, {256, 0.75},
    };
    return table;
}

struct SelectedMcs {
    McsEntry entry;
    bool below_lowest = false;  // caller must shrink K_i to floor(S * rate)
};

/// Highest entry whose spectral efficiency fits under rate*margin. Rates below
/// the lowest entry select it with a reduced info length.
inline SelectedMcs select_mcs(double stream_rate, const std::vector<McsEntry>& table = default_mcs_table(),
                              double margin = 1.0) {
    if (table.empty()) throw std::invalid_argument("empty MCS table");
    if (!(stream_rate >= 0.0)) throw std::invalid_argument("stream rate must be >= 0");
    const double target = stream_rate * margin;
    SelectedMcs out{table.front(), true};
    double best_se = -1.0;
    for (const auto& e : table) {
        const double se = e.spectral_efficiency();
        if (se <= target && se > best_se) {
            out.entry = e;
            out.below_lowest = false;
            best_se = se;
        }
    }
    return out;
}

}  // namespace rsma::phy
