#pragma once

#include <optional>

#include "rsma/conic/solver.hpp"
#include "rsma/rates.hpp"

// Alternating optimization of precoders and combiners. Each step maximizes the
// slack objective t over a convex surrogate: the dispersion terms are replaced
// by tangents at the previous iterate and the SINR numerators by their
// first-order expansions, giving exp-cone + SOC programs for the embedded
// interior-point solver.
//
// Subproblems are built with the scale-invariant noise convention sigma2*||g||^2
// and every combiner row of a returned state is unit-normalized (zero rows are
// snapped to the channel's dominant left singular direction), which makes the
// ||g||*sigma2 form printed in the rate engine coincide with it exactly.

namespace rsma {

/// One AO iterate: precoders, combiners, slack SINRs and the surrogate
/// objective t of the subproblem that produced it.
struct DesignState {
    PrecoderSet P;
    CombinerSet G;
    std::vector<std::vector<double>> rho;  // [m][a], 0-based
    double t = 0.0;
    int iteration = 0;
};

/// Tangent of sqrt(V) at the (floored) expansion point, per stream.
struct DispersionTangent {
    std::vector<std::vector<double>> value;   // sqrt(V(rho_e))
    std::vector<std::vector<double>> slope;   // d sqrt(V)/d rho at rho_e
    std::vector<std::vector<double>> anchor;  // rho_e = max(rho, floor)
};

inline constexpr double kRhoAnchorFloor = 1e-6;

/// First-order expansion of the dispersion square root at rho_prev, with the
/// expansion point floored at 1e-6 to keep the slope finite.
inline DispersionTangent linearize_dispersion(const std::vector<std::vector<double>>& rho_prev) {
    DispersionTangent t;
    t.value.resize(rho_prev.size());
    t.slope.resize(rho_prev.size());
    t.anchor.resize(rho_prev.size());
    for (std::size_t m = 0; m < rho_prev.size(); ++m) {
        for (double r : rho_prev[m]) {
            const double re = std::max(r, kRhoAnchorFloor);
            t.anchor[m].push_back(re);
            t.value[m].push_back(sqrt_dispersion(re));
            t.slope[m].push_back(sqrt_dispersion_slope(re));
        }
    }
    return t;
}

enum class InitStrategy { SvdMmse, NomaWarmStart, Given };

struct AoSettings {
    double tau = 1e-4;
    int max_outer_iters = 100;
    conic::SolverSettings solver;
    InitStrategy init_strategy = InitStrategy::SvdMmse;
    const DesignState* given_state = nullptr;  // for InitStrategy::Given
    bool record_trace = true;

    AoSettings() { solver.tol = 1e-8; }
};

/// Maps structural variables into the solver vector. Auxiliary per-stream
/// rate variables (y = log2(1+rho) hypographs) live after the structural block.
struct SubproblemLayout {
    int M = 0, L = 0, block = 0;  // block = 2*Nt (precoder) or 2*Nr (combiner)
    int rho0 = 0, t_idx = 0, y0 = 0, n_total = 0;

    int vec0(int m_1b, int a_1b) const { return ((m_1b - 1) * L + (a_1b - 1)) * block; }
    int rho_idx(int m_1b, int a_1b) const { return rho0 + (m_1b - 1) * L + (a_1b - 1); }
    int y_idx(int m_1b, int a_1b) const { return y0 + (m_1b - 1) * L + (a_1b - 1); }
    int n_structural() const { return M * L * block + M * L + 1; }
};

namespace detail {

/// Surrogate objective of a state: min over users of the unclamped rate with
/// the dispersion replaced by its floored tangent, i.e. exactly what the
/// subproblems score. For rho >= the anchor floor this equals the plain
/// log2(1+rho) - beta*sqrt(V) value; below the floor the tangent charge keeps
/// the AO trace consistent with the first subproblem.
inline double surrogate_objective(const std::vector<std::vector<double>>& rho,
                                  const DecodingOrder& order, const SystemConfig& cfg,
                                  const FblParams& fbl) {
    const int L = cfg.streams_per_user();
    const double beta = fbl.penalty_scale();
    const auto tan = linearize_dispersion(rho);
    std::vector<double> user_rate(cfg.K, 0.0);
    for (int m = 1; m <= order.size(); ++m)
        for (int a = 0; a < L; ++a) {
            const double r = rho[m - 1][a];
            const double phi =
                tan.value[m - 1][a] + tan.slope[m - 1][a] * (r - tan.anchor[m - 1][a]);
            user_rate[order.user_at(m) - 1] += std::log2(1.0 + r) - beta * phi;
        }
    return *std::min_element(user_rate.begin(), user_rate.end());
}

/// Dominant right/left singular directions of H, used to snap dead streams.
inline VecC top_right_singular(const MatC& H) {
    Eigen::JacobiSVD<MatC> svd(H, Eigen::ComputeThinV);
    return svd.matrixV().col(0);
}
inline VecC top_left_singular(const MatC& H) {
    Eigen::JacobiSVD<MatC> svd(H, Eigen::ComputeThinU);
    return svd.matrixU().col(0);
}

/// Degenerate streams break the linearized SINR constraints: a zero combiner
/// row makes them vacuous (rho unbounded) and a near-zero precoder column
/// makes the incumbent infeasible, since the linearization demands the
/// expanded signal term cover interference plus noise even at rho = 0. Rows
/// are unit-normalized (dominant left singular direction if degenerate) and
/// dead columns are re-pointed along the combiner's effective channel with
/// just enough power to sit at ~1.3x the tangent anchor floor, which keeps
/// the incumbent feasible in the next subproblem.
inline void regularize_state(DesignState& st, const ChannelRealization& ch, const DecodingOrder& order,
                             const SystemConfig& cfg) {
    const int M = order.size();
    const int L = cfg.streams_per_user();
    for (int m = 1; m <= M; ++m) {
        const MatC& H = ch.of_user(order.user_at(m));
        const double smax = H.norm();
        for (int a = 0; a < L; ++a) {
            RowC g = st.G.at(m).row(a);
            const double gn = g.norm();
            if (gn < 1e-9 || (g * H).norm() < 1e-4 * gn * smax)
                st.G.at(m).row(a) = top_left_singular(H).adjoint();
            else
                st.G.at(m).row(a) = g / gn;
        }
    }
    for (int m = 1; m <= M; ++m) {
        const MatC& H = ch.of_user(order.user_at(m));
        const double smax = H.norm();
        for (int a = 1; a <= L; ++a) {
            const RowC g = st.G.at(m).row(a - 1);
            double denom = cfg.sigma2;  // unit rows: both noise conventions agree
            for (const auto& s : interference_set(m, a, M, L, cfg.scheme))
                denom += std::norm((g * ch.of_user(order.user_at(s.position)) * st.P.at(s.position).col(s.stream - 1)).value());
            const double signal = std::norm((g * H * st.P.at(m).col(a - 1)).value());
            // 0.5*floor*denom is the fixed point of the linearization's forced
            // power for a dead stream; snapping just above it keeps successive
            // subproblems stationary instead of oscillating
            if (signal >= 0.5 * kRhoAnchorFloor * denom) continue;
            const RowC eff = g * H;  // align the snap with the combiner's view
            const double q = eff.norm();
            if (q < 1e-12 * std::max(1.0, smax)) continue;
            const double delta = std::sqrt(0.525 * kRhoAnchorFloor * denom) / q;
            st.P.at(m).col(a - 1) = delta * eff.adjoint() / q;
        }
    }
}

/// Realified coefficient rows of the complex form c = sum_j coeff_j * v_j over
/// the variable block [Re v; Im v] starting at col0.
template <typename RowA, typename RowB>
inline void add_complex_rows(RowA&& re_row, RowB&& im_row, const RowC& coeff, int col0) {
    const int d = static_cast<int>(coeff.size());
    for (int j = 0; j < d; ++j) {
        re_row(col0 + j) += coeff[j].real();
        re_row(col0 + d + j) += -coeff[j].imag();
        im_row(col0 + j) += coeff[j].imag();
        im_row(col0 + d + j) += coeff[j].real();
    }
}

struct RateGroups {
    std::vector<std::vector<int>> positions;  // per user (1-based positions)
};

inline RateGroups rate_groups(const DecodingOrder& order, const SystemConfig& cfg) {
    RateGroups g;
    g.positions.resize(cfg.K);
    for (int m = 1; m <= order.size(); ++m) g.positions[order.user_at(m) - 1].push_back(m);
    return g;
}

/// Shared tail of both builders: exp-cone hypographs y <= log2(1+rho), the
/// per-user rate rows, and rho >= 0.
inline void append_rate_constraints(conic::ConicProgram& prog, const SubproblemLayout& lay,
                                    const DispersionTangent& tan, const RateGroups& groups,
                                    double beta) {
    const double ln2 = std::log(2.0);
    for (int m = 1; m <= lay.M; ++m)
        for (int a = 1; a <= lay.L; ++a) {
            MatD map = MatD::Zero(3, lay.n_total);
            VecD off = VecD::Zero(3);
            map(0, lay.y_idx(m, a)) = ln2;  // u = ln2 * y
            off[1] = 1.0;                   // v = 1
            map(2, lay.rho_idx(m, a)) = 1.0;
            off[2] = 1.0;  // w = 1 + rho
            prog.constraints.push_back(conic::ExpCon{std::move(map), std::move(off)});

            VecD pos = VecD::Zero(lay.n_total);
            pos[lay.rho_idx(m, a)] = 1.0;
            prog.constraints.push_back(conic::NonnegCon{std::move(pos), 0.0});
        }
    for (const auto& pos : groups.positions) {
        VecD row = VecD::Zero(lay.n_total);
        double off = 0.0;
        for (int m : pos)
            for (int a = 1; a <= lay.L; ++a) {
                row[lay.y_idx(m, a)] += 1.0;
                const double slope = tan.slope[m - 1][a - 1];
                const double val = tan.value[m - 1][a - 1];
                const double anchor = tan.anchor[m - 1][a - 1];
                row[lay.rho_idx(m, a)] += -beta * slope;
                off += -beta * (val - slope * anchor);
            }
        row[lay.t_idx] = -1.0;
        prog.constraints.push_back(conic::NonnegCon{std::move(row), off});
    }
}

/// ||w||^2 <= lin encoded as ||(2w, 1 - lin)|| <= 1 + lin.
inline void append_quad_le_affine(conic::ConicProgram& prog, MatD w_rows, VecD w_off, VecD lin_row,
                                  double lin_off) {
    const int nw = static_cast<int>(w_rows.rows());
    const int n = static_cast<int>(w_rows.cols());
    MatD A(nw + 1, n);
    VecD d(nw + 1);
    A.topRows(nw) = 2.0 * w_rows;
    d.head(nw) = 2.0 * w_off;
    A.row(nw) = -lin_row.transpose();
    d[nw] = 1.0 - lin_off;
    prog.constraints.push_back(conic::SocCon{std::move(A), std::move(d), std::move(lin_row), lin_off + 1.0});
}

}  // namespace detail

/// Problem (19): precoders free, combiners fixed, SINR constraints linearized
/// at (P, rho) of `state`.
inline std::pair<conic::ConicProgram, SubproblemLayout> build_precoder_subproblem(
    const DesignState& state, const ChannelRealization& ch, const DecodingOrder& order,
    const SystemConfig& cfg, const FblParams& fbl) {
    const int M = order.size();
    const int L = cfg.streams_per_user();
    SubproblemLayout lay;
    lay.M = M;
    lay.L = L;
    lay.block = 2 * cfg.Nt;
    lay.rho0 = M * L * lay.block;
    lay.t_idx = lay.rho0 + M * L;
    lay.y0 = lay.t_idx + 1;
    lay.n_total = lay.y0 + M * L;

    conic::ConicProgram prog;
    prog.n_vars = lay.n_total;
    prog.objective = VecD::Zero(lay.n_total);
    prog.objective[lay.t_idx] = 1.0;

    const auto tan = linearize_dispersion(state.rho);
    const auto groups = detail::rate_groups(order, cfg);

    // per-stream linearized SINR constraints (Eq. 18 shape)
    for (int m = 1; m <= M; ++m) {
        for (int a = 1; a <= L; ++a) {
            const RowC g = state.G.at(m).row(a - 1);
            const double noise = g.squaredNorm() * cfg.sigma2;
            const auto ifc = interference_set(m, a, M, L, cfg.scheme);
            MatD w = MatD::Zero(2 * static_cast<int>(ifc.size()), lay.n_total);
            int r = 0;
            for (const auto& s : ifc) {
                const RowC coeff = g * ch.of_user(order.user_at(s.position));
                detail::add_complex_rows(w.row(r), w.row(r + 1), coeff, lay.vec0(s.position, s.stream));
                r += 2;
            }
            const RowC arow = g * ch.of_user(order.user_at(m));
            const cxd u0 = (arow * state.P.at(m).col(a - 1)).value();
            const double e = tan.anchor[m - 1][a - 1];
            VecD lin = VecD::Zero(lay.n_total);
            {
                // (2/e) Re{conj(u0) * (g H p)}: realified coefficients on p
                VecD re_row = VecD::Zero(lay.n_total), im_row = VecD::Zero(lay.n_total);
                detail::add_complex_rows(re_row, im_row, arow, lay.vec0(m, a));
                lin = (2.0 / e) * (u0.real() * re_row + u0.imag() * im_row);
            }
            lin[lay.rho_idx(m, a)] = -std::norm(u0) / (e * e);
            detail::append_quad_le_affine(prog, std::move(w), VecD::Zero(2 * static_cast<int>(ifc.size())),
                                          std::move(lin), -noise);
        }
    }

    // per-user power budgets (11d)/(11e)
    for (int k = 1; k <= cfg.K; ++k) {
        const auto& pos = groups.positions[k - 1];
        const int rows = static_cast<int>(pos.size()) * L * lay.block;
        MatD A = MatD::Zero(rows, lay.n_total);
        int r = 0;
        for (int m : pos)
            for (int a = 1; a <= L; ++a)
                for (int j = 0; j < lay.block; ++j) A(r++, lay.vec0(m, a) + j) = 1.0;
        prog.constraints.push_back(
            conic::SocCon{std::move(A), VecD::Zero(rows), VecD::Zero(lay.n_total), std::sqrt(cfg.Pt)});
    }

    detail::append_rate_constraints(prog, lay, tan, groups, fbl.penalty_scale());
    return {std::move(prog), lay};
}

/// Problem (22): combiners free, precoders fixed, SINR constraints linearized
/// at (G, rho) of `state`. Combiners carry no power constraint.
inline std::pair<conic::ConicProgram, SubproblemLayout> build_combiner_subproblem(
    const DesignState& state, const ChannelRealization& ch, const DecodingOrder& order,
    const SystemConfig& cfg, const FblParams& fbl) {
    const int M = order.size();
    const int L = cfg.streams_per_user();
    SubproblemLayout lay;
    lay.M = M;
    lay.L = L;
    lay.block = 2 * cfg.Nr;
    lay.rho0 = M * L * lay.block;
    lay.t_idx = lay.rho0 + M * L;
    lay.y0 = lay.t_idx + 1;
    lay.n_total = lay.y0 + M * L;

    conic::ConicProgram prog;
    prog.n_vars = lay.n_total;
    prog.objective = VecD::Zero(lay.n_total);
    prog.objective[lay.t_idx] = 1.0;

    const auto tan = linearize_dispersion(state.rho);
    const auto groups = detail::rate_groups(order, cfg);

    // precoded columns H_n p^i, shared across constraints
    std::vector<std::vector<VecC>> hcol(M, std::vector<VecC>(L));
    for (int n = 1; n <= M; ++n)
        for (int i = 1; i <= L; ++i)
            hcol[n - 1][i - 1] = ch.of_user(order.user_at(n)) * state.P.at(n).col(i - 1);

    const double sigma = std::sqrt(cfg.sigma2);
    for (int m = 1; m <= M; ++m) {
        for (int a = 1; a <= L; ++a) {
            const auto ifc = interference_set(m, a, M, L, cfg.scheme);
            const int nw = 2 * static_cast<int>(ifc.size()) + lay.block;
            MatD w = MatD::Zero(nw, lay.n_total);
            int r = 0;
            for (const auto& s : ifc) {
                const RowC coeff = hcol[s.position - 1][s.stream - 1].transpose();
                detail::add_complex_rows(w.row(r), w.row(r + 1), coeff, lay.vec0(m, a));
                r += 2;
            }
            for (int j = 0; j < lay.block; ++j) w(r + j, lay.vec0(m, a) + j) = sigma;  // sigma2*||g||^2

            const RowC desired = hcol[m - 1][a - 1].transpose();
            const RowC g0 = state.G.at(m).row(a - 1);
            const cxd u0 = (g0 * hcol[m - 1][a - 1]).value();
            const double e = tan.anchor[m - 1][a - 1];
            VecD lin = VecD::Zero(lay.n_total);
            {
                VecD re_row = VecD::Zero(lay.n_total), im_row = VecD::Zero(lay.n_total);
                detail::add_complex_rows(re_row, im_row, desired, lay.vec0(m, a));
                lin = (2.0 / e) * (u0.real() * re_row + u0.imag() * im_row);
            }
            lin[lay.rho_idx(m, a)] = -std::norm(u0) / (e * e);
            detail::append_quad_le_affine(prog, std::move(w), VecD::Zero(nw), std::move(lin), 0.0);
        }
    }

    detail::append_rate_constraints(prog, lay, tan, groups, fbl.penalty_scale());
    return {std::move(prog), lay};
}

/// Feasible start: per-user right-singular-vector precoders at equal stream
/// power (split users halve the budget per part), MMSE combiners, rho set to
/// the actual stream SINRs so constraint (14d) starts tight.
inline DesignState initialize_state(const ChannelRealization& ch, const DecodingOrder& order,
                                    const SystemConfig& cfg, const FblParams& fbl) {
    const int M = order.size();
    const int L = cfg.streams_per_user();
    DesignState st;
    st.P.P.resize(M);
    for (int m = 1; m <= M; ++m) {
        const auto& id = order.at(m);
        const MatC& H = ch.of_user(id.user);
        Eigen::JacobiSVD<MatC> svd(H, Eigen::ComputeThinV);
        const double part_power = id.part == SymbolPart::Whole ? cfg.Pt : cfg.Pt / 2.0;
        st.P.at(m) = svd.matrixV().leftCols(L) * std::sqrt(part_power / L);
    }
    st.G = mmse_combiner_update(ch, st.P, order, cfg);
    detail::regularize_state(st, ch, order, cfg);
    st.rho.assign(M, std::vector<double>(L, 0.0));
    for (int m = 1; m <= M; ++m)
        for (int a = 1; a <= L; ++a) st.rho[m - 1][a - 1] = stream_sinr(ch, st.P, st.G, order, {m, a}, cfg);
    st.t = detail::surrogate_objective(st.rho, order, cfg, fbl);
    st.iteration = 0;
    return st;
}

/// Rebuilds rho/t of a caller-provided design so it is a valid AO iterate.
inline DesignState state_from_design(PrecoderSet P, CombinerSet G, const ChannelRealization& ch,
                                     const DecodingOrder& order, const SystemConfig& cfg,
                                     const FblParams& fbl) {
    const int M = order.size();
    const int L = cfg.streams_per_user();
    DesignState st;
    st.P = std::move(P);
    st.G = std::move(G);
    detail::regularize_state(st, ch, order, cfg);
    st.rho.assign(M, std::vector<double>(L, 0.0));
    for (int m = 1; m <= M; ++m)
        for (int a = 1; a <= L; ++a) st.rho[m - 1][a - 1] = stream_sinr(ch, st.P, st.G, order, {m, a}, cfg);
    st.t = detail::surrogate_objective(st.rho, order, cfg, fbl);
    return st;
}

/// Maps a converged state with fewer (or no) splits into a target RSMA layout:
/// first parts inherit the user's first-part or whole precoder, second parts
/// carry over if the base had them and start at zero otherwise (snapped to a
/// tiny feasible direction). The base point's rates are preserved exactly.
inline std::pair<PrecoderSet, CombinerSet> map_design_layout(const DesignState& base,
                                                             const DecodingOrder& base_order,
                                                             const DecodingOrder& order,
                                                             const SystemConfig& cfg) {
    const int L = cfg.streams_per_user();
    PrecoderSet P;
    CombinerSet G;
    P.P.resize(order.size());
    G.G.resize(order.size());
    for (int m = 1; m <= order.size(); ++m) {
        const auto& id = order.at(m);
        int src = base_order.position_of(id.user, id.part);
        if (src == 0 && id.part == SymbolPart::FirstSplit)
            src = base_order.position_of(id.user, SymbolPart::Whole);
        if (src == 0 && id.part == SymbolPart::Whole)
            src = base_order.position_of(id.user, SymbolPart::FirstSplit);
        if (src > 0) {
            P.at(m) = base.P.at(src);
            G.at(m) = base.G.at(src);
        } else {
            P.at(m) = MatC::Zero(cfg.Nt, L);
            G.at(m) = MatC::Zero(L, cfg.Nr);
        }
    }
    return {std::move(P), std::move(G)};
}

inline DesignState expand_to_rsma(const DesignState& base, const DecodingOrder& base_order,
                                  const ChannelRealization& ch, const DecodingOrder& order,
                                  const SystemConfig& cfg, const FblParams& fbl) {
    auto [P, G] = map_design_layout(base, base_order, order, cfg);
    return state_from_design(std::move(P), std::move(G), ch, order, cfg, fbl);
}

struct AoResult {
    DesignState state;          // final iterate
    DesignState best_state;     // iterate with the highest true MMF (init included)
    double mmf = 0.0;           // true clamped MMF of best_state
    std::vector<double> trace;  // surrogate t per outer iteration, trace[0] = init
    std::vector<conic::SolveStatus> solver_statuses;
    int iterations = 0;
    bool converged = false;
    int solver_failures = 0;
};

namespace detail {

inline bool extract_block(const conic::ConicSolution& sol, const SubproblemLayout& lay,
                          DesignState& st, bool precoder_step, const ChannelRealization& ch,
                          const DecodingOrder& order, const SystemConfig& cfg) {
    const int half = lay.block / 2;
    for (int m = 1; m <= lay.M; ++m)
        for (int a = 1; a <= lay.L; ++a) {
            const int c0 = lay.vec0(m, a);
            if (precoder_step) {
                for (int j = 0; j < half; ++j)
                    st.P.at(m)(j, a - 1) = cxd(sol.x[c0 + j], sol.x[c0 + half + j]);
            } else {
                for (int j = 0; j < half; ++j)
                    st.G.at(m)(a - 1, j) = cxd(sol.x[c0 + j], sol.x[c0 + half + j]);
            }
            st.rho[m - 1][a - 1] = std::max(0.0, sol.x[lay.rho_idx(m, a)]);
        }
    st.t = sol.x[lay.t_idx];
    regularize_state(st, ch, order, cfg);
    return true;
}

}  // namespace detail

/// Algorithm 1: alternate the precoder and combiner subproblems until the
/// objective moves less than tau. Solver hiccups retry once with a 10x looser
/// tolerance, then freeze that block for the iteration.
inline AoResult solve_mmf(const ChannelRealization& ch, const SystemConfig& cfg, const FblParams& fbl,
                          const AoSettings& settings = {}) {
    cfg.validate();
    const DecodingOrder order = compute_decoding_order(ch, cfg);

    DesignState st;
    std::optional<std::pair<double, DesignState>> raw_given;
    if (settings.init_strategy == InitStrategy::Given) {
        if (!settings.given_state) throw std::invalid_argument("InitStrategy::Given requires given_state");
        st = *settings.given_state;
        // score the un-snapped design too: a warm start with exactly-zero split
        // parts reproduces its base point's rates bit for bit
        raw_given = {user_rates(ch, st.P, st.G, order, cfg, fbl).mmf, st};
        st = state_from_design(st.P, st.G, ch, order, cfg, fbl);
    } else if (settings.init_strategy == InitStrategy::NomaWarmStart && !cfg.split_set.empty()) {
        SystemConfig noma = cfg;
        noma.scheme = Scheme::NOMA;
        noma.split_set.clear();
        AoSettings nset = settings;
        nset.init_strategy = InitStrategy::SvdMmse;
        AoResult nres = solve_mmf(ch, noma, fbl, nset);
        const DecodingOrder norder = compute_decoding_order(ch, noma);
        auto [rawP, rawG] = map_design_layout(nres.best_state, norder, order, cfg);
        DesignState raw;
        raw.P = rawP;
        raw.G = rawG;
        raw_given = {user_rates(ch, raw.P, raw.G, order, cfg, fbl).mmf, raw};
        st = state_from_design(std::move(rawP), std::move(rawG), ch, order, cfg, fbl);
    } else {
        st = initialize_state(ch, order, cfg, fbl);
    }

    AoResult res;
    res.trace.push_back(st.t);
    {
        auto rep = user_rates(ch, st.P, st.G, order, cfg, fbl);
        res.mmf = rep.mmf;
        res.best_state = st;
        if (raw_given && raw_given->first > res.mmf) {
            res.mmf = raw_given->first;
            res.best_state = raw_given->second;
        }
    }

    auto run_step = [&](bool precoder_step) {
        auto [prog, lay] = precoder_step ? build_precoder_subproblem(st, ch, order, cfg, fbl)
                                         : build_combiner_subproblem(st, ch, order, cfg, fbl);
        conic::ConicSolution sol = conic::solve(prog, settings.solver);
        if (sol.status != conic::SolveStatus::Optimal) {
            conic::SolverSettings loose = settings.solver;
            loose.tol *= 10.0;
            sol = conic::solve(prog, loose);
        }
        res.solver_statuses.push_back(sol.status);
        if (sol.status != conic::SolveStatus::Optimal) {
            ++res.solver_failures;  // freeze this block for the iteration
            return;
        }
        detail::extract_block(sol, lay, st, precoder_step, ch, order, cfg);
    };

    for (int n = 1; n <= settings.max_outer_iters; ++n) {
        run_step(true);
        run_step(false);
        st.iteration = n;
        res.trace.push_back(st.t);
        res.iterations = n;

        const auto rep = user_rates(ch, st.P, st.G, order, cfg, fbl);
        if (rep.mmf > res.mmf) {
            res.mmf = rep.mmf;
            res.best_state = st;
        }
        if (std::abs(res.trace[n] - res.trace[n - 1]) <= settings.tau) {
            res.converged = true;
            break;
        }
    }
    res.state = st;
    return res;
}

/// NOMA = RSMA with an empty split set.
inline AoResult solve_mmf_noma(const ChannelRealization& ch, const SystemConfig& cfg_in,
                               const FblParams& fbl, const AoSettings& settings = {}) {
    SystemConfig cfg = cfg_in;
    cfg.scheme = Scheme::NOMA;
    cfg.split_set.clear();
    return solve_mmf(ch, cfg, fbl, settings);
}

/// SDMA: same machinery, interference spans all other users, no SIC.
inline AoResult solve_mmf_sdma(const ChannelRealization& ch, const SystemConfig& cfg_in,
                               const FblParams& fbl, const AoSettings& settings = {}) {
    SystemConfig cfg = cfg_in;
    cfg.scheme = Scheme::SDMA;
    if (!cfg.split_set.empty()) throw std::invalid_argument("SDMA requires an empty split set");
    return solve_mmf(ch, cfg, fbl, settings);
}

// --- design state serialization (documented JSON, complex as [re, im]) ---

inline nlohmann::json to_json(const DesignState& st, const DecodingOrder& order) {
    nlohmann::json j;
    j["t"] = st.t;
    j["iteration"] = st.iteration;
    j["rho"] = st.rho;
    auto& ord = j["order"] = nlohmann::json::array();
    for (const auto& e : order.entries) ord.push_back({{"user", e.user}, {"part", to_string(e.part)}});
    auto& p = j["P"] = nlohmann::json::array();
    for (const auto& m : st.P.P) p.push_back(detail::cmat_to_json(m));
    auto& g = j["G"] = nlohmann::json::array();
    for (const auto& m : st.G.G) g.push_back(detail::cmat_to_json(m));
    return j;
}

inline std::pair<DesignState, DecodingOrder> design_from_json(const nlohmann::json& j) {
    DesignState st;
    st.t = j.value("t", 0.0);
    st.iteration = j.value("iteration", 0);
    st.rho = j.at("rho").get<std::vector<std::vector<double>>>();
    DecodingOrder order;
    for (const auto& e : j.at("order")) {
        SymbolVectorId id;
        id.user = e.at("user").get<int>();
        const std::string part = e.at("part").get<std::string>();
        id.part = part == "first-split" ? SymbolPart::FirstSplit
                  : part == "second-split" ? SymbolPart::SecondSplit
                                           : SymbolPart::Whole;
        order.entries.push_back(id);
    }
    for (const auto& m : j.at("P")) st.P.P.push_back(detail::cmat_from_json(m));
    for (const auto& m : j.at("G")) st.G.G.push_back(detail::cmat_from_json(m));
    return {std::move(st), std::move(order)};
}

}  // namespace rsma
