#pragma once

#include "rsma/conic/cones.hpp"

namespace rsma::conic {

namespace detail {

/// Internal standard form: minimize c'x s.t. Ax + s = b, s in K, equilibrated
/// as A = R A0 C (per-cone-block row scalars R, per-column scalars C), which
/// preserves the cones. Termination metrics are reported in original units.
struct Standardized {
    MatD A;
    VecD b, c;
    std::vector<ConeBlock> cones;
    std::vector<std::vector<int>> cols;  // active variable columns per cone
    std::vector<MatD> Asub;              // dense A block restricted to active columns
    double nu = 0.0;
    double obj_scale = 1.0;  // internal c = -C*objective / obj_scale
    VecD row_mult, col_mult;
    double b0_inf = 0.0, c0_inf = 0.0;  // original-data norms for residual scaling
    int n = 0, m = 0;

    VecD unscale_x(const VecD& x_scaled) const { return col_mult.asDiagonal() * x_scaled; }
};

inline Standardized standardize(const ConicProgram& p) {
    p.check_shapes();
    Standardized sf;
    sf.n = p.n_vars;
    int m = 0;
    for (const auto& con : p.constraints) {
        if (std::holds_alternative<NonnegCon>(con)) m += 1;
        else if (auto* soc = std::get_if<SocCon>(&con)) m += 1 + static_cast<int>(soc->d.size());
        else m += 3;
    }
    sf.m = m;
    sf.A.setZero(m, sf.n);
    sf.b.setZero(m);
    int row = 0;
    for (const auto& con : p.constraints) {
        if (auto* nn = std::get_if<NonnegCon>(&con)) {
            sf.A.row(row) = -nn->a.transpose();
            sf.b[row] = nn->b;
            sf.cones.push_back({ConeKind::Nonneg, row, 1});
            row += 1;
        } else if (auto* soc = std::get_if<SocCon>(&con)) {
            const int d = static_cast<int>(soc->d.size());
            sf.A.row(row) = -soc->a.transpose();
            sf.b[row] = soc->b;
            sf.A.block(row + 1, 0, d, sf.n) = -soc->A;
            sf.b.segment(row + 1, d) = soc->d;
            sf.cones.push_back({ConeKind::Soc, row, 1 + d});
            row += 1 + d;
        } else {
            auto* ex = std::get_if<ExpCon>(&con);
            sf.A.block(row, 0, 3, sf.n) = -ex->map;
            sf.b.segment(row, 3) = ex->off;
            sf.cones.push_back({ConeKind::Exp, row, 3});
            row += 3;
        }
    }
    sf.b0_inf = sf.m ? sf.b.cwiseAbs().maxCoeff() : 0.0;
    sf.c0_inf = p.objective.size() ? p.objective.cwiseAbs().maxCoeff() : 0.0;

    // Ruiz-style equilibration over cone blocks and columns
    sf.row_mult = VecD::Ones(sf.m);
    sf.col_mult = VecD::Ones(sf.n);
    for (int pass = 0; pass < 2; ++pass) {
        for (const auto& c : sf.cones) {
            double mx = std::max(sf.A.block(c.offset, 0, c.dim, sf.n).cwiseAbs().maxCoeff(),
                                 sf.b.segment(c.offset, c.dim).cwiseAbs().maxCoeff());
            if (mx <= 0) continue;
            const double s = 1.0 / std::clamp(std::sqrt(mx), 1e-8, 1e8);
            sf.A.block(c.offset, 0, c.dim, sf.n) *= s;
            sf.b.segment(c.offset, c.dim) *= s;
            sf.row_mult.segment(c.offset, c.dim) *= s;
        }
        for (int j = 0; j < sf.n; ++j) {
            const double mx = sf.A.col(j).cwiseAbs().maxCoeff();
            if (mx <= 0) continue;
            const double s = 1.0 / std::clamp(std::sqrt(mx), 1e-8, 1e8);
            sf.A.col(j) *= s;
            sf.col_mult[j] *= s;
        }
    }
    VecD c0 = p.objective.size() ? VecD(-p.objective) : VecD::Zero(sf.n);
    VecD cs = sf.col_mult.asDiagonal() * c0;
    sf.obj_scale = std::max(1.0, cs.cwiseAbs().maxCoeff());
    sf.c = cs / sf.obj_scale;
    for (const auto& c : sf.cones) sf.nu += cone_nu(c);
    // column support per cone
    sf.cols.resize(sf.cones.size());
    sf.Asub.resize(sf.cones.size());
    for (std::size_t k = 0; k < sf.cones.size(); ++k) {
        const auto& c = sf.cones[k];
        for (int j = 0; j < sf.n; ++j)
            if (sf.A.block(c.offset, j, c.dim, 1).cwiseAbs().maxCoeff() != 0.0) sf.cols[k].push_back(j);
        MatD sub(c.dim, sf.cols[k].size());
        for (std::size_t jj = 0; jj < sf.cols[k].size(); ++jj) sub.col(jj) = sf.A.block(c.offset, sf.cols[k][jj], c.dim, 1);
        sf.Asub[k] = std::move(sub);
    }
    return sf;
}

struct IpmState {
    VecD x, s, z;
    double tau = 1.0, kappa = 1.0;
};

struct ConeFactors {
    std::vector<MatD> H;                    // barrier Hessians per cone
    std::vector<Eigen::LLT<MatD>> Hllt;     // factorizations (for H^-1 products)
    VecD grad;                              // stacked barrier gradient
    bool ok = false;
};

inline bool interior(const Standardized& sf, const IpmState& st) {
    if (!(st.tau > 0.0) || !(st.kappa > 0.0)) return false;
    for (const auto& c : sf.cones) {
        if (!cone_primal_interior(c, st.s.segment(c.offset, c.dim))) return false;
        if (!cone_dual_interior(c, st.z.segment(c.offset, c.dim))) return false;
    }
    return true;
}

inline ConeFactors factorize_cones(const Standardized& sf, const VecD& s) {
    ConeFactors f;
    f.H.resize(sf.cones.size());
    f.Hllt.resize(sf.cones.size());
    f.grad.resize(sf.m);
    for (std::size_t k = 0; k < sf.cones.size(); ++k) {
        const auto& c = sf.cones[k];
        f.H[k].resize(c.dim, c.dim);
        cone_hess(c, s.segment(c.offset, c.dim), f.H[k]);
        cone_grad(c, s.segment(c.offset, c.dim), f.grad.segment(c.offset, c.dim));
        f.Hllt[k].compute(f.H[k]);
        if (f.Hllt[k].info() != Eigen::Success) return f;
    }
    f.ok = true;
    return f;
}

inline double barrier_mu(const Standardized& sf, const IpmState& st) {
    return (st.s.dot(st.z) + st.tau * st.kappa) / (sf.nu + 1.0);
}

/// Central-path proximity ||z + mu grad F(s)||_{H(s)^-1} (plus the tau/kappa
/// term), divided by mu. Returns +inf outside the interior.
inline double proximity(const Standardized& sf, const IpmState& st, const ConeFactors& f, double mu) {
    double acc = 0.0;
    for (std::size_t k = 0; k < sf.cones.size(); ++k) {
        const auto& c = sf.cones[k];
        VecD psi = st.z.segment(c.offset, c.dim) + mu * f.grad.segment(c.offset, c.dim);
        acc += psi.dot(f.Hllt[k].solve(psi));
    }
    const double pt = st.tau * st.kappa - mu;
    acc += pt * pt;
    return std::sqrt(std::max(0.0, acc)) / mu;
}

struct Direction {
    VecD dx, ds, dz;
    double dtau = 0.0, dkappa = 0.0;
};

/// Factored Newton machinery for one iterate (fixed s, mu, tau).
struct NewtonSystem {
    const Standardized& sf;
    const ConeFactors& f;
    double mu, tau;
    Eigen::LDLT<MatD> Qldlt;
    VecD AtHb;
    double btHb = 0.0;
    VecD Hb;

    NewtonSystem(const Standardized& sf_, const ConeFactors& f_, double mu_, double tau_)
        : sf(sf_), f(f_), mu(mu_), tau(tau_) {
        MatD Q = MatD::Zero(sf.n, sf.n);
        Hb.resize(sf.m);
        for (std::size_t k = 0; k < sf.cones.size(); ++k) {
            const auto& c = sf.cones[k];
            const auto& cols = sf.cols[k];
            const MatD S = f.H[k] * sf.Asub[k];          // dim x kcols
            const MatD Qsub = sf.Asub[k].transpose() * S;  // kcols x kcols
            for (std::size_t ji = 0; ji < cols.size(); ++ji)
                for (std::size_t jj = 0; jj < cols.size(); ++jj) Q(cols[ji], cols[jj]) += Qsub(ji, jj);
            Hb.segment(c.offset, c.dim) = f.H[k] * sf.b.segment(c.offset, c.dim);
        }
        Q *= mu;
        const double reg = 1e-12 * (1.0 + Q.diagonal().cwiseAbs().maxCoeff());
        Q.diagonal().array() += reg;
        Qldlt.compute(Q);
        btHb = sf.b.dot(Hb);
        AtHb = sf.A.transpose() * Hb;
    }

    VecD applyH(const VecD& w) const {
        VecD out(sf.m);
        for (std::size_t k = 0; k < sf.cones.size(); ++k) {
            const auto& c = sf.cones[k];
            out.segment(c.offset, c.dim) = f.H[k] * w.segment(c.offset, c.dim);
        }
        return out;
    }

    Direction solve_once(const VecD& r1, const VecD& r2, double r3, const VecD& r4, double r5) const {
        const VecD Hr1 = applyH(r1);
        const VecD q1 = r2 - sf.A.transpose() * r4 + mu * (sf.A.transpose() * Hr1);
        const VecD u = Qldlt.solve(q1);
        const VecD v = Qldlt.solve(mu * AtHb - sf.c);
        double denom = sf.c.dot(v) + mu * AtHb.dot(v) - mu * btHb - mu / (tau * tau);
        if (std::abs(denom) < 1e-300) denom = -1e-300;
        const double num = r3 - sf.c.dot(u) - sf.b.dot(r4) + mu * Hb.dot(r1) - mu * AtHb.dot(u) - r5;
        Direction d;
        d.dtau = num / denom;
        d.dx = u + v * d.dtau;
        d.ds = r1 - sf.A * d.dx + sf.b * d.dtau;
        d.dz = r4 - mu * applyH(d.ds);
        d.dkappa = r5 - (mu / (tau * tau)) * d.dtau;
        return d;
    }

    /// Two rounds of iterative refinement against the full 5-block system.
    Direction solve(const IpmState&, const VecD& r1, const VecD& r2, double r3, const VecD& r4, double r5) const {
        Direction d = solve_once(r1, r2, r3, r4, r5);
        for (int round = 0; round < 2; ++round) {
            const VecD e1 = r1 - (sf.A * d.dx + d.ds - sf.b * d.dtau);
            const VecD e2 = r2 - (sf.A.transpose() * d.dz + sf.c * d.dtau);
            const double e3 = r3 - (sf.c.dot(d.dx) + sf.b.dot(d.dz) + d.dkappa);
            const VecD e4 = r4 - (d.dz + mu * applyH(d.ds));
            const double e5 = r5 - (d.dkappa + (mu / (tau * tau)) * d.dtau);
            Direction corr = solve_once(e1, e2, e3, e4, e5);
            d.dx += corr.dx;
            d.ds += corr.ds;
            d.dz += corr.dz;
            d.dtau += corr.dtau;
            d.dkappa += corr.dkappa;
        }
        return d;
    }
};

inline IpmState advance(const IpmState& st, const Direction& d, double alpha) {
    IpmState out;
    out.x = st.x + alpha * d.dx;
    out.s = st.s + alpha * d.ds;
    out.z = st.z + alpha * d.dz;
    out.tau = st.tau + alpha * d.dtau;
    out.kappa = st.kappa + alpha * d.dkappa;
    return out;
}

struct Metrics {
    double pres = 0.0, dres = 0.0, gap = 0.0, pcost = 0.0, dcost = 0.0;
    double max() const { return std::max(pres, std::max(dres, gap)); }
};

/// Residuals and costs in ORIGINAL problem units, computed from the scaled
/// iterate: x0 = C x', s0 = R^-1 s', z0 = obj_scale R z'.
inline Metrics metrics(const Standardized& sf, const IpmState& st) {
    Metrics mt;
    const double tau = st.tau;
    const VecD rp = sf.A * st.x + st.s - sf.b * tau;
    const VecD rd = sf.A.transpose() * st.z + sf.c * tau;
    mt.pres = (sf.row_mult.cwiseInverse().asDiagonal() * rp).lpNorm<Eigen::Infinity>() / tau /
              (1.0 + sf.b0_inf);
    mt.dres = sf.obj_scale * (sf.col_mult.cwiseInverse().asDiagonal() * rd).lpNorm<Eigen::Infinity>() /
              tau / (1.0 + sf.c0_inf);
    mt.pcost = sf.obj_scale * sf.c.dot(st.x) / tau;
    mt.dcost = -sf.obj_scale * sf.b.dot(st.z) / tau;
    mt.gap = std::abs(mt.pcost - mt.dcost) / (1.0 + std::max(std::abs(mt.pcost), std::abs(mt.dcost)));
    return mt;
}

}  // namespace detail

/// Interior-point solve over nonneg/SOC/exp cones (homogeneous self-dual
/// embedding, predictor + centering correctors using the primal barrier).
/// Deterministic for fixed inputs and settings.
inline ConicSolution solve(const ConicProgram& prog, const SolverSettings& settings = {}) {
    using namespace detail;
    ConicSolution sol;
    Standardized sf = standardize(prog);

    if (sf.m == 0) {  // no constraints
        sol.x = VecD::Zero(sf.n);
        const bool zero_obj = prog.objective.size() == 0 || prog.objective.cwiseAbs().maxCoeff() == 0.0;
        sol.status = zero_obj ? SolveStatus::Optimal : SolveStatus::Unbounded;
        sol.objective_value = 0.0;
        return sol;
    }

    IpmState st;
    st.x = VecD::Zero(sf.n);
    st.s.resize(sf.m);
    st.z.resize(sf.m);
    for (const auto& c : sf.cones) cone_init_point(c, st.s.segment(c.offset, c.dim));
    {
        ConeFactors f0 = factorize_cones(sf, st.s);
        st.z = -f0.grad;
    }

    const double prox_narrow = 0.30;
    const double prox_wide = 0.75;
    double best_metric = std::numeric_limits<double>::infinity();
    VecD best_x = st.x;
    Metrics best_mt;
    double best_tau = 1.0;

    auto finish = [&](SolveStatus status, const Metrics& mt, const VecD& xh) {
        sol.status = status;
        sol.x = xh;
        sol.objective_value = prog.objective.size() ? prog.objective.dot(xh) : 0.0;
        sol.kkt_residuals = {mt.pres, mt.dres, mt.gap};
        return sol;
    };

    int iter = 0;
    int stalls = 0;
    for (; iter < settings.max_iters; ++iter) {
        sol.iterations = iter;
        const Metrics mt = metrics(sf, st);
        if (mt.max() < best_metric) {
            best_metric = mt.max();
            best_x = sf.unscale_x(st.x) / st.tau;
            best_mt = mt;
            best_tau = st.tau;
        }
        if (mt.max() <= settings.tol) return finish(SolveStatus::Optimal, mt, sf.unscale_x(st.x) / st.tau);

        // infeasibility / unboundedness certificates (original units)
        const double bz = -sf.b.dot(st.z);  // want > 0 for primal-infeasible cert
        if (bz > 0.0) {
            const VecD atz = sf.col_mult.cwiseInverse().asDiagonal() * (sf.A.transpose() * st.z);
            if (atz.lpNorm<Eigen::Infinity>() / bz <= settings.tol_infeas)
                return finish(SolveStatus::Infeasible, mt, VecD::Zero(sf.n));
        }
        const double cx = -sf.obj_scale * sf.c.dot(st.x);  // want > 0 for unbounded cert
        if (cx > 0.0) {
            const VecD axs = sf.row_mult.cwiseInverse().asDiagonal() * (sf.A * st.x + st.s);
            if (axs.lpNorm<Eigen::Infinity>() / cx <= settings.tol_infeas)
                return finish(SolveStatus::Unbounded, mt, sf.unscale_x(st.x) / std::max(st.tau, 1e-300));
        }

        ConeFactors f = factorize_cones(sf, st.s);
        if (!f.ok) break;
        double mu = barrier_mu(sf, st);
        if (mu <= 1e-300) break;

        // predictor (affine direction)
        NewtonSystem ns(sf, f, mu, st.tau);
        const VecD r1 = -(sf.A * st.x + st.s - sf.b * st.tau);
        const VecD r2 = -(sf.A.transpose() * st.z + sf.c * st.tau);
        const double r3 = -(sf.c.dot(st.x) + sf.b.dot(st.z) + st.kappa);
        Direction d = ns.solve(st, r1, r2, r3, -st.z, -st.kappa);

        double alpha = 1.0;
        bool stepped = false;
        for (int ls = 0; ls < 70; ++ls) {
            IpmState cand = advance(st, d, alpha);
            if (interior(sf, cand)) {
                ConeFactors fc = factorize_cones(sf, cand.s);
                if (fc.ok) {
                    const double muc = barrier_mu(sf, cand);
                    if (muc > 0 && proximity(sf, cand, fc, muc) <= prox_wide) {
                        st = std::move(cand);
                        stepped = true;
                        break;
                    }
                }
            }
            alpha *= 0.80;
            if (alpha < 1e-10) break;
        }
        if (!stepped) {
            if (++stalls >= 3) break;
        } else {
            stalls = 0;
        }

        // centering correctors
        for (int cs = 0; cs < settings.corrector_steps; ++cs) {
            ConeFactors fc = factorize_cones(sf, st.s);
            if (!fc.ok) break;
            mu = barrier_mu(sf, st);
            double prox = proximity(sf, st, fc, mu);
            if (prox <= prox_narrow) break;
            NewtonSystem nc(sf, fc, mu, st.tau);
            const VecD rc4 = -(st.z + mu * fc.grad);
            const double rc5 = -(st.kappa - mu / st.tau);
            Direction dc = nc.solve(st, VecD::Zero(sf.m), VecD::Zero(sf.n), 0.0, rc4, rc5);
            double a = 1.0;
            for (int ls = 0; ls < 50; ++ls) {
                IpmState cand = advance(st, dc, a);
                if (interior(sf, cand)) {
                    ConeFactors f2 = factorize_cones(sf, cand.s);
                    if (f2.ok) {
                        const double mu2 = barrier_mu(sf, cand);
                        const double prox2 = proximity(sf, cand, f2, mu2);
                        if (prox2 <= std::max(prox_narrow, 0.95 * prox)) {
                            st = std::move(cand);
                            break;
                        }
                    }
                }
                a *= 0.7;
                if (a < 1e-10) break;
            }
        }
    }

    // graceful finish from the best iterate
    if (best_metric <= settings.tol * 10.0) {
        sol.iterations = iter;
        return finish(SolveStatus::Optimal, best_mt, best_x);
    }
    sol.iterations = iter;
    const SolveStatus status = (iter >= settings.max_iters) ? SolveStatus::MaxIters : SolveStatus::NumericalTrouble;
    return finish(status, best_mt, best_x);
}

}  // namespace rsma::conic
