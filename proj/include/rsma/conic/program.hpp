#pragma once

#include <json.hpp>
#include <variant>

#include "rsma/common.hpp"

namespace rsma::conic {

/// a'x + b >= 0.
struct NonnegCon {
    VecD a;
    double b = 0.0;
};

/// ||A x + d|| <= a'x + b.
struct SocCon {
    MatD A;
    VecD d;
    VecD a;
    double b = 0.0;
};

/// (u, v, w) affine in x with v*exp(u/v) <= w (v > 0). Each row of the 3 x n
/// map plus offset gives one coordinate: u = row0*x + off0, etc.
struct ExpCon {
    MatD map;  // 3 x n
    VecD off;  // 3
};

using Constraint = std::variant<NonnegCon, SocCon, ExpCon>;

/// Linear conic program: maximize c'x subject to the cone constraints.
struct ConicProgram {
    int n_vars = 0;
    VecD objective;  // maximize objective' x
    std::vector<Constraint> constraints;

    void check_shapes() const {
        if (objective.size() != n_vars) throw std::invalid_argument("objective size mismatch");
        for (const auto& con : constraints) {
            std::visit(
                [&](const auto& c) {
                    using T = std::decay_t<decltype(c)>;
                    if constexpr (std::is_same_v<T, NonnegCon>) {
                        if (c.a.size() != n_vars) throw std::invalid_argument("nonneg row size mismatch");
                    } else if constexpr (std::is_same_v<T, SocCon>) {
                        if (c.a.size() != n_vars || c.A.cols() != n_vars || c.A.rows() != c.d.size())
                            throw std::invalid_argument("soc shape mismatch");
                    } else {
                        if (c.map.rows() != 3 || c.map.cols() != n_vars || c.off.size() != 3)
                            throw std::invalid_argument("exp shape mismatch");
                    }
                },
                con);
        }
    }
};

enum class SolveStatus { Optimal, Infeasible, Unbounded, MaxIters, NumericalTrouble };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Unbounded: return "unbounded";
        case SolveStatus::MaxIters: return "max_iters";
        case SolveStatus::NumericalTrouble: return "numerical_trouble";
    }
    return "?";
}

struct KktResiduals {
    double primal = 0.0;
    double dual = 0.0;
    double gap = 0.0;
    double max() const { return std::max(primal, std::max(dual, gap)); }
};

struct ConicSolution {
    VecD x;
    SolveStatus status = SolveStatus::NumericalTrouble;
    double objective_value = 0.0;
    KktResiduals kkt_residuals;
    int iterations = 0;
};

struct SolverSettings {
    double tol = 1e-8;           // optimality: max relative KKT residual
    double tol_infeas = 1e-9;    // certificate threshold
    int max_iters = 200;
    int corrector_steps = 4;
    bool verbose = false;
};

// --- JSON dump/load (regression-fixture format, documented in README) ---

inline nlohmann::json to_json(const ConicProgram& p) {
    nlohmann::json j;
    j["n_vars"] = p.n_vars;
    j["objective"] = std::vector<double>(p.objective.data(), p.objective.data() + p.objective.size());
    auto vec = [](const VecD& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    auto mat = [&](const MatD& m) {
        std::vector<std::vector<double>> rows;
        for (int r = 0; r < m.rows(); ++r) rows.push_back(std::vector<double>(m.row(r).begin(), m.row(r).end()));
        return rows;
    };
    auto& cs = j["constraints"] = nlohmann::json::array();
    for (const auto& con : p.constraints) {
        if (auto* nn = std::get_if<NonnegCon>(&con))
            cs.push_back({{"kind", "nonneg"}, {"a", vec(nn->a)}, {"b", nn->b}});
        else if (auto* soc = std::get_if<SocCon>(&con))
            cs.push_back({{"kind", "soc"}, {"A", mat(soc->A)}, {"d", vec(soc->d)}, {"a", vec(soc->a)}, {"b", soc->b}});
        else if (auto* ex = std::get_if<ExpCon>(&con))
            cs.push_back({{"kind", "exp"}, {"map", mat(ex->map)}, {"off", vec(ex->off)}});
    }
    return j;
}

inline ConicProgram program_from_json(const nlohmann::json& j) {
    ConicProgram p;
    p.n_vars = j.at("n_vars").get<int>();
    auto vec = [](const nlohmann::json& a) {
        VecD v(a.size());
        for (std::size_t i = 0; i < a.size(); ++i) v[i] = a[i].get<double>();
        return v;
    };
    auto mat = [](const nlohmann::json& a) {
        const int nr = static_cast<int>(a.size());
        const int nc = nr ? static_cast<int>(a[0].size()) : 0;
        MatD m(nr, nc);
        for (int r = 0; r < nr; ++r)
            for (int c = 0; c < nc; ++c) m(r, c) = a[r][c].get<double>();
        return m;
    };
    p.objective = vec(j.at("objective"));
    for (const auto& c : j.at("constraints")) {
        const std::string kind = c.at("kind").get<std::string>();
        if (kind == "nonneg")
            p.constraints.push_back(NonnegCon{vec(c.at("a")), c.at("b").get<double>()});
        else if (kind == "soc")
            p.constraints.push_back(SocCon{mat(c.at("A")), vec(c.at("d")), vec(c.at("a")), c.at("b").get<double>()});
        else if (kind == "exp")
            p.constraints.push_back(ExpCon{mat(c.at("map")), vec(c.at("off"))});
        else
            throw std::invalid_argument("unknown constraint kind: " + kind);
    }
    p.check_shapes();
    return p;
}

}  // namespace rsma::conic
