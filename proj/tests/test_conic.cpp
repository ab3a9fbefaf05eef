#include <catch2/catch_amalgamated.hpp>
#include <numbers>

#include "rsma/conic/solver.hpp"

using namespace rsma;
using namespace rsma::conic;

namespace {

VecD unit(int n, int i, double v = 1.0) {
    VecD e = VecD::Zero(n);
    e[i] = v;
    return e;
}

}  // namespace

TEST_CASE("1-D LP: maximize x s.t. 0 <= x <= 3") {
    ConicProgram p;
    p.n_vars = 1;
    p.objective = unit(1, 0);
    p.constraints.push_back(NonnegCon{unit(1, 0), 0.0});          // x >= 0
    p.constraints.push_back(NonnegCon{unit(1, 0, -1.0), 3.0});    // 3 - x >= 0
    auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x[0] == Catch::Approx(3.0).margin(1e-7));
    CHECK(sol.objective_value == Catch::Approx(3.0).margin(1e-7));
    CHECK(sol.kkt_residuals.max() <= 1e-7);
}

TEST_CASE("SOC projection onto a point: min t s.t. ||(x-1, y-2)|| <= t") {
    ConicProgram p;
    p.n_vars = 3;  // x, y, t
    p.objective = unit(3, 2, -1.0);  // maximize -t
    MatD A(2, 3);
    A << 1, 0, 0, 0, 1, 0;
    VecD d(2);
    d << -1.0, -2.0;
    p.constraints.push_back(SocCon{A, d, unit(3, 2), 0.0});
    auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x[0] == Catch::Approx(1.0).margin(1e-5));
    CHECK(sol.x[1] == Catch::Approx(2.0).margin(1e-5));
    CHECK(std::abs(sol.x[2]) < 1e-6);
}

TEST_CASE("exp cone: maximize y s.t. exp(y) <= x, x <= e") {
    ConicProgram p;
    p.n_vars = 2;  // x, y
    p.objective = unit(2, 1);
    MatD map = MatD::Zero(3, 2);
    map(0, 1) = 1.0;  // u = y
    map(2, 0) = 1.0;  // w = x
    VecD off(3);
    off << 0.0, 1.0, 0.0;  // v = 1
    p.constraints.push_back(ExpCon{map, off});
    p.constraints.push_back(NonnegCon{unit(2, 0, -1.0), std::numbers::e});
    auto sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x[1] == Catch::Approx(1.0).margin(1e-6));
    CHECK(sol.kkt_residuals.max() <= 1e-7);
}

TEST_CASE("infeasible and unbounded statuses") {
    ConicProgram inf;
    inf.n_vars = 1;
    inf.objective = unit(1, 0);
    inf.constraints.push_back(NonnegCon{unit(1, 0), -1.0});       // x >= 1
    inf.constraints.push_back(NonnegCon{unit(1, 0, -1.0), 0.0});  // x <= 0
    CHECK(solve(inf).status == SolveStatus::Infeasible);

    ConicProgram unb;
    unb.n_vars = 1;
    unb.objective = unit(1, 0);
    unb.constraints.push_back(NonnegCon{unit(1, 0), 0.0});  // x >= 0 only
    CHECK(solve(unb).status == SolveStatus::Unbounded);
}

TEST_CASE("determinism and objective scaling") {
    ConicProgram p;
    p.n_vars = 3;
    p.objective = VecD::Zero(3);
    p.objective << 1.0, 2.0, -0.5;
    MatD A = MatD::Identity(3, 3);
    p.constraints.push_back(SocCon{A, VecD::Zero(3), VecD::Zero(3), 1.0});  // ||x|| <= 1
    auto s1 = solve(p);
    auto s2 = solve(p);
    REQUIRE(s1.status == SolveStatus::Optimal);
    CHECK(s1.status == s2.status);
    CHECK(std::abs(s1.objective_value - s2.objective_value) <= 1e-9);
    CHECK(s1.objective_value == Catch::Approx(p.objective.norm()).margin(1e-6));

    auto scaled = p;
    scaled.objective *= 7.5;
    auto s3 = solve(scaled);
    REQUIRE(s3.status == SolveStatus::Optimal);
    CHECK(s3.objective_value == Catch::Approx(7.5 * s1.objective_value).epsilon(1e-6));
    CHECK((s3.x - s1.x).lpNorm<Eigen::Infinity>() < 1e-6);
}

TEST_CASE("program json round trip") {
    ConicProgram p;
    p.n_vars = 2;
    p.objective = unit(2, 1);
    MatD map = MatD::Zero(3, 2);
    map(0, 1) = 1.0;
    map(2, 0) = 1.0;
    VecD off(3);
    off << 0.0, 1.0, 0.0;
    p.constraints.push_back(ExpCon{map, off});
    p.constraints.push_back(NonnegCon{unit(2, 0, -1.0), 2.5});
    MatD A(1, 2);
    A << 1.0, -1.0;
    VecD d(1);
    d << 0.25;
    p.constraints.push_back(SocCon{A, d, unit(2, 0), 1.0});

    auto q = program_from_json(to_json(p));
    auto s1 = solve(p), s2 = solve(q);
    CHECK(s1.status == s2.status);
    CHECK(s1.objective_value == Catch::Approx(s2.objective_value).margin(1e-12));
}

TEST_CASE("exp cone barrier derivatives match finite differences") {
    ConeBlock c{ConeKind::Exp, 0, 3};
    VecD s(3);
    s << -0.3, 0.7, 2.1;
    REQUIRE(cone_primal_interior(c, s));
    VecD g(3);
    cone_grad(c, s, g);
    MatD H(3, 3);
    cone_hess(c, s, H);
    auto barrier = [](const VecD& v) {
        const double r = v[1] * std::log(v[2] / v[1]) - v[0];
        return -std::log(r) - std::log(v[1]) - std::log(v[2]);
    };
    const double h = 1e-6;
    for (int i = 0; i < 3; ++i) {
        VecD up = s, dn = s;
        up[i] += h;
        dn[i] -= h;
        CHECK(g[i] == Catch::Approx((barrier(up) - barrier(dn)) / (2 * h)).epsilon(1e-5));
        VecD gu(3), gd(3);
        cone_grad(c, up, gu);
        cone_grad(c, dn, gd);
        for (int j = 0; j < 3; ++j)
            CHECK(H(i, j) == Catch::Approx((gu[j] - gd[j]) / (2 * h)).epsilon(1e-4).margin(1e-7));
    }
}

TEST_CASE("soc barrier derivatives match finite differences") {
    ConeBlock c{ConeKind::Soc, 0, 4};
    VecD s(4);
    s << 2.0, 0.3, -0.8, 0.5;
    REQUIRE(cone_primal_interior(c, s));
    VecD g(4);
    cone_grad(c, s, g);
    MatD H(4, 4);
    cone_hess(c, s, H);
    auto barrier = [](const VecD& v) {
        return -std::log(v[0] * v[0] - v.tail(3).squaredNorm());
    };
    const double h = 1e-6;
    for (int i = 0; i < 4; ++i) {
        VecD up = s, dn = s;
        up[i] += h;
        dn[i] -= h;
        CHECK(g[i] == Catch::Approx((barrier(up) - barrier(dn)) / (2 * h)).epsilon(1e-5));
        VecD gu(4), gd(4);
        cone_grad(c, up, gu);
        cone_grad(c, dn, gd);
        for (int j = 0; j < 4; ++j)
            CHECK(H(i, j) == Catch::Approx((gu[j] - gd[j]) / (2 * h)).epsilon(1e-4).margin(1e-7));
    }
}
