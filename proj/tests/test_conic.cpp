#include <doctest.h>

#include <fstream>
#include <random>

#include "lpvsyn/conic.hpp"

using namespace lpvsyn;

namespace {

using Triplet = Eigen::Triplet<double>;

ConicProgram make_program(int nvars, const Eigen::VectorXd& obj,
                          const std::vector<Triplet>& trip, const Eigen::VectorXd& rhs,
                          std::vector<ConeBlock> cones) {
    ConicProgram p;
    p.num_vars = nvars;
    p.objective = obj;
    p.Aeq.resize(rhs.size(), nvars);
    p.Aeq.setFromTriplets(trip.begin(), trip.end());
    p.beq = rhs;
    p.cones = std::move(cones);
    p.validate();
    return p;
}

// min t s.t. t >= ||(x,y)||, x = x0, y = y0
ConicProgram norm_of_point(double x0, double y0) {
    Eigen::VectorXd obj(3);
    obj << 1, 0, 0;
    std::vector<Triplet> trip{{0, 1, 1.0}, {1, 2, 1.0}};
    Eigen::VectorXd rhs(2);
    rhs << x0, y0;
    return make_program(3, obj, trip, rhs, {{{0, 1, 2}}});
}

double cone_violation(const ConicProgram& p, const Eigen::VectorXd& x) {
    double v = 0.0;
    for (const ConeBlock& cb : p.cones) {
        double nr = 0.0;
        for (std::size_t i = 1; i < cb.indices.size(); ++i)
            nr += x[cb.indices[i]] * x[cb.indices[i]];
        v = std::max(v, std::sqrt(nr) - x[cb.indices[0]]);
    }
    return v;
}

}  // namespace

TEST_CASE("norm of a fixed point: sqrt(2)") {
    const ConicProgram p = norm_of_point(1.0, 1.0);
    const ConicSolution sol = solve(p, 1e-9, 100);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.objective == doctest::Approx(std::sqrt(2.0)).epsilon(1e-7));
    CHECK(sol.primal_residual < 1e-7);
    CHECK(sol.dual_residual < 1e-7);
    CHECK(sol.duality_gap < 1e-7);
}

TEST_CASE("equality-only degenerate program") {
    Eigen::VectorXd obj(1);
    obj << 1;
    std::vector<Triplet> trip{{0, 0, 1.0}};
    Eigen::VectorXd rhs(1);
    rhs << 3;
    const ConicProgram p = make_program(1, obj, trip, rhs, {});
    const ConicSolution sol = solve(p);
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.primal[0] == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(sol.objective == doctest::Approx(3.0));
}

TEST_CASE("infeasible cone/equality combination") {
    // t >= ||x|| with t = -1
    Eigen::VectorXd obj = Eigen::VectorXd::Zero(2);
    std::vector<Triplet> trip{{0, 0, 1.0}};
    Eigen::VectorXd rhs(1);
    rhs << -1;
    const ConicProgram p = make_program(2, obj, trip, rhs, {{{0, 1}}});
    const ConicSolution sol = solve(p, 1e-9, 100);
    CHECK(sol.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded direction is certified") {
    // min -t s.t. t >= ||x||: t can grow without bound
    Eigen::VectorXd obj(2);
    obj << -1, 0;
    const ConicProgram p = make_program(2, obj, {}, Eigen::VectorXd(), {{{0, 1}}});
    const ConicSolution sol = solve(p, 1e-9, 100);
    CHECK(sol.status == SolveStatus::Unbounded);
}

TEST_CASE("maxiter is reported, not hidden") {
    const ConicSolution sol = solve(norm_of_point(1.0, 1.0), 1e-16, 1);
    CHECK(sol.status == SolveStatus::MaxIter);
}

TEST_CASE("solution satisfies constraints and weak duality (random programs)") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        // vars: u(2), (t,x,y) pinned to affine maps of u, (rho,u1c,u2c) radius bound
        const int nv = 2 + 3 + 3;
        Eigen::VectorXd obj = Eigen::VectorXd::Zero(nv);
        obj[0] = unif(rng);
        obj[1] = unif(rng);
        std::vector<Triplet> trip;
        Eigen::VectorXd rhs(6);
        // t = 1.5 + 0.2 u1 - 0.1 u2
        trip.insert(trip.end(), {{0, 2, 1.0}, {0, 0, -0.2}, {0, 1, 0.1}});
        rhs[0] = 1.5;
        // x = u1 + u2, y = u1 - u2 + 0.3
        trip.insert(trip.end(), {{1, 3, 1.0}, {1, 0, -1.0}, {1, 1, -1.0}});
        rhs[1] = 0.0;
        trip.insert(trip.end(), {{2, 4, 1.0}, {2, 0, -1.0}, {2, 1, 1.0}});
        rhs[2] = 0.3;
        // rho = 3, u1c = u1, u2c = u2
        trip.insert(trip.end(), {{3, 5, 1.0}});
        rhs[3] = 3.0;
        trip.insert(trip.end(), {{4, 6, 1.0}, {4, 0, -1.0}});
        rhs[4] = 0.0;
        trip.insert(trip.end(), {{5, 7, 1.0}, {5, 1, -1.0}});
        rhs[5] = 0.0;
        const ConicProgram p = make_program(nv, obj, trip, rhs, {{{2, 3, 4}}, {{5, 6, 7}}});
        const ConicSolution sol = solve(p, 1e-9, 200);
        REQUIRE(sol.status == SolveStatus::Optimal);
        CHECK(cone_violation(p, sol.primal) < 1e-7);
        CHECK((p.Aeq * sol.primal - p.beq).lpNorm<Eigen::Infinity>() < 1e-7);
        // weak duality: primal objective >= dual objective - tol
        CHECK(sol.objective >= -p.beq.dot(sol.dual_eq) - 1e-6);
    }
}

TEST_CASE("objective matches a two-stage grid-search oracle") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const double c1 = unif(rng), c2 = unif(rng);
        const double b0 = 2.0 + unif(rng);
        // feasible set: ||(u1, u2)|| <= b0 + 0.3 u1 (an off-center disk)
        const int nv = 2 + 3;
        Eigen::VectorXd obj = Eigen::VectorXd::Zero(nv);
        obj[0] = c1;
        obj[1] = c2;
        std::vector<Triplet> trip{{0, 2, 1.0}, {0, 0, -0.3}, {1, 3, 1.0}, {1, 0, -1.0},
                                  {2, 4, 1.0}, {2, 1, -1.0}};
        Eigen::VectorXd rhs(3);
        rhs << b0, 0.0, 0.0;
        const ConicProgram p = make_program(nv, obj, trip, rhs, {{{2, 3, 4}}});
        const ConicSolution sol = solve(p, 1e-9, 200);
        REQUIRE(sol.status == SolveStatus::Optimal);

        auto feasible = [&](double u1, double u2) {
            return std::sqrt(u1 * u1 + u2 * u2) <= b0 + 0.3 * u1;
        };
        auto sweep = [&](double lo1, double hi1, double lo2, double hi2, int steps) {
            double best = 1e300, b1 = 0, b2 = 0;
            for (int i = 0; i <= steps; ++i)
                for (int j = 0; j <= steps; ++j) {
                    const double u1 = lo1 + (hi1 - lo1) * i / steps;
                    const double u2 = lo2 + (hi2 - lo2) * j / steps;
                    if (!feasible(u1, u2)) continue;
                    const double v = c1 * u1 + c2 * u2;
                    if (v < best) {
                        best = v;
                        b1 = u1;
                        b2 = u2;
                    }
                }
            return std::tuple{best, b1, b2};
        };
        auto [coarse, u1c, u2c] = sweep(-6, 6, -6, 6, 600);
        auto [fine, u1f, u2f] = sweep(u1c - 0.05, u1c + 0.05, u2c - 0.05, u2c + 0.05, 400);
        (void)coarse; (void)u1f; (void)u2f;
        CHECK(sol.objective == doctest::Approx(fine).epsilon(2e-4));
    }
}

TEST_CASE("check_feasible: cone nonnegativity") {
    Eigen::VectorXd obj = Eigen::VectorXd::Zero(2);
    std::vector<Triplet> trip{{0, 0, 1.0}};
    Eigen::VectorXd rhs(1);
    rhs << -1;
    const ConicProgram bad = make_program(2, obj, trip, rhs, {{{0, 1}}});
    const FeasibilityResult fr = check_feasible(bad, 1e-9);
    CHECK(!fr.feasible);

    rhs << 1;
    const ConicProgram good = make_program(2, obj, trip, rhs, {{{0, 1}}});
    const FeasibilityResult fg = check_feasible(good, 1e-9);
    CHECK(fg.feasible);
    CHECK(fg.witness[0] == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(std::abs(fg.witness[1]) < 1e-6);
}

TEST_CASE("deterministic: identical inputs give identical outputs") {
    const ConicProgram p = norm_of_point(0.3, -0.7);
    const ConicSolution a = solve(p, 1e-9, 100);
    const ConicSolution b = solve(p, 1e-9, 100);
    REQUIRE(a.status == b.status);
    CHECK(a.primal == b.primal);
    CHECK(a.dual_eq == b.dual_eq);
    CHECK(a.iterations == b.iterations);
}

TEST_CASE("ill-formed programs are rejected") {
    ConicProgram p;
    p.num_vars = 2;
    p.objective = Eigen::VectorXd::Zero(2);
    p.cones = {{{0}}};  // dim 1
    CHECK_THROWS_AS(p.validate(), IllFormedProgram);
    p.cones = {{{0, 0}}};  // repeated index
    CHECK_THROWS_AS(p.validate(), IllFormedProgram);
    p.cones = {{{0, 5}}};  // out of range
    CHECK_THROWS_AS(p.validate(), IllFormedProgram);
}

TEST_CASE("program dump is parseable text") {
    const ConicProgram p = norm_of_point(1.0, 2.0);
    const auto path = std::string("/tmp/lpvsyn_prog.txt");
    p.dump(path);
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    CHECK(first == "vars 3");
}
