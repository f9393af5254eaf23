#include <doctest.h>

#include <fstream>
#include <random>

#include "lpvsyn/disk_benchmark.hpp"
#include "lpvsyn/synthesis.hpp"
#include "test_helpers.hpp"

using namespace lpvsyn;

namespace {

RegressorRow random_row(std::mt19937& rng, int n, bool with_offset) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    RegressorRow r;
    r.row = Eigen::RowVectorXcd::NullaryExpr(
        n, [&](Eigen::Index) { return Complex(unif(rng), unif(rng)); });
    r.offset = with_offset ? Complex(1.0, 0.0) : Complex(0.0, 0.0);
    return r;
}

SynthesisProblem small_benchmark_problem(int nfreq = 36, int npts = 3) {
    SynthesisProblem prob;
    const LpvStateSpace lpv = build_unbalanced_disk(DiskParameters{});
    const double Ts = 0.005;
    const FrequencyGrid grid =
        FrequencyGrid::log_spaced(1e-2, 200.0 * M_PI, nfreq, Domain::Discrete, Ts);
    prob.data = generate_dataset(lpv, Ts, grid, OperatingPointSet::equidistant(0.0, 1.0, npts));
    prob.weights = WeightSet::defaults(Ts);
    prob.param = ControllerParameterization::pulse(5, 5, Ts);
    return prob;
}

}  // namespace

TEST_CASE("channel factors: open loop and zero plant") {
    const ControllerParameterization param = ControllerParameterization::pulse(5, 5, 0.005);
    const RegressorRow rowN = param.regressor_row(Factor::N, 3.0, 0.5);
    const RegressorRow rowD = param.regressor_row(Factor::D, 3.0, 0.5);
    const Complex Ng(0.4, -0.2), Dg(0.9, 0.3);
    const Eigen::VectorXd theta0 = Eigen::VectorXd::Zero(22);

    // K = 0: Dp = Dg, Np(S) = Dg
    const ChannelFactors s = channel_factors(Ng, Dg, rowN, rowD, Channel::S);
    CHECK(std::abs((s.Dp.row * theta0)(0) + s.Dp.offset - Dg) < 1e-15);
    CHECK(std::abs((s.Np.row * theta0)(0) + s.Np.offset - Dg) < 1e-15);

    // zero plant: Np(T) identically 0
    const ChannelFactors t = channel_factors(Complex(0, 0), Dg, rowN, rowD, Channel::T);
    CHECK(t.Np.row.cwiseAbs().maxCoeff() == 0.0);
    CHECK(t.Np.offset == Complex(0, 0));
}

TEST_CASE("four-block identity on random probes") {
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 8;
        const RegressorRow rowN = random_row(rng, n, false);
        const RegressorRow rowD = random_row(rng, n, true);
        const Complex Ng(unif(rng), unif(rng)), Dg(unif(rng), unif(rng));
        Eigen::VectorXd theta =
            Eigen::VectorXd::NullaryExpr(n, [&](Eigen::Index) { return unif(rng); });
        auto value = [&](Channel ch) {
            const ChannelFactors cf = channel_factors(Ng, Dg, rowN, rowD, ch);
            return (cf.Np.row * theta)(0) + cf.Np.offset;
        };
        const Complex lhs = value(Channel::S) * value(Channel::T);
        const Complex rhs = value(Channel::SG) * value(Channel::KS);
        CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + std::abs(lhs) + std::abs(rhs)));
    }
}

TEST_CASE("assemble counts cones and variables") {
    SynthesisProblem prob;
    const LpvStateSpace lpv = build_unbalanced_disk(DiskParameters{});
    const double Ts = 0.005;
    const FrequencyGrid grid = FrequencyGrid::discrete({1.0}, Ts);
    prob.data = generate_dataset(lpv, Ts, grid, OperatingPointSet{{0.5}, 0.0, 1.0});
    prob.weights = WeightSet::defaults(Ts);
    prob.param = ControllerParameterization::pulse(5, 5, Ts);
    prob.channels = {Channel::S};
    const ConicProgram prog = assemble(prob, 1.0);
    // one constraint cone plus the slack-cap cone
    CHECK(prog.cones.size() == 2);
    // theta + slack + (t,x,y) + cap pair
    CHECK(prog.num_vars == 22 + 1 + 3 + 2);
    CHECK(prog.Aeq.rows() == 3 + 2);
}

TEST_CASE("benchmark-scale assembly has grid x points x channels cones") {
    const SynthesisProblem prob = small_benchmark_problem(25, 2);
    const ConicProgram prog = assemble(prob, 1.0);
    CHECK(prog.cones.size() == 25 * 2 * 4 + 1);
}

TEST_CASE("zero weights degenerate to a positivity feasibility test") {
    SynthesisProblem prob;
    FrfDataset ds;
    ds.grid = FrequencyGrid::discrete({0.5, 1.0, 2.0}, 1.0);
    ds.points = OperatingPointSet{{0.0}, 0.0, 1.0};
    ds.samplesN = Eigen::MatrixXcd::Constant(3, 1, Complex(0.2, 0.1));
    ds.samplesD = Eigen::MatrixXcd::Constant(3, 1, Complex(1.0, 0.0));  // Re{Dg} > 0
    prob.data = ds;
    for (Channel c : {Channel::S, Channel::SG, Channel::KS, Channel::T})
        prob.weights.at(c) = Weight::constant(0.0);
    prob.param = ControllerParameterization::pulse(2, 2, 1.0);
    const ConicProgram prog = assemble(prob, 1.0);
    const FeasibilityResult fr = check_feasible(prog, 0.0);
    CHECK(fr.feasible);  // theta = 0 satisfies gamma Re{Dg} > margin
}

TEST_CASE("feasibility is monotone in gamma") {
    const SynthesisProblem prob = small_benchmark_problem(20, 2);
    std::vector<double> gammas{1e-4, 1e-2, 0.3, 1.0, 3.0, 30.0, 1e3};
    bool prev = false;
    for (double g : gammas) {
        const FeasibilityResult fr = check_feasible(assemble(prob, g), 0.0);
        if (prev) CHECK(fr.feasible);  // once feasible, stays feasible
        prev = fr.feasible || prev;
    }
    CHECK(prev);  // feasible at the top of the sweep
}

TEST_CASE("assembled benchmark: feasible at large gamma, infeasible at tiny gamma") {
    const SynthesisProblem prob = small_benchmark_problem(20, 2);
    CHECK(check_feasible(assemble(prob, 10.0), 0.0).feasible);
    CHECK(!check_feasible(assemble(prob, 1e-6), 0.0).feasible);
}

TEST_CASE("bisection terminates with a certified controller") {
    SynthesisProblem prob = small_benchmark_problem(30, 3);
    prob.bisect_tol = 1e-2;
    const SynthesisResult res = bisect(prob);
    CHECK(std::isfinite(res.gamma));
    CHECK(res.gamma > 0);
    CHECK(res.margins.size() == 30 * 3 * 4);
    CHECK(res.worst_margin > 0.0);

    // bracket contract: every infeasible gamma below every feasible gamma
    double max_infeas = 0.0, min_feas = 1e300;
    for (const auto& st : res.iterations) {
        if (st.feasible) min_feas = std::min(min_feas, st.gamma);
        else max_infeas = std::max(max_infeas, st.gamma);
    }
    CHECK(max_infeas < min_feas);
    CHECK(res.gamma == min_feas);

    // margins re-evaluated from data match a fresh evaluation
    const auto again = evaluate_margins(prob, res.gamma, res.theta);
    REQUIRE(again.size() == res.margins.size());
    for (std::size_t i = 0; i < again.size(); ++i)
        CHECK(again[i].margin == res.margins[i].margin);
}

TEST_CASE("overwhelming weights trip InfeasibleAtUpperBound") {
    SynthesisProblem prob = small_benchmark_problem(12, 2);
    for (Channel c : {Channel::S, Channel::SG, Channel::KS, Channel::T})
        prob.weights.at(c) = Weight::constant(1e14);
    prob.gamma_hi = 10.0;
    CHECK_THROWS_AS(bisect(prob), InfeasibleAtUpperBound);
}

TEST_CASE("margins CSV is written") {
    std::vector<ConstraintMargin> ms{{1.0, 0.0, Channel::S, 0.5}, {2.0, 0.5, Channel::T, 0.25}};
    const std::string path = "/tmp/lpvsyn_margins.csv";
    save_margins_csv(ms, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "omega_rad_s,p,channel,margin");
}
