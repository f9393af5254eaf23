#include <doctest.h>

#include <filesystem>
#include <random>

#include "lpvsyn/controller_param.hpp"

using namespace lpvsyn;

namespace {

// gain-schedule coefficients published for this benchmark; used across tests
// as a fixed nontrivial controller
Eigen::MatrixXd baseline_w() {
    Eigen::MatrixXd w(6, 2);
    w << 143.74, 74.97, -113.36, -6.25, -24.37, -72.88, -40.16, -44.02, -72.00, -6.82, 106.74,
        55.59;
    return w;
}

Eigen::MatrixXd baseline_v() {
    Eigen::MatrixXd v(6, 2);
    v << 1.0, 0.0, -0.51, 0.39, -0.017, -0.25, -0.24, -0.13, -0.19, -0.25, -0.049, 0.24;
    return v;
}

ControllerParameterization baseline() {
    ControllerParameterization c = ControllerParameterization::pulse(5, 5, 0.005);
    c.w = baseline_w();
    c.v = baseline_v();
    c.validate();
    return c;
}

}  // namespace

TEST_CASE("theta bookkeeping of the benchmark structure") {
    const ControllerParameterization c = ControllerParameterization::pulse(5, 5, 0.005);
    CHECK(c.theta_dim() == 22);  // 12 free w entries + 10 free v entries
    CHECK(c.v(0, 0) == 1.0);
    CHECK(c.v(0, 1) == 0.0);
}

TEST_CASE("theta = 0 gives D = 1, N = 0") {
    const ControllerParameterization c = ControllerParameterization::pulse(5, 5, 0.005);
    for (double w : {0.01, 10.0, 500.0})
        for (double p : {0.0, 0.5, 1.0}) {
            CHECK(std::abs(c.eval_factor(Factor::D, w, p) - 1.0) < 1e-14);
            CHECK(std::abs(c.eval_factor(Factor::N, w, p)) == 0.0);
        }
}

TEST_CASE("first-order pulse numerator cancels at the Nyquist frequency") {
    ControllerParameterization c = ControllerParameterization::pulse(1, 1, 1.0);
    c.w(0, 0) = 1.0;
    c.w(1, 0) = 1.0;
    // N = 1 + z^{-1} = 0 at w Ts = pi
    CHECK(std::abs(c.eval_factor(Factor::N, M_PI, 0.3)) < 1e-14);
}

TEST_CASE("baseline coefficients at p = 1, omega = 0") {
    const ControllerParameterization c = baseline();
    // oracle: direct summation of the coefficient table
    double dsum = 0.0, nsum = 0.0;
    for (int i = 0; i <= 5; ++i) {
        dsum += baseline_v()(i, 0) + baseline_v()(i, 1);
        nsum += baseline_w()(i, 0) + baseline_w()(i, 1);
    }
    CHECK(dsum == doctest::Approx(-0.006).epsilon(1e-9));
    const Complex D = c.eval_factor(Factor::D, 0.0, 1.0);
    CHECK(D.real() == doctest::Approx(dsum).epsilon(1e-12));
    CHECK(std::abs(D.imag()) < 1e-14);
    const Complex N = c.eval_factor(Factor::N, 0.0, 1.0);
    CHECK(N.real() == doctest::Approx(nsum).epsilon(1e-12));
}

TEST_CASE("regressor rows: offsets and linearity against direct evaluation") {
    const ControllerParameterization base = ControllerParameterization::pulse(5, 5, 0.005);
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);

    const double omega = 17.3, p = 0.62;
    const RegressorRow rn = base.regressor_row(Factor::N, omega, p);
    const RegressorRow rd = base.regressor_row(Factor::D, omega, p);
    CHECK(rn.offset == Complex(0.0, 0.0));
    CHECK(rd.offset == Complex(1.0, 0.0));
    CHECK(rn.row.size() == 22);

    for (int trial = 0; trial < 100; ++trial) {
        Eigen::VectorXd theta(22);
        for (int i = 0; i < 22; ++i) theta[i] = unif(rng);
        ControllerParameterization c = base;
        c.from_theta(theta);
        const Complex nv = c.eval_factor(Factor::N, omega, p);
        const Complex dv = c.eval_factor(Factor::D, omega, p);
        const Complex nr = (rn.row * theta)(0) + rn.offset;
        const Complex dr = (rd.row * theta)(0) + rd.offset;
        CHECK(std::abs(nv - nr) < 1e-12 * (1.0 + std::abs(nv)));
        CHECK(std::abs(dv - dr) < 1e-12 * (1.0 + std::abs(dv)));
    }
}

TEST_CASE("theta round trip") {
    ControllerParameterization c = baseline();
    const Eigen::VectorXd th = c.to_theta();
    ControllerParameterization c2 = ControllerParameterization::pulse(5, 5, 0.005);
    c2.from_theta(th);
    CHECK(c2.w == c.w);
    CHECK(c2.v == c.v);
}

TEST_CASE("monic pinning is enforced") {
    ControllerParameterization c = ControllerParameterization::pulse(2, 2, 0.01);
    c.v(0, 0) = 2.0;
    CHECK_THROWS(c.validate());
    c.v(0, 0) = 1.0;
    c.v(0, 1) = 0.5;
    CHECK_THROWS(c.validate());
}

TEST_CASE("scheduling bases") {
    const SchedulingBasis aff = SchedulingBasis::affine();
    const Eigen::VectorXd pa = aff.eval(0.7);
    CHECK(pa[0] == 1.0);
    CHECK(pa[1] == 0.7);

    const SchedulingBasis poly = SchedulingBasis::polynomial(3);
    const Eigen::VectorXd pp = poly.eval(2.0);
    CHECK(pp.size() == 4);
    CHECK(pp[3] == 8.0);

    SchedulingBasis tab;
    tab.kind = SchedulingBasis::Kind::Table;
    tab.m = 2;
    tab.table_points = {0.0, 1.0};
    tab.table_values.resize(2, 2);
    tab.table_values << 1.0, 1.0, 0.2, 0.9;
    tab.validate();
    CHECK(tab.eval(1.0)[1] == 0.9);
    CHECK_THROWS_AS(tab.eval(0.5), OutOfRange);
}

TEST_CASE("user rational basis stability gate") {
    ObfBasis basis;
    basis.kind = ObfBasis::Kind::UserRational;
    basis.order = 1;
    basis.Ts = 0.01;
    basis.user = {{{1.0}, {1.0, -1.2}}};  // pole outside the unit circle
    CHECK_THROWS_AS(basis.validate(), UnsupportedBasis);
    basis.user = {{{1.0}, {1.0, -0.4}}};
    CHECK_NOTHROW(basis.validate());
}

TEST_CASE("controller JSON round trip") {
    const ControllerParameterization c = baseline();
    const auto path = (std::filesystem::temp_directory_path() / "lpvsyn_ctrl.json").string();
    c.save_json(path);
    const ControllerParameterization c2 = ControllerParameterization::load_json(path);
    CHECK(c2.w == c.w);
    CHECK(c2.v == c.v);
    CHECK(c2.numBasis.order == 5);
    CHECK(c2.sched.m == 2);
}
