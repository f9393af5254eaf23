#pragma once

#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "lpvsyn/controller_param.hpp"
#include "lpvsyn/frf_data.hpp"
#include "lpvsyn/lti.hpp"

namespace lpvsyn::testing {

// controllable-canonical plant with the given poles (plus random zeros/gain)
inline StateSpaceModel plant_from_poles(const std::vector<double>& poles, std::mt19937& rng,
                                        double Ts = 1.0) {
    const int n = static_cast<int>(poles.size());
    // char poly from roots
    std::vector<double> a{1.0};
    for (double r : poles) {
        std::vector<double> next(a.size() + 1, 0.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            next[i] += a[i];
            next[i + 1] -= a[i] * r;
        }
        a = next;
    }
    StateSpaceModel m;
    m.A = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) m.A(0, i) = -a[i + 1];
    for (int i = 1; i < n; ++i) m.A(i, i - 1) = 1.0;
    m.B = Eigen::VectorXd::Zero(n);
    m.B(0) = 1.0;
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    m.C = Eigen::RowVectorXd::NullaryExpr(n, [&](Eigen::Index) { return unif(rng); });
    if (m.C.cwiseAbs().maxCoeff() < 0.1) m.C(0) = 1.0;
    m.D = 0.0;
    m.domain = Domain::Discrete;
    m.Ts = Ts;
    return m;
}

// FIR gain-schedule holder: N = fir coefficients, D = 1, evaluated at p = 0
inline ControllerParameterization fir_controller(const std::vector<double>& taps, double Ts) {
    const int order = static_cast<int>(taps.size()) - 1;
    ControllerParameterization c = ControllerParameterization::pulse(order, order, Ts);
    for (int i = 0; i <= order; ++i) c.w(i, 0) = taps[i];
    return c;
}

// spectral radius of the closed loop u = K(r - y) with an FIR-ratio controller
// zeta_k = e_k - v_{1..} . past, u_k = w_0 zeta_k + w_{1..} . past
inline double closed_loop_rho(const StateSpaceModel& plant, const Eigen::VectorXd& wi,
                              const Eigen::VectorXd& vi) {
    const int n = plant.order();
    const int nD = static_cast<int>(vi.size()) - 1;
    const int nN = static_cast<int>(wi.size()) - 1;
    Eigen::MatrixXd AK = Eigen::MatrixXd::Zero(nD, nD);
    for (int i = 0; i < nD; ++i) AK(0, i) = -vi[i + 1];
    for (int i = 1; i < nD; ++i) AK(i, i - 1) = 1.0;
    Eigen::VectorXd BK = Eigen::VectorXd::Zero(nD);
    BK(0) = 1.0;
    Eigen::RowVectorXd CK = Eigen::RowVectorXd::Zero(nD);
    for (int i = 1; i <= nD; ++i) {
        const double wc = i <= nN ? wi[i] : 0.0;
        CK(i - 1) = wc - wi[0] * vi[i];
    }
    const double DK = wi[0];
    Eigen::MatrixXd Acl(n + nD, n + nD);
    Acl.topLeftCorner(n, n) = plant.A - plant.B * DK * plant.C;
    Acl.topRightCorner(n, nD) = plant.B * CK;
    Acl.bottomLeftCorner(nD, n) = -BK * plant.C;
    Acl.bottomRightCorner(nD, nD) = AK;
    return Acl.eigenvalues().cwiseAbs().maxCoeff();
}

// single-operating-point dataset of a plant's coprime factors
inline FrfDataset dataset_from_plant(const StateSpaceModel& plant, const FrequencyGrid& grid) {
    const CoprimeFactorModels fac = coprime_factorize(plant);
    FrfDataset ds;
    ds.grid = grid;
    ds.points = OperatingPointSet{{0.0}, 0.0, 1.0};
    const auto N = eval_frf(fac.Nss, grid);
    const auto D = eval_frf(fac.Dss, grid);
    ds.samplesN.resize(grid.size(), 1);
    ds.samplesD.resize(grid.size(), 1);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        ds.samplesN(k, 0) = N[k];
        ds.samplesD(k, 0) = D[k];
    }
    return ds;
}

// published benchmark gain-schedule coefficients (pulse order 5, psi = {1, p})
inline ControllerParameterization baseline_controller(double Ts = 0.005) {
    ControllerParameterization c = ControllerParameterization::pulse(5, 5, Ts);
    c.w << 143.74, 74.97, -113.36, -6.25, -24.37, -72.88, -40.16, -44.02, -72.00, -6.82, 106.74,
        55.59;
    c.v << 1.0, 0.0, -0.51, 0.39, -0.017, -0.25, -0.24, -0.13, -0.19, -0.25, -0.049, 0.24;
    c.validate();
    return c;
}

}  // namespace lpvsyn::testing
