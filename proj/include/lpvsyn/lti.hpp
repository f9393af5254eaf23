#pragma once

#include <vector>

#include <Eigen/Dense>

#include "lpvsyn/frf_data.hpp"

namespace lpvsyn {

// SISO state-space model x' = Ax + Bu, y = Cx + Du (continuous) or the
// shift analogue (discrete with sampling time Ts).
struct StateSpaceModel {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;
    Domain domain = Domain::Continuous;
    double Ts = 0.0;

    int order() const { return static_cast<int>(A.rows()); }
    void validate() const;

    Eigen::VectorXcd poles() const;
    double spectral_radius() const;  // of A
    bool is_stable() const;          // unit disk (discrete) / open LHP (continuous)
};

// Stable factors of G = N D^{-1} sharing the closed-loop matrix A + B F.
struct CoprimeFactorModels {
    StateSpaceModel Nss;
    StateSpaceModel Dss;
    Eigen::RowVectorXd F;
};

// X, Y stable with N X + D Y = 1 on the frequency axis.
struct BezoutPair {
    StateSpaceModel Xss;
    StateSpaceModel Yss;
    double residual = 0.0;  // max_w |N X + D Y - 1| over the grid used to verify
};

// Exact zero-order-hold discretization via the augmented matrix exponential.
StateSpaceModel c2d_zoh(const StateSpaceModel& model, double Ts);

// C (lambda I - A)^{-1} B + D at a single point.
Complex eval_at(const StateSpaceModel& model, Complex lambda);
// Response over a whole grid; the grid domain must match the model domain.
std::vector<Complex> eval_frf(const StateSpaceModel& model, const FrequencyGrid& grid);

// Discrete LQR gain with Q = I, R = 1, by Riccati fixed-point iteration.
// Returns F such that A + B F is Schur.
Eigen::RowVectorXd stabilizing_feedback(const StateSpaceModel& model);

// N = (A+BF, B, C+DF, D), Dfac = (A+BF, B, F, 1).
CoprimeFactorModels coprime_factorize(const StateSpaceModel& model);

// Observer-based Bezout companions: an observer controller K0 is factored,
// the loop characteristic D0 = Dg Dk0 + Ng Nk0 inverted, X = Nk0 D0^{-1},
// Y = Dk0 D0^{-1}. Residual checked on `grid`.
BezoutPair bezout_pair(const CoprimeFactorModels& factors, const StateSpaceModel& plant,
                       const FrequencyGrid& grid, double residual_tol = 1e-6);

// Structural composition helpers.
StateSpaceModel ss_series(const StateSpaceModel& first, const StateSpaceModel& second);
StateSpaceModel ss_add(const StateSpaceModel& a, const StateSpaceModel& b);
StateSpaceModel ss_inverse(const StateSpaceModel& model);  // requires D != 0

}  // namespace lpvsyn
