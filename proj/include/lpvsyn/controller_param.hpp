#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpvsyn/frf_data.hpp"

namespace lpvsyn {

// Stable basis transfer functions phi_i with phi_0 = 1. The pulse basis is
// phi_i(z) = z^-i; user-supplied rational bases must be stable and proper.
struct ObfBasis {
    enum class Kind { Pulse, UserRational };
    Kind kind = Kind::Pulse;
    int order = 5;  // number of non-constant bases
    double Ts = 0.005;

    // user rational bases, one per i = 1..order, as z^-1 polynomial pairs
    struct Rational {
        std::vector<double> num, den;
    };
    std::vector<Rational> user;

    void validate() const;
    Complex eval(int i, double omega) const;  // phi_i(e^{i w Ts})
};

// Scheduling functions psi_l(p) with psi_1 = 1.
struct SchedulingBasis {
    enum class Kind { Affine, Polynomial, Table };
    Kind kind = Kind::Affine;
    int m = 2;

    // Table kind: psi values tabulated at specific operating points only.
    std::vector<double> table_points;          // p values
    Eigen::MatrixXd table_values;              // m x |table_points|

    static SchedulingBasis affine();
    static SchedulingBasis polynomial(int degree);

    void validate() const;
    Eigen::VectorXd eval(double p) const;  // (psi_1(p), ..., psi_m(p))
};

enum class Factor { N, D };

// Affine functional over the free parameter vector theta:
// value(theta) = row . theta + offset.
struct RegressorRow {
    Eigen::RowVectorXcd row;
    Complex offset;
};

// Controller factors N_K, D_K as scheduling-dependent basis combinations.
// Coefficient matrices are (order+1) x m; row 0 of v is pinned to (1, 0, ...)
// so D_K is monic and its inverse well-defined.
struct ControllerParameterization {
    ObfBasis numBasis;
    ObfBasis denBasis;
    SchedulingBasis sched;
    Eigen::MatrixXd w;  // (nN+1) x m
    Eigen::MatrixXd v;  // (nD+1) x m

    static ControllerParameterization pulse(int nN, int nD, double Ts,
                                            SchedulingBasis sched = SchedulingBasis::affine());

    void validate() const;

    // Free parameters: all of w, then rows 1..nD of v, row-major.
    int theta_dim() const;
    Eigen::VectorXd to_theta() const;
    void from_theta(const Eigen::VectorXd& theta);

    Complex eval_factor(Factor which, double omega, double p) const;
    RegressorRow regressor_row(Factor which, double omega, double p) const;

    // w_i(p), v_i(p) for the realization.
    Eigen::VectorXd num_coefficients(double p) const;
    Eigen::VectorXd den_coefficients(double p) const;

    void save_json(const std::string& path) const;
    static ControllerParameterization load_json(const std::string& path);
};

}  // namespace lpvsyn
