#include "lpvsyn/lti.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>

namespace lpvsyn {

void StateSpaceModel::validate() const {
    const int n = order();
    if (A.cols() != n || B.size() != n || C.size() != n)
        throw InvalidArgument("state-space dimension mismatch");
    if (!A.allFinite() || !B.allFinite() || !C.allFinite() || !std::isfinite(D))
        throw NanSample("non-finite state-space entry");
    if (domain == Domain::Discrete && !(Ts > 0)) throw InvalidArgument("discrete model needs Ts > 0");
}

Eigen::VectorXcd StateSpaceModel::poles() const {
    if (order() == 0) return Eigen::VectorXcd();
    return A.eigenvalues();
}

double StateSpaceModel::spectral_radius() const {
    if (order() == 0) return 0.0;
    return poles().cwiseAbs().maxCoeff();
}

bool StateSpaceModel::is_stable() const {
    if (order() == 0) return true;
    const Eigen::VectorXcd p = poles();
    if (domain == Domain::Discrete) return p.cwiseAbs().maxCoeff() < 1.0;
    return p.real().maxCoeff() < 0.0;
}

StateSpaceModel c2d_zoh(const StateSpaceModel& model, double Ts) {
    model.validate();
    if (model.domain != Domain::Continuous) throw InvalidArgument("c2d_zoh needs a continuous model");
    if (!(Ts > 0)) throw InvalidArgument("Ts must be positive");
    const int n = model.order();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = model.A * Ts;
    aug.topRightCorner(n, 1) = model.B * Ts;
    const Eigen::MatrixXd E = aug.exp();
    if (!E.allFinite()) throw NonFiniteExponential("matrix exponential overflowed");
    StateSpaceModel d;
    d.A = E.topLeftCorner(n, n);
    d.B = E.topRightCorner(n, 1);
    d.C = model.C;
    d.D = model.D;
    d.domain = Domain::Discrete;
    d.Ts = Ts;
    return d;
}

Complex eval_at(const StateSpaceModel& model, Complex lambda) {
    const int n = model.order();
    if (n == 0) return Complex(model.D, 0.0);
    Eigen::MatrixXcd M = -model.A.cast<Complex>();
    M.diagonal().array() += lambda;
    Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
    if (!lu.isInvertible()) throw SingularResolvent("lambda coincides with a system pole");
    const Eigen::VectorXcd x = lu.solve(model.B.cast<Complex>());
    return (model.C.cast<Complex>() * x)(0) + Complex(model.D, 0.0);
}

std::vector<Complex> eval_frf(const StateSpaceModel& model, const FrequencyGrid& grid) {
    if (grid.domain != model.domain)
        throw InvalidArgument("grid domain does not match model domain");
    std::vector<Complex> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = eval_at(model, grid.lambda(k));
    return out;
}

namespace {

constexpr double kRiccatiTol = 1e-13;
constexpr int kRiccatiMaxIter = 200000;

// Discrete Riccati fixed point for Q = I, R = 1.
Eigen::RowVectorXd dlqr_gain(const Eigen::MatrixXd& A, const Eigen::VectorXd& B) {
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXd P = Eigen::MatrixXd::Identity(n, n);
    for (int it = 0; it < kRiccatiMaxIter; ++it) {
        const Eigen::RowVectorXd BtP = B.transpose() * P;
        const double denom = 1.0 + (BtP * B)(0);
        const Eigen::RowVectorXd K = (BtP * A) / denom;
        const Eigen::MatrixXd Pn =
            Eigen::MatrixXd::Identity(n, n) + A.transpose() * P * A - A.transpose() * P * B * K;
        if (!Pn.allFinite() || Pn.norm() > 1e14)
            throw NotStabilizable("Riccati iteration diverged");
        const double delta = (Pn - P).cwiseAbs().maxCoeff();
        P = Pn;
        if (delta <= kRiccatiTol * std::max(1.0, P.cwiseAbs().maxCoeff())) {
            const Eigen::RowVectorXd BtP2 = B.transpose() * P;
            const double den2 = 1.0 + (BtP2 * B)(0);
            return -(BtP2 * A) / den2;
        }
    }
    throw NotStabilizable("Riccati iteration did not converge");
}

}  // namespace

Eigen::RowVectorXd stabilizing_feedback(const StateSpaceModel& model) {
    model.validate();
    if (model.domain != Domain::Discrete)
        throw InvalidArgument("stabilizing_feedback expects a discrete model");
    if (model.order() == 0) return Eigen::RowVectorXd();
    const Eigen::RowVectorXd F = dlqr_gain(model.A, model.B);
    const Eigen::MatrixXd Acl = model.A + model.B * F;
    if (Acl.eigenvalues().cwiseAbs().maxCoeff() >= 1.0)
        throw NotStabilizable("closed loop not Schur after Riccati convergence");
    return F;
}

CoprimeFactorModels coprime_factorize(const StateSpaceModel& model) {
    const Eigen::RowVectorXd F = stabilizing_feedback(model);
    const Eigen::MatrixXd Acl = model.A + model.B * F;
    CoprimeFactorModels fac;
    fac.F = F;
    fac.Nss = {Acl, model.B, model.C + model.D * F, model.D, Domain::Discrete, model.Ts};
    fac.Dss = {Acl, model.B, F, 1.0, Domain::Discrete, model.Ts};
    return fac;
}

StateSpaceModel ss_series(const StateSpaceModel& first, const StateSpaceModel& second) {
    if (first.domain != second.domain) throw InvalidArgument("series: domain mismatch");
    const int n1 = first.order(), n2 = second.order();
    StateSpaceModel s;
    s.A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
    s.A.topLeftCorner(n1, n1) = first.A;
    s.A.bottomLeftCorner(n2, n1) = second.B * first.C;
    s.A.bottomRightCorner(n2, n2) = second.A;
    s.B = Eigen::VectorXd::Zero(n1 + n2);
    s.B.head(n1) = first.B;
    s.B.tail(n2) = second.B * first.D;
    s.C = Eigen::RowVectorXd::Zero(n1 + n2);
    s.C.head(n1) = second.D * first.C;
    s.C.tail(n2) = second.C;
    s.D = second.D * first.D;
    s.domain = first.domain;
    s.Ts = first.Ts;
    return s;
}

StateSpaceModel ss_add(const StateSpaceModel& a, const StateSpaceModel& b) {
    if (a.domain != b.domain) throw InvalidArgument("add: domain mismatch");
    const int n1 = a.order(), n2 = b.order();
    StateSpaceModel s;
    s.A = Eigen::MatrixXd::Zero(n1 + n2, n1 + n2);
    s.A.topLeftCorner(n1, n1) = a.A;
    s.A.bottomRightCorner(n2, n2) = b.A;
    s.B = Eigen::VectorXd::Zero(n1 + n2);
    s.B.head(n1) = a.B;
    s.B.tail(n2) = b.B;
    s.C = Eigen::RowVectorXd::Zero(n1 + n2);
    s.C.head(n1) = a.C;
    s.C.tail(n2) = b.C;
    s.D = a.D + b.D;
    s.domain = a.domain;
    s.Ts = a.Ts;
    return s;
}

StateSpaceModel ss_inverse(const StateSpaceModel& model) {
    if (model.D == 0.0) throw InvalidArgument("inverse needs nonzero feedthrough");
    const double di = 1.0 / model.D;
    StateSpaceModel s;
    s.A = model.A - model.B * di * model.C;
    s.B = model.B * di;
    s.C = -di * model.C;
    s.D = di;
    s.domain = model.domain;
    s.Ts = model.Ts;
    return s;
}

BezoutPair bezout_pair(const CoprimeFactorModels& factors, const StateSpaceModel& plant,
                       const FrequencyGrid& grid, double residual_tol) {
    plant.validate();
    if (plant.domain != Domain::Discrete) throw InvalidArgument("bezout_pair expects a discrete plant");

    // observer gain via the dual Riccati: A + L C Schur
    StateSpaceModel dual;
    dual.A = plant.A.transpose();
    dual.B = plant.C.transpose();
    dual.C = plant.B.transpose();
    dual.D = plant.D;
    dual.domain = Domain::Discrete;
    dual.Ts = plant.Ts;
    Eigen::VectorXd L;
    try {
        L = stabilizing_feedback(dual).transpose();
    } catch (const NotStabilizable& e) {
        throw NotDetectable(e.what());
    }

    // Observer controller K0 = (A+BF+LC+LDF, L, F, 0) in the e -> u convention.
    // Its stable factorization uses the closed-form gain Fk = -(C + D F):
    // (A+BF+LC+LDF) + L Fk = A + B F, so both factors share the Schur matrix.
    const Eigen::RowVectorXd& F = factors.F;
    const Eigen::RowVectorXd Fk = -(plant.C + plant.D * F);
    StateSpaceModel Nk0{plant.A + plant.B * F, L, F, 0.0, Domain::Discrete, plant.Ts};
    StateSpaceModel Dk0{plant.A + plant.B * F, L, Fk, 1.0, Domain::Discrete, plant.Ts};

    // loop characteristic D0 = Dg Dk0 + Ng Nk0, then X = Nk0 D0^{-1}, Y = Dk0 D0^{-1}
    const StateSpaceModel D0 =
        ss_add(ss_series(Dk0, factors.Dss), ss_series(Nk0, factors.Nss));
    const StateSpaceModel D0inv = ss_inverse(D0);

    BezoutPair pair;
    pair.Xss = ss_series(D0inv, Nk0);
    pair.Yss = ss_series(D0inv, Dk0);

    const auto N = eval_frf(factors.Nss, grid);
    const auto D = eval_frf(factors.Dss, grid);
    const auto X = eval_frf(pair.Xss, grid);
    const auto Y = eval_frf(pair.Yss, grid);
    double res = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k)
        res = std::max(res, std::abs(N[k] * X[k] + D[k] * Y[k] - 1.0));
    pair.residual = res;
    if (res > residual_tol)
        throw ResidualTooLarge("Bezout residual " + std::to_string(res));
    return pair;
}

}  // namespace lpvsyn
