#include "lpvsyn/disk_benchmark.hpp"

#include <cmath>

namespace lpvsyn {

void LpvStateSpace::validate() const {
    const int n = order();
    if (A1.rows() != n || A1.cols() != n || A0.cols() != n || B0.size() != n || B1.size() != n ||
        C0.size() != n || C1.size() != n)
        throw InvalidArgument("LPV matrix dimension mismatch");
    if (!(pmax > pmin)) throw InvalidArgument("empty scheduling range");
}

void DiskParameters::validate() const {
    for (double v : {K, R, L, J, b, M, l, g})
        if (!(v > 0) || !std::isfinite(v)) throw InvalidArgument("disk parameters must be positive");
}

LpvStateSpace build_unbalanced_disk(const DiskParameters& prm) {
    prm.validate();
    LpvStateSpace s;
    s.A0 = Eigen::MatrixXd::Zero(3, 3);
    s.A0 << 0.0, 1.0, 0.0,
            0.0, -prm.b / prm.J, prm.K / prm.J,
            0.0, -prm.K / prm.L, -prm.R / prm.L;
    s.A1 = Eigen::MatrixXd::Zero(3, 3);
    s.A1(1, 0) = prm.M * prm.g * prm.l / prm.J;  // gravity stiffness scaled by p
    s.B0 = Eigen::Vector3d(0.0, 0.0, 1.0 / prm.L);
    s.B1 = Eigen::Vector3d::Zero();
    s.C0 = Eigen::RowVector3d(1.0, 0.0, 0.0);
    s.C1 = Eigen::RowVector3d::Zero();
    s.D0 = s.D1 = 0.0;
    s.pmin = 0.0;
    s.pmax = 1.0;
    return s;
}

StateSpaceModel freeze(const LpvStateSpace& lpv, double p) {
    lpv.validate();
    if (p < lpv.pmin - 1e-12 || p > lpv.pmax + 1e-12)
        throw OutOfRange("scheduling value " + std::to_string(p) + " outside range");
    StateSpaceModel m;
    m.A = lpv.A0 + p * lpv.A1;
    m.B = lpv.B0 + p * lpv.B1;
    m.C = lpv.C0 + p * lpv.C1;
    m.D = lpv.D0 + p * lpv.D1;
    m.domain = Domain::Continuous;
    m.validate();
    return m;
}

FrfDataset generate_dataset(const LpvStateSpace& lpv, double Ts, const FrequencyGrid& grid,
                            const OperatingPointSet& points) {
    grid.validate();
    points.validate();
    if (grid.domain != Domain::Discrete || std::abs(grid.Ts - Ts) > 1e-15)
        throw InvalidArgument("dataset grid must be discrete with matching Ts");
    FrfDataset ds;
    ds.grid = grid;
    ds.points = points;
    const auto nw = static_cast<Eigen::Index>(grid.size());
    const auto np = static_cast<Eigen::Index>(points.size());
    ds.samplesN.resize(nw, np);
    ds.samplesD.resize(nw, np);
    for (Eigen::Index t = 0; t < np; ++t) {
        const StateSpaceModel frozen = freeze(lpv, points.points[t]);
        const StateSpaceModel discrete = c2d_zoh(frozen, Ts);
        const CoprimeFactorModels fac = coprime_factorize(discrete);
        const auto N = eval_frf(fac.Nss, grid);
        const auto D = eval_frf(fac.Dss, grid);
        for (Eigen::Index k = 0; k < nw; ++k) {
            ds.samplesN(k, t) = N[k];
            ds.samplesD(k, t) = D[k];
        }
    }
    ds.validate();
    return ds;
}

double sinc(double x) {
    if (x == 0.0) return 1.0;
    return std::sin(x) / x;
}

}  // namespace lpvsyn
