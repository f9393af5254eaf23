#include "lpvsyn/realization.hpp"

#include <algorithm>

namespace lpvsyn {

ScheduledFilter::ScheduledFilter(const ControllerParameterization& param) : param_(param) {
    param_.validate();
    if (param_.numBasis.kind != ObfBasis::Kind::Pulse ||
        param_.denBasis.kind != ObfBasis::Kind::Pulse)
        throw UnsupportedBasis("realization covers pulse bases; general OBF inversion is not built");
    zeta_.assign(param_.denBasis.order, 0.0);
}

void ScheduledFilter::reset() { std::fill(zeta_.begin(), zeta_.end(), 0.0); }

double ScheduledFilter::feedthrough(double p) const { return param_.num_coefficients(p)[0]; }

double ScheduledFilter::state_output(double p) const {
    const Eigen::VectorXd wi = param_.num_coefficients(p);
    const Eigen::VectorXd vi = param_.den_coefficients(p);
    const int nN = param_.numBasis.order, nD = param_.denBasis.order;
    double acc = 0.0;
    for (int i = 1; i <= nD; ++i) {
        const double wcoef = i <= nN ? wi[i] : 0.0;
        acc += (wcoef - wi[0] * vi[i]) * zeta_[i - 1];
    }
    return acc;
}

double ScheduledFilter::step(double e, double p) {
    if (range_ && (p < range_->first - 1e-12 || p > range_->second + 1e-12))
        throw OutOfRange("scheduling sample " + std::to_string(p));
    const Eigen::VectorXd wi = param_.num_coefficients(p);
    const Eigen::VectorXd vi = param_.den_coefficients(p);
    const int nN = param_.numBasis.order, nD = param_.denBasis.order;
    double zeta = e;
    for (int i = 1; i <= nD; ++i) zeta -= vi[i] * zeta_[i - 1];
    double u = wi[0] * zeta;
    for (int i = 1; i <= nN; ++i) u += wi[i] * zeta_[i - 1];
    // shift the ring of past intermediate samples
    for (int i = nD - 1; i > 0; --i) zeta_[i] = zeta_[i - 1];
    if (nD > 0) zeta_[0] = zeta;
    return u;
}

void ScheduledFilter::set_range(double pmin, double pmax) {
    if (!(pmax > pmin)) throw InvalidArgument("empty scheduling range");
    range_ = {pmin, pmax};
}

ScheduledFilter realize(const ControllerParameterization& param) { return ScheduledFilter(param); }

}  // namespace lpvsyn
