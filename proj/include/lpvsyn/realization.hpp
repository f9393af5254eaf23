#pragma once

#include <optional>
#include <vector>

#include "lpvsyn/controller_param.hpp"

namespace lpvsyn {

// Executable scheduled filter u = N_K(p) D_K(p)^{-1} e for pulse bases:
//   zeta_k = e_k - sum_{i=1..nD} v_i(p_k) zeta_{k-i}
//   u_k    = sum_{i=0..nN} w_i(p_k) zeta_{k-i}
// Scheduling coefficients are evaluated at the current sample.
class ScheduledFilter {
public:
    explicit ScheduledFilter(const ControllerParameterization& param);

    double step(double e, double p);
    void reset();

    double Ts() const { return param_.denBasis.Ts; }
    int num_order() const { return param_.numBasis.order; }
    int den_order() const { return param_.denBasis.order; }

    // Feedthrough w_0(p): needed to resolve algebraic loops against plants
    // with direct feedthrough.
    double feedthrough(double p) const;
    // Contribution of the stored state to the next output at scheduling p,
    // i.e. step(e, p) == feedthrough(p)*e + state_output(p).
    double state_output(double p) const;

    // Optional admissible scheduling interval; when set, step() rejects p
    // outside it.
    void set_range(double pmin, double pmax);

private:
    ControllerParameterization param_;
    std::vector<double> zeta_;  // zeta_{k-1}, ..., zeta_{k-nD}
    std::optional<std::pair<double, double>> range_;
};

// Builds the filter; only pulse bases have the FIR/monic structure the
// recursion implements.
ScheduledFilter realize(const ControllerParameterization& param);

}  // namespace lpvsyn
