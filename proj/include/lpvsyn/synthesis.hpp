#pragma once

#include <vector>

#include "lpvsyn/conic.hpp"
#include "lpvsyn/controller_param.hpp"
#include "lpvsyn/frf_data.hpp"
#include "lpvsyn/weights.hpp"

namespace lpvsyn {

// Numerator/denominator of one closed-loop channel as affine functionals of
// the controller parameter vector theta.
struct ChannelFactors {
    RegressorRow Np;
    RegressorRow Dp;
};

// Dp = Dg Dk + Ng Nk; Np picks the four-block entry for the channel.
ChannelFactors channel_factors(Complex Ng, Complex Dg, const RegressorRow& rowN,
                               const RegressorRow& rowD, Channel channel);

struct SynthesisProblem {
    FrfDataset data;
    WeightSet weights;
    ControllerParameterization param;
    std::vector<Channel> channels{Channel::S, Channel::SG, Channel::KS, Channel::T};
    double margin_rel = 1e-6;   // strict ">" floor, as a fraction of gamma
    double gamma_lo = 1e-2;
    double gamma_hi = 1e3;
    double bisect_tol = 1e-3;   // relative bracket width
    double slack_cap = 1e3;

    void validate() const;
};

struct ConstraintMargin {
    double omega;
    double p;
    Channel channel;
    double margin;  // gamma*Re(Dp) - |W Np| at the returned theta
};

struct BisectionStep {
    double gamma;
    bool feasible;
    double slack;
};

struct SynthesisResult {
    double gamma = 0.0;
    Eigen::VectorXd theta;
    ControllerParameterization controller;
    std::vector<ConstraintMargin> margins;
    std::vector<BisectionStep> iterations;
    double worst_margin = 0.0;
};

// One 3-dim cone per (frequency, point, channel), cone heads shifted by a
// maximized slack variable; feasible at gamma iff the optimal slack is >= 0.
ConicProgram assemble(const SynthesisProblem& problem, double gamma);

// Bisection on gamma over [gamma_lo, gamma_hi], keeping the last feasible
// controller. Margins are re-evaluated directly from the data, not taken
// from the solver.
SynthesisResult bisect(const SynthesisProblem& problem);

// Margins of a fixed theta at a fixed gamma (direct evaluation).
std::vector<ConstraintMargin> evaluate_margins(const SynthesisProblem& problem, double gamma,
                                               const Eigen::VectorXd& theta);

void save_margins_csv(const std::vector<ConstraintMargin>& margins, const std::string& path);

}  // namespace lpvsyn
