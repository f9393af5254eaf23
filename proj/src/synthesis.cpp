#include "lpvsyn/synthesis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace lpvsyn {

ChannelFactors channel_factors(Complex Ng, Complex Dg, const RegressorRow& rowN,
                               const RegressorRow& rowD, Channel channel) {
    ChannelFactors cf;
    cf.Dp.row = Dg * rowD.row + Ng * rowN.row;
    cf.Dp.offset = Dg * rowD.offset + Ng * rowN.offset;
    switch (channel) {
        case Channel::S:
            cf.Np.row = Dg * rowD.row;
            cf.Np.offset = Dg * rowD.offset;
            break;
        case Channel::SG:
            cf.Np.row = Ng * rowD.row;
            cf.Np.offset = Ng * rowD.offset;
            break;
        case Channel::KS:
            cf.Np.row = Dg * rowN.row;
            cf.Np.offset = Dg * rowN.offset;
            break;
        case Channel::T:
            cf.Np.row = Ng * rowN.row;
            cf.Np.offset = Ng * rowN.offset;
            break;
        default:
            throw UnknownChannel("channel_factors");
    }
    return cf;
}

void SynthesisProblem::validate() const {
    data.validate();
    weights.validate();
    param.validate();
    if (channels.empty()) throw InvalidArgument("no channels selected");
    if (!(margin_rel > 0)) throw InvalidArgument("margin must be positive");
    if (!(gamma_lo < gamma_hi) || !(gamma_lo > 0))
        throw InvalidArgument("need 0 < gamma_lo < gamma_hi");
    if (!(bisect_tol > 0)) throw InvalidArgument("bisect_tol must be positive");
    if (std::abs(param.numBasis.Ts - data.grid.Ts) > 1e-15)
        throw InvalidArgument("controller basis Ts does not match the data grid");
}

ConicProgram assemble(const SynthesisProblem& problem, double gamma) {
    problem.validate();
    if (!(gamma > 0)) throw InvalidArgument("gamma must be positive");
    const double margin = problem.margin_rel * gamma;

    const auto& data = problem.data;
    const int nw = static_cast<int>(data.grid.size());
    const int np = static_cast<int>(data.points.size());
    const int nch = static_cast<int>(problem.channels.size());
    const int ntheta = problem.param.theta_dim();
    const int ncones = nw * np * nch;

    // variable layout: theta | slack | (t,x,y) per cone | cap pair
    const int slack_idx = ntheta;
    const int cone_base = ntheta + 1;
    const int cap_t = cone_base + 3 * ncones;
    const int cap_z = cap_t + 1;
    const int nvars = cap_z + 1;

    std::vector<std::vector<Complex>> wfrf(nch);
    for (int c = 0; c < nch; ++c)
        wfrf[c] = weight_frf(problem.weights, problem.channels[c], data.grid);

    ConicProgram prog;
    prog.num_vars = nvars;
    prog.objective = Eigen::VectorXd::Zero(nvars);
    prog.objective[slack_idx] = -1.0;  // maximize the slack
    prog.cones.reserve(ncones + 1);

    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(static_cast<std::size_t>(ncones) * (3 * ntheta / 2 + 5) + 4);
    Eigen::VectorXd rhs(3 * ncones + 2);

    int row = 0, cone = 0;
    for (int t = 0; t < np; ++t) {
        const double p = data.points.points[t];
        for (int k = 0; k < nw; ++k) {
            const double omega = data.grid.omegas[k];
            const RegressorRow rowN = problem.param.regressor_row(Factor::N, omega, p);
            const RegressorRow rowD = problem.param.regressor_row(Factor::D, omega, p);
            const Complex Ng = data.samplesN(k, t), Dg = data.samplesD(k, t);
            for (int c = 0; c < nch; ++c) {
                const ChannelFactors cf =
                    channel_factors(Ng, Dg, rowN, rowD, problem.channels[c]);
                const Complex W = wfrf[c][k];
                const int vt = cone_base + 3 * cone;
                const Complex woff = W * cf.Np.offset;
                // per-cone normalization keeps the solver well-scaled; the
                // slack keeps coefficient 1, so its sign still decides
                // feasibility of the unscaled constraints
                double scale = std::abs(gamma * cf.Dp.offset.real() - margin);
                scale = std::max({scale, std::abs(woff.real()), std::abs(woff.imag())});
                for (int i = 0; i < ntheta; ++i) {
                    scale = std::max(scale, gamma * std::abs(cf.Dp.row[i].real()));
                    scale = std::max(scale, std::abs(W * cf.Np.row[i]));
                }
                const double inv = 1.0 / std::max(scale, 1e-10);
                // t = (gamma Re(Dp(theta)) - margin)/scale - slack
                for (int i = 0; i < ntheta; ++i) {
                    const double a = -gamma * cf.Dp.row[i].real() * inv;
                    if (a != 0.0) trip.emplace_back(row, i, a);
                }
                trip.emplace_back(row, slack_idx, 1.0);
                trip.emplace_back(row, vt, 1.0);
                rhs[row++] = (gamma * cf.Dp.offset.real() - margin) * inv;
                // x = Re(W Np(theta))/scale, y = Im(W Np(theta))/scale
                for (int i = 0; i < ntheta; ++i) {
                    const Complex wn = W * cf.Np.row[i] * inv;
                    if (wn.real() != 0.0) trip.emplace_back(row, i, -wn.real());
                    if (wn.imag() != 0.0) trip.emplace_back(row + 1, i, -wn.imag());
                }
                trip.emplace_back(row, vt + 1, 1.0);
                rhs[row++] = woff.real() * inv;
                trip.emplace_back(row, vt + 2, 1.0);
                rhs[row++] = woff.imag() * inv;
                prog.cones.push_back({{vt, vt + 1, vt + 2}});
                ++cone;
            }
        }
    }
    // slack cap: cap_t = slack_cap - slack, cap_z = 0, (cap_t, cap_z) in a cone
    trip.emplace_back(row, cap_t, 1.0);
    trip.emplace_back(row, slack_idx, 1.0);
    rhs[row++] = problem.slack_cap;
    trip.emplace_back(row, cap_z, 1.0);
    rhs[row++] = 0.0;
    prog.cones.push_back({{cap_t, cap_z}});

    prog.Aeq.resize(row, nvars);
    prog.Aeq.setFromTriplets(trip.begin(), trip.end());
    prog.beq = rhs.head(row);
    return prog;
}

std::vector<ConstraintMargin> evaluate_margins(const SynthesisProblem& problem, double gamma,
                                               const Eigen::VectorXd& theta) {
    const auto& data = problem.data;
    const int nw = static_cast<int>(data.grid.size());
    const int np = static_cast<int>(data.points.size());
    const int nch = static_cast<int>(problem.channels.size());

    std::vector<std::vector<Complex>> wfrf(nch);
    for (int c = 0; c < nch; ++c)
        wfrf[c] = weight_frf(problem.weights, problem.channels[c], data.grid);

    std::vector<ConstraintMargin> out;
    out.reserve(static_cast<std::size_t>(nw) * np * nch);
    for (int t = 0; t < np; ++t) {
        const double p = data.points.points[t];
        for (int k = 0; k < nw; ++k) {
            const double omega = data.grid.omegas[k];
            const RegressorRow rowN = problem.param.regressor_row(Factor::N, omega, p);
            const RegressorRow rowD = problem.param.regressor_row(Factor::D, omega, p);
            const Complex Ng = data.samplesN(k, t), Dg = data.samplesD(k, t);
            for (int c = 0; c < nch; ++c) {
                const ChannelFactors cf =
                    channel_factors(Ng, Dg, rowN, rowD, problem.channels[c]);
                const Complex Dp = (cf.Dp.row * theta)(0) + cf.Dp.offset;
                const Complex Np = (cf.Np.row * theta)(0) + cf.Np.offset;
                const double margin = gamma * Dp.real() - std::abs(wfrf[c][k] * Np);
                out.push_back({omega, p, problem.channels[c], margin});
            }
        }
    }
    return out;
}

namespace {

struct FeasibleProbe {
    bool feasible;
    double slack;
    Eigen::VectorXd theta;
};

FeasibleProbe probe_gamma(const SynthesisProblem& problem, double gamma) {
    const ConicProgram prog = assemble(problem, gamma);
    const ConicSolution sol = solve(prog, 1e-9, 100);
    // the slack formulation is always strictly feasible and bounded, so the
    // solve must come back optimal, or at worst a tight near-optimal iterate
    const bool usable = sol.status == SolveStatus::Optimal ||
                        (sol.status == SolveStatus::MaxIter &&
                         sol.primal_residual < 1e-6 && sol.dual_residual < 1e-6);
    if (!usable)
        throw NumericalBreakdown("synthesis subproblem returned " +
                                 std::string(status_name(sol.status)) + " at gamma " +
                                 std::to_string(gamma));
    FeasibleProbe fp;
    const int ntheta = problem.param.theta_dim();
    fp.slack = sol.primal[ntheta];
    fp.feasible = fp.slack >= 0.0;
    fp.theta = sol.primal.head(ntheta);
    return fp;
}

}  // namespace

SynthesisResult bisect(const SynthesisProblem& problem) {
    problem.validate();
    SynthesisResult res;

    FeasibleProbe hi_probe = probe_gamma(problem, problem.gamma_hi);
    res.iterations.push_back({problem.gamma_hi, hi_probe.feasible, hi_probe.slack});
    if (!hi_probe.feasible)
        throw InfeasibleAtUpperBound(
            "slack " + std::to_string(hi_probe.slack) + " at gamma " +
            std::to_string(problem.gamma_hi) +
            "; best certificate margins are reported in the exception context");

    double lo = problem.gamma_lo, hi = problem.gamma_hi;
    Eigen::VectorXd theta = hi_probe.theta;
    while (hi - lo > problem.bisect_tol * lo) {
        const double mid = 0.5 * (lo + hi);
        const FeasibleProbe fp = probe_gamma(problem, mid);
        res.iterations.push_back({mid, fp.feasible, fp.slack});
        if (fp.feasible) {
            hi = mid;
            theta = fp.theta;
        } else {
            lo = mid;
        }
    }

    res.gamma = hi;
    res.theta = theta;
    res.controller = problem.param;
    res.controller.from_theta(theta);
    res.margins = evaluate_margins(problem, hi, theta);
    res.worst_margin = std::numeric_limits<double>::infinity();
    for (const auto& m : res.margins) res.worst_margin = std::min(res.worst_margin, m.margin);
    return res;
}

void save_margins_csv(const std::vector<ConstraintMargin>& margins, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "omega_rad_s,p,channel,margin\n";
    char buf[128];
    for (const auto& m : margins) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%s,%.17g\n", m.omega, m.p,
                      channel_name(m.channel), m.margin);
        out << buf;
    }
}

}  // namespace lpvsyn
