#pragma once

#include <functional>
#include <string>
#include <vector>

#include "lpvsyn/disk_benchmark.hpp"
#include "lpvsyn/lti.hpp"
#include "lpvsyn/realization.hpp"

namespace lpvsyn {

// Piecewise-constant signal: value of the last breakpoint at or before t.
struct PiecewiseConstant {
    std::vector<double> times;
    std::vector<double> values;

    double eval(double t) const;
    static PiecewiseConstant constant(double v);
    static PiecewiseConstant steps(const std::vector<double>& values, double segment_duration);
};

struct SimScenario {
    PiecewiseConstant reference = PiecewiseConstant::constant(0.0);
    PiecewiseConstant disturbance = PiecewiseConstant::constant(0.0);
    double duration = 20.0;
    double Ts = 0.005;
    int substeps = 25;
    Eigen::Vector3d initial_state = Eigen::Vector3d::Zero();

    void validate() const;

    // Staircase through {0, pi/4, pi/2, pi/4, 0} rad, 4 s per segment.
    static SimScenario staircase_default();

    void save_json(const std::string& path) const;
    static SimScenario load_json(const std::string& path);
};

struct SimResult {
    std::vector<double> time;
    std::vector<double> y;      // angle for the disk
    std::vector<double> u;
    std::vector<double> e;
    std::vector<double> p;
    std::vector<double> r;
    Eigen::MatrixXd states;     // n x T, full state trajectory

    void save_csv(const std::string& path) const;
};

// Discrete LTI loop e = r - y, u = K(e) at constant scheduling p.
SimResult simulate_frozen_step(const StateSpaceModel& plant, ScheduledFilter filter, double p,
                               double duration, double step_amplitude = 1.0);

// Nonlinear disk dynamics integrated with classical RK4 at Ts/substeps,
// controller updated every Ts with zero-order hold; p_k = sinc(angle_k).
// When scheduling_override is set, the controller sees that constant p.
SimResult simulate_nonlinear(const DiskParameters& params, ScheduledFilter filter,
                             const SimScenario& scenario,
                             std::optional<double> scheduling_override = std::nullopt);

// Open-loop nonlinear integration (u from the scenario disturbance only);
// used for physics checks.
SimResult simulate_open_loop(const DiskParameters& params, const SimScenario& scenario);

// Mechanical energy relative to the hanging equilibrium.
double disk_mechanical_energy(const DiskParameters& params, double angle, double rate);

}  // namespace lpvsyn
