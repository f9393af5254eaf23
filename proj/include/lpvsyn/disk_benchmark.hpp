#pragma once

#include "lpvsyn/frf_data.hpp"
#include "lpvsyn/lti.hpp"

namespace lpvsyn {

// Scheduling-dependent state-space with affine dependence M(p) = M0 + p*M1.
struct LpvStateSpace {
    Eigen::MatrixXd A0, A1;
    Eigen::VectorXd B0, B1;
    Eigen::RowVectorXd C0, C1;
    double D0 = 0.0, D1 = 0.0;
    double pmin = 0.0, pmax = 1.0;

    int order() const { return static_cast<int>(A0.rows()); }
    void validate() const;
};

// Physical constants of the unbalanced-disk rig (DC motor with mass imbalance).
struct DiskParameters {
    double K = 0.0536;     // motor torque constant, Nm/A
    double R = 9.50;       // motor resistance, Ohm
    double L = 0.84e-3;    // motor impedance, H
    double J = 2.2e-4;     // disk inertia, Nm^2
    double b = 6.6e-5;     // viscous friction, Nms/rad
    double M = 0.07;       // additional mass, kg
    double l = 0.042;      // mass - center distance, m
    double g = 9.81;       // gravity, m/s^2

    void validate() const;
};

// 3-state model: x = (angle, angular rate, current), y = angle, u = voltage.
// The gravity-induced stiffness enters A(p) as (Mgl/J) p.
LpvStateSpace build_unbalanced_disk(const DiskParameters& params);

// LTI model at constant scheduling p.
StateSpaceModel freeze(const LpvStateSpace& lpv, double p);

// Full local dataset: freeze -> ZOH discretize -> coprime factorize -> FRF
// of both factors, per operating point.
FrfDataset generate_dataset(const LpvStateSpace& lpv, double Ts, const FrequencyGrid& grid,
                            const OperatingPointSet& points);

// sin(x)/x with the removable singularity filled in.
double sinc(double x);

}  // namespace lpvsyn
