#pragma once

#include <string>
#include <vector>

#include "lpvsyn/controller_param.hpp"
#include "lpvsyn/frf_data.hpp"
#include "lpvsyn/weights.hpp"

namespace lpvsyn {

enum class StabilityVerdict { Stable, Unstable, Marginal };

// Per-operating-point stability evidence: winding number of the sampled
// characteristic function around the origin plus a positivity witness.
struct StabilityCertificateEntry {
    double p = 0.0;
    int winding = 0;
    double min_abs_Dp = 0.0;
    std::vector<double> multiplier_phase;  // unwrapped -arg(Dp), present when stable
    StabilityVerdict verdict = StabilityVerdict::Marginal;
};

struct StabilityCertificate {
    std::vector<StabilityCertificateEntry> entries;
    bool all_stable() const;
};

struct PerformanceCellMargin {
    double omega;
    double p;
    Channel channel;
    double margin;  // |Dp| - gamma^{-1} |W Np|
};

struct PerformanceCertificate {
    double gamma = 0.0;
    StabilityCertificate stability;
    std::vector<PerformanceCellMargin> margins;
    double worst_margin = 0.0;
    bool pass = false;
};

// Net counterclockwise encirclements of the origin by a closed sampled curve.
// Throws NearOrigin if a sample is within tol of 0 and GridTooCoarse if any
// phase increment exceeds pi/2.
int winding_number(const std::vector<Complex>& curve, double origin_tol = 0.0);

// Characteristic samples Dp(w) = Dg Dk + Ng Nk on the dataset grid at point
// index `point_index`.
std::vector<Complex> characteristic_samples(const FrfDataset& data,
                                            const ControllerParameterization& controller,
                                            int point_index);

// Closes positive-frequency samples of a real-coefficient response by
// conjugate mirroring (unit circle traversed once).
std::vector<Complex> close_curve_conjugate(const std::vector<Complex>& samples);

StabilityCertificateEntry check_stability_at(const FrfDataset& data,
                                             const ControllerParameterization& controller,
                                             int point_index);

StabilityCertificate check_stability(const FrfDataset& data,
                                     const ControllerParameterization& controller);

PerformanceCertificate check_performance(const FrfDataset& data, const WeightSet& weights,
                                         const ControllerParameterization& controller,
                                         double gamma, double tol = 0.0);

const char* verdict_name(StabilityVerdict v);

void save_stability_json(const StabilityCertificate& cert, const std::string& path);
void save_performance_json(const PerformanceCertificate& cert, const std::string& path);

}  // namespace lpvsyn
