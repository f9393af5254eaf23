#pragma once

#include <complex>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lpvsyn/errors.hpp"

namespace lpvsyn {

using Complex = std::complex<double>;

enum class Domain { Continuous, Discrete };

// Four-block shaping channels of the (r, -d) -> (e, u) closed-loop map.
enum class Channel { S, SG, KS, T };

const char* channel_name(Channel c);
Channel channel_from_name(const std::string& name);

// Ordered grid of angular frequencies (rad/s). Discrete grids carry the
// sampling time and must stay at or below the Nyquist frequency pi/Ts.
struct FrequencyGrid {
    std::vector<double> omegas;
    Domain domain = Domain::Discrete;
    double Ts = 0.0;  // valid when discrete

    static FrequencyGrid continuous(std::vector<double> omegas);
    static FrequencyGrid discrete(std::vector<double> omegas, double Ts);
    // n logarithmically spaced points on [wmin, wmax], endpoints included.
    static FrequencyGrid log_spaced(double wmin, double wmax, int n, Domain domain, double Ts = 0.0);

    std::size_t size() const { return omegas.size(); }
    // e^{i w Ts} (discrete) or i w (continuous)
    Complex lambda(std::size_t k) const;
    void validate() const;
};

// Scheduling values p_tau with their admissible interval.
struct OperatingPointSet {
    std::vector<double> points;
    double pmin = 0.0;
    double pmax = 1.0;

    static OperatingPointSet equidistant(double pmin, double pmax, int n);
    std::size_t size() const { return points.size(); }
    void validate() const;
};

// Complex samples of the stable plant factors G = N * D^{-1} over
// grid x operating points. Rows index frequency, columns index p.
struct FrfDataset {
    FrequencyGrid grid;
    OperatingPointSet points;
    Eigen::MatrixXcd samplesN;
    Eigen::MatrixXcd samplesD;

    void validate() const;

    void save_csv(const std::string& path) const;
    void save_json(const std::string& path) const;
    static FrfDataset load_csv(const std::string& path);
    static FrfDataset load_json(const std::string& path);
};

enum class FileFormat { Csv, Json };

FrfDataset load_frf_dataset(const std::string& path, FileFormat format);
void save_frf_dataset(const FrfDataset& data, const std::string& path, FileFormat format);

}  // namespace lpvsyn
